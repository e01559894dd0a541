//! `check`: verification batteries with a residual table.

use std::sync::Arc;

use anyhow::{anyhow, Result};
use lieham_core::algebra;
use lieham_core::catalog::curvature::{darboux3_curvature, taubnut_curvature};
use lieham_core::catalog::{self, realizations, scalar_curvature, ConformalFactor, CurvedSpaceSpec, SYSTEMS};
use lieham_core::coalgebra::{involution_report, jacobian_rank};
use lieham_core::momentum::decomposition_residual;
use lieham_core::phase::grad_check;
use lieham_core::{ReplicatedSpace, ScalarField, Status, SystemSpec};
use num_traits::{Signed, ToPrimitive};

use crate::config::LoadedConfig;
use crate::run::run_config;

pub const REALIZATION_TOL: f64 = 1e-9;
pub const CASIMIR_TOL: f64 = 1e-10;
pub const FIELD_TOL: f64 = 1e-10;
pub const GRAD_TOL: f64 = 1e-5;
pub const INVOLUTION_TOL: f64 = 1e-9;
pub const CURVATURE_TOL: f64 = 1e-9;
pub const DRIFT_TOL: f64 = 1e-6;

pub struct Options {
    pub samples: usize,
    pub seed: u64,
}

struct Line {
    name: String,
    residual: f64,
    tolerance: f64,
}

impl Line {
    /// NaN residuals fail.
    fn ok(&self) -> bool {
        self.residual <= self.tolerance
    }
}

#[derive(Default)]
pub struct Report {
    lines: Vec<Line>,
}

impl Report {
    fn push(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) {
        self.lines.push(Line {
            name: name.into(),
            residual,
            tolerance,
        });
    }

    pub fn passed(&self) -> bool {
        self.lines.iter().all(Line::ok)
    }

    pub fn print(&self) {
        let width = self.lines.iter().map(|l| l.name.len()).max().unwrap_or(0);
        println!("{:width$}  {:>12}  {:>9}  result", "check", "residual", "tolerance");
        for l in &self.lines {
            let ok = if l.ok() { "ok" } else { "FAIL" };
            let tol = if l.tolerance == 0.0 {
                "exact".to_string()
            } else {
                format!("{:.0e}", l.tolerance)
            };
            println!("{:width$}  {:>12.3e}  {tol:>9}  {ok}", l.name, l.residual);
        }
        let failed = self.lines.iter().filter(|l| !l.ok()).count();
        println!("{} checks, {failed} failed", self.lines.len());
    }
}

fn exact(v: &num_rational::BigRational) -> f64 {
    v.abs().to_f64().unwrap_or(f64::INFINITY)
}

pub fn algebra(report: &mut Report, name: &str) -> Result<()> {
    let a = algebra::by_name(name)?;
    let rep = a.validate();
    report.push(format!("algebra {name}: Jacobi"), exact(&rep.residual), 0.0);
    for (cname, c) in a.casimirs() {
        let r = a.casimir_check(c)?;
        report.push(format!("algebra {name}: Casimir {cname}"), exact(&r), 0.0);
    }
    if a.casimirs().is_empty() {
        report.push(format!("algebra {name}: ships a Casimir"), 1.0, 0.0);
    }
    Ok(())
}

fn default_system(name: &str) -> Result<SystemSpec> {
    let p = catalog::default_params(name)?;
    catalog::build_system(name, &p, &Default::default()).map_err(|e| anyhow!("system `{name}`: {e}"))
}

fn families(space: &Arc<ReplicatedSpace>) -> Result<Vec<Vec<Arc<dyn ScalarField>>>> {
    space
        .sided_families()
        .iter()
        .map(|names| {
            names
                .iter()
                .map(|n| Ok(Arc::new(space.invariant_named(n)?) as Arc<dyn ScalarField>))
                .collect()
        })
        .collect()
}

pub fn system(report: &mut Report, sys: &SystemSpec, label: &str, o: &Options) -> Result<()> {
    let r = sys.realization().clone();
    report.push(
        format!("{label}: realization brackets"),
        r.verify(o.samples, o.seed)?,
        REALIZATION_TOL,
    );
    report.push(
        format!("{label}: Casimir commutation"),
        r.casimir_commutation(o.samples, o.seed)?,
        CASIMIR_TOL,
    );
    let pts = sys.samples(o.samples, o.seed)?;
    report.push(
        format!("{label}: field decomposition"),
        decomposition_residual(sys.hamiltonian(), &pts)?,
        FIELD_TOL,
    );
    if sys.has_closed_form() {
        report.push(
            format!("{label}: printed equations"),
            catalog::closed_form_residual(sys, o.samples, o.seed)?,
            FIELD_TOL,
        );
    }
    let mut g: f64 = 0.0;
    for (t, x) in pts.iter().take(20) {
        g = g.max(grad_check(sys.hamiltonian(), *t, x)?);
    }
    report.push(format!("{label}: gradient vs differences"), g, GRAD_TOL);
    if let Some(space) = sys.replicated() {
        let mut worst: f64 = 0.0;
        for fam in families(space)? {
            worst = worst.max(involution_report(&fam, space, o.samples, o.seed)?);
        }
        report.push(format!("{label}: invariant involution"), worst, INVOLUTION_TOL);
    }
    Ok(())
}

pub fn realization(report: &mut Report, name: &str, o: &Options) -> Result<()> {
    system(report, &default_system(name)?, name, o)
}

pub fn tables(report: &mut Report, o: &Options) -> Result<()> {
    for row in catalog::table_rows()? {
        report.push(
            format!("table {}", row.label),
            catalog::closed_form_residual(&row.system, o.samples, o.seed)?,
            FIELD_TOL,
        );
    }
    Ok(())
}

pub fn curvature(report: &mut Report) -> Result<()> {
    let mut worst: f64 = 0.0;
    for n in 2..=4 {
        for kappa in [-1.0f64, -0.5, 0.5, 1.0] {
            let s = CurvedSpaceSpec::conformal(n, ConformalFactor::poincare(kappa));
            let rmax = if kappa < 0.0 { 0.95 / kappa.abs().sqrt() } else { 3.0 };
            for i in 1..=10 {
                let r = rmax * i as f64 / 10.0;
                let want = (n * (n - 1)) as f64 * kappa;
                worst = worst.max((scalar_curvature(&s, r)? - want).abs());
            }
        }
    }
    report.push("curvature: Poincare constancy", worst, CURVATURE_TOL);
    let (mut d3, mut tn): (f64, f64) = (0.0, 0.0);
    for n in 2..=4 {
        for i in 1..=10 {
            let r = 0.15 * i as f64;
            let s = CurvedSpaceSpec::conformal(n, ConformalFactor::darboux3(1.0));
            d3 = d3.max((scalar_curvature(&s, r)? - darboux3_curvature(n, 1.0, r)).abs());
            let s = CurvedSpaceSpec::conformal(n, ConformalFactor::taubnut(1.0));
            tn = tn.max((scalar_curvature(&s, r)? - taubnut_curvature(n, 1.0, r)).abs());
        }
    }
    report.push("curvature: Darboux III closed form", d3, CURVATURE_TOL);
    report.push("curvature: Taub-NUT closed form", tn, CURVATURE_TOL);
    Ok(())
}

/// Four-copy coalgebra: involution, rank of the five invariants, and the
/// single-copy representation label.
pub fn coalgebra(report: &mut Report, o: &Options) -> Result<()> {
    let s = Arc::new(realizations::sl2_coalg_replicated(&[1.0, 2.0, 3.0, 4.0])?);
    let mut worst: f64 = 0.0;
    for fam in families(&s)? {
        worst = worst.max(involution_report(&fam, &s, o.samples, o.seed)?);
    }
    report.push("coalgebra n=4: involution", worst, INVOLUTION_TOL);
    let five: Vec<Arc<dyn ScalarField>> = ["I_L_2", "I_L_3", "I_4", "I_R_2", "I_R_3"]
        .iter()
        .map(|n| Ok(Arc::new(s.invariant_named(n)?) as Arc<dyn ScalarField>))
        .collect::<Result<_>>()?;
    let mut deficit = 0usize;
    for (t, x) in s.sample_box().sample(o.seed, 20, |_, x| s.space().contains(x))? {
        deficit = deficit.max(5 - jacobian_rank(&five, t, &x, 1e-10)?);
    }
    report.push("coalgebra n=4: rank deficit of 5 invariants", deficit as f64, 0.0);
    let mut label: f64 = 0.0;
    for c1 in [-1.0, 0.0, 2.0] {
        let r = Arc::new(realizations::sl2_coalg_copy(c1)?);
        let casimir = r.casimir_pullback("C")?;
        for (t, x) in r.samples(o.samples, o.seed)? {
            label = label.max((casimir.value(t, &x)? - c1).abs());
        }
    }
    report.push("coalgebra: representation label", label, 1e-12);
    Ok(())
}

/// Drift of every monitored quantity except `H`. Returns the stop status
/// when the integration did not reach the end of its span.
pub fn invariants(report: &mut Report, loaded: &LoadedConfig) -> Result<Option<Status>> {
    let r = run_config(&loaded.config)?;
    for (name, d) in r.drifts().filter(|(n, _)| *n != "H") {
        report.push(format!("{}: drift {name}", r.system.name()), d, DRIFT_TOL);
    }
    let status = r.trajectory.status;
    Ok((!status.is_completed()).then_some(status))
}

pub fn all(report: &mut Report, o: &Options) -> Result<()> {
    for name in algebra::CATALOG {
        algebra(report, name)?;
    }
    for info in SYSTEMS {
        realization(report, info.name, o)?;
    }
    tables(report, o)?;
    curvature(report)?;
    coalgebra(report, o)?;
    Ok(())
}
