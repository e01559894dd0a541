//! Acceptance suite: every criterion at its stated tolerance, one line each.
//! Runs as a plain binary (`harness = false`) and exits nonzero on failure.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::Arc;

use anyhow::{ensure, Context, Result};
use lieham_core::algebra::{self, CATALOG};
use lieham_core::catalog::benchmarks::{self, Benchmark};
use lieham_core::catalog::curvature::{darboux3_curvature, taubnut_curvature};
use lieham_core::catalog::{
    self, closed_form_residual, make_ho_h4, make_ho_sl2, make_painleve2, realizations, scalar_curvature,
    ConformalFactor, CurvedSpaceSpec, SYSTEMS,
};
use lieham_core::coalgebra::{involution_report, jacobian_rank};
use lieham_core::integrate::{first_derivative, monitor_invariants, residual_ode_check};
use lieham_core::momentum::{decomposition_residual, pushforward_residual, DualFlow};
use lieham_core::{integrate, IntegratorConfig, Realization, ScalarField, SystemSpec, TimeCoefficient, Trajectory};
use num_traits::Zero;

fn tc(s: &str) -> TimeCoefficient {
    TimeCoefficient::parse(s).expect("coefficient literal")
}

fn default_system(name: &str) -> Result<SystemSpec> {
    Ok(catalog::build_system(
        name,
        &catalog::default_params(name)?,
        &Default::default(),
    )?)
}

/// Largest relative drift among `names` along `traj`.
fn worst_drift(sys: &SystemSpec, traj: &Trajectory, names: &[String]) -> Result<f64> {
    let fields = names
        .iter()
        .map(|n| Ok((n.clone(), sys.invariant(n)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(monitor_invariants(traj, &fields)?
        .into_iter()
        .map(|s| s.drift)
        .fold(0.0, f64::max))
}

fn check_max(what: &str, value: f64, tol: f64) -> Result<String> {
    ensure!(value <= tol, "{what} = {value:.3e} exceeds {tol:.0e}");
    Ok(format!("{what} = {value:.3e} <= {tol:.0e}"))
}

fn algebra_exactness() -> Result<String> {
    for name in CATALOG {
        let a = algebra::by_name(name)?;
        let rep = a.validate();
        ensure!(
            rep.passed && rep.residual.is_zero(),
            "{name}: Jacobi residual {}",
            rep.residual
        );
        ensure!(!a.casimirs().is_empty(), "{name}: no Casimir shipped");
        for (c, poly) in a.casimirs() {
            let r = a.casimir_check(poly)?;
            ensure!(r.is_zero(), "{name}: Casimir {c} residual {r}");
        }
    }
    Ok(format!("{} algebras, Jacobi and Casimirs exactly zero", CATALOG.len()))
}

fn realization_fidelity() -> Result<String> {
    let mut rs: Vec<Arc<Realization>> = vec![
        Arc::new(realizations::sl2_sw_copy(0.7)?),
        realizations::sl2_sw(&[1.0, 2.0, 3.0])?,
        Arc::new(realizations::heisenberg()?),
        Arc::new(realizations::h4_oscillator()?),
        Arc::new(realizations::henon_heiles()?),
    ];
    for c in [&[1.5][..], &[1.0, 2.0], &[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]] {
        rs.push(realizations::sl2_coalg(c)?);
    }
    let mut worst: f64 = 0.0;
    for r in &rs {
        worst = worst.max(r.verify(100, 2).with_context(|| r.name().to_string())?);
    }
    check_max(
        &format!("max bracket residual over {} realizations", rs.len()),
        worst,
        1e-9,
    )
}

fn vector_field_decomposition() -> Result<String> {
    let mut worst: f64 = 0.0;
    for info in SYSTEMS {
        let sys = default_system(info.name)?;
        let pts = sys.samples(50, 3)?;
        worst = worst.max(decomposition_residual(sys.hamiltonian(), &pts)?);
    }
    check_max(&format!("max over {} systems", SYSTEMS.len()), worst, 1e-10)
}

fn table_fidelity() -> Result<String> {
    let rows = catalog::table_rows()?;
    let mut worst: f64 = 0.0;
    for row in &rows {
        worst = worst.max(closed_form_residual(&row.system, 50, 4).with_context(|| row.label.clone())?);
    }
    check_max(&format!("max over {} rows", rows.len()), worst, 1e-10)
}

fn coalgebra_involution() -> Result<String> {
    let s = Arc::new(realizations::sl2_coalg_replicated(&[1.0, 2.0, 3.0, 4.0])?);
    let field = |n: &str| -> Result<Arc<dyn ScalarField>> { Ok(Arc::new(s.invariant_named(n)?)) };
    let mut worst: f64 = 0.0;
    for family in s.sided_families() {
        let fs = family.iter().map(|n| field(n)).collect::<Result<Vec<_>>>()?;
        worst = worst.max(involution_report(&fs, &s, 100, 5)?);
    }
    ensure!(worst <= 1e-9, "bracket {worst:.3e} exceeds 1e-9");
    let five = ["I_L_2", "I_L_3", "I_4", "I_R_2", "I_R_3"]
        .iter()
        .map(|n| field(n))
        .collect::<Result<Vec<_>>>()?;
    for (t, x) in s.sample_box().sample(6, 20, |_, x| s.space().contains(x))? {
        let rank = jacobian_rank(&five, t, &x, 1e-10)?;
        ensure!(rank == 5, "Jacobian rank {rank} at t = {t}");
    }
    Ok(format!("max bracket {worst:.3e} <= 1e-9, rank 5 at 20 points"))
}

fn representation_label() -> Result<String> {
    let mut worst: f64 = 0.0;
    for c1 in [-1.0, 0.0, 2.0] {
        let r = realizations::sl2_coalg_copy(c1)?;
        for (t, x) in r.samples(100, 7)? {
            let h: Vec<f64> = r.fields().iter().map(|f| f.value(t, &x)).collect::<Result<_, _>>()?;
            // basis order (h-, h+, h3)
            worst = worst.max((h[0] * h[1] - h[2] * h[2] - c1).abs());
        }
    }
    check_max("max |h- h+ - h3^2 - c1|", worst, 1e-12)
}

fn conservation() -> Result<String> {
    let mut worst: f64 = 0.0;
    let suite = benchmarks::conservation_suite()?;
    for b in &suite {
        let traj = integrate(&b.system, &b.x0, b.t0, b.t1, &IntegratorConfig::dp54(1e-10, 1e-10))?;
        ensure!(traj.status.is_completed(), "{}: {}", b.label, traj.status);
        worst = worst.max(worst_drift(&b.system, &traj, &b.system.default_invariants())?);
    }
    check_max(
        &format!("max relative drift over {} benchmarks", suite.len()),
        worst,
        1e-6,
    )
}

fn projection() -> Result<String> {
    let sys = make_ho_sl2(2, tc("1+0.2*cos(t)"))?;
    let cfg = IntegratorConfig::rk4(1e-3);
    let traj = integrate(&sys, &[1.0, 0.5, 0.2, -0.3], 0.0, 10.0, &cfg)?;
    let r = sys.realization().clone();
    let outer = sys.hamiltonian().outer().clone();
    let flow = DualFlow::new(r.algebra().clone(), outer.clone())?;
    let dual = integrate(&flow, &r.evaluate_j(&traj.states[0])?.0, 0.0, 10.0, &cfg)?;
    ensure!(dual.len() == traj.len(), "sample grids differ");
    let mut gap: f64 = 0.0;
    for (x, l) in traj.states.iter().zip(&dual.states) {
        for (a, b) in r.evaluate_j(x)?.0.iter().zip(l) {
            gap = gap.max((a - b).abs());
        }
    }
    ensure!(gap <= 1e-6, "J(x(t)) vs dual flow {gap:.3e} exceeds 1e-6");
    let push = pushforward_residual(&r, outer.as_ref(), &traj)?;
    ensure!(push <= 1e-5, "pushforward residual {push:.3e} exceeds 1e-5");
    Ok(format!("J gap {gap:.3e} <= 1e-6, pushforward {push:.3e} <= 1e-5"))
}

fn painleve_defect() -> Result<String> {
    let b = 0.5;
    let sys = make_painleve2(b)?;
    let traj = integrate(&sys, &[0.1, 0.2], 0.0, 1.0, &IntegratorConfig::rk4(1e-3))?;
    let defect = residual_ode_check(&traj, 0, |t, y| 2.0 * y.powi(3) + t * y + b - 0.5)?;
    ensure!(defect <= 1e-4, "ODE defect {defect:.3e} exceeds 1e-4");
    let p = traj.component(1);
    let mut rel: f64 = 0.0;
    for (i, (t, y, dy)) in first_derivative(&traj, 0)?.into_iter().enumerate() {
        rel = rel.max((p[i + 2] - (dy + y * y + 0.5 * t)).abs());
    }
    ensure!(rel <= 1e-6, "momentum relation {rel:.3e} exceeds 1e-6");
    Ok(format!(
        "defect {defect:.3e} <= 1e-4, momentum relation {rel:.3e} <= 1e-6"
    ))
}

fn curvature_identities() -> Result<String> {
    let mut worst: f64 = 0.0;
    for n in 2..=4usize {
        for kappa in [1.0f64, -1.0, 0.5, -0.5] {
            let s = CurvedSpaceSpec::conformal(n, ConformalFactor::poincare(kappa));
            let rmax = if kappa < 0.0 { 0.95 / (-kappa).sqrt() } else { 3.0 };
            for i in 1..=10 {
                let r = rmax * i as f64 / 10.0;
                worst = worst.max((scalar_curvature(&s, r)? - (n * (n - 1)) as f64 * kappa).abs());
            }
        }
        for i in 1..=10 {
            let r = 0.25 + 0.125 * i as f64;
            for (lambda, eta) in [(1.0, 1.0), (0.5, -0.2)] {
                let d = CurvedSpaceSpec::conformal(n, ConformalFactor::darboux3(lambda));
                worst = worst.max((scalar_curvature(&d, r)? - darboux3_curvature(n, lambda, r)).abs());
                let tn = CurvedSpaceSpec::conformal(n, ConformalFactor::taubnut(eta));
                worst = worst.max((scalar_curvature(&tn, r)? - taubnut_curvature(n, eta, r)).abs());
            }
        }
    }
    check_max("max curvature error", worst, 1e-9)
}

fn dual_oscillators() -> Result<String> {
    let w = tc("1+0.2*cos(t)");
    let a = make_ho_sl2(1, w.clone())?;
    let b = make_ho_h4(w)?;
    let mut gap: f64 = 0.0;
    for (t, x) in a.samples(100, 8)? {
        for (u, v) in a.vector_field(t, &x)?.iter().zip(b.vector_field(t, &x)?) {
            gap = gap.max((u - v).abs());
        }
    }
    ensure!(gap <= 1e-12, "vector fields differ by {gap:.3e}");
    let mut drift: f64 = 0.0;
    for sys in [&a, &b] {
        let traj = integrate(sys, &[0.8, 0.3], 0.0, 10.0, &IntegratorConfig::default())?;
        ensure!(traj.status.is_completed(), "{}: {}", sys.name(), traj.status);
        let names = sys.default_invariants();
        ensure!(!names.is_empty(), "{}: no Casimir to monitor", sys.name());
        drift = drift.max(worst_drift(sys, &traj, &names)?);
    }
    ensure!(drift <= 1e-6, "Casimir drift {drift:.3e} exceeds 1e-6");
    Ok(format!(
        "field gap {gap:.3e} <= 1e-12, Casimir drift {drift:.3e} <= 1e-6"
    ))
}

fn integrator_order() -> Result<String> {
    let ho = make_ho_sl2(1, tc("1"))?;
    let err = |h: f64| -> Result<f64> {
        let traj = integrate(&ho, &[1.0, 0.0], 0.0, 1.0, &IntegratorConfig::rk4(h))?;
        let (_, x) = traj.last().context("empty trajectory")?;
        Ok((x[0] - 1f64.cos()).hypot(x[1] + 1f64.sin()))
    };
    let ratio = err(0.1)? / err(0.05)?;
    ensure!((12.0..=20.0).contains(&ratio), "rk4 halving ratio {ratio:.2}");
    let b: Benchmark = benchmarks::sw()?;
    let names = b.system.default_invariants();
    let drift = |rtol: f64| -> Result<f64> {
        let traj = integrate(&b.system, &b.x0, b.t0, b.t1, &IntegratorConfig::dp54(rtol, rtol))?;
        worst_drift(&b.system, &traj, &names)
    };
    let gain = drift(1e-8)? / drift(1e-12)?;
    ensure!(gain >= 100.0, "dp54 tightening gains only {gain:.1}x");
    Ok(format!(
        "rk4 ratio {ratio:.2} in [12, 20], dp54 gain {gain:.0}x >= 100x"
    ))
}

fn cli_determinism() -> Result<String> {
    let exe = env!("CARGO_BIN_EXE_lieham");
    let out = Command::new(exe).arg("check").output()?;
    ensure!(out.status.code() == Some(0), "check exited {:?}", out.status.code());
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/sw.json");
    let dirs = [tempfile::tempdir()?, tempfile::tempdir()?];
    let mut files = Vec::new();
    for d in &dirs {
        let csv = d.path().join("run.csv");
        let out = Command::new(exe)
            .arg("simulate")
            .arg(&config)
            .arg("-o")
            .arg(&csv)
            .output()?;
        ensure!(out.status.code() == Some(0), "simulate exited {:?}", out.status.code());
        files.push((std::fs::read(&csv)?, std::fs::read(d.path().join("run.manifest.json"))?));
    }
    ensure!(files[0].0 == files[1].0, "trajectory CSVs differ");
    ensure!(files[0].1 == files[1].1, "manifests differ");
    Ok(format!(
        "check exits 0, two simulate runs byte-identical ({} bytes)",
        files[0].0.len()
    ))
}

type Criterion = fn() -> Result<String>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 13] = [
        ("algebra exactness", algebra_exactness),
        ("realization fidelity", realization_fidelity),
        ("vector-field decomposition", vector_field_decomposition),
        ("table fidelity", table_fidelity),
        ("coalgebra involution", coalgebra_involution),
        ("representation label", representation_label),
        ("conservation under dynamics", conservation),
        ("projection property", projection),
        ("Painleve II defect", painleve_defect),
        ("curvature identities", curvature_identities),
        ("dual oscillator presentations", dual_oscillators),
        ("integrator order", integrator_order),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {e:#}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
