//! Named t-dependent Hamiltonian systems: a realization, a composing
//! function with analytic partials, a domain predicate and, for every system
//! with printed equations of motion, an independent closed-form field.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::coalgebra::ReplicatedSpace;
use crate::error::{Error, Result};
use crate::integrate::OdeSystem;
use crate::momentum::{compose, ComposedHamiltonian, FnDual, Realization};
use crate::phase::{
    hamiltonian_vector_field, Guard, PhaseSpace, SampleBox, ScalarField, TimeCoefficient, DOMAIN_MARGIN,
};

use super::curvature::{ConformalFactor, CurvedSpaceSpec, KineticPair, Metric};
use super::realizations;

pub type Coefficients = BTreeMap<String, TimeCoefficient>;

type FieldFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) -> Result<()> + Send + Sync>;

/// Time span used when sampling `(t, x)` for verification.
pub const SAMPLE_TIMES: (f64, f64) = (0.0, 10.0);

/// Numeric parameters of a catalog system. Fields that a system does not
/// use are ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemParams {
    pub n: usize,
    pub c: Vec<f64>,
    pub kappa: f64,
    pub lambda: f64,
    pub eta: f64,
    pub b: f64,
    /// Metric for `central`: flat, poincare, beltrami, darboux3, taubnut.
    pub space: String,
    /// Potential for `central`: oscillator or kepler.
    pub potential: String,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            n: 1,
            c: vec![0.0],
            kappa: 0.0,
            lambda: 0.0,
            eta: 0.0,
            b: 0.0,
            space: "flat".into(),
            potential: "oscillator".into(),
        }
    }
}

impl SystemParams {
    pub fn with_c(c: &[f64]) -> Self {
        SystemParams {
            n: c.len(),
            c: c.to_vec(),
            ..Default::default()
        }
    }
}

/// A catalog Hamiltonian system.
#[derive(Clone)]
pub struct SystemSpec {
    name: String,
    params: SystemParams,
    coefficients: Coefficients,
    hamiltonian: ComposedHamiltonian,
    space: PhaseSpace,
    replicated: Option<Arc<ReplicatedSpace>>,
    closed_form: Option<FieldFn>,
    curved: Option<CurvedSpaceSpec>,
    sample_box: SampleBox,
}

impl fmt::Debug for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemSpec")
            .field("name", &self.name)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl SystemSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    pub fn hamiltonian(&self) -> &ComposedHamiltonian {
        &self.hamiltonian
    }

    pub fn realization(&self) -> &Arc<Realization> {
        self.hamiltonian.realization()
    }

    pub fn space(&self) -> &PhaseSpace {
        &self.space
    }

    pub fn replicated(&self) -> Option<&Arc<ReplicatedSpace>> {
        self.replicated.as_ref()
    }

    pub fn curved_space(&self) -> Option<&CurvedSpaceSpec> {
        self.curved.as_ref()
    }

    pub fn sample_box(&self) -> &SampleBox {
        &self.sample_box
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_form.is_some()
    }

    /// Position-dependent mass `m(r) = f(r)²` for conformal metrics.
    pub fn mass(&self, r: f64) -> Option<f64> {
        match &self.curved.as_ref()?.metric {
            Metric::Conformal(f) => Some(f.value(r).powi(2)),
            Metric::Kinetic(_) => None,
        }
    }

    /// `h(t, x)`.
    pub fn energy(&self, t: f64, x: &[f64]) -> Result<f64> {
        self.space.check(x)?;
        self.hamiltonian.value(t, x)
    }

    /// The Hamiltonian vector field of the composed Hamiltonian.
    pub fn vector_field(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.space.check(x)?;
        hamiltonian_vector_field(&self.hamiltonian, t, x)
    }

    /// The hand-written equations of motion, if the system has them.
    pub fn closed_form_field(&self, t: f64, x: &[f64]) -> Result<Option<Vec<f64>>> {
        let Some(cf) = &self.closed_form else {
            return Ok(None);
        };
        self.space.check(x)?;
        let mut out = vec![0.0; x.len()];
        cf(t, x, &mut out)?;
        Ok(Some(out))
    }

    /// Seeded in-domain `(t, x)` samples.
    pub fn samples(&self, count: usize, seed: u64) -> Result<Vec<(f64, Vec<f64>)>> {
        self.sample_box.sample(seed, count, |_, x| self.space.contains(x))
    }

    /// Looks up a monitored quantity: `H`, a coalgebra invariant name
    /// (`I_L_k`, `I_R_k`, `I_N`, `S_i_j.…`) or a Casimir name of the algebra.
    pub fn invariant(&self, name: &str) -> Result<Arc<dyn ScalarField>> {
        if name == "H" {
            return Ok(Arc::new(self.hamiltonian.clone()));
        }
        if let Some(rep) = &self.replicated {
            if name.starts_with("I_") || name.starts_with("S_") {
                return Ok(Arc::new(rep.invariant_named(name)?));
            }
        }
        let r = self.realization().clone();
        if r.algebra().casimirs().iter().any(|(n, _)| n == name) {
            return Ok(Arc::new(r.casimir_pullback(name)?));
        }
        Err(Error::unknown("invariant", name))
    }

    /// Invariants monitored when a run names none.
    pub fn default_invariants(&self) -> Vec<String> {
        match &self.replicated {
            Some(rep) => rep.standard_invariant_names(),
            None => self
                .realization()
                .algebra()
                .casimirs()
                .iter()
                .map(|(n, _)| n.clone())
                .collect(),
        }
    }
}

impl OdeSystem for SystemSpec {
    fn dim(&self) -> usize {
        2 * self.n()
    }

    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]) -> Result<()> {
        let n = self.n();
        let mut grad = vec![0.0; 2 * n];
        self.hamiltonian.gradient(t, x, &mut grad)?;
        crate::phase::gradient_to_field(n, &grad, dx);
        Ok(())
    }

    fn in_domain(&self, _t: f64, x: &[f64]) -> bool {
        self.space.contains(x)
    }
}

fn check_c(n: usize, c: &[f64]) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if c.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: c.len(),
        });
    }
    if let Some(v) = c.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite c entry {v}")));
    }
    Ok(())
}

fn sq_radius(n: usize, x: &[f64]) -> f64 {
    x[..n].iter().map(|v| v * v).sum()
}

/// `Σ_i (p_i² + c_i/q_i²)`, the value of `h_+`.
fn p_tilde_sq(n: usize, c: &[f64], x: &[f64]) -> f64 {
    (0..n)
        .map(|i| {
            let p = x[n + i];
            if c[i] != 0.0 {
                p * p + c[i] / (x[i] * x[i])
            } else {
                p * p
            }
        })
        .sum()
}

fn centrifugal(c: f64, q: f64) -> f64 {
    if c != 0.0 {
        c / (q * q * q)
    } else {
        0.0
    }
}

fn radius_of(s: f64) -> Result<f64> {
    let r = s.sqrt();
    if !(r > DOMAIN_MARGIN) {
        return Err(Error::domain("|q| = 0"));
    }
    Ok(r)
}

/// Sample box suited to a characteristic radius `hi` (coordinates positive
/// so centrifugal terms stay moderate).
fn box_for(n: usize, lo: f64, hi: f64) -> SampleBox {
    SampleBox::uniform(n, (lo, hi), (-1.0, 1.0)).with_times(SAMPLE_TIMES.0, SAMPLE_TIMES.1)
}

fn curved_box(n: usize, k: f64) -> SampleBox {
    if k == 0.0 {
        return box_for(n, 0.3, 1.5);
    }
    let hi = (0.7 / (k.abs() * n as f64).sqrt()).min(1.5);
    box_for(n, 0.25 * hi, hi)
}

struct CoalgBuild {
    name: &'static str,
    params: SystemParams,
    coefficients: Coefficients,
    outer: FnDual,
    guards: Vec<Guard>,
    closed_form: Option<FieldFn>,
    curved: Option<CurvedSpaceSpec>,
    sample_box: SampleBox,
}

fn coalg_system(b: CoalgBuild) -> Result<SystemSpec> {
    check_c(b.params.n, &b.params.c)?;
    let rep = Arc::new(realizations::sl2_coalg_replicated(&b.params.c)?.with_sample_box(b.sample_box.clone()));
    let realization = rep.full_realization()?;
    let mut space = rep.space().clone();
    for g in b.guards {
        space = space.with_guard(g);
    }
    let hamiltonian = compose(realization, Arc::new(b.outer))?;
    Ok(SystemSpec {
        name: b.name.to_string(),
        params: b.params,
        coefficients: b.coefficients,
        hamiltonian,
        space,
        replicated: Some(rep),
        closed_form: b.closed_form,
        curved: b.curved,
        sample_box: b.sample_box,
    })
}

fn coefs(pairs: &[(&str, &TimeCoefficient)]) -> Coefficients {
    pairs.iter().map(|(k, v)| (k.to_string(), (*v).clone())).collect()
}

fn one_plus(k: f64, label: &str) -> Guard {
    Guard::Positive(
        format!("1 + {label}|q|^2"),
        Arc::new(move |x: &[f64]| {
            let n = x.len() / 2;
            1.0 + k * sq_radius(n, x)
        }),
    )
}

/// Smorodinsky–Winternitz system `h = h_+/2 + ω²(t) h_-/2`.
pub fn make_sw(n: usize, c: &[f64], omega2: TimeCoefficient) -> Result<SystemSpec> {
    check_c(n, c)?;
    let w = omega2.clone();
    let outer = FnDual::new(
        3,
        {
            let w = w.clone();
            move |t, l| Ok(0.5 * l[1] + 0.5 * w.eval(t)? * l[0])
        },
        move |t, _, out| {
            out[0] = 0.5 * w.eval(t)?;
            out[1] = 0.5;
            out[2] = 0.0;
            Ok(())
        },
    );
    let cc = c.to_vec();
    let w = omega2.clone();
    let closed: FieldFn = Arc::new(move |t, x, out| {
        let w2 = w.eval(t)?;
        for i in 0..n {
            out[i] = x[n + i];
            out[n + i] = -w2 * x[i] + centrifugal(cc[i], x[i]);
        }
        Ok(())
    });
    coalg_system(CoalgBuild {
        name: "sw",
        params: SystemParams::with_c(c),
        coefficients: coefs(&[("omega2", &omega2)]),
        outer,
        guards: Vec::new(),
        closed_form: Some(closed),
        curved: Some(CurvedSpaceSpec::conformal(n, ConformalFactor::flat())),
        sample_box: box_for(n, 0.3, 1.5),
    })
}

/// Isotropic oscillator `h = h3 + ω²(t) h1` on the `sl2_sw` realization.
pub fn make_ho_sl2(n: usize, omega2: TimeCoefficient) -> Result<SystemSpec> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let c = vec![0.0; n];
    let b = box_for(n, -1.5, 1.5);
    let rep = Arc::new(realizations::sl2_sw_replicated(&c)?.with_sample_box(b.clone()));
    let w = omega2.clone();
    let outer = FnDual::new(
        3,
        {
            let w = w.clone();
            move |t, l| Ok(l[2] + w.eval(t)? * l[0])
        },
        move |t, _, out| {
            out[0] = w.eval(t)?;
            out[1] = 0.0;
            out[2] = 1.0;
            Ok(())
        },
    );
    let hamiltonian = compose(rep.full_realization()?, Arc::new(outer))?;
    Ok(SystemSpec {
        name: "ho_sl2".into(),
        params: SystemParams::with_c(&c),
        coefficients: coefs(&[("omega2", &omega2)]),
        hamiltonian,
        space: rep.space().clone(),
        closed_form: Some(oscillator_closed_form(n, omega2)),
        replicated: Some(rep),
        curved: Some(CurvedSpaceSpec::conformal(n, ConformalFactor::flat())),
        sample_box: b,
    })
}

fn oscillator_closed_form(n: usize, omega2: TimeCoefficient) -> FieldFn {
    Arc::new(move |t, x, out| {
        let w2 = omega2.eval(t)?;
        for i in 0..n {
            out[i] = x[n + i];
            out[n + i] = -w2 * x[i];
        }
        Ok(())
    })
}

/// One-dimensional oscillator `h = λ2²/2 + ω²(t) λ1²/2` on the oscillator
/// algebra.
pub fn make_ho_h4(omega2: TimeCoefficient) -> Result<SystemSpec> {
    let w = omega2.clone();
    let outer = FnDual::new(
        4,
        {
            let w = w.clone();
            move |t, l| Ok(0.5 * l[2] * l[2] + 0.5 * w.eval(t)? * l[1] * l[1])
        },
        move |t, l, out| {
            out[0] = 0.0;
            out[1] = w.eval(t)? * l[1];
            out[2] = l[2];
            out[3] = 0.0;
            Ok(())
        },
    );
    let b = box_for(1, -1.5, 1.5);
    let r = Arc::new(realizations::h4_oscillator()?.with_sample_box(b.clone()));
    Ok(SystemSpec {
        name: "ho_h4".into(),
        params: SystemParams::default(),
        coefficients: coefs(&[("omega2", &omega2)]),
        space: r.space().clone(),
        hamiltonian: compose(r, Arc::new(outer))?,
        replicated: None,
        closed_form: Some(oscillator_closed_form(1, omega2)),
        curved: Some(CurvedSpaceSpec::conformal(1, ConformalFactor::flat())),
        sample_box: b,
    })
}

/// Hénon–Heiles family
/// `h = (h1 + h4²)/2 + Ω1 h2 + Ω2 h5² + α (h2 h5 + β h5³)`.
pub fn make_henon_heiles(
    omega1: TimeCoefficient,
    omega2: TimeCoefficient,
    alpha: TimeCoefficient,
    beta: TimeCoefficient,
) -> Result<SystemSpec> {
    let coefficients = coefs(&[
        ("Omega1", &omega1),
        ("Omega2", &omega2),
        ("alpha", &alpha),
        ("beta", &beta),
    ]);
    let (o1, o2, a, b) = (omega1.clone(), omega2.clone(), alpha.clone(), beta.clone());
    let closed: FieldFn = Arc::new(move |t, x, out| {
        let (w1, w2, al, be) = (o1.eval(t)?, o2.eval(t)?, a.eval(t)?, b.eval(t)?);
        out[0] = x[2];
        out[1] = x[3];
        out[2] = -2.0 * w1 * x[0] - 2.0 * al * x[0] * x[1];
        out[3] = -2.0 * w2 * x[1] - al * (x[0] * x[0] + 3.0 * be * x[1] * x[1]);
        Ok(())
    });
    henon_heiles_system("henon_heiles", coefficients, omega1, omega2, alpha, beta, closed)
}

fn henon_heiles_system(
    name: &str,
    coefficients: Coefficients,
    omega1: TimeCoefficient,
    omega2: TimeCoefficient,
    alpha: TimeCoefficient,
    beta: TimeCoefficient,
    closed: FieldFn,
) -> Result<SystemSpec> {
    let (o1, o2, a, b) = (omega1.clone(), omega2.clone(), alpha.clone(), beta.clone());
    let outer = FnDual::new(
        6,
        move |t, l| {
            let (w1, w2, al, be) = (o1.eval(t)?, o2.eval(t)?, a.eval(t)?, b.eval(t)?);
            Ok(0.5 * (l[0] + l[3] * l[3]) + w1 * l[1] + w2 * l[4] * l[4] + al * (l[1] * l[4] + be * l[4].powi(3)))
        },
        move |t, l, out| {
            let (w1, w2, al, be) = (omega1.eval(t)?, omega2.eval(t)?, alpha.eval(t)?, beta.eval(t)?);
            out[0] = 0.5;
            out[1] = w1 + al * l[4];
            out[2] = 0.0;
            out[3] = l[3];
            out[4] = 2.0 * w2 * l[4] + al * (l[1] + 3.0 * be * l[4] * l[4]);
            out[5] = 0.0;
            Ok(())
        },
    );
    let b = box_for(2, -1.0, 1.0);
    let r = Arc::new(realizations::henon_heiles()?.with_sample_box(b.clone()));
    Ok(SystemSpec {
        name: name.into(),
        params: SystemParams {
            n: 2,
            c: vec![0.0, 0.0],
            ..Default::default()
        },
        coefficients,
        space: r.space().clone(),
        hamiltonian: compose(r, Arc::new(outer))?,
        replicated: None,
        closed_form: Some(closed),
        curved: None,
        sample_box: b,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HenonHeilesPreset {
    SawadaKotera,
    KdV12,
    KaupKupershmidt,
}

impl HenonHeilesPreset {
    pub fn name(self) -> &'static str {
        match self {
            HenonHeilesPreset::SawadaKotera => "hh_sk",
            HenonHeilesPreset::KdV12 => "hh_kdv12",
            HenonHeilesPreset::KaupKupershmidt => "hh_kk",
        }
    }

    /// `(β, Ω2/Ω1)`.
    fn constants(self) -> (f64, f64) {
        match self {
            HenonHeilesPreset::SawadaKotera => (1.0 / 3.0, 1.0),
            HenonHeilesPreset::KdV12 => (2.0, 4.0),
            HenonHeilesPreset::KaupKupershmidt => (16.0 / 3.0, 16.0),
        }
    }
}

/// Preset with `Ω1 = ω²(t)/2` and the preset's `β` and `Ω2/Ω1`.
pub fn make_hh_preset(
    preset: HenonHeilesPreset,
    omega2: TimeCoefficient,
    alpha: TimeCoefficient,
) -> Result<SystemSpec> {
    let (beta, ratio) = preset.constants();
    let coefficients = coefs(&[("omega2", &omega2), ("alpha", &alpha)]);
    let (w, a) = (omega2.clone(), alpha.clone());
    // printed form: dp2 = -ratio ω² q2 − α (q1² + 3β q2²)
    let closed: FieldFn = Arc::new(move |t, x, out| {
        let (w2, al) = (w.eval(t)?, a.eval(t)?);
        out[0] = x[2];
        out[1] = x[3];
        out[2] = -w2 * x[0] - 2.0 * al * x[0] * x[1];
        out[3] = -ratio * w2 * x[1] - al * (x[0] * x[0] + 3.0 * beta * x[1] * x[1]);
        Ok(())
    });
    henon_heiles_system(
        preset.name(),
        coefficients,
        omega2.scaled(0.5),
        omega2.scaled(0.5 * ratio),
        alpha,
        TimeCoefficient::constant(beta),
        closed,
    )
}

/// Second Painlevé transcendent as `h = λ2(λ2 − 2λ1² − t)/2 − b λ1` on the
/// Heisenberg realization `(1, q, p)`.
pub fn make_painleve2(b: f64) -> Result<SystemSpec> {
    if !b.is_finite() {
        return Err(Error::InvalidParameter("b must be finite".into()));
    }
    let outer = FnDual::new(
        3,
        move |t, l| Ok(0.5 * l[2] * (l[2] - 2.0 * l[1] * l[1] - t) - b * l[1]),
        move |t, l, out| {
            out[0] = 0.0;
            out[1] = -2.0 * l[2] * l[1] - b;
            out[2] = l[2] - l[1] * l[1] - 0.5 * t;
            Ok(())
        },
    );
    let closed: FieldFn = Arc::new(move |t, x, out| {
        out[0] = x[1] - x[0] * x[0] - 0.5 * t;
        out[1] = 2.0 * x[0] * x[1] + b;
        Ok(())
    });
    let bx = box_for(1, -1.0, 1.0);
    let r = Arc::new(realizations::heisenberg()?.with_sample_box(bx.clone()));
    Ok(SystemSpec {
        name: "painleve2".into(),
        params: SystemParams {
            b,
            ..Default::default()
        },
        coefficients: Coefficients::new(),
        space: r.space().clone(),
        hamiltonian: compose(r, Arc::new(outer))?,
        replicated: None,
        closed_form: Some(closed),
        curved: None,
        sample_box: bx,
    })
}

/// A radial potential `U(t, r)` with its radial derivative.
#[derive(Clone)]
pub struct RadialPotential {
    pub label: String,
    pub u: Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>,
    pub ur: Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>,
    pub coefficients: Coefficients,
}

impl fmt::Debug for RadialPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RadialPotential({})", self.label)
    }
}

impl RadialPotential {
    /// `U = ω²(t) r²/2`.
    pub fn oscillator(omega2: TimeCoefficient) -> Self {
        let w = omega2.clone();
        let w2 = omega2.clone();
        RadialPotential {
            label: "oscillator".into(),
            u: Arc::new(move |t, r| Ok(0.5 * w.eval(t)? * r * r)),
            ur: Arc::new(move |t, r| Ok(w2.eval(t)? * r)),
            coefficients: coefs(&[("omega2", &omega2)]),
        }
    }

    /// `U = −K(t)/r`.
    pub fn kepler(k: TimeCoefficient) -> Self {
        let k1 = k.clone();
        let k2 = k.clone();
        RadialPotential {
            label: "kepler".into(),
            u: Arc::new(move |t, r| Ok(-k1.eval(t)? / r)),
            ur: Arc::new(move |t, r| Ok(k2.eval(t)? / (r * r))),
            coefficients: coefs(&[("K", &k)]),
        }
    }

    pub fn zero() -> Self {
        RadialPotential {
            label: "zero".into(),
            u: Arc::new(|_, _| Ok(0.0)),
            ur: Arc::new(|_, _| Ok(0.0)),
            coefficients: Coefficients::new(),
        }
    }
}

/// Central system `h = T + U(t, |q|)` on an `sl(2,R)`-coalgebra space, with
/// `T = h_+/(2 f²)` for a conformal factor or `T = A h_+ + B h_3²` for a
/// kinetic pair.
pub fn make_central(c: &[f64], space: CurvedSpaceSpec, potential: RadialPotential) -> Result<SystemSpec> {
    let n = space.n;
    check_c(n, c)?;
    let (u, ur) = (potential.u.clone(), potential.ur.clone());
    let cc = c.to_vec();
    let (outer, closed, guard): (FnDual, FieldFn, Guard) = match &space.metric {
        Metric::Conformal(f) => {
            let (f1, f2) = (f.clone(), f.clone());
            let (u1, ur1, ur2) = (u.clone(), ur.clone(), ur.clone());
            let outer = FnDual::new(
                3,
                move |t, l| {
                    let r = radius_of(l[0])?;
                    let fv = f1.value(r);
                    Ok(l[1] / (2.0 * fv * fv) + u1(t, r)?)
                },
                move |t, l, out| {
                    let r = radius_of(l[0])?;
                    let fv = f2.value(r);
                    let df = f2.derivative(r);
                    out[0] = (-l[1] * df / (fv * fv * fv) + ur1(t, r)?) / (2.0 * r);
                    out[1] = 1.0 / (2.0 * fv * fv);
                    out[2] = 0.0;
                    Ok(())
                },
            );
            let f3 = f.clone();
            let closed: FieldFn = Arc::new(move |t, x, out| {
                let r = radius_of(sq_radius(n, x))?;
                let fv = f3.value(r);
                let df = f3.derivative(r);
                let pt = p_tilde_sq(n, &cc, x);
                let urv = ur2(t, r)?;
                for i in 0..n {
                    out[i] = x[n + i] / (fv * fv);
                    out[n + i] =
                        centrifugal(cc[i], x[i]) / (fv * fv) + pt * df * x[i] / (fv * fv * fv * r) - urv * x[i] / r;
                }
                Ok(())
            });
            let f4 = f.clone();
            let guard = Guard::Positive(
                format!("f(|q|) [{}]", f.label()),
                Arc::new(move |x: &[f64]| f4.value(sq_radius(x.len() / 2, x).sqrt())),
            );
            (outer, closed, guard)
        }
        Metric::Kinetic(k) => {
            let (k1, k2, k3) = (k.clone(), k.clone(), k.clone());
            let (u1, ur1, ur2) = (u.clone(), ur.clone(), ur.clone());
            let outer = FnDual::new(
                3,
                move |t, l| {
                    let r = radius_of(l[0])?;
                    Ok((k1.a)(l[0]) * l[1] + (k1.b)(l[0]) * l[2] * l[2] + u1(t, r)?)
                },
                move |t, l, out| {
                    let r = radius_of(l[0])?;
                    out[0] = (k2.da)(l[0]) * l[1] + (k2.db)(l[0]) * l[2] * l[2] + ur1(t, r)? / (2.0 * r);
                    out[1] = (k2.a)(l[0]);
                    out[2] = 2.0 * (k2.b)(l[0]) * l[2];
                    Ok(())
                },
            );
            let closed: FieldFn = Arc::new(move |t, x, out| {
                let s = sq_radius(n, x);
                let r = radius_of(s)?;
                let (a, da, b, db) = ((k3.a)(s), (k3.da)(s), (k3.b)(s), (k3.db)(s));
                let pt = p_tilde_sq(n, &cc, x);
                let w: f64 = (0..n).map(|i| x[i] * x[n + i]).sum();
                let urv = ur2(t, r)?;
                for i in 0..n {
                    out[i] = 2.0 * a * x[n + i] + 2.0 * b * w * x[i];
                    out[n + i] = -(2.0 * da * x[i] * pt - 2.0 * a * centrifugal(cc[i], x[i])
                        + 2.0 * db * x[i] * w * w
                        + 2.0 * b * w * x[n + i]
                        + urv * x[i] / r);
                }
                Ok(())
            });
            let k4 = k.clone();
            let guard = Guard::Positive(
                format!("A(|q|^2) [{}]", k.label),
                Arc::new(move |x: &[f64]| (k4.a)(sq_radius(x.len() / 2, x))),
            );
            (outer, closed, guard)
        }
    };
    coalg_system(CoalgBuild {
        name: "central",
        params: SystemParams {
            space: space.label().to_string(),
            potential: potential.label.clone(),
            ..SystemParams::with_c(c)
        },
        coefficients: potential.coefficients.clone(),
        outer,
        guards: vec![Guard::RadiusNonzero, guard],
        closed_form: Some(closed),
        curved: Some(space),
        sample_box: box_for(n, 0.3, 1.5),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    Euclidean,
    Poincare,
    Beltrami,
}

impl Chart {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Chart::Euclidean),
            "poincare" => Ok(Chart::Poincare),
            "beltrami" => Ok(Chart::Beltrami),
            _ => Err(Error::unknown("chart", s)),
        }
    }
}

/// Curved oscillator in Poincaré or Beltrami coordinates.
pub fn make_curved_oscillator(
    chart: Chart,
    n: usize,
    kappa: f64,
    c: &[f64],
    omega2: TimeCoefficient,
) -> Result<SystemSpec> {
    check_c(n, c)?;
    if !kappa.is_finite() {
        return Err(Error::InvalidParameter("kappa must be finite".into()));
    }
    let w = omega2.clone();
    let wc = omega2.clone();
    let cc = c.to_vec();
    let (name, outer, closed, mut guards, curved): (&'static str, FnDual, FieldFn, Vec<Guard>, CurvedSpaceSpec) =
        match chart {
            Chart::Poincare => {
                let w1 = w.clone();
                let outer = FnDual::new(
                    3,
                    move |t, l| {
                        let (a, d) = (1.0 + kappa * l[0], 1.0 - kappa * l[0]);
                        Ok(0.5 * a * a * l[1] + 0.5 * w1.eval(t)? * l[0] / (d * d))
                    },
                    move |t, l, out| {
                        let (a, d) = (1.0 + kappa * l[0], 1.0 - kappa * l[0]);
                        if d.abs() <= DOMAIN_MARGIN {
                            return Err(Error::domain("1 - kappa |q|^2 = 0"));
                        }
                        out[0] = kappa * a * l[1] + 0.5 * w.eval(t)? * a / (d * d * d);
                        out[1] = 0.5 * a * a;
                        out[2] = 0.0;
                        Ok(())
                    },
                );
                let closed: FieldFn = Arc::new(move |t, x, out| {
                    let w2 = wc.eval(t)?;
                    let s = sq_radius(n, x);
                    let (a, d) = (1.0 + kappa * s, 1.0 - kappa * s);
                    let pt = p_tilde_sq(n, &cc, x);
                    for i in 0..n {
                        out[i] = a * a * x[n + i];
                        out[n + i] = -w2 * x[i] * a / (d * d * d) + a * a * centrifugal(cc[i], x[i])
                            - 2.0 * kappa * x[i] * a * pt;
                    }
                    Ok(())
                });
                let mut guards = Vec::new();
                if kappa > 0.0 {
                    guards.push(Guard::Nonzero(
                        "1 - kappa|q|^2".into(),
                        Arc::new(move |x: &[f64]| 1.0 - kappa * sq_radius(x.len() / 2, x)),
                    ));
                }
                (
                    "osc_poincare",
                    outer,
                    closed,
                    guards,
                    CurvedSpaceSpec::conformal(n, ConformalFactor::poincare_chart(kappa)),
                )
            }
            Chart::Beltrami => {
                let w1 = w.clone();
                let outer = FnDual::new(
                    3,
                    move |t, l| Ok(0.5 * (1.0 + kappa * l[0]) * (l[1] + kappa * l[2] * l[2]) + 0.5 * w1.eval(t)? * l[0]),
                    move |t, l, out| {
                        out[0] = 0.5 * kappa * (l[1] + kappa * l[2] * l[2]) + 0.5 * w.eval(t)?;
                        out[1] = 0.5 * (1.0 + kappa * l[0]);
                        out[2] = kappa * (1.0 + kappa * l[0]) * l[2];
                        Ok(())
                    },
                );
                let closed: FieldFn = Arc::new(move |t, x, out| {
                    let w2 = wc.eval(t)?;
                    beltrami_closed(n, kappa, &cc, x, out);
                    for i in 0..n {
                        out[n + i] -= w2 * x[i];
                    }
                    Ok(())
                });
                (
                    "osc_beltrami",
                    outer,
                    closed,
                    Vec::new(),
                    CurvedSpaceSpec::kinetic(n, KineticPair::beltrami(kappa)),
                )
            }
            Chart::Euclidean => return make_sw(n, c, omega2),
        };
    if kappa < 0.0 {
        guards.push(one_plus(kappa, "kappa"));
    }
    coalg_system(CoalgBuild {
        name,
        params: SystemParams {
            kappa,
            ..SystemParams::with_c(c)
        },
        coefficients: coefs(&[("omega2", &omega2)]),
        outer,
        guards,
        closed_form: Some(closed),
        curved: Some(curved),
        sample_box: curved_box(n, kappa),
    })
}

/// Kinetic part of the Beltrami equations of motion (no potential).
fn beltrami_closed(n: usize, kappa: f64, c: &[f64], x: &[f64], out: &mut [f64]) {
    let s = sq_radius(n, x);
    let a = 1.0 + kappa * s;
    let w: f64 = (0..n).map(|i| x[i] * x[n + i]).sum();
    let pt = p_tilde_sq(n, c, x);
    for i in 0..n {
        out[i] = a * (x[n + i] + kappa * x[i] * w);
        out[n + i] = a * (centrifugal(c[i], x[i]) - kappa * x[n + i] * w) - kappa * x[i] * (pt + kappa * w * w);
    }
}

/// Darboux III oscillator `h = (h_+ + ω²(t) h_-)/(2(1 + λ h_-))`.
pub fn make_darboux3(n: usize, lambda: f64, c: &[f64], omega2: TimeCoefficient) -> Result<SystemSpec> {
    check_c(n, c)?;
    if !lambda.is_finite() {
        return Err(Error::InvalidParameter("lambda must be finite".into()));
    }
    let (w, w1, wc) = (omega2.clone(), omega2.clone(), omega2.clone());
    let outer = FnDual::new(
        3,
        move |t, l| Ok((l[1] + w1.eval(t)? * l[0]) / (2.0 * (1.0 + lambda * l[0]))),
        move |t, l, out| {
            let d = 1.0 + lambda * l[0];
            out[0] = (w.eval(t)? - lambda * l[1]) / (2.0 * d * d);
            out[1] = 1.0 / (2.0 * d);
            out[2] = 0.0;
            Ok(())
        },
    );
    let cc = c.to_vec();
    let closed: FieldFn = Arc::new(move |t, x, out| {
        let w2 = wc.eval(t)?;
        let d = 1.0 + lambda * sq_radius(n, x);
        let pt = p_tilde_sq(n, &cc, x);
        for i in 0..n {
            out[i] = x[n + i] / d;
            out[n + i] = -w2 * x[i] / (d * d) + centrifugal(cc[i], x[i]) / d + lambda * x[i] * pt / (d * d);
        }
        Ok(())
    });
    let guards = if lambda < 0.0 {
        vec![one_plus(lambda, "lambda")]
    } else {
        Vec::new()
    };
    coalg_system(CoalgBuild {
        name: "darboux3",
        params: SystemParams {
            lambda,
            ..SystemParams::with_c(c)
        },
        coefficients: coefs(&[("omega2", &omega2)]),
        outer,
        guards,
        closed_form: Some(closed),
        curved: Some(CurvedSpaceSpec::conformal(n, ConformalFactor::darboux3(lambda))),
        sample_box: if lambda < 0.0 {
            curved_box(n, lambda)
        } else {
            box_for(n, 0.3, 1.5)
        },
    })
}

/// Kepler–Coulomb system in Euclidean, Poincaré or Beltrami coordinates.
pub fn make_kc(chart: Chart, n: usize, kappa: f64, c: &[f64], k: TimeCoefficient) -> Result<SystemSpec> {
    check_c(n, c)?;
    if !kappa.is_finite() {
        return Err(Error::InvalidParameter("kappa must be finite".into()));
    }
    let (k1, k2, kc) = (k.clone(), k.clone(), k.clone());
    let cc = c.to_vec();
    let (name, kappa, outer, closed, curved): (&'static str, f64, FnDual, FieldFn, CurvedSpaceSpec) = match chart {
        Chart::Euclidean => (
            "kc_euclidean",
            0.0,
            FnDual::new(
                3,
                move |t, l| Ok(0.5 * l[1] - k1.eval(t)? / radius_of(l[0])?),
                move |t, l, out| {
                    let r = radius_of(l[0])?;
                    out[0] = (k2.eval(t)? / (r * r)) / (2.0 * r);
                    out[1] = 0.5;
                    out[2] = 0.0;
                    Ok(())
                },
            ),
            Arc::new(move |t: f64, x: &[f64], out: &mut [f64]| {
                let kv = kc.eval(t)?;
                let r = radius_of(sq_radius(n, x))?;
                for i in 0..n {
                    out[i] = x[n + i];
                    out[n + i] = -kv * x[i] / (r * r * r) + centrifugal(cc[i], x[i]);
                }
                Ok(())
            }) as FieldFn,
            CurvedSpaceSpec::conformal(n, ConformalFactor::flat()),
        ),
        Chart::Poincare => (
            "kc_poincare",
            kappa,
            FnDual::new(
                3,
                move |t, l| {
                    let a = 1.0 + kappa * l[0];
                    Ok(0.5 * a * a * l[1] - k1.eval(t)? * (1.0 - kappa * l[0]) / radius_of(l[0])?)
                },
                move |t, l, out| {
                    let r = radius_of(l[0])?;
                    let a = 1.0 + kappa * l[0];
                    out[0] = kappa * a * l[1] + (k2.eval(t)? * a) / (r * r) / (2.0 * r);
                    out[1] = 0.5 * a * a;
                    out[2] = 0.0;
                    Ok(())
                },
            ),
            Arc::new(move |t: f64, x: &[f64], out: &mut [f64]| {
                let kv = kc.eval(t)?;
                let s = sq_radius(n, x);
                let r = radius_of(s)?;
                let a = 1.0 + kappa * s;
                let pt = p_tilde_sq(n, &cc, x);
                for i in 0..n {
                    out[i] = a * a * x[n + i];
                    out[n + i] =
                        -kv * x[i] * a / (r * r * r) + a * a * centrifugal(cc[i], x[i]) - 2.0 * kappa * x[i] * a * pt;
                }
                Ok(())
            }) as FieldFn,
            CurvedSpaceSpec::conformal(n, ConformalFactor::poincare_chart(kappa)),
        ),
        Chart::Beltrami => (
            "kc_beltrami",
            kappa,
            FnDual::new(
                3,
                move |t, l| {
                    Ok(0.5 * (1.0 + kappa * l[0]) * (l[1] + kappa * l[2] * l[2]) - k1.eval(t)? / radius_of(l[0])?)
                },
                move |t, l, out| {
                    let r = radius_of(l[0])?;
                    out[0] = 0.5 * kappa * (l[1] + kappa * l[2] * l[2]) + (k2.eval(t)? / (r * r)) / (2.0 * r);
                    out[1] = 0.5 * (1.0 + kappa * l[0]);
                    out[2] = kappa * (1.0 + kappa * l[0]) * l[2];
                    Ok(())
                },
            ),
            Arc::new(move |t: f64, x: &[f64], out: &mut [f64]| {
                let kv = kc.eval(t)?;
                let r = radius_of(sq_radius(n, x))?;
                beltrami_closed(n, kappa, &cc, x, out);
                for i in 0..n {
                    out[n + i] -= kv * x[i] / (r * r * r);
                }
                Ok(())
            }) as FieldFn,
            CurvedSpaceSpec::kinetic(n, KineticPair::beltrami(kappa)),
        ),
    };
    let mut guards = vec![Guard::RadiusNonzero];
    if kappa < 0.0 {
        guards.push(one_plus(kappa, "kappa"));
    }
    coalg_system(CoalgBuild {
        name,
        params: SystemParams {
            kappa,
            ..SystemParams::with_c(c)
        },
        coefficients: coefs(&[("K", &k)]),
        outer,
        guards,
        closed_form: Some(closed),
        curved: Some(curved),
        sample_box: curved_box(n, kappa),
    })
}

/// Taub–NUT Kepler–Coulomb system `h = |q|/(η + |q|) (h_+/2 − K(t)/|q|)`.
pub fn make_taubnut(n: usize, eta: f64, c: &[f64], k: TimeCoefficient) -> Result<SystemSpec> {
    check_c(n, c)?;
    if !eta.is_finite() {
        return Err(Error::InvalidParameter("eta must be finite".into()));
    }
    let (k1, k2, kc) = (k.clone(), k.clone(), k.clone());
    let outer = FnDual::new(
        3,
        move |t, l| {
            let r = radius_of(l[0])?;
            let g = r / (eta + r);
            Ok(g * (0.5 * l[1] - k1.eval(t)? / r))
        },
        move |t, l, out| {
            let r = radius_of(l[0])?;
            let kv = k2.eval(t)?;
            let e = eta + r;
            let g = r / e;
            let dg = eta / (e * e);
            out[0] = (dg * (0.5 * l[1] - kv / r) + g * kv / (r * r)) / (2.0 * r);
            out[1] = 0.5 * g;
            out[2] = 0.0;
            Ok(())
        },
    );
    let cc = c.to_vec();
    let closed: FieldFn = Arc::new(move |t, x, out| {
        let kv = kc.eval(t)?;
        let r = radius_of(sq_radius(n, x))?;
        let e = eta + r;
        let pt = p_tilde_sq(n, &cc, x);
        for i in 0..n {
            out[i] = r * x[n + i] / e;
            out[n + i] =
                -kv * x[i] / (r * e * e) + centrifugal(cc[i], x[i]) * r / e - eta * x[i] * pt / (2.0 * r * e * e);
        }
        Ok(())
    });
    let guards = vec![
        Guard::RadiusNonzero,
        Guard::Positive(
            "eta + |q|".into(),
            Arc::new(move |x: &[f64]| eta + sq_radius(x.len() / 2, x).sqrt()),
        ),
    ];
    let lo = if eta < 0.0 {
        (0.3f64).max(2.0 * eta.abs() / (n as f64).sqrt())
    } else {
        0.3
    };
    coalg_system(CoalgBuild {
        name: "kc_taubnut",
        params: SystemParams {
            eta,
            ..SystemParams::with_c(c)
        },
        coefficients: coefs(&[("K", &k)]),
        outer,
        guards,
        closed_form: Some(closed),
        curved: Some(CurvedSpaceSpec::conformal(n, ConformalFactor::taubnut(eta))),
        sample_box: box_for(n, lo, lo + 1.2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(v: f64) -> TimeCoefficient {
        TimeCoefficient::constant(v)
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn sw_examples() {
        let s = make_sw(1, &[3.0], k(4.0)).unwrap();
        assert_eq!(s.vector_field(0.0, &[1.0, 0.0]).unwrap(), vec![0.0, -1.0]);
        let free = make_sw(2, &[0.0, 0.0], k(0.0)).unwrap();
        let v = free.vector_field(0.0, &[0.3, 0.4, 1.0, 2.0]).unwrap();
        assert_eq!(v, vec![1.0, 2.0, 0.0, 0.0]);
        let s = make_sw(2, &[1.0, 1.0], k(1.0)).unwrap();
        assert_eq!(s.energy(0.0, &[1.0, 1.0, 0.0, 0.0]).unwrap(), 2.0);
        assert!(s.vector_field(0.0, &[0.0, 1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn oscillator_presentations() {
        let a = make_ho_sl2(1, k(1.0)).unwrap();
        let b = make_ho_h4(k(1.0)).unwrap();
        assert_eq!(a.vector_field(0.0, &[1.0, 0.0]).unwrap(), vec![0.0, -1.0]);
        assert_eq!(b.vector_field(0.0, &[1.0, 0.0]).unwrap(), vec![0.0, -1.0]);
        let w = TimeCoefficient::parse("1+t").unwrap();
        let c = make_ho_sl2(2, w).unwrap();
        let v = c.vector_field(1.0, &[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(&v[2..], &[-2.0, -2.0]);
    }

    #[test]
    fn henon_heiles_examples() {
        let sk = make_hh_preset(HenonHeilesPreset::SawadaKotera, k(1.0), k(1.0)).unwrap();
        let v = sk.vector_field(0.0, &[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(close(&v[2..], &[-3.0, -3.0], 1e-14), "{v:?}");
        let off = make_henon_heiles(k(0.7), k(1.3), k(0.0), k(5.0)).unwrap();
        let v = off.vector_field(0.0, &[0.5, -2.0, 0.0, 0.0]).unwrap();
        assert!(close(&v[2..], &[-2.0 * 0.7 * 0.5, 2.0 * 1.3 * 2.0], 1e-14));
        let g = make_henon_heiles(k(1.0), k(1.0), k(1.0), k(1.0)).unwrap();
        let v = g.vector_field(0.0, &[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(close(&v[2..], &[-4.0, -6.0], 1e-14));
    }

    #[test]
    fn painleve_examples() {
        let p = make_painleve2(0.5).unwrap();
        assert_eq!(p.vector_field(0.0, &[1.0, 2.0]).unwrap(), vec![1.0, 4.5]);
        let p = make_painleve2(0.0).unwrap();
        assert_eq!(p.vector_field(0.0, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let p = make_painleve2(1.0).unwrap();
        assert_eq!(p.vector_field(2.0, &[0.0, 1.0]).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn central_examples() {
        let s = make_central(
            &[0.0, 0.0],
            CurvedSpaceSpec::conformal(2, ConformalFactor::poincare(1.0)),
            RadialPotential::zero(),
        )
        .unwrap();
        let v = s.vector_field(0.0, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(close(&v[..2], &[0.0, 1.0], 1e-15));
        assert_eq!(s.mass(1.0), Some(1.0));

        let d = make_central(
            &[0.0, 0.0],
            CurvedSpaceSpec::conformal(2, ConformalFactor::darboux3(1.0)),
            RadialPotential::zero(),
        )
        .unwrap();
        let v = d.vector_field(0.0, &[1.0, 0.0, 1.0, 0.0]).unwrap();
        assert!((v[2] - 0.25).abs() < 1e-15, "{v:?}");
    }

    #[test]
    fn curved_oscillator_examples() {
        let p = make_curved_oscillator(Chart::Poincare, 1, 1.0, &[0.0], k(1.0)).unwrap();
        assert!((p.energy(0.0, &[0.5, 0.0]).unwrap() - 2.0 / 9.0).abs() < 1e-15);
        assert!(p.energy(0.0, &[1.0, 0.0]).is_err());
        let b = make_curved_oscillator(Chart::Beltrami, 1, 1.0, &[0.0], k(0.0)).unwrap();
        assert_eq!(b.energy(0.0, &[1.0, 1.0]).unwrap(), 2.0);
    }

    #[test]
    fn kc_examples() {
        let e = make_kc(Chart::Euclidean, 2, 0.0, &[0.0, 0.0], k(1.0)).unwrap();
        let v = e.vector_field(0.0, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(&v[2..], &[-1.0, 0.0]);
        let t = make_taubnut(3, 1.0, &[0.0; 3], k(1.0)).unwrap();
        assert_eq!(t.energy(0.0, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap(), -0.5);
        assert!(e.energy(0.0, &[0.0; 4]).is_err());
    }

    #[test]
    fn hyperbolic_disk_is_enforced() {
        let p = make_curved_oscillator(Chart::Poincare, 1, -1.0, &[0.0], k(1.0)).unwrap();
        assert!(!p.space().contains(&[2.0, 0.0]));
        assert!(p.space().contains(&[0.5, 0.0]));
    }

    #[test]
    fn invariant_lookup() {
        let s = make_sw(3, &[1.0, 2.0, 3.0], k(1.0)).unwrap();
        assert_eq!(s.default_invariants(), vec!["I_L_2", "I_R_2", "I_3"]);
        assert!(s.invariant("S_1_3.I_L_2").is_ok());
        assert!(s.invariant("H").is_ok());
        assert!(s.invariant("nope").is_err());
        let hh = make_hh_preset(HenonHeilesPreset::KdV12, k(1.0), k(1.0)).unwrap();
        assert_eq!(hh.default_invariants(), vec!["C_sl2", "C_h3"]);
        assert!(hh.invariant("C_sl2").is_ok());
    }
}
