//! Phase spaces `T*R^n`, scalar fields with analytic gradients, the
//! canonical Poisson bracket and Hamiltonian vector fields.
//!
//! States are flat slices `[q_1..q_n, p_1..p_n]`.

pub mod sampling;
pub mod time_coef;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub use sampling::SampleBox;
pub use time_coef::TimeCoefficient;

/// Guarded quantities must exceed this in absolute value.
pub const DOMAIN_MARGIN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    data: Vec<f64>,
}

impl PhasePoint {
    pub fn new(q: &[f64], p: &[f64]) -> Result<Self> {
        if q.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                found: p.len(),
            });
        }
        let mut data = q.to_vec();
        data.extend_from_slice(p);
        Ok(PhasePoint { data })
    }

    pub fn from_flat(data: Vec<f64>) -> Result<Self> {
        if !data.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "flat phase point needs even length, got {}",
                data.len()
            )));
        }
        Ok(PhasePoint { data })
    }

    pub fn n(&self) -> usize {
        self.data.len() / 2
    }

    pub fn q(&self) -> &[f64] {
        &self.data[..self.n()]
    }

    pub fn p(&self) -> &[f64] {
        &self.data[self.n()..]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// One condition of a domain predicate.
#[derive(Clone)]
pub enum Guard {
    /// `|q_i| > margin`.
    QNonzero(usize),
    /// `|q| > margin`.
    RadiusNonzero,
    /// `f(x) > margin`.
    Positive(String, ScalarFn),
    /// `|f(x)| > margin`.
    Nonzero(String, ScalarFn),
}

impl Guard {
    fn holds(&self, n: usize, x: &[f64]) -> bool {
        match self {
            Guard::QNonzero(i) => x[*i].abs() > DOMAIN_MARGIN,
            Guard::RadiusNonzero => x[..n].iter().map(|v| v * v).sum::<f64>().sqrt() > DOMAIN_MARGIN,
            Guard::Positive(_, f) => f(x) > DOMAIN_MARGIN,
            Guard::Nonzero(_, f) => f(x).abs() > DOMAIN_MARGIN,
        }
    }

    fn describe(&self) -> String {
        match self {
            Guard::QNonzero(i) => format!("q{} != 0", i + 1),
            Guard::RadiusNonzero => "|q| != 0".to_string(),
            Guard::Positive(l, _) => format!("{l} > 0"),
            Guard::Nonzero(l, _) => format!("{l} != 0"),
        }
    }
}

impl fmt::Debug for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Guard({})", self.describe())
    }
}

/// Phase space `T*R^n` restricted by a conjunction of guards.
#[derive(Clone, Debug)]
pub struct PhaseSpace {
    n: usize,
    guards: Vec<Guard>,
}

impl PhaseSpace {
    pub fn new(n: usize) -> Self {
        PhaseSpace { n, guards: Vec::new() }
    }

    pub fn with_guard(mut self, g: Guard) -> Self {
        self.guards.push(g);
        self
    }

    /// Adds `q_i != 0` for every `i` with `c[i] != 0`.
    pub fn with_centrifugal_guards(mut self, c: &[f64]) -> Self {
        for (i, &ci) in c.iter().enumerate() {
            if ci != 0.0 {
                self.guards.push(Guard::QNonzero(i));
            }
        }
        self
    }

    pub fn extend(mut self, other: &PhaseSpace) -> Self {
        self.guards.extend(other.guards.iter().cloned());
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn guards(&self) -> &[Guard] {
        &self.guards
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == 2 * self.n && x.iter().all(|v| v.is_finite()) && self.guards.iter().all(|g| g.holds(self.n, x))
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != 2 * self.n {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n,
                found: x.len(),
            });
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite coordinate {v}")));
        }
        for g in &self.guards {
            if !g.holds(self.n, x) {
                return Err(Error::domain(format!("{} fails", g.describe())));
            }
        }
        Ok(())
    }
}

/// A real function on `T*R^n`, possibly depending on time, with an analytic
/// gradient ordered `∂q_1..∂q_n, ∂p_1..∂p_n`.
pub trait ScalarField: Send + Sync {
    /// Configuration dimension `n`.
    fn n(&self) -> usize;
    fn value(&self, t: f64, x: &[f64]) -> Result<f64>;
    fn gradient(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()>;
    fn is_time_dependent(&self) -> bool {
        false
    }
}

type ValueFn = dyn Fn(f64, &[f64]) -> Result<f64> + Send + Sync;
type GradFn = dyn Fn(f64, &[f64], &mut [f64]) -> Result<()> + Send + Sync;

/// A scalar field assembled from closures.
#[derive(Clone)]
pub struct FnField {
    n: usize,
    time_dependent: bool,
    value: Arc<ValueFn>,
    gradient: Arc<GradFn>,
}

impl FnField {
    pub fn new<V, G>(n: usize, value: V, gradient: G) -> Self
    where
        V: Fn(f64, &[f64]) -> Result<f64> + Send + Sync + 'static,
        G: Fn(f64, &[f64], &mut [f64]) -> Result<()> + Send + Sync + 'static,
    {
        FnField {
            n,
            time_dependent: false,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }

    /// A time-independent field from infallible closures.
    pub fn autonomous<V, G>(n: usize, value: V, gradient: G) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self::new(
            n,
            move |_, x| Ok(value(x)),
            move |_, x, out| {
                gradient(x, out);
                Ok(())
            },
        )
    }

    pub fn time_dependent(mut self) -> Self {
        self.time_dependent = true;
        self
    }
}

impl fmt::Debug for FnField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnField").field("n", &self.n).finish_non_exhaustive()
    }
}

impl ScalarField for FnField {
    fn n(&self) -> usize {
        self.n
    }

    fn value(&self, t: f64, x: &[f64]) -> Result<f64> {
        (self.value)(t, x)
    }

    fn gradient(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        (self.gradient)(t, x, out)
    }

    fn is_time_dependent(&self) -> bool {
        self.time_dependent
    }
}

/// The coordinate function `q_i` (or `p_i` when `momentum` is set).
pub fn coordinate_field(n: usize, i: usize, momentum: bool) -> FnField {
    let k = if momentum { n + i } else { i };
    FnField::autonomous(
        n,
        move |x| x[k],
        move |_, out| {
            out.fill(0.0);
            out[k] = 1.0;
        },
    )
}

fn check_state(n: usize, x: &[f64]) -> Result<()> {
    if x.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            found: x.len(),
        });
    }
    Ok(())
}

/// `{f, g} = Σ_i (∂f/∂q_i ∂g/∂p_i − ∂g/∂q_i ∂f/∂p_i)` from analytic gradients.
pub fn canonical_bracket(f: &dyn ScalarField, g: &dyn ScalarField, t: f64, x: &[f64]) -> Result<f64> {
    let n = f.n();
    if g.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.n(),
        });
    }
    check_state(n, x)?;
    let mut df = vec![0.0; 2 * n];
    let mut dg = vec![0.0; 2 * n];
    f.gradient(t, x, &mut df)?;
    g.gradient(t, x, &mut dg)?;
    Ok(bracket_from_gradients(n, &df, &dg))
}

pub fn bracket_from_gradients(n: usize, df: &[f64], dg: &[f64]) -> f64 {
    (0..n).map(|i| df[i] * dg[n + i] - dg[i] * df[n + i]).sum()
}

/// Converts a gradient into the Hamiltonian field `(∂h/∂p, −∂h/∂q)` in place.
pub fn gradient_to_field(n: usize, grad: &[f64], out: &mut [f64]) {
    for i in 0..n {
        out[i] = grad[n + i];
        out[n + i] = -grad[i];
    }
}

/// `X_h = (∂h/∂p, −∂h/∂q)` at `(t, x)`.
pub fn hamiltonian_vector_field(h: &dyn ScalarField, t: f64, x: &[f64]) -> Result<Vec<f64>> {
    let n = h.n();
    check_state(n, x)?;
    let mut grad = vec![0.0; 2 * n];
    h.gradient(t, x, &mut grad)?;
    let mut out = vec![0.0; 2 * n];
    gradient_to_field(n, &grad, &mut out);
    Ok(out)
}

/// Worst relative error between the analytic gradient and central
/// differences with step `1e-6·max(1, |x_k|)`.
pub fn grad_check(f: &dyn ScalarField, t: f64, x: &[f64]) -> Result<f64> {
    let n = f.n();
    check_state(n, x)?;
    let mut analytic = vec![0.0; 2 * n];
    f.gradient(t, x, &mut analytic)?;
    let mut probe = x.to_vec();
    let mut worst: f64 = 0.0;
    for k in 0..2 * n {
        let h = 1e-6 * x[k].abs().max(1.0);
        probe[k] = x[k] + h;
        let up = f.value(t, &probe)?;
        probe[k] = x[k] - h;
        let down = f.value(t, &probe)?;
        probe[k] = x[k];
        let fd = (up - down) / (2.0 * h);
        let err = (fd - analytic[k]).abs() / analytic[k].abs().max(1.0);
        worst = worst.max(err);
    }
    Ok(worst)
}
