//! Conformally flat and kinetic-pair metrics for central systems, and the
//! scalar curvature of a conformal metric `ds² = f(|q|)² dq²`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A conformal factor `f(r)` with optional analytic derivatives.
#[derive(Clone)]
pub struct ConformalFactor {
    label: String,
    f: RadialFn,
    df: Option<RadialFn>,
    d2f: Option<RadialFn>,
}

impl fmt::Debug for ConformalFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConformalFactor({})", self.label)
    }
}

const FD_STEP: f64 = 1e-5;

impl ConformalFactor {
    pub fn with_derivatives(label: impl Into<String>, f: RadialFn, df: RadialFn, d2f: RadialFn) -> Self {
        ConformalFactor {
            label: label.into(),
            f,
            df: Some(df),
            d2f: Some(d2f),
        }
    }

    /// A user factor; derivatives fall back to central differences.
    pub fn custom(label: impl Into<String>, f: RadialFn) -> Self {
        ConformalFactor {
            label: label.into(),
            f,
            df: None,
            d2f: None,
        }
    }

    pub fn flat() -> Self {
        Self::with_derivatives("flat", Arc::new(|_| 1.0), Arc::new(|_| 0.0), Arc::new(|_| 0.0))
    }

    /// `f = 2/(1 + κ r²)`: constant sectional curvature `κ`.
    pub fn poincare(kappa: f64) -> Self {
        Self::with_derivatives(
            format!("poincare(kappa={kappa})"),
            Arc::new(move |r| 2.0 / (1.0 + kappa * r * r)),
            Arc::new(move |r| {
                let d = 1.0 + kappa * r * r;
                -4.0 * kappa * r / (d * d)
            }),
            Arc::new(move |r| {
                let d = 1.0 + kappa * r * r;
                -4.0 * kappa / (d * d) + 16.0 * kappa * kappa * r * r / (d * d * d)
            }),
        )
    }

    /// `f = 1/(1 + κ r²)`, the normalization used by the curved oscillator
    /// and Kepler–Coulomb Hamiltonians (curvature `4κ`).
    pub fn poincare_chart(kappa: f64) -> Self {
        Self::with_derivatives(
            format!("poincare_chart(kappa={kappa})"),
            Arc::new(move |r| 1.0 / (1.0 + kappa * r * r)),
            Arc::new(move |r| {
                let d = 1.0 + kappa * r * r;
                -2.0 * kappa * r / (d * d)
            }),
            Arc::new(move |r| {
                let d = 1.0 + kappa * r * r;
                -2.0 * kappa / (d * d) + 8.0 * kappa * kappa * r * r / (d * d * d)
            }),
        )
    }

    /// `f = sqrt(1 + λ r²)`.
    pub fn darboux3(lambda: f64) -> Self {
        Self::with_derivatives(
            format!("darboux3(lambda={lambda})"),
            Arc::new(move |r| (1.0 + lambda * r * r).sqrt()),
            Arc::new(move |r| lambda * r / (1.0 + lambda * r * r).sqrt()),
            Arc::new(move |r| lambda / (1.0 + lambda * r * r).powf(1.5)),
        )
    }

    /// `f = sqrt(1 + η/r)`.
    pub fn taubnut(eta: f64) -> Self {
        Self::with_derivatives(
            format!("taubnut(eta={eta})"),
            Arc::new(move |r| (1.0 + eta / r).sqrt()),
            Arc::new(move |r| -eta / (2.0 * r * r * (1.0 + eta / r).sqrt())),
            Arc::new(move |r| {
                let f = (1.0 + eta / r).sqrt();
                eta / (r * r * r * f) - eta * eta / (4.0 * r.powi(4) * f * f * f)
            }),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        match &self.df {
            Some(df) => df(r),
            None => {
                let d = |h: f64| ((self.f)(r + h) - (self.f)(r - h)) / (2.0 * h);
                (4.0 * d(0.5 * FD_STEP) - d(FD_STEP)) / 3.0
            }
        }
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        match &self.d2f {
            Some(d2f) => d2f(r),
            None => {
                let f0 = (self.f)(r);
                let d = |h: f64| ((self.f)(r + h) - 2.0 * f0 + (self.f)(r - h)) / (h * h);
                (4.0 * d(0.5 * FD_STEP) - d(FD_STEP)) / 3.0
            }
        }
    }
}

/// Kinetic energy `A(s) p̃² + B(s) (q·p)²` with `s = |q|²`, both with
/// derivatives in `s`.
#[derive(Clone)]
pub struct KineticPair {
    pub label: String,
    pub a: RadialFn,
    pub da: RadialFn,
    pub b: RadialFn,
    pub db: RadialFn,
}

impl fmt::Debug for KineticPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KineticPair({})", self.label)
    }
}

impl KineticPair {
    /// `A = (1 + κ s)/2`, `B = κ (1 + κ s)/2`.
    pub fn beltrami(kappa: f64) -> Self {
        KineticPair {
            label: format!("beltrami(kappa={kappa})"),
            a: Arc::new(move |s| 0.5 * (1.0 + kappa * s)),
            da: Arc::new(move |_| 0.5 * kappa),
            b: Arc::new(move |s| 0.5 * kappa * (1.0 + kappa * s)),
            db: Arc::new(move |_| 0.5 * kappa * kappa),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Metric {
    Conformal(ConformalFactor),
    Kinetic(KineticPair),
}

/// The kinetic part of a central system on an `n`-dimensional space.
#[derive(Clone, Debug)]
pub struct CurvedSpaceSpec {
    pub n: usize,
    pub metric: Metric,
}

impl CurvedSpaceSpec {
    pub fn conformal(n: usize, f: ConformalFactor) -> Self {
        CurvedSpaceSpec {
            n,
            metric: Metric::Conformal(f),
        }
    }

    pub fn kinetic(n: usize, k: KineticPair) -> Self {
        CurvedSpaceSpec {
            n,
            metric: Metric::Kinetic(k),
        }
    }

    pub fn label(&self) -> &str {
        match &self.metric {
            Metric::Conformal(f) => f.label(),
            Metric::Kinetic(k) => &k.label,
        }
    }
}

/// Scalar curvature of `ds² = f(r)² dq²` in dimension `n`:
/// `R = −(n−1) [(n−4) f'² + f (2 f'' + 2 (n−1) f'/r)] / f⁴`.
pub fn scalar_curvature(space: &CurvedSpaceSpec, r: f64) -> Result<f64> {
    let f = match &space.metric {
        Metric::Conformal(f) => f,
        Metric::Kinetic(_) => {
            return Err(Error::InvalidParameter(
                "scalar curvature needs a conformal factor".into(),
            ))
        }
    };
    if !(r > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {r}")));
    }
    let fv = f.value(r);
    if !(fv > 0.0) {
        return Err(Error::domain(format!("conformal factor {} at r = {r}", fv)));
    }
    let n = space.n as f64;
    let d1 = f.derivative(r);
    let d2 = f.second_derivative(r);
    Ok(-(n - 1.0) * ((n - 4.0) * d1 * d1 + fv * (2.0 * d2 + 2.0 * (n - 1.0) * d1 / r)) / fv.powi(4))
}

/// Closed-form curvature of the Darboux III space.
pub fn darboux3_curvature(n: usize, lambda: f64, r: f64) -> f64 {
    let n = n as f64;
    let d = 1.0 + lambda * r * r;
    -lambda * (n - 1.0) * (2.0 * n + 3.0 * lambda * (n - 2.0) * r * r) / (d * d * d)
}

/// Closed-form curvature of the Taub–NUT space.
pub fn taubnut_curvature(n: usize, eta: f64, r: f64) -> f64 {
    let n = n as f64;
    eta * (n - 1.0) * (4.0 * (n - 3.0) * r + 3.0 * eta * (n - 2.0)) / (4.0 * r * (eta + r).powi(3))
}
