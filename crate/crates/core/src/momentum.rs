//! Momentum-map realizations `J = (h_1, .., h_r)` of a Lie algebra by
//! functions on phase space, and Hamiltonians `h = F(t, J(x))` composed
//! from them.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::{check_len, DualFunction, DualPoint, LieAlgebra, PolynomialFunction};
use crate::error::{Error, Result};
use crate::integrate::{OdeSystem, Trajectory};
use crate::phase::{bracket_from_gradients, gradient_to_field, PhaseSpace, SampleBox, ScalarField};

/// A Lie algebra together with functions `h_α` on a phase space whose
/// canonical brackets reproduce its structure constants.
#[derive(Clone)]
pub struct Realization {
    name: String,
    algebra: Arc<LieAlgebra>,
    fields: Vec<Arc<dyn ScalarField>>,
    space: PhaseSpace,
    sample_box: SampleBox,
}

impl fmt::Debug for Realization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Realization")
            .field("name", &self.name)
            .field("algebra", &self.algebra.name())
            .field("n", &self.space.n())
            .finish()
    }
}

impl Realization {
    pub fn new(
        name: impl Into<String>,
        algebra: Arc<LieAlgebra>,
        fields: Vec<Arc<dyn ScalarField>>,
        space: PhaseSpace,
    ) -> Result<Self> {
        check_len(algebra.dim(), fields.len())?;
        let n = space.n();
        for f in &fields {
            check_len(n, f.n())?;
        }
        Ok(Realization {
            name: name.into(),
            algebra,
            fields,
            sample_box: SampleBox::uniform(n, (0.5, 1.5), (-1.0, 1.0)),
            space,
        })
    }

    pub fn with_sample_box(mut self, b: SampleBox) -> Self {
        self.sample_box = b;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.algebra
    }

    pub fn fields(&self) -> &[Arc<dyn ScalarField>] {
        &self.fields
    }

    pub fn space(&self) -> &PhaseSpace {
        &self.space
    }

    pub fn sample_box(&self) -> &SampleBox {
        &self.sample_box
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn r(&self) -> usize {
        self.fields.len()
    }

    /// `J(x) = (h_1(x), .., h_r(x))`.
    pub fn evaluate_j(&self, x: &[f64]) -> Result<DualPoint> {
        self.space.check(x)?;
        let v = self
            .fields
            .iter()
            .map(|f| f.value(0.0, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(DualPoint(v))
    }

    /// Values and stacked gradients of every `h_α` at `x`.
    fn values_and_gradients(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let dim = 2 * self.n();
        let mut vals = Vec::with_capacity(self.r());
        let mut grads = Vec::with_capacity(self.r());
        for f in &self.fields {
            vals.push(f.value(0.0, x)?);
            let mut g = vec![0.0; dim];
            f.gradient(0.0, x, &mut g)?;
            grads.push(g);
        }
        Ok((vals, grads))
    }

    /// Draws seeded in-domain sample points `(t, x)`.
    pub fn samples(&self, count: usize, seed: u64) -> Result<Vec<(f64, Vec<f64>)>> {
        self.sample_box.sample(seed, count, |_, x| self.space.contains(x))
    }

    /// Max over samples and pairs of `|{h_α, h_β} − Σ_γ c_{αβ}^γ h_γ|`.
    pub fn verify(&self, samples: usize, seed: u64) -> Result<f64> {
        let pts = self.samples(samples, seed)?;
        let n = self.n();
        let r = self.r();
        let residuals = pts
            .par_iter()
            .map(|(_, x)| {
                let (vals, grads) = self.values_and_gradients(x)?;
                let mut worst: f64 = 0.0;
                for a in 0..r {
                    for b in a + 1..r {
                        let lhs = bracket_from_gradients(n, &grads[a], &grads[b]);
                        let rhs: f64 = (0..r).map(|g| self.algebra.c(a, b, g) * vals[g]).sum();
                        worst = worst.max((lhs - rhs).abs());
                    }
                }
                Ok(worst)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(residuals.into_iter().fold(0.0, f64::max))
    }

    /// The pullback `J*C` of a named Casimir of the algebra.
    pub fn casimir_pullback(self: &Arc<Self>, name: &str) -> Result<ComposedHamiltonian> {
        let c = self
            .algebra
            .casimirs()
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.clone())
            .ok_or_else(|| Error::unknown("casimir", name))?;
        compose(self.clone(), Arc::new(PolynomialFunction::new(c)))
    }

    /// Max of `|{J*C, h_α}|` over samples, Casimirs and `α`.
    pub fn casimir_commutation(self: &Arc<Self>, samples: usize, seed: u64) -> Result<f64> {
        let pts = self.samples(samples, seed)?;
        let pulled = self
            .algebra
            .casimirs()
            .iter()
            .map(|(name, _)| self.casimir_pullback(name))
            .collect::<Result<Vec<_>>>()?;
        let n = self.n();
        let res = pts
            .par_iter()
            .map(|(_, x)| {
                let (_, grads) = self.values_and_gradients(x)?;
                let mut worst: f64 = 0.0;
                let mut gc = vec![0.0; 2 * n];
                for c in &pulled {
                    c.gradient(0.0, x, &mut gc)?;
                    for g in &grads {
                        worst = worst.max(bracket_from_gradients(n, &gc, g).abs());
                    }
                }
                Ok(worst)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(res.into_iter().fold(0.0, f64::max))
    }
}

type DualValueFn = dyn Fn(f64, &[f64]) -> Result<f64> + Send + Sync;
type DualPartialsFn = dyn Fn(f64, &[f64], &mut [f64]) -> Result<()> + Send + Sync;

/// A dual function built from closures.
#[derive(Clone)]
pub struct FnDual {
    arity: usize,
    value: Arc<DualValueFn>,
    partials: Arc<DualPartialsFn>,
}

impl FnDual {
    pub fn new<V, P>(arity: usize, value: V, partials: P) -> Self
    where
        V: Fn(f64, &[f64]) -> Result<f64> + Send + Sync + 'static,
        P: Fn(f64, &[f64], &mut [f64]) -> Result<()> + Send + Sync + 'static,
    {
        FnDual {
            arity,
            value: Arc::new(value),
            partials: Arc::new(partials),
        }
    }

    /// `F(λ) = λ_i`.
    pub fn projection(arity: usize, i: usize) -> Self {
        Self::new(
            arity,
            move |_, l| Ok(l[i]),
            move |_, _, out| {
                out.fill(0.0);
                out[i] = 1.0;
                Ok(())
            },
        )
    }
}

impl DualFunction for FnDual {
    fn arity(&self) -> usize {
        self.arity
    }

    fn value(&self, t: f64, lambda: &[f64]) -> Result<f64> {
        (self.value)(t, lambda)
    }

    fn partials(&self, t: f64, lambda: &[f64], out: &mut [f64]) -> Result<()> {
        (self.partials)(t, lambda, out)
    }
}

/// `h(t, x) = F(t, J(x))` with its chain-rule gradient.
#[derive(Clone)]
pub struct ComposedHamiltonian {
    realization: Arc<Realization>,
    outer: Arc<dyn DualFunction>,
}

impl fmt::Debug for ComposedHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComposedHamiltonian")
            .field("realization", &self.realization.name())
            .finish_non_exhaustive()
    }
}

/// Builds `F ∘ J`; fails when `F` does not take `r` arguments.
pub fn compose(realization: Arc<Realization>, outer: Arc<dyn DualFunction>) -> Result<ComposedHamiltonian> {
    check_len(realization.r(), outer.arity())?;
    Ok(ComposedHamiltonian { realization, outer })
}

impl ComposedHamiltonian {
    pub fn realization(&self) -> &Arc<Realization> {
        &self.realization
    }

    pub fn outer(&self) -> &Arc<dyn DualFunction> {
        &self.outer
    }

    fn lambda(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.realization.fields.iter().map(|f| f.value(0.0, x)).collect()
    }

    /// `Σ_α ∂F/∂λ_α(t, J(x)) X_{h_α}(x)`, assembled term by term.
    pub fn decomposed_field(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        let lambda = self.lambda(x)?;
        let mut dfl = vec![0.0; lambda.len()];
        self.outer.partials(t, &lambda, &mut dfl)?;
        let mut out = vec![0.0; 2 * n];
        let mut grad = vec![0.0; 2 * n];
        let mut xa = vec![0.0; 2 * n];
        for (f, &w) in self.realization.fields.iter().zip(&dfl) {
            f.gradient(0.0, x, &mut grad)?;
            gradient_to_field(n, &grad, &mut xa);
            for (o, v) in out.iter_mut().zip(&xa) {
                *o += w * v;
            }
        }
        Ok(out)
    }
}

impl ScalarField for ComposedHamiltonian {
    fn n(&self) -> usize {
        self.realization.n()
    }

    fn value(&self, t: f64, x: &[f64]) -> Result<f64> {
        let lambda = self.lambda(x)?;
        self.outer.value(t, &lambda)
    }

    fn gradient(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        let lambda = self.lambda(x)?;
        let mut dfl = vec![0.0; lambda.len()];
        self.outer.partials(t, &lambda, &mut dfl)?;
        out.fill(0.0);
        let mut grad = vec![0.0; out.len()];
        for (f, &w) in self.realization.fields.iter().zip(&dfl) {
            if w == 0.0 {
                continue;
            }
            f.gradient(0.0, x, &mut grad)?;
            for (o, g) in out.iter_mut().zip(&grad) {
                *o += w * g;
            }
        }
        Ok(())
    }

    fn is_time_dependent(&self) -> bool {
        self.outer.is_time_dependent()
    }
}

/// The KKS Hamiltonian flow of `F(t, ·)` on `g*`, as an ODE.
#[derive(Clone)]
pub struct DualFlow {
    algebra: Arc<LieAlgebra>,
    outer: Arc<dyn DualFunction>,
}

impl DualFlow {
    pub fn new(algebra: Arc<LieAlgebra>, outer: Arc<dyn DualFunction>) -> Result<Self> {
        check_len(algebra.dim(), outer.arity())?;
        Ok(DualFlow { algebra, outer })
    }
}

impl OdeSystem for DualFlow {
    fn dim(&self) -> usize {
        self.algebra.dim()
    }

    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]) -> Result<()> {
        let mut grad = vec![0.0; x.len()];
        self.outer.partials(t, x, &mut grad)?;
        let v = self.algebra.kks_vector_field_from_gradient(&grad, x)?;
        dx.copy_from_slice(&v);
        Ok(())
    }

    fn in_domain(&self, _t: f64, x: &[f64]) -> bool {
        x.iter().all(|v| v.is_finite())
    }
}

/// Checks that `J` maps a trajectory of `F ∘ J` onto a solution of the KKS
/// flow of `F`: differentiates `J(x(t))` with a five-point stencil on the
/// (uniform) sample grid and returns the worst deviation from the KKS field.
pub fn pushforward_residual(realization: &Realization, outer: &dyn DualFunction, traj: &Trajectory) -> Result<f64> {
    let m = traj.len();
    if m < 5 {
        return Err(Error::TooShort { needed: 5, got: m });
    }
    let h = uniform_step(&traj.times)?;
    let js = traj
        .states
        .iter()
        .map(|x| realization.evaluate_j(x).map(|d| d.0))
        .collect::<Result<Vec<_>>>()?;
    let r = realization.r();
    let mut worst: f64 = 0.0;
    for k in 2..m - 2 {
        let v = realization
            .algebra()
            .kks_vector_field(outer, traj.times[k], &DualPoint(js[k].clone()))?;
        for a in 0..r {
            let d = (-js[k + 2][a] + 8.0 * js[k + 1][a] - 8.0 * js[k - 1][a] + js[k - 2][a]) / (12.0 * h);
            worst = worst.max((d - v[a]).abs());
        }
    }
    Ok(worst)
}

/// Returns the common spacing of `times`, or an error if the grid is not
/// uniform to relative precision `1e-9`.
pub(crate) fn uniform_step(times: &[f64]) -> Result<f64> {
    let m = times.len();
    if m < 2 {
        return Err(Error::TooShort { needed: 2, got: m });
    }
    let h = (times[m - 1] - times[0]) / (m - 1) as f64;
    for w in times.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1e-300) {
            return Err(Error::InvalidParameter(
                "finite-difference checks need a uniform sample grid".into(),
            ));
        }
    }
    Ok(h)
}

/// Max over samples of `|X_h − Σ ∂F/∂λ_α X_{h_α}|` where `X_h` comes from
/// the chain-rule gradient of `h`.
pub fn decomposition_residual(h: &ComposedHamiltonian, samples: &[(f64, Vec<f64>)]) -> Result<f64> {
    let res = samples
        .par_iter()
        .map(|(t, x)| {
            let direct = crate::phase::hamiltonian_vector_field(h, *t, x)?;
            let split = h.decomposed_field(*t, x)?;
            Ok(direct
                .iter()
                .zip(&split)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(res.into_iter().fold(0.0, f64::max))
}
