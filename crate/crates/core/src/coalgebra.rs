//! Replication of a realization over `N` copies of its phase space through
//! the primitive coproduct, and the constants of motion obtained by composing
//! a Casimir with the partial sums over copies.
//!
//! Copy `ℓ` (0-based) of a base space of dimension `n_b` occupies
//! `q[ℓ n_b .. (ℓ+1) n_b]` and `p[ℓ n_b .. (ℓ+1) n_b]` of the flat state, so
//! `N` one-dimensional copies are the same thing as one `N`-dimensional space.
//! Public indices in names and in [`InvariantField::permute`] are 1-based.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_traits::Zero;
use rayon::prelude::*;

use crate::algebra::{LieAlgebra, Polynomial, PolynomialFunction};
use crate::error::{Error, Result};
use crate::integrate::OdeSystem;
use crate::momentum::{compose, ComposedHamiltonian, Realization};
use crate::phase::{bracket_from_gradients, Guard, PhaseSpace, SampleBox, ScalarField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A coproduct level: `Left` sums copies `1..=k`, `Right` sums `N-k+1..=N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SidedLevel {
    pub side: Side,
    pub k: usize,
}

impl SidedLevel {
    pub fn left(k: usize) -> Self {
        SidedLevel { side: Side::Left, k }
    }

    pub fn right(k: usize) -> Self {
        SidedLevel { side: Side::Right, k }
    }
}

/// Index map between the flat replicated state and one copy.
#[derive(Clone, Copy, Debug)]
struct Layout {
    n_b: usize,
    copies: usize,
}

impl Layout {
    fn total_n(&self) -> usize {
        self.n_b * self.copies
    }

    fn extract(&self, copy: usize, x: &[f64], out: &mut [f64]) {
        let n = self.total_n();
        let o = copy * self.n_b;
        out[..self.n_b].copy_from_slice(&x[o..o + self.n_b]);
        out[self.n_b..].copy_from_slice(&x[n + o..n + o + self.n_b]);
    }

    fn scatter_add(&self, copy: usize, w: f64, g: &[f64], out: &mut [f64]) {
        let n = self.total_n();
        let o = copy * self.n_b;
        for i in 0..self.n_b {
            out[o + i] += w * g[i];
            out[n + o + i] += w * g[self.n_b + i];
        }
    }
}

/// `Σ_{ℓ ∈ set} h_α(x_ℓ)` on the replicated space.
struct CopySum {
    layout: Layout,
    terms: Vec<(usize, Arc<dyn ScalarField>)>,
}

impl ScalarField for CopySum {
    fn n(&self) -> usize {
        self.layout.total_n()
    }

    fn value(&self, t: f64, x: &[f64]) -> Result<f64> {
        let mut sub = vec![0.0; 2 * self.layout.n_b];
        let mut s = 0.0;
        for (copy, f) in &self.terms {
            self.layout.extract(*copy, x, &mut sub);
            s += f.value(t, &sub)?;
        }
        Ok(s)
    }

    fn gradient(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        let mut sub = vec![0.0; 2 * self.layout.n_b];
        let mut g = vec![0.0; 2 * self.layout.n_b];
        out.fill(0.0);
        for (copy, f) in &self.terms {
            self.layout.extract(*copy, x, &mut sub);
            f.gradient(t, &sub, &mut g)?;
            self.layout.scatter_add(*copy, 1.0, &g, out);
        }
        Ok(())
    }
}

/// `N` copies of realizations of one algebra, each with its own parameters.
pub struct ReplicatedSpace {
    name: String,
    algebra: Arc<LieAlgebra>,
    copies: Vec<Arc<Realization>>,
    layout: Layout,
    space: PhaseSpace,
    sample_box: SampleBox,
}

impl fmt::Debug for ReplicatedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReplicatedSpace")
            .field("name", &self.name)
            .field("copies", &self.copies.len())
            .field("n_b", &self.layout.n_b)
            .finish()
    }
}

fn remap_guard(layout: Layout, copy: usize, g: &Guard) -> Guard {
    let lift = move |f: crate::phase::ScalarFn| -> crate::phase::ScalarFn {
        Arc::new(move |x: &[f64]| {
            let mut sub = vec![0.0; 2 * layout.n_b];
            layout.extract(copy, x, &mut sub);
            f(&sub)
        })
    };
    match g {
        Guard::QNonzero(i) => Guard::QNonzero(copy * layout.n_b + i),
        Guard::RadiusNonzero => {
            let n_b = layout.n_b;
            Guard::Positive(
                format!("|q_({})|", copy + 1),
                lift(Arc::new(move |x: &[f64]| {
                    x[..n_b].iter().map(|v| v * v).sum::<f64>().sqrt()
                })),
            )
        }
        Guard::Positive(l, f) => Guard::Positive(format!("{l} (copy {})", copy + 1), lift(f.clone())),
        Guard::Nonzero(l, f) => Guard::Nonzero(format!("{l} (copy {})", copy + 1), lift(f.clone())),
    }
}

impl ReplicatedSpace {
    pub fn new(name: impl Into<String>, copies: Vec<Arc<Realization>>) -> Result<Self> {
        let first = copies
            .first()
            .ok_or_else(|| Error::InvalidParameter("need at least one copy".into()))?;
        let algebra = first.algebra().clone();
        let n_b = first.n();
        for c in &copies {
            if c.algebra().name() != algebra.name() {
                return Err(Error::InvalidParameter(format!(
                    "copies realize different algebras: {} and {}",
                    algebra.name(),
                    c.algebra().name()
                )));
            }
            if c.n() != n_b {
                return Err(Error::DimensionMismatch {
                    expected: n_b,
                    found: c.n(),
                });
            }
        }
        let layout = Layout {
            n_b,
            copies: copies.len(),
        };
        let mut space = PhaseSpace::new(layout.total_n());
        let mut sample_box = SampleBox {
            q: Vec::new(),
            p: Vec::new(),
            t: first.sample_box().t,
        };
        for (copy, c) in copies.iter().enumerate() {
            for g in c.space().guards() {
                space = space.with_guard(remap_guard(layout, copy, g));
            }
            sample_box.q.extend_from_slice(&c.sample_box().q);
            sample_box.p.extend_from_slice(&c.sample_box().p);
        }
        Ok(ReplicatedSpace {
            name: name.into(),
            algebra,
            copies,
            layout,
            space,
            sample_box,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.algebra
    }

    pub fn copies(&self) -> usize {
        self.copies.len()
    }

    pub fn base_n(&self) -> usize {
        self.layout.n_b
    }

    pub fn total_n(&self) -> usize {
        self.layout.total_n()
    }

    pub fn space(&self) -> &PhaseSpace {
        &self.space
    }

    pub fn sample_box(&self) -> &SampleBox {
        &self.sample_box
    }

    pub fn with_sample_box(mut self, b: SampleBox) -> Self {
        self.sample_box = b;
        self
    }

    /// 0-based copy indices summed at `level`.
    pub fn level_set(&self, level: SidedLevel) -> Result<Vec<usize>> {
        let n = self.copies();
        if level.k == 0 || level.k > n {
            return Err(Error::OutOfRange(format!("level {} with {n} copies", level.k)));
        }
        Ok(match level.side {
            Side::Left => (0..level.k).collect(),
            Side::Right => (n - level.k..n).collect(),
        })
    }

    /// The realization by the partial sums over `set` (0-based copies).
    pub fn realization_for(&self, set: &[usize]) -> Result<Arc<Realization>> {
        if let Some(&bad) = set.iter().find(|&&c| c >= self.copies()) {
            return Err(Error::OutOfRange(format!("copy {} of {}", bad + 1, self.copies())));
        }
        let fields: Vec<Arc<dyn ScalarField>> = (0..self.algebra.dim())
            .map(|a| {
                Arc::new(CopySum {
                    layout: self.layout,
                    terms: set.iter().map(|&c| (c, self.copies[c].fields()[a].clone())).collect(),
                }) as Arc<dyn ScalarField>
            })
            .collect();
        let label: Vec<String> = set.iter().map(|c| (c + 1).to_string()).collect();
        Ok(Arc::new(
            Realization::new(
                format!("{}[{}]", self.name, label.join(",")),
                self.algebra.clone(),
                fields,
                self.space.clone(),
            )?
            .with_sample_box(self.sample_box.clone()),
        ))
    }

    /// Sided replicated Hamiltonians `h^{(k)}_α`.
    pub fn replicate(&self, level: SidedLevel) -> Result<Vec<Arc<dyn ScalarField>>> {
        let set = self.level_set(level)?;
        Ok(self.realization_for(&set)?.fields().to_vec())
    }

    /// The realization summed over all copies.
    pub fn full_realization(&self) -> Result<Arc<Realization>> {
        let all: Vec<usize> = (0..self.copies()).collect();
        self.realization_for(&all)
    }

    fn default_casimir(&self) -> Result<Polynomial> {
        self.algebra
            .casimirs()
            .first()
            .map(|(_, c)| c.clone())
            .ok_or_else(|| Error::InvalidParameter(format!("algebra {} ships no Casimir", self.algebra.name())))
    }

    /// `C` composed with the partial sums over `set`.
    pub fn invariant_on(
        self: &Arc<Self>,
        casimir: &Polynomial,
        set: Vec<usize>,
        name: String,
    ) -> Result<InvariantField> {
        let residual = self.algebra.casimir_check(casimir)?;
        if !residual.is_zero() {
            return Err(Error::NotCasimir(residual.to_string()));
        }
        let mut set = set;
        set.sort_unstable();
        set.dedup();
        let composed = compose(
            self.realization_for(&set)?,
            Arc::new(PolynomialFunction::new(casimir.clone())),
        )?;
        Ok(InvariantField {
            name,
            set,
            casimir: casimir.clone(),
            composed,
            space: self.clone(),
        })
    }

    /// `I^{(k)}_{L/R} = C(h^{(k)}_1, .., h^{(k)}_r)`.
    pub fn invariant(self: &Arc<Self>, casimir: &Polynomial, level: SidedLevel) -> Result<InvariantField> {
        let set = self.level_set(level)?;
        let name = if level.k == self.copies() {
            format!("I_{}", level.k)
        } else {
            match level.side {
                Side::Left => format!("I_L_{}", level.k),
                Side::Right => format!("I_R_{}", level.k),
            }
        };
        self.invariant_on(casimir, set, name)
    }

    /// Resolves `I_L_k`, `I_R_k`, `I_N` and `S_i_j.<name>` using the
    /// algebra's first Casimir.
    pub fn invariant_named(self: &Arc<Self>, name: &str) -> Result<InvariantField> {
        let unknown = || Error::unknown("invariant", name);
        if let Some(rest) = name.strip_prefix("S_") {
            let (pair, inner) = rest.split_once('.').ok_or_else(unknown)?;
            let (i, j) = pair.split_once('_').ok_or_else(unknown)?;
            let i: usize = i.parse().map_err(|_| unknown())?;
            let j: usize = j.parse().map_err(|_| unknown())?;
            return self.invariant_named(inner)?.permute(i, j);
        }
        let c = self.default_casimir()?;
        let parse_k = |s: &str| s.parse::<usize>().map_err(|_| unknown());
        let level = if let Some(k) = name.strip_prefix("I_L_") {
            SidedLevel::left(parse_k(k)?)
        } else if let Some(k) = name.strip_prefix("I_R_") {
            SidedLevel::right(parse_k(k)?)
        } else if let Some(k) = name.strip_prefix("I_") {
            let k = parse_k(k)?;
            if k != self.copies() {
                return Err(unknown());
            }
            SidedLevel::left(k)
        } else {
            return Err(unknown());
        };
        let mut inv = self.invariant(&c, level)?;
        inv.name = name.to_string();
        Ok(inv)
    }

    /// The left family `I_L_2..I_L_{N-1}, I_N` and the right family
    /// `I_R_2..I_R_{N-1}, I_N`. Each family is in involution; members of
    /// different families over overlapping copies need not commute.
    pub fn sided_families(&self) -> [Vec<String>; 2] {
        let n = self.copies();
        let mut left: Vec<String> = (2..n).map(|k| format!("I_L_{k}")).collect();
        let mut right: Vec<String> = (2..n).map(|k| format!("I_R_{k}")).collect();
        left.push(format!("I_{n}"));
        right.push(format!("I_{n}"));
        [left, right]
    }

    /// Standard invariant names: `I_L_2..I_L_{N-1}`, `I_R_2..I_R_{N-1}`, `I_N`.
    pub fn standard_invariant_names(&self) -> Vec<String> {
        let n = self.copies();
        let mut names: Vec<String> = (2..n).map(|k| format!("I_L_{k}")).collect();
        names.extend((2..n).map(|k| format!("I_R_{k}")));
        names.push(format!("I_{n}"));
        names
    }
}

/// A Casimir composed with the partial sums over a set of copies.
#[derive(Clone)]
pub struct InvariantField {
    name: String,
    set: Vec<usize>,
    casimir: Polynomial,
    composed: ComposedHamiltonian,
    space: Arc<ReplicatedSpace>,
}

impl fmt::Debug for InvariantField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InvariantField")
            .field("name", &self.name)
            .field("copies", &self.copy_set())
            .finish()
    }
}

impl InvariantField {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// 1-based copies whose sums enter the invariant.
    pub fn copy_set(&self) -> Vec<usize> {
        self.set.iter().map(|c| c + 1).collect()
    }

    /// Applies the swap of copies `i` and `j` (1-based). Coordinates and
    /// per-copy parameters travel together, so the result is the same
    /// Casimir over the image set.
    pub fn permute(&self, i: usize, j: usize) -> Result<InvariantField> {
        let n = self.space.copies();
        if i == j || i == 0 || j == 0 || i > n || j > n {
            return Err(Error::OutOfRange(format!("swap ({i}, {j}) with {n} copies")));
        }
        let (a, b) = (i - 1, j - 1);
        let set = self
            .set
            .iter()
            .map(|&c| {
                if c == a {
                    b
                } else if c == b {
                    a
                } else {
                    c
                }
            })
            .collect();
        self.space
            .invariant_on(&self.casimir, set, format!("S_{i}_{j}.{}", self.name))
    }
}

impl ScalarField for InvariantField {
    fn n(&self) -> usize {
        self.composed.n()
    }

    fn value(&self, t: f64, x: &[f64]) -> Result<f64> {
        self.composed.value(t, x)
    }

    fn gradient(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.composed.gradient(t, x, out)
    }
}

/// `L_ij = (q_i p_j − q_j p_i)² + c_i q_j²/q_i² + c_j q_i²/q_j²` for
/// 1-based coordinate indices of a flat state.
pub fn angular_block(x: &[f64], i: usize, j: usize, ci: f64, cj: f64) -> Result<f64> {
    let n = x.len() / 2;
    if i == 0 || j == 0 || i > n || j > n || i == j {
        return Err(Error::OutOfRange(format!("angular block ({i}, {j}) in dimension {n}")));
    }
    let (qi, qj, pi, pj) = (x[i - 1], x[j - 1], x[n + i - 1], x[n + j - 1]);
    let jij = qi * pj - qj * pi;
    let mut l = jij * jij;
    if ci != 0.0 {
        if qi.abs() <= crate::phase::DOMAIN_MARGIN {
            return Err(Error::domain(format!("q{i} = 0 with c{i} != 0")));
        }
        l += ci * qj * qj / (qi * qi);
    }
    if cj != 0.0 {
        if qj.abs() <= crate::phase::DOMAIN_MARGIN {
            return Err(Error::domain(format!("q{j} = 0 with c{j} != 0")));
        }
        l += cj * qi * qi / (qj * qj);
    }
    Ok(l)
}

/// The same system on each of `N` copies.
pub struct DiagonalProlongation {
    base: Arc<dyn OdeSystem>,
    layout: Layout,
}

pub fn diagonal_prolongation(base: Arc<dyn OdeSystem>, copies: usize) -> Result<DiagonalProlongation> {
    if copies == 0 {
        return Err(Error::InvalidParameter("need at least one copy".into()));
    }
    let d = base.dim();
    if !d.is_multiple_of(2) {
        return Err(Error::InvalidParameter("base system must live on T*R^n".into()));
    }
    Ok(DiagonalProlongation {
        base,
        layout: Layout { n_b: d / 2, copies },
    })
}

impl OdeSystem for DiagonalProlongation {
    fn dim(&self) -> usize {
        2 * self.layout.total_n()
    }

    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]) -> Result<()> {
        let d = 2 * self.layout.n_b;
        let mut sub = vec![0.0; d];
        let mut dsub = vec![0.0; d];
        dx.fill(0.0);
        for c in 0..self.layout.copies {
            self.layout.extract(c, x, &mut sub);
            self.base.rhs(t, &sub, &mut dsub)?;
            self.layout.scatter_add(c, 1.0, &dsub, dx);
        }
        Ok(())
    }

    fn in_domain(&self, t: f64, x: &[f64]) -> bool {
        let mut sub = vec![0.0; 2 * self.layout.n_b];
        (0..self.layout.copies).all(|c| {
            self.layout.extract(c, x, &mut sub);
            self.base.in_domain(t, &sub)
        })
    }
}

/// Max over samples of all pairwise brackets among `fields` and between
/// each field and each `h^{(N)}_α`.
pub fn involution_report(
    fields: &[Arc<dyn ScalarField>],
    space: &ReplicatedSpace,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let full = space.full_realization()?;
    let n = space.total_n();
    let pts = space
        .sample_box()
        .sample(seed, samples, |_, x| space.space().contains(x))?;
    let res = pts
        .par_iter()
        .map(|(t, x)| {
            let grads = fields
                .iter()
                .map(|f| {
                    let mut g = vec![0.0; 2 * n];
                    f.gradient(*t, x, &mut g).map(|_| g)
                })
                .collect::<Result<Vec<_>>>()?;
            let hs = full
                .fields()
                .iter()
                .map(|f| {
                    let mut g = vec![0.0; 2 * n];
                    f.gradient(*t, x, &mut g).map(|_| g)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut worst: f64 = 0.0;
            for (a, ga) in grads.iter().enumerate() {
                for gb in &grads[a + 1..] {
                    worst = worst.max(bracket_from_gradients(n, ga, gb).abs());
                }
                for gh in &hs {
                    worst = worst.max(bracket_from_gradients(n, ga, gh).abs());
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(res.into_iter().fold(0.0, f64::max))
}

/// Numerical rank of the Jacobian of `fields` at `x`: singular values above
/// `rel_tol` times the largest.
pub fn jacobian_rank(fields: &[Arc<dyn ScalarField>], t: f64, x: &[f64], rel_tol: f64) -> Result<usize> {
    let cols = x.len();
    let mut m = DMatrix::<f64>::zeros(fields.len(), cols);
    let mut g = vec![0.0; cols];
    for (row, f) in fields.iter().enumerate() {
        f.gradient(t, x, &mut g)?;
        for (c, v) in g.iter().enumerate() {
            m[(row, c)] = *v;
        }
    }
    let sv = m.singular_values();
    let largest = sv.iter().cloned().fold(0.0, f64::max);
    if largest == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > rel_tol * largest).count())
}
