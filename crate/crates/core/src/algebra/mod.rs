//! Finite-dimensional real Lie algebras with exact structure constants, the
//! linear (KKS) Poisson bracket on the dual and polynomial Casimirs.

pub mod poly;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
pub use poly::{rational, Monomial, Polynomial};

/// Casimirs are plain polynomials on the dual; the alias documents intent.
pub type CasimirPolynomial = Polynomial;

/// A point of `g*` in the coordinates dual to the algebra basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPoint(pub Vec<f64>);

impl DualPoint {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl From<Vec<f64>> for DualPoint {
    fn from(v: Vec<f64>) -> Self {
        DualPoint(v)
    }
}

/// A real function `F(t, λ)` on the dual with analytic partials in `λ`.
pub trait DualFunction: Send + Sync {
    fn arity(&self) -> usize;
    fn value(&self, t: f64, lambda: &[f64]) -> Result<f64>;
    /// Writes `∂F/∂λ_α` into `out` (length `arity`).
    fn partials(&self, t: f64, lambda: &[f64], out: &mut [f64]) -> Result<()>;
    fn is_time_dependent(&self) -> bool {
        true
    }
}

/// A polynomial on the dual with its partial derivatives precomputed.
#[derive(Clone, Debug)]
pub struct PolynomialFunction {
    poly: Polynomial,
    partials: Vec<Polynomial>,
}

impl PolynomialFunction {
    pub fn new(poly: Polynomial) -> Self {
        let partials = (0..poly.nvars()).map(|i| poly.derivative(i)).collect();
        PolynomialFunction { poly, partials }
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }
}

impl DualFunction for PolynomialFunction {
    fn arity(&self) -> usize {
        self.poly.nvars()
    }

    fn value(&self, _t: f64, lambda: &[f64]) -> Result<f64> {
        check_len(self.arity(), lambda.len())?;
        Ok(self.poly.eval(lambda))
    }

    fn partials(&self, _t: f64, lambda: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.arity(), lambda.len())?;
        for (o, d) in out.iter_mut().zip(&self.partials) {
            *o = d.eval(lambda);
        }
        Ok(())
    }

    fn is_time_dependent(&self) -> bool {
        false
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Outcome of the exact Jacobi check.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub passed: bool,
    /// Largest absolute coefficient of the Jacobi expression.
    pub residual: BigRational,
    /// Basis indices `(α, β, γ, ν)` where the residual was attained.
    pub worst: Option<(usize, usize, usize, usize)>,
}

/// A Lie algebra given by its basis labels and structure constants
/// `[e_α, e_β] = Σ_γ c_{αβ}^γ e_γ`.
#[derive(Clone, Debug)]
pub struct LieAlgebra {
    name: String,
    labels: Vec<String>,
    // c_{αβ}^γ for α < β only
    brackets: BTreeMap<(usize, usize), Vec<(usize, BigRational)>>,
    // fully expanded constants, index (α r + β) r + γ
    dense: Vec<f64>,
    casimirs: Vec<(String, Polynomial)>,
}

impl LieAlgebra {
    /// An algebra with the given basis and all brackets zero.
    pub fn new(name: impl Into<String>, labels: &[&str]) -> Self {
        let r = labels.len();
        LieAlgebra {
            name: name.into(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            brackets: BTreeMap::new(),
            dense: vec![0.0; r * r * r],
            casimirs: Vec::new(),
        }
    }

    pub fn abelian(r: usize) -> Self {
        let labels: Vec<String> = (1..=r).map(|i| format!("e{i}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        Self::new(format!("abelian{r}"), &refs)
    }

    /// Sets `[e_a, e_b] = Σ coeff·e_g`. Setting `(b, a)` stores the negation.
    pub fn with_bracket(mut self, a: usize, b: usize, terms: &[(usize, BigRational)]) -> Result<Self> {
        let r = self.dim();
        for &i in [a, b].iter().chain(terms.iter().map(|(g, _)| g)) {
            if i >= r {
                return Err(Error::OutOfRange(format!("basis index {i} (dimension {r})")));
            }
        }
        if a == b {
            return Err(Error::InvalidParameter(format!(
                "bracket of e{a} with itself is zero by antisymmetry"
            )));
        }
        let (key, sign) = if a < b { ((a, b), 1) } else { ((b, a), -1) };
        let mut merged: BTreeMap<usize, BigRational> = BTreeMap::new();
        for (g, c) in terms {
            *merged.entry(*g).or_insert_with(BigRational::zero) += c * BigInt::from(sign);
        }
        let list: Vec<_> = merged.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if list.is_empty() {
            self.brackets.remove(&key);
        } else {
            self.brackets.insert(key, list);
        }
        self.rebuild_dense();
        Ok(self)
    }

    /// Integer-coefficient shorthand for [`with_bracket`](Self::with_bracket).
    pub fn with_int_bracket(self, a: usize, b: usize, terms: &[(usize, i64)]) -> Result<Self> {
        let terms: Vec<_> = terms.iter().map(|&(g, c)| (g, rational(c, 1))).collect();
        self.with_bracket(a, b, &terms)
    }

    pub fn with_casimir(mut self, name: impl Into<String>, c: Polynomial) -> Result<Self> {
        check_len(self.dim(), c.nvars())?;
        self.casimirs.push((name.into(), c));
        Ok(self)
    }

    fn rebuild_dense(&mut self) {
        let r = self.dim();
        self.dense = vec![0.0; r * r * r];
        for (&(a, b), terms) in &self.brackets {
            for (g, c) in terms {
                let v = c.to_f64().unwrap_or(f64::NAN);
                self.dense[(a * r + b) * r + g] = v;
                self.dense[(b * r + a) * r + g] = -v;
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn casimirs(&self) -> &[(String, Polynomial)] {
        &self.casimirs
    }

    /// Exact `c_{ab}^g` for any ordering of `a`, `b`.
    pub fn structure_constant(&self, a: usize, b: usize, g: usize) -> BigRational {
        let (key, neg) = match a.cmp(&b) {
            std::cmp::Ordering::Equal => return BigRational::zero(),
            std::cmp::Ordering::Less => ((a, b), false),
            std::cmp::Ordering::Greater => ((b, a), true),
        };
        let c = self
            .brackets
            .get(&key)
            .and_then(|ts| ts.iter().find(|(i, _)| *i == g))
            .map(|(_, c)| c.clone())
            .unwrap_or_else(BigRational::zero);
        if neg {
            -c
        } else {
            c
        }
    }

    /// Floating-point `c_{ab}^g`.
    pub fn c(&self, a: usize, b: usize, g: usize) -> f64 {
        let r = self.dim();
        self.dense[(a * r + b) * r + g]
    }

    /// Nonzero brackets as `((α, β), [(γ, c)])` with `α < β`.
    pub fn brackets(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<(usize, BigRational)>)> {
        self.brackets.iter()
    }

    /// Exact Jacobi identity check.
    pub fn validate(&self) -> ValidationReport {
        let r = self.dim();
        let mut residual = BigRational::zero();
        let mut worst = None;
        for a in 0..r {
            for b in a + 1..r {
                for g in b + 1..r {
                    for nu in 0..r {
                        let mut s = BigRational::zero();
                        for mu in 0..r {
                            s += self.structure_constant(a, b, mu) * self.structure_constant(mu, g, nu);
                            s += self.structure_constant(b, g, mu) * self.structure_constant(mu, a, nu);
                            s += self.structure_constant(g, a, mu) * self.structure_constant(mu, b, nu);
                        }
                        let s = s.abs();
                        if s > residual {
                            residual = s;
                            worst = Some((a, b, g, nu));
                        }
                    }
                }
            }
        }
        ValidationReport {
            passed: residual.is_zero(),
            residual,
            worst,
        }
    }

    /// The coordinate function `λ_i` as a polynomial.
    pub fn coordinate(&self, i: usize) -> Polynomial {
        Polynomial::var(self.dim(), i)
    }

    /// `{f, g} = Σ c_{αβ}^γ λ_γ ∂_α f ∂_β g`, computed exactly.
    pub fn kks_bracket(&self, f: &Polynomial, g: &Polynomial) -> Result<Polynomial> {
        let r = self.dim();
        check_len(r, f.nvars())?;
        check_len(r, g.nvars())?;
        let df: Vec<_> = (0..r).map(|i| f.derivative(i)).collect();
        let dg: Vec<_> = (0..r).map(|i| g.derivative(i)).collect();
        let mut out = Polynomial::zero(r);
        for (&(a, b), terms) in &self.brackets {
            let cross = &(&df[a] * &dg[b]) - &(&df[b] * &dg[a]);
            if cross.is_zero() {
                continue;
            }
            let mut lin = Polynomial::zero(r);
            for (gamma, c) in terms {
                lin = &lin + &Polynomial::var(r, *gamma).scale(c);
            }
            out = &out + &(&lin * &cross);
        }
        Ok(out)
    }

    /// Largest coefficient of `{C, λ_γ}` over all `γ`; zero iff `C` is a Casimir.
    pub fn casimir_check(&self, c: &Polynomial) -> Result<BigRational> {
        let mut worst = BigRational::zero();
        for gamma in 0..self.dim() {
            let b = self.kks_bracket(c, &self.coordinate(gamma))?;
            worst = worst.max(b.max_abs_coefficient());
        }
        Ok(worst)
    }

    /// Components `{λ_γ, F}` of the KKS Hamiltonian field given `∇F` at `p`.
    pub fn kks_vector_field_from_gradient(&self, grad: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        let r = self.dim();
        check_len(r, grad.len())?;
        check_len(r, p.len())?;
        let mut out = vec![0.0; r];
        for (gamma, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for (beta, &gb) in grad.iter().enumerate() {
                if gb == 0.0 {
                    continue;
                }
                for (mu, &pm) in p.iter().enumerate() {
                    let c = self.c(gamma, beta, mu);
                    if c != 0.0 {
                        s += c * pm * gb;
                    }
                }
            }
            *o = s;
        }
        Ok(out)
    }

    /// KKS Hamiltonian vector field of `F(t, ·)` at `p`.
    pub fn kks_vector_field(&self, f: &dyn DualFunction, t: f64, p: &DualPoint) -> Result<Vec<f64>> {
        check_len(self.dim(), f.arity())?;
        check_len(self.dim(), p.dim())?;
        let mut grad = vec![0.0; self.dim()];
        f.partials(t, p.coords(), &mut grad)?;
        self.kks_vector_field_from_gradient(&grad, p.coords())
    }
}

/// Names of the shipped algebras.
pub const CATALOG: [&str; 5] = ["sl2_sw", "sl2_coalg", "h3", "h4", "sl2+h3"];

fn poly(nvars: usize, terms: &[(i64, i64, &[u32])]) -> Polynomial {
    Polynomial::from_terms(nvars, terms).expect("catalog polynomial arity")
}

/// sl(2,R) in the basis `(e1, e2, e3)` with `[e1,e2] = -e1`, `[e1,e3] = -2e2`,
/// `[e2,e3] = -e3`.
pub fn sl2_sw() -> LieAlgebra {
    LieAlgebra::new("sl2_sw", &["e1", "e2", "e3"])
        .with_int_bracket(0, 1, &[(0, -1)])
        .and_then(|a| a.with_int_bracket(0, 2, &[(1, -2)]))
        .and_then(|a| a.with_int_bracket(1, 2, &[(2, -1)]))
        .and_then(|a| a.with_casimir("C", poly(3, &[(1, 1, &[1, 0, 1]), (-1, 1, &[0, 2, 0])])))
        .expect("sl2_sw")
}

/// sl(2,R) in the basis `(v-, v+, v3)` with `{v-,v+} = 4v3`,
/// `{v3,v+} = 2v+`, `{v3,v-} = -2v-`.
pub fn sl2_coalg() -> LieAlgebra {
    LieAlgebra::new("sl2_coalg", &["v-", "v+", "v3"])
        .with_int_bracket(0, 1, &[(2, 4)])
        .and_then(|a| a.with_int_bracket(2, 1, &[(1, 2)]))
        .and_then(|a| a.with_int_bracket(2, 0, &[(0, -2)]))
        .and_then(|a| a.with_casimir("C", poly(3, &[(1, 1, &[1, 1, 0]), (-1, 1, &[0, 0, 2])])))
        .expect("sl2_coalg")
}

/// Heisenberg algebra `[e1, e2] = e0`.
pub fn h3() -> LieAlgebra {
    LieAlgebra::new("h3", &["e0", "e1", "e2"])
        .with_int_bracket(1, 2, &[(0, 1)])
        .and_then(|a| a.with_casimir("C", poly(3, &[(1, 1, &[1, 0, 0])])))
        .expect("h3")
}

/// Oscillator algebra `[e1,e2] = e0`, `[e1,e3] = e1`, `[e2,e3] = -e2`.
pub fn h4() -> LieAlgebra {
    LieAlgebra::new("h4", &["e0", "e1", "e2", "e3"])
        .with_int_bracket(1, 2, &[(0, 1)])
        .and_then(|a| a.with_int_bracket(1, 3, &[(1, 1)]))
        .and_then(|a| a.with_int_bracket(2, 3, &[(2, -1)]))
        .and_then(|a| a.with_casimir("C", poly(4, &[(1, 1, &[1, 0, 0, 1]), (-1, 1, &[0, 1, 1, 0])])))
        .expect("h4")
}

/// `sl(2,R) ⊕ h3` spanned by `(h1..h6)`: `{h1,h2} = -4h3`, `{h1,h3} = -2h1`,
/// `{h2,h3} = 2h2`, `{h4,h5} = -h6`.
pub fn sl2_plus_h3() -> LieAlgebra {
    LieAlgebra::new("sl2+h3", &["h1", "h2", "h3", "h4", "h5", "h6"])
        .with_int_bracket(0, 1, &[(2, -4)])
        .and_then(|a| a.with_int_bracket(0, 2, &[(0, -2)]))
        .and_then(|a| a.with_int_bracket(1, 2, &[(1, 2)]))
        .and_then(|a| a.with_int_bracket(3, 4, &[(5, -1)]))
        .and_then(|a| {
            a.with_casimir(
                "C_sl2",
                poly(6, &[(1, 1, &[1, 1, 0, 0, 0, 0]), (-1, 1, &[0, 0, 2, 0, 0, 0])]),
            )
        })
        .and_then(|a| a.with_casimir("C_h3", poly(6, &[(1, 1, &[0, 0, 0, 0, 0, 1])])))
        .expect("sl2+h3")
}

/// Looks up a catalog algebra by name.
pub fn by_name(name: &str) -> Result<LieAlgebra> {
    match name {
        "sl2_sw" => Ok(sl2_sw()),
        "sl2_coalg" => Ok(sl2_coalg()),
        "h3" => Ok(h3()),
        "h4" => Ok(h4()),
        "sl2+h3" => Ok(sl2_plus_h3()),
        _ => Err(Error::unknown("algebra", name)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_algebras_pass_jacobi() {
        for name in CATALOG {
            let a = by_name(name).unwrap();
            let rep = a.validate();
            assert!(rep.passed, "{name}: {:?}", rep);
            for (cname, c) in a.casimirs() {
                assert!(a.casimir_check(c).unwrap().is_zero(), "{name}/{cname}");
            }
        }
    }

    #[test]
    fn modified_sl2_fails_with_residual_two() {
        let a = LieAlgebra::new("bad", &["v-", "v+", "v3"])
            .with_int_bracket(0, 1, &[(2, 4), (1, 1)])
            .unwrap()
            .with_int_bracket(2, 1, &[(1, 2)])
            .unwrap()
            .with_int_bracket(2, 0, &[(0, -2)])
            .unwrap();
        let rep = a.validate();
        assert!(!rep.passed);
        assert_eq!(rep.residual, rational(2, 1));
    }

    #[test]
    fn abelian_algebras_pass() {
        for r in 1..5 {
            assert!(LieAlgebra::abelian(r).validate().passed);
        }
    }

    #[test]
    fn kks_bracket_of_coordinates() {
        let a = sl2_coalg();
        let b = a.kks_bracket(&a.coordinate(0), &a.coordinate(1)).unwrap();
        assert_eq!(b, a.coordinate(2).scale(&rational(4, 1)));

        let h = h4();
        let b = h.kks_bracket(&h.coordinate(1), &h.coordinate(2)).unwrap();
        assert_eq!(b, h.coordinate(0));
    }

    #[test]
    fn bracket_with_self_vanishes() {
        let a = sl2_plus_h3();
        let f = &(&a.coordinate(0) * &a.coordinate(3)) + &a.coordinate(4);
        assert!(a.kks_bracket(&f, &f).unwrap().is_zero());
    }

    #[test]
    fn casimir_check_detects_non_casimir() {
        let a = sl2_coalg();
        assert_eq!(a.casimir_check(&a.coordinate(2)).unwrap(), rational(2, 1));
        let one = Polynomial::constant(3, rational(1, 1));
        assert!(a.casimir_check(&one).unwrap().is_zero());
    }

    #[test]
    fn kks_vector_field_examples() {
        // F = e3 + e1 on sl2_sw at (1, 0, 0)
        let a = sl2_sw();
        let v = a
            .kks_vector_field_from_gradient(&[1.0, 0.0, 1.0], &[1.0, 0.0, 0.0])
            .unwrap();
        assert_eq!(v, vec![0.0, 1.0, 0.0]);

        // F = e2^2/2 + e1^2/2 on h4 at (1, 1, 1, 0)
        let h = h4();
        let p = [1.0, 1.0, 1.0, 0.0];
        let v = h.kks_vector_field_from_gradient(&[0.0, p[1], p[2], 0.0], &p).unwrap();
        assert_eq!(v, vec![0.0, 1.0, -1.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = h3();
        let f = Polynomial::var(2, 0);
        assert!(matches!(a.kks_bracket(&f, &f), Err(Error::DimensionMismatch { .. })));
        assert!(by_name("so3").is_err());
    }
}
