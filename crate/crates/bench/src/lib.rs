//! Fixtures shared by the criterion benchmarks.

use lieham_core::algebra::{rational, LieAlgebra, Polynomial};
use lieham_core::catalog::benchmarks::{self, Benchmark};
use lieham_core::Result;

/// The three-copy SW run: `c = (1, 2, 3)`, `ω²(t) = 1 + 0.1 sin t`, `t ∈ [0, 20]`.
pub fn sw() -> Result<Benchmark> {
    benchmarks::sw()
}

/// A dense polynomial of degree `deg` in every coordinate of `a`: the product
/// of `(1 + x_i)` powers, expanded.
pub fn dense_polynomial(a: &LieAlgebra, deg: u32) -> Polynomial {
    let r = a.dim();
    let one = Polynomial::constant(r, rational(1, 1));
    let mut p = one.clone();
    for i in 0..r {
        let factor = &one + &a.coordinate(i);
        for _ in 0..deg {
            p = &p * &factor;
        }
    }
    p
}
