//! Reference runs used by the conservation checks, the CLI and the benches.

use crate::error::Result;
use crate::phase::TimeCoefficient;

use super::systems::{make_curved_oscillator, make_darboux3, make_kc, make_sw, make_taubnut, Chart, SystemSpec};

/// A system with an initial state and a time span.
pub struct Benchmark {
    pub label: &'static str,
    pub system: SystemSpec,
    pub x0: Vec<f64>,
    pub t0: f64,
    pub t1: f64,
}

const Q_CURVED: [f64; 3] = [0.5, 0.5, 0.5];
const P_CURVED: [f64; 3] = [0.1, -0.1, 0.05];
const C_SMALL: [f64; 3] = [0.1, 0.2, 0.3];
const Q_KEPLER: [f64; 3] = [1.0, 1.0, 1.0];
const P_KEPLER: [f64; 3] = [0.2, -0.1, 0.1];

fn state(q: &[f64], p: &[f64]) -> Vec<f64> {
    q.iter().chain(p).copied().collect()
}

/// SW with `n = 3`, `c = (1, 2, 3)`, `ω²(t) = 1 + 0.1 sin t` on `[0, 20]`.
pub fn sw() -> Result<Benchmark> {
    Ok(Benchmark {
        label: "sw",
        system: make_sw(3, &[1.0, 2.0, 3.0], TimeCoefficient::parse("1+0.1*sin(t)")?)?,
        x0: state(&[1.0, 1.0, 1.0], &[0.3, -0.2, 0.1]),
        t0: 0.0,
        t1: 20.0,
    })
}

/// Poincaré oscillator with `κ = ±0.5`. On the hyperbolic side the
/// potential tends to `ω²/(8|κ|)` at the chart boundary, so the initial
/// energy is kept below it to stay on a bound orbit.
pub fn osc_poincare(kappa: f64) -> Result<Benchmark> {
    let (label, c, q): (_, [f64; 3], [f64; 3]) = if kappa > 0.0 {
        ("osc_poincare(kappa=+0.5)", [1.0, 2.0, 3.0], Q_CURVED)
    } else {
        ("osc_poincare(kappa=-0.5)", [0.001, 0.002, 0.003], [0.3, 0.3, 0.3])
    };
    Ok(Benchmark {
        label,
        system: make_curved_oscillator(Chart::Poincare, 3, kappa, &c, TimeCoefficient::parse("1+0.1*sin(t)")?)?,
        x0: state(&q, &P_CURVED),
        t0: 0.0,
        t1: 10.0,
    })
}

pub fn darboux3() -> Result<Benchmark> {
    Ok(Benchmark {
        label: "darboux3(lambda=1)",
        system: make_darboux3(3, 1.0, &[1.0, 2.0, 3.0], TimeCoefficient::parse("1+0.1*sin(t)")?)?,
        x0: state(&Q_CURVED, &P_CURVED),
        t0: 0.0,
        t1: 10.0,
    })
}

pub fn kc_euclidean() -> Result<Benchmark> {
    Ok(Benchmark {
        label: "kc_euclidean",
        system: make_kc(
            Chart::Euclidean,
            3,
            0.0,
            &C_SMALL,
            TimeCoefficient::parse("1+0.2*cos(t)")?,
        )?,
        x0: state(&Q_KEPLER, &P_KEPLER),
        t0: 0.0,
        t1: 10.0,
    })
}

pub fn kc_taubnut() -> Result<Benchmark> {
    Ok(Benchmark {
        label: "kc_taubnut(eta=1)",
        system: make_taubnut(3, 1.0, &C_SMALL, TimeCoefficient::parse("1+0.2*cos(t)")?)?,
        x0: state(&Q_KEPLER, &P_KEPLER),
        t0: 0.0,
        t1: 10.0,
    })
}

/// Every conservation benchmark.
pub fn conservation_suite() -> Result<Vec<Benchmark>> {
    Ok(vec![
        sw()?,
        osc_poincare(0.5)?,
        osc_poincare(-0.5)?,
        darboux3()?,
        kc_euclidean()?,
        kc_taubnut()?,
    ])
}
