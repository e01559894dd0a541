//! Concrete realizations by functions on `T*R^n`.

use std::sync::Arc;

use crate::algebra;
use crate::coalgebra::ReplicatedSpace;
use crate::error::{Error, Result};
use crate::momentum::Realization;
use crate::phase::{FnField, PhaseSpace, SampleBox, ScalarField, DOMAIN_MARGIN};

fn guard_q(q: f64) -> Result<()> {
    if q.abs() <= DOMAIN_MARGIN {
        return Err(Error::domain("q = 0 against a centrifugal term"));
    }
    Ok(())
}

fn arc(f: FnField) -> Arc<dyn ScalarField> {
    Arc::new(f)
}

fn one_dim_space(c: f64) -> PhaseSpace {
    PhaseSpace::new(1).with_centrifugal_guards(&[c])
}

fn one_dim_box() -> SampleBox {
    SampleBox::uniform(1, (0.5, 1.5), (-1.0, 1.0))
}

/// `(v-, v+, v3) = (q², p² + c/q², q p)` on `T*R`.
pub fn sl2_coalg_copy(c: f64) -> Result<Realization> {
    let h_minus = FnField::autonomous(
        1,
        |x| x[0] * x[0],
        |x, g| {
            g[0] = 2.0 * x[0];
            g[1] = 0.0;
        },
    );
    let h_plus = if c == 0.0 {
        FnField::autonomous(
            1,
            |x| x[1] * x[1],
            |x, g| {
                g[0] = 0.0;
                g[1] = 2.0 * x[1];
            },
        )
    } else {
        FnField::new(
            1,
            move |_, x| {
                guard_q(x[0])?;
                Ok(x[1] * x[1] + c / (x[0] * x[0]))
            },
            move |_, x, g| {
                guard_q(x[0])?;
                g[0] = -2.0 * c / (x[0] * x[0] * x[0]);
                g[1] = 2.0 * x[1];
                Ok(())
            },
        )
    };
    let h3 = FnField::autonomous(
        1,
        |x| x[0] * x[1],
        |x, g| {
            g[0] = x[1];
            g[1] = x[0];
        },
    );
    Ok(Realization::new(
        format!("sl2_coalg(c={c})"),
        Arc::new(algebra::sl2_coalg()),
        vec![arc(h_minus), arc(h_plus), arc(h3)],
        one_dim_space(c),
    )?
    .with_sample_box(one_dim_box()))
}

/// `(h1, h2, h3) = (q²/2, −q p/2, (p² + c/q²)/2)` on `T*R`.
pub fn sl2_sw_copy(c: f64) -> Result<Realization> {
    let h1 = FnField::autonomous(
        1,
        |x| 0.5 * x[0] * x[0],
        |x, g| {
            g[0] = x[0];
            g[1] = 0.0;
        },
    );
    let h2 = FnField::autonomous(
        1,
        |x| -0.5 * x[0] * x[1],
        |x, g| {
            g[0] = -0.5 * x[1];
            g[1] = -0.5 * x[0];
        },
    );
    let h3 = if c == 0.0 {
        FnField::autonomous(
            1,
            |x| 0.5 * x[1] * x[1],
            |x, g| {
                g[0] = 0.0;
                g[1] = x[1];
            },
        )
    } else {
        FnField::new(
            1,
            move |_, x| {
                guard_q(x[0])?;
                Ok(0.5 * (x[1] * x[1] + c / (x[0] * x[0])))
            },
            move |_, x, g| {
                guard_q(x[0])?;
                g[0] = -c / (x[0] * x[0] * x[0]);
                g[1] = x[1];
                Ok(())
            },
        )
    };
    Ok(Realization::new(
        format!("sl2_sw(c={c})"),
        Arc::new(algebra::sl2_sw()),
        vec![arc(h1), arc(h2), arc(h3)],
        one_dim_space(c),
    )?
    .with_sample_box(one_dim_box()))
}

fn replicate<F>(name: &str, c: &[f64], copy: F) -> Result<ReplicatedSpace>
where
    F: Fn(f64) -> Result<Realization>,
{
    if c.is_empty() {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let copies = c.iter().map(|&ci| copy(ci).map(Arc::new)).collect::<Result<Vec<_>>>()?;
    ReplicatedSpace::new(name, copies)
}

/// The `sl2_coalg` realization on `T*R^n`, one copy per coordinate with
/// labels `c_i`.
pub fn sl2_coalg_replicated(c: &[f64]) -> Result<ReplicatedSpace> {
    replicate("sl2_coalg", c, sl2_coalg_copy)
}

/// The `sl2_sw` realization on `T*R^n`, one copy per coordinate.
pub fn sl2_sw_replicated(c: &[f64]) -> Result<ReplicatedSpace> {
    replicate("sl2_sw", c, sl2_sw_copy)
}

/// `sl2_coalg` functions summed over all `n` coordinates.
pub fn sl2_coalg(c: &[f64]) -> Result<Arc<Realization>> {
    sl2_coalg_replicated(c)?.full_realization()
}

pub fn sl2_sw(c: &[f64]) -> Result<Arc<Realization>> {
    sl2_sw_replicated(c)?.full_realization()
}

fn constant_one(n: usize) -> FnField {
    FnField::autonomous(n, |_| 1.0, |_, g| g.fill(0.0))
}

/// Heisenberg realization `(1, q, p)` on `T*R`.
pub fn heisenberg() -> Result<Realization> {
    let q = crate::phase::coordinate_field(1, 0, false);
    let p = crate::phase::coordinate_field(1, 0, true);
    Ok(Realization::new(
        "heisenberg",
        Arc::new(algebra::h3()),
        vec![arc(constant_one(1)), arc(q), arc(p)],
        PhaseSpace::new(1),
    )?
    .with_sample_box(SampleBox::uniform(1, (-1.5, 1.5), (-1.5, 1.5))))
}

/// Oscillator-algebra realization `(1, q, p, q p)` on `T*R`.
pub fn h4_oscillator() -> Result<Realization> {
    let q = crate::phase::coordinate_field(1, 0, false);
    let p = crate::phase::coordinate_field(1, 0, true);
    let qp = FnField::autonomous(
        1,
        |x| x[0] * x[1],
        |x, g| {
            g[0] = x[1];
            g[1] = x[0];
        },
    );
    Ok(Realization::new(
        "h4_oscillator",
        Arc::new(algebra::h4()),
        vec![arc(constant_one(1)), arc(q), arc(p), arc(qp)],
        PhaseSpace::new(1),
    )?
    .with_sample_box(SampleBox::uniform(1, (-1.5, 1.5), (-1.5, 1.5))))
}

/// `(p1², q1², q1 p1, p2, q2, 1)` on `T*R^2`, spanning `sl(2,R) ⊕ h3`.
pub fn henon_heiles() -> Result<Realization> {
    let h1 = FnField::autonomous(
        2,
        |x| x[2] * x[2],
        |x, g| {
            g.fill(0.0);
            g[2] = 2.0 * x[2];
        },
    );
    let h2 = FnField::autonomous(
        2,
        |x| x[0] * x[0],
        |x, g| {
            g.fill(0.0);
            g[0] = 2.0 * x[0];
        },
    );
    let h3 = FnField::autonomous(
        2,
        |x| x[0] * x[2],
        |x, g| {
            g.fill(0.0);
            g[0] = x[2];
            g[2] = x[0];
        },
    );
    let h4 = crate::phase::coordinate_field(2, 1, true);
    let h5 = crate::phase::coordinate_field(2, 1, false);
    Ok(Realization::new(
        "henon_heiles",
        Arc::new(algebra::sl2_plus_h3()),
        vec![arc(h1), arc(h2), arc(h3), arc(h4), arc(h5), arc(constant_one(2))],
        PhaseSpace::new(2),
    )?
    .with_sample_box(SampleBox::uniform(2, (-1.0, 1.0), (-1.0, 1.0))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::canonical_bracket;

    #[test]
    fn coalgebra_functions_at_point() {
        let r = sl2_coalg(&[0.0, 0.0]).unwrap();
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(r.evaluate_j(&x).unwrap().0, vec![5.0, 25.0, 11.0]);
        assert_eq!(r.evaluate_j(&[0.0; 4]).unwrap().0, vec![0.0, 0.0, 0.0]);
        let b = canonical_bracket(r.fields()[0].as_ref(), r.fields()[1].as_ref(), 0.0, &x).unwrap();
        assert_eq!(b, 44.0);
    }

    #[test]
    fn sw_functions_bracket() {
        let r = sl2_sw(&[0.0]).unwrap();
        let b = canonical_bracket(r.fields()[0].as_ref(), r.fields()[1].as_ref(), 0.0, &[2.0, 1.0]).unwrap();
        assert_eq!(b, -2.0);
    }

    #[test]
    fn centrifugal_term_guards_origin() {
        let r = sl2_coalg(&[1.0]).unwrap();
        assert!(matches!(r.evaluate_j(&[0.0, 1.0]), Err(Error::Domain(_))));
        assert!(r.fields()[1].value(0.0, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn realizations_verify() {
        for r in [
            sl2_coalg(&[1.0, 2.0, 3.0]).unwrap(),
            sl2_sw(&[1.0, 0.5]).unwrap(),
            Arc::new(heisenberg().unwrap()),
            Arc::new(h4_oscillator().unwrap()),
            Arc::new(henon_heiles().unwrap()),
        ] {
            let res = r.verify(100, 3).unwrap();
            assert!(res <= 1e-9, "{}: {res}", r.name());
        }
    }
}
