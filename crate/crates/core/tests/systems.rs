use std::sync::Arc;

use lieham_core::catalog::curvature::{darboux3_curvature, taubnut_curvature};
use lieham_core::catalog::{
    self, closed_form_residual, make_central, make_curved_oscillator, make_darboux3, make_ho_h4, make_ho_sl2, make_kc,
    make_sw, make_taubnut, scalar_curvature, table_rows, Chart, ConformalFactor, CurvedSpaceSpec, RadialPotential,
    SYSTEMS,
};
use lieham_core::coalgebra::diagonal_prolongation;
use lieham_core::momentum::decomposition_residual;
use lieham_core::{OdeSystem, SystemSpec, TimeCoefficient};

fn tc(s: &str) -> TimeCoefficient {
    TimeCoefficient::parse(s).unwrap()
}

fn registered() -> Vec<SystemSpec> {
    SYSTEMS
        .iter()
        .map(|i| catalog::build_system(i.name, &catalog::default_params(i.name).unwrap(), &Default::default()).unwrap())
        .collect()
}

#[test]
fn decomposition_matches_direct_field() {
    let mut systems = registered();
    systems.extend(table_rows().unwrap().into_iter().map(|r| r.system));
    for sys in systems {
        let pts = sys.samples(50, 21).unwrap();
        let r = decomposition_residual(sys.hamiltonian(), &pts).unwrap();
        assert!(r <= 1e-10, "{}: {r}", sys.name());
    }
}

#[test]
fn printed_equations_match_composition() {
    for row in table_rows().unwrap() {
        let r = closed_form_residual(&row.system, 50, 22).unwrap();
        assert!(r <= 1e-10, "{}: {r}", row.label);
    }
    for sys in registered() {
        assert!(sys.has_closed_form(), "{}", sys.name());
        let r = closed_form_residual(&sys, 50, 23).unwrap();
        assert!(r <= 1e-10, "{}: {r}", sys.name());
    }
}

/// Bitwise comparison at sample points of a flat-limit system against its
/// Euclidean counterpart.
fn assert_same_field(a: &SystemSpec, b: &SystemSpec) {
    for (t, x) in a.samples(50, 24).unwrap() {
        assert_eq!(
            a.vector_field(t, &x).unwrap(),
            b.vector_field(t, &x).unwrap(),
            "{} vs {}",
            a.name(),
            b.name()
        );
        assert_eq!(a.energy(t, &x).unwrap(), b.energy(t, &x).unwrap());
    }
}

#[test]
fn flat_limits_are_exact() {
    let c = [1.0, 2.0, 3.0];
    let w = tc("1+0.1*sin(t)");
    let k = tc("1+0.2*cos(t)");
    let sw = make_sw(3, &c, w.clone()).unwrap();
    let kc = make_kc(Chart::Euclidean, 3, 0.0, &c, k.clone()).unwrap();
    assert_same_field(
        &make_curved_oscillator(Chart::Poincare, 3, 0.0, &c, w.clone()).unwrap(),
        &sw,
    );
    assert_same_field(
        &make_curved_oscillator(Chart::Beltrami, 3, 0.0, &c, w.clone()).unwrap(),
        &sw,
    );
    assert_same_field(&make_darboux3(3, 0.0, &c, w).unwrap(), &sw);
    assert_same_field(&make_kc(Chart::Poincare, 3, 0.0, &c, k.clone()).unwrap(), &kc);
    assert_same_field(&make_kc(Chart::Beltrami, 3, 0.0, &c, k.clone()).unwrap(), &kc);
    assert_same_field(&make_taubnut(3, 0.0, &c, k).unwrap(), &kc);
}

#[test]
fn flat_central_builder_reproduces_sw() {
    let c = [1.0, 2.0];
    let w = tc("1+0.3*cos(2*t)");
    let central = make_central(
        &c,
        CurvedSpaceSpec::conformal(2, ConformalFactor::flat()),
        RadialPotential::oscillator(w.clone()),
    )
    .unwrap();
    let sw = make_sw(2, &c, w).unwrap();
    for (t, x) in central.samples(50, 25).unwrap() {
        let a = central.vector_field(t, &x).unwrap();
        let b = sw.vector_field(t, &x).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() <= 1e-12);
        }
    }
}

#[test]
fn oscillator_presentations_agree() {
    let w = tc("1+0.2*cos(t)");
    let a = make_ho_sl2(1, w.clone()).unwrap();
    let b = make_ho_h4(w).unwrap();
    for (t, x) in a.samples(100, 26).unwrap() {
        let u = a.vector_field(t, &x).unwrap();
        let v = b.vector_field(t, &x).unwrap();
        assert!((u[0] - v[0]).abs() <= 1e-12 && (u[1] - v[1]).abs() <= 1e-12);
    }
}

#[test]
fn poincare_factor_has_constant_curvature() {
    for n in 2..=4 {
        for kappa in [-1.0, -0.5, 0.5, 1.0] {
            let s = CurvedSpaceSpec::conformal(n, ConformalFactor::poincare(kappa));
            let rmax: f64 = if kappa < 0.0 {
                0.95 / (-kappa as f64).sqrt()
            } else {
                3.0
            };
            for i in 1..=10 {
                let r = rmax * i as f64 / 10.0;
                let got = scalar_curvature(&s, r).unwrap();
                let want = (n * (n - 1)) as f64 * kappa;
                assert!((got - want).abs() <= 1e-9, "n={n} kappa={kappa} r={r}: {got}");
            }
        }
    }
}

#[test]
fn curvature_closed_forms() {
    for n in 2..=4 {
        for i in 1..=10 {
            let r = 0.15 * i as f64;
            for lambda in [1.0, 0.3] {
                let s = CurvedSpaceSpec::conformal(n, ConformalFactor::darboux3(lambda));
                let got = scalar_curvature(&s, r).unwrap();
                assert!((got - darboux3_curvature(n, lambda, r)).abs() <= 1e-9);
            }
            for eta in [1.0, 0.4] {
                let s = CurvedSpaceSpec::conformal(n, ConformalFactor::taubnut(eta));
                let got = scalar_curvature(&s, r).unwrap();
                assert!((got - taubnut_curvature(n, eta, r)).abs() <= 1e-9);
            }
        }
    }
    // Independent oracle for n = 3 Darboux III at r = 1, λ = 1:
    // −λ(n−1)(2n + 3λ(n−2)r²)/(1+λr²)³ = −2·9/8.
    assert!((darboux3_curvature(3, 1.0, 1.0) + 2.25).abs() < 1e-15);
}

#[test]
fn position_dependent_mass() {
    let s = make_darboux3(2, 1.0, &[0.0, 0.0], tc("1")).unwrap();
    assert!((s.mass(2.0).unwrap() - 5.0).abs() < 1e-12);
}

#[test]
fn prolonged_ermakov_system() {
    let base = make_sw(1, &[2.0], tc("1")).unwrap();
    let prolonged = diagonal_prolongation(Arc::new(base), 3).unwrap();
    let direct = make_sw(3, &[2.0, 2.0, 2.0], tc("1")).unwrap();
    let x = [1.0, 2.0, 3.0, 0.0, 0.0, 0.0];
    let mut a = vec![0.0; 6];
    let mut b = vec![0.0; 6];
    prolonged.rhs(0.0, &x, &mut a).unwrap();
    direct.rhs(0.0, &x, &mut b).unwrap();
    let want = [-1.0 + 2.0, -2.0 + 2.0 / 8.0, -3.0 + 2.0 / 27.0];
    for i in 0..3 {
        assert!((a[3 + i] - want[i]).abs() < 1e-14);
        assert!((b[3 + i] - want[i]).abs() < 1e-14);
    }
}

#[test]
fn constructors_reject_bad_input() {
    assert!(make_sw(2, &[1.0], tc("1")).is_err());
    assert!(make_sw(0, &[], tc("1")).is_err());
    assert!(catalog::build_system(
        "ho_h4",
        &catalog::SystemParams::with_c(&[0.0, 0.0]),
        &Default::default()
    )
    .is_err());
    let mut p = catalog::default_params("central").unwrap();
    p.space = "sphere".into();
    assert!(catalog::build_system("central", &p, &Default::default()).is_err());
}

#[test]
fn central_builder_rejects_nonpositive_factor() {
    let s = make_central(
        &[0.0, 0.0],
        CurvedSpaceSpec::conformal(2, ConformalFactor::poincare(-1.0)),
        RadialPotential::zero(),
    )
    .unwrap();
    assert!(s.vector_field(0.0, &[0.8, 0.0, 0.1, 0.0]).is_ok());
    assert!(s.vector_field(0.0, &[1.5, 0.0, 0.1, 0.0]).is_err());
}
