use std::sync::Arc;

use lieham_core::catalog::benchmarks::{self, Benchmark};
use lieham_core::catalog::{make_curved_oscillator, make_ho_h4, make_ho_sl2, make_painleve2, make_sw, Chart};
use lieham_core::integrate::{first_derivative, monitor_invariants, residual_ode_check};
use lieham_core::momentum::{pushforward_residual, DualFlow};
use lieham_core::{integrate, IntegratorConfig, OdeSystem, Status, SystemSpec, TimeCoefficient, Trajectory};

fn tc(s: &str) -> TimeCoefficient {
    TimeCoefficient::parse(s).unwrap()
}

fn drifts(sys: &SystemSpec, traj: &Trajectory, names: &[String]) -> Vec<(String, f64)> {
    let fields: Vec<_> = names.iter().map(|n| (n.clone(), sys.invariant(n).unwrap())).collect();
    monitor_invariants(traj, &fields)
        .unwrap()
        .into_iter()
        .map(|s| (s.name, s.drift))
        .collect()
}

fn run(b: &Benchmark, cfg: &IntegratorConfig) -> Trajectory {
    integrate(&b.system, &b.x0, b.t0, b.t1, cfg).unwrap()
}

#[test]
fn coalgebra_invariants_are_conserved() {
    for b in benchmarks::conservation_suite().unwrap() {
        let traj = run(&b, &IntegratorConfig::default());
        assert_eq!(traj.status, Status::Completed, "{}", b.label);
        for x in &traj.states {
            assert!(b.system.in_domain(0.0, x), "{} left its domain", b.label);
        }
        for (name, d) in drifts(&b.system, &traj, &b.system.default_invariants()) {
            assert!(d <= 1e-6, "{} {name}: {d}", b.label);
        }
    }
}

#[test]
fn energy_of_driven_oscillator_is_not_conserved() {
    let sys = make_ho_sl2(1, tc("1+0.5*sin(t)")).unwrap();
    let traj = integrate(&sys, &[1.0, 0.0], 0.0, 10.0, &IntegratorConfig::default()).unwrap();
    let d = drifts(&sys, &traj, &["H".into()]);
    assert!(d[0].1 > 1e-3, "{d:?}");
}

#[test]
fn ermakov_lewis_invariant() {
    let sys = make_sw(2, &[2.0, 0.0], tc("1+0.1*sin(t)")).unwrap();
    let traj = integrate(&sys, &[1.0, 0.5, 0.2, -0.3], 0.0, 10.0, &IntegratorConfig::default()).unwrap();
    assert!(traj.status.is_completed());
    let d = drifts(&sys, &traj, &["I_2".into()]);
    assert!(d[0].1 <= 1e-6, "{d:?}");
}

#[test]
fn cosine_solution() {
    let sys = make_ho_sl2(1, tc("1")).unwrap();
    let traj = integrate(
        &sys,
        &[1.0, 0.0],
        0.0,
        std::f64::consts::FRAC_PI_2,
        &IntegratorConfig::default(),
    )
    .unwrap();
    let (_, x) = traj.last().unwrap();
    assert!(x[0].abs() <= 1e-6 && (x[1] + 1.0).abs() <= 1e-6, "{x:?}");
}

#[test]
fn rk4_is_fourth_order() {
    let sys = make_ho_sl2(1, tc("1")).unwrap();
    let err = |h: f64| {
        let traj = integrate(&sys, &[1.0, 0.0], 0.0, 1.0, &IntegratorConfig::rk4(h)).unwrap();
        let (_, x) = traj.last().unwrap();
        ((x[0] - 1f64.cos()).powi(2) + (x[1] + 1f64.sin()).powi(2)).sqrt()
    };
    let ratio = err(0.1) / err(0.05);
    assert!((12.0..=20.0).contains(&ratio), "{ratio}");
}

#[test]
fn tighter_tolerance_reduces_drift() {
    let b = benchmarks::sw().unwrap();
    let names = b.system.default_invariants();
    let worst = |rtol: f64| {
        let traj = run(&b, &IntegratorConfig::dp54(rtol, rtol));
        drifts(&b.system, &traj, &names)
            .into_iter()
            .map(|(_, d)| d)
            .fold(0.0, f64::max)
    };
    let (loose, tight) = (worst(1e-8), worst(1e-12));
    assert!(loose >= 100.0 * tight, "{loose} vs {tight}");
    let (loose, tight) = (worst(1e-6), worst(1e-8));
    assert!(loose >= 10.0 * tight, "{loose} vs {tight}");
}

#[test]
fn start_outside_hyperbolic_disk() {
    let sys = make_curved_oscillator(Chart::Poincare, 1, -1.0, &[0.0], tc("1")).unwrap();
    let traj = integrate(&sys, &[2.0, 0.0], 0.0, 1.0, &IntegratorConfig::default()).unwrap();
    assert_eq!(traj.status, Status::DomainViolation(0.0));
}

#[test]
fn centrifugal_wall_is_never_crossed() {
    // Free fall towards q = 0 without a barrier strong enough to stop it:
    // with c < 0 the particle reaches q = 0 in finite time.
    let sys = make_sw(1, &[-0.5], tc("1")).unwrap();
    let traj = integrate(&sys, &[1.0, -1.0], 0.0, 5.0, &IntegratorConfig::default()).unwrap();
    assert!(
        matches!(traj.status, Status::DomainViolation(_) | Status::StepUnderflow(_)),
        "{}",
        traj.status
    );
    assert!(traj.states.iter().all(|x| sys.in_domain(0.0, x)));
}

#[test]
fn forward_then_backward_returns_home() {
    let sys = make_ho_sl2(2, tc("1+0.2*cos(t)")).unwrap();
    let x0 = [1.0, 0.5, 0.2, -0.3];
    let cfg = IntegratorConfig::default();
    let fwd = integrate(&sys, &x0, 0.0, 10.0, &cfg).unwrap();
    let (t1, x1) = fwd.last().unwrap();
    let back = integrate(&sys, x1, t1, 0.0, &cfg).unwrap();
    let (t0, x) = back.last().unwrap();
    assert_eq!(t0, 0.0);
    let tol = 10.0 * (fwd.accepted + back.accepted) as f64 * (cfg.atol + cfg.rtol);
    for (a, b) in x.iter().zip(&x0) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }
}

#[test]
fn momentum_map_projects_oscillator_onto_dual_flow() {
    let sys = make_ho_sl2(2, tc("1+0.2*cos(t)")).unwrap();
    let cfg = IntegratorConfig::rk4(1e-3);
    let traj = integrate(&sys, &[1.0, 0.5, 0.2, -0.3], 0.0, 10.0, &cfg).unwrap();
    let realization = sys.realization().clone();
    let outer = sys.hamiltonian().outer().clone();
    let flow = DualFlow::new(realization.algebra().clone(), outer.clone()).unwrap();
    let j0 = realization.evaluate_j(&traj.states[0]).unwrap().0;
    let dual = integrate(&flow, &j0, 0.0, 10.0, &cfg).unwrap();
    assert_eq!(dual.len(), traj.len());
    let mut worst: f64 = 0.0;
    for (x, l) in traj.states.iter().zip(&dual.states) {
        let j = realization.evaluate_j(x).unwrap().0;
        for (a, b) in j.iter().zip(l) {
            worst = worst.max((a - b).abs());
        }
    }
    assert!(worst <= 1e-6, "{worst}");
    let r = pushforward_residual(&realization, outer.as_ref(), &traj).unwrap();
    assert!(r <= 1e-5, "{r}");
}

#[test]
fn oscillator_casimirs_are_conserved() {
    let w = tc("1+0.2*cos(t)");
    let a = make_ho_sl2(1, w.clone()).unwrap();
    let b = make_ho_h4(w).unwrap();
    for sys in [a, b] {
        let traj = integrate(&sys, &[0.8, 0.3], 0.0, 10.0, &IntegratorConfig::default()).unwrap();
        let d = drifts(&sys, &traj, &sys.default_invariants());
        assert!(!d.is_empty());
        for (name, v) in d {
            assert!(v <= 1e-6, "{} {name}: {v}", sys.name());
        }
    }
}

#[test]
fn painleve_trajectory_solves_second_order_equation() {
    let b = 0.5;
    let sys = make_painleve2(b).unwrap();
    let traj = integrate(&sys, &[0.1, 0.2], 0.0, 1.0, &IntegratorConfig::rk4(1e-3)).unwrap();
    let defect = residual_ode_check(&traj, 0, |t, y| 2.0 * y.powi(3) + t * y + b - 0.5).unwrap();
    assert!(defect <= 1e-4, "{defect}");
    let p = traj.component(1);
    let worst = first_derivative(&traj, 0)
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(i, (t, y, dy))| (p[i + 2] - (dy + y * y + 0.5 * t)).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst}");
}

#[test]
fn milne_pinney_and_linear_defects() {
    let sys = make_sw(1, &[1.0], tc("1")).unwrap();
    let traj = integrate(&sys, &[1.2, 0.1], 0.0, 5.0, &IntegratorConfig::rk4(1e-3)).unwrap();
    let d = residual_ode_check(&traj, 0, |_, y| -y + 1.0 / y.powi(3)).unwrap();
    assert!(d <= 1e-4, "{d}");
    let ho = make_ho_h4(tc("1")).unwrap();
    let traj = integrate(&ho, &[1.0, 0.0], 0.0, 5.0, &IntegratorConfig::rk4(1e-3)).unwrap();
    let d = residual_ode_check(&traj, 0, |_, y| -y).unwrap();
    assert!(d <= 1e-6, "{d}");
}

#[test]
fn zero_length_span_yields_initial_sample() {
    let b = benchmarks::sw().unwrap();
    let traj = integrate(&b.system, &b.x0, 0.0, 0.0, &IntegratorConfig::default()).unwrap();
    assert_eq!(traj.len(), 1);
    assert_eq!(traj.states[0], b.x0);
    assert!(traj.status.is_completed());
}

#[test]
fn systems_share_across_threads() {
    let b = Arc::new(benchmarks::kc_euclidean().unwrap());
    let handles: Vec<_> = (0..4)
        .map(|_| {
            let b = b.clone();
            std::thread::spawn(move || run(&b, &IntegratorConfig::default()).states.last().cloned())
        })
        .collect();
    let out: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert!(out.windows(2).all(|w| w[0] == w[1]));
}
