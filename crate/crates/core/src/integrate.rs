//! Explicit Runge–Kutta integration of non-autonomous systems with domain
//! guards: classical RK4 on a uniform grid and the Dormand–Prince 5(4)
//! embedded pair with step-size control.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::momentum::uniform_step;
use crate::phase::ScalarField;

/// A first-order system `dx/dt = f(t, x)` with a domain predicate.
pub trait OdeSystem: Send + Sync {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]) -> Result<()>;
    fn in_domain(&self, t: f64, x: &[f64]) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Rk4Fixed,
    Dp54Adaptive,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Rk4Fixed => "rk4_fixed",
            Method::Dp54Adaptive => "dp54_adaptive",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" | "rk4_fixed" => Ok(Method::Rk4Fixed),
            "dp54" | "dp54_adaptive" => Ok(Method::Dp54Adaptive),
            _ => Err(Error::unknown("integrator method", s)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Initial step (adaptive) or the step (fixed).
    pub h0: f64,
    pub rtol: f64,
    pub atol: f64,
    pub hmax: f64,
    pub hmin: f64,
    pub max_steps: usize,
    /// Keep every `stride`-th accepted step; the endpoints are always kept.
    pub stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Dp54Adaptive,
            h0: 1e-3,
            rtol: 1e-10,
            atol: 1e-10,
            hmax: 0.1,
            hmin: 1e-12,
            max_steps: 1_000_000,
            stride: 1,
        }
    }
}

impl IntegratorConfig {
    /// Fixed-step RK4 with step `h`.
    pub fn rk4(h: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4Fixed,
            h0: h,
            hmax: h.max(0.1),
            ..Default::default()
        }
    }

    pub fn dp54(rtol: f64, atol: f64) -> Self {
        IntegratorConfig {
            rtol,
            atol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return bad("rtol and atol must be positive");
        }
        if !(self.hmin > 0.0 && self.hmin <= self.h0 && self.h0 <= self.hmax) {
            return bad("step sizes must satisfy 0 < hmin <= h0 <= hmax");
        }
        if self.stride == 0 || self.max_steps == 0 {
            return bad("stride and max_steps must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Status {
    Completed,
    /// The last safe time before the domain predicate failed.
    DomainViolation(f64),
    StepUnderflow(f64),
    MaxSteps(f64),
}

impl Status {
    pub fn is_completed(&self) -> bool {
        matches!(self, Status::Completed)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Completed => write!(f, "completed"),
            Status::DomainViolation(t) => write!(f, "domain_violation({t})"),
            Status::StepUnderflow(t) => write!(f, "step_underflow({t})"),
            Status::MaxSteps(t) => write!(f, "max_steps({t})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub status: Status,
    pub accepted: usize,
    pub rejected: usize,
    /// Steps shrunk because a trial point left the domain.
    pub domain_retries: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &[f64])> {
        self.times
            .last()
            .map(|&t| (t, self.states[self.states.len() - 1].as_slice()))
    }

    /// Component `k` of every state.
    pub fn component(&self, k: usize) -> Vec<f64> {
        self.states.iter().map(|x| x[k]).collect()
    }
}

/// Integrates `sys` from `(t0, x0)` to `t1`. Backward integration
/// (`t1 < t0`) is allowed; `t1 == t0` yields the single initial sample.
/// Only configuration errors and non-domain evaluation failures return `Err`;
/// domain trouble ends the run with a status.
pub fn integrate(sys: &dyn OdeSystem, x0: &[f64], t0: f64, t1: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if x0.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            found: x0.len(),
        });
    }
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::InvalidParameter("time span must be finite".into()));
    }
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        status: Status::Completed,
        accepted: 0,
        rejected: 0,
        domain_retries: 0,
    };
    if !sys.in_domain(t0, x0) {
        traj.status = Status::DomainViolation(t0);
        return Ok(traj);
    }
    traj.times.push(t0);
    traj.states.push(x0.to_vec());
    if t1 == t0 {
        return Ok(traj);
    }
    match cfg.method {
        Method::Rk4Fixed => rk4_run(sys, x0, t0, t1, cfg, &mut traj)?,
        Method::Dp54Adaptive => dp54_run(sys, x0, t0, t1, cfg, &mut traj)?,
    }
    Ok(traj)
}

/// Evaluates the right-hand side, mapping domain errors to `Ok(false)`.
fn eval(sys: &dyn OdeSystem, t: f64, x: &[f64], dx: &mut [f64]) -> Result<bool> {
    if !sys.in_domain(t, x) {
        return Ok(false);
    }
    match sys.rhs(t, x, dx) {
        Ok(()) => Ok(dx.iter().all(|v| v.is_finite())),
        Err(Error::Domain(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

struct Rk4Work {
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

/// One classical RK4 step; `Ok(false)` if a stage left the domain.
fn rk4_step(sys: &dyn OdeSystem, t: f64, x: &[f64], h: f64, out: &mut [f64], w: &mut Rk4Work) -> Result<bool> {
    let d = x.len();
    let [k1, k2, k3, k4] = &mut w.k;
    if !eval(sys, t, x, k1)? {
        return Ok(false);
    }
    for i in 0..d {
        w.tmp[i] = x[i] + 0.5 * h * k1[i];
    }
    if !eval(sys, t + 0.5 * h, &w.tmp, k2)? {
        return Ok(false);
    }
    for i in 0..d {
        w.tmp[i] = x[i] + 0.5 * h * k2[i];
    }
    if !eval(sys, t + 0.5 * h, &w.tmp, k3)? {
        return Ok(false);
    }
    for i in 0..d {
        w.tmp[i] = x[i] + h * k3[i];
    }
    if !eval(sys, t + h, &w.tmp, k4)? {
        return Ok(false);
    }
    for i in 0..d {
        out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out.iter().all(|v| v.is_finite()) && sys.in_domain(t + h, out))
}

fn rk4_run(
    sys: &dyn OdeSystem,
    x0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    traj: &mut Trajectory,
) -> Result<()> {
    let d = x0.len();
    let span = t1 - t0;
    let steps = ((span.abs() / cfg.h0) - 1e-9).ceil().max(1.0) as usize;
    if steps > cfg.max_steps {
        traj.status = Status::MaxSteps(t0);
        return Ok(());
    }
    let h = span / steps as f64;
    let mut w = Rk4Work {
        k: [vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]],
        tmp: vec![0.0; d],
    };
    let mut x = x0.to_vec();
    let mut next = vec![0.0; d];
    for k in 0..steps {
        let ta = t0 + k as f64 * h;
        let tb = if k + 1 == steps { t1 } else { t0 + (k + 1) as f64 * h };
        if rk4_step(sys, ta, &x, tb - ta, &mut next, &mut w)? {
            std::mem::swap(&mut x, &mut next);
        } else {
            // sub-step towards the grid point with halved steps
            let mut t = ta;
            let mut hs = 0.5 * (tb - ta);
            traj.domain_retries += 1;
            while t != tb {
                if hs.abs() < cfg.hmin {
                    traj.status = Status::DomainViolation(t);
                    return Ok(());
                }
                let hh = if (tb - t).abs() <= hs.abs() { tb - t } else { hs };
                if rk4_step(sys, t, &x, hh, &mut next, &mut w)? {
                    std::mem::swap(&mut x, &mut next);
                    t = if hh == tb - t { tb } else { t + hh };
                } else {
                    traj.domain_retries += 1;
                    hs *= 0.5;
                }
            }
        }
        traj.accepted += 1;
        if (k + 1) % cfg.stride == 0 || k + 1 == steps {
            traj.times.push(tb);
            traj.states.push(x.clone());
        }
    }
    Ok(())
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

enum Trial {
    /// Error norm of an in-domain step.
    Done(f64),
    OutOfDomain,
}

struct Dp54Work {
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
    y5: Vec<f64>,
}

fn dp54_trial(
    sys: &dyn OdeSystem,
    t: f64,
    x: &[f64],
    h: f64,
    cfg: &IntegratorConfig,
    w: &mut Dp54Work,
) -> Result<Trial> {
    let d = x.len();
    // w.k[0] already holds f(t, x)
    for s in 1..7 {
        for i in 0..d {
            let mut acc = 0.0;
            for (j, a) in A[s][..s].iter().enumerate() {
                acc += a * w.k[j][i];
            }
            w.tmp[i] = x[i] + h * acc;
        }
        if !eval(sys, t + C[s] * h, &w.tmp, &mut w.k[s])? {
            return Ok(Trial::OutOfDomain);
        }
        if s == 6 {
            // stage 7 is evaluated at the 5th-order solution
            w.y5.copy_from_slice(&w.tmp);
        }
    }
    let mut err: f64 = 0.0;
    for i in 0..d {
        let mut e = 0.0;
        for s in 0..7 {
            e += (B5[s] - B4[s]) * w.k[s][i];
        }
        let scale = cfg.atol + cfg.rtol * x[i].abs().max(w.y5[i].abs());
        err = err.max((h * e).abs() / scale);
    }
    Ok(Trial::Done(err))
}

fn dp54_run(
    sys: &dyn OdeSystem,
    x0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    traj: &mut Trajectory,
) -> Result<()> {
    let d = x0.len();
    let dir = (t1 - t0).signum();
    let mut w = Dp54Work {
        k: vec![vec![0.0; d]; 7],
        tmp: vec![0.0; d],
        y5: vec![0.0; d],
    };
    let mut x = x0.to_vec();
    let mut t = t0;
    if !eval(sys, t, &x, &mut w.k[0])? {
        traj.status = Status::DomainViolation(t);
        return Ok(());
    }
    let mut h = cfg.h0.min(cfg.hmax);
    let mut steps = 0usize;
    let mut since_output = 0usize;
    let mut domain_shrinking = false;
    loop {
        let remaining = (t1 - t).abs();
        let last = remaining <= h * (1.0 + 1e-12);
        let hs = if last { remaining } else { h };
        if steps >= cfg.max_steps {
            traj.status = Status::MaxSteps(t);
            break;
        }
        steps += 1;
        match dp54_trial(sys, t, &x, dir * hs, cfg, &mut w)? {
            Trial::OutOfDomain => {
                traj.domain_retries += 1;
                traj.rejected += 1;
                domain_shrinking = true;
                h = 0.5 * hs;
                if h < cfg.hmin {
                    traj.status = Status::DomainViolation(t);
                    break;
                }
            }
            Trial::Done(err) if err <= 1.0 => {
                traj.accepted += 1;
                t = if last { t1 } else { t + dir * hs };
                x.copy_from_slice(&w.y5);
                w.k.swap(0, 6);
                since_output += 1;
                if last || since_output == cfg.stride {
                    traj.times.push(t);
                    traj.states.push(x.clone());
                    since_output = 0;
                }
                if last {
                    break;
                }
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                let grown = if domain_shrinking { fac.min(1.0) } else { fac };
                domain_shrinking = false;
                h = (hs * grown).min(cfg.hmax);
            }
            Trial::Done(err) => {
                traj.rejected += 1;
                h = hs * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                if h < cfg.hmin {
                    traj.status = Status::StepUnderflow(t);
                    break;
                }
            }
        }
    }
    if traj.times.last() != Some(&t) {
        traj.times.push(t);
        traj.states.push(x);
    }
    Ok(())
}

/// Values of a monitored quantity along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantSeries {
    pub name: String,
    pub values: Vec<f64>,
    /// `max_t |I(t) − I(t0)| / max(1, |I(t0)|)`.
    pub drift: f64,
}

/// Evaluates each field along `traj` and reports its relative drift.
pub fn monitor_invariants(
    traj: &Trajectory,
    fields: &[(String, Arc<dyn ScalarField>)],
) -> Result<Vec<InvariantSeries>> {
    fields
        .iter()
        .map(|(name, f)| {
            let values = traj
                .times
                .iter()
                .zip(&traj.states)
                .map(|(&t, x)| f.value(t, x))
                .collect::<Result<Vec<_>>>()?;
            let drift = relative_drift(&values);
            Ok(InvariantSeries {
                name: name.clone(),
                values,
                drift,
            })
        })
        .collect()
}

pub fn relative_drift(values: &[f64]) -> f64 {
    let Some(&v0) = values.first() else {
        return 0.0;
    };
    let scale = v0.abs().max(1.0);
    values.iter().map(|v| (v - v0).abs() / scale).fold(0.0, f64::max)
}

/// Five-point second derivative of component `k` at interior samples.
pub fn second_derivative(traj: &Trajectory, k: usize) -> Result<Vec<(f64, f64, f64)>> {
    let m = traj.len();
    if m < 5 {
        return Err(Error::TooShort { needed: 5, got: m });
    }
    let h = uniform_step(&traj.times)?;
    let y = traj.component(k);
    Ok((2..m - 2)
        .map(|i| {
            let d2 = (-y[i + 2] + 16.0 * y[i + 1] - 30.0 * y[i] + 16.0 * y[i - 1] - y[i - 2]) / (12.0 * h * h);
            (traj.times[i], y[i], d2)
        })
        .collect())
}

/// Five-point first derivative of component `k` at interior samples.
pub fn first_derivative(traj: &Trajectory, k: usize) -> Result<Vec<(f64, f64, f64)>> {
    let m = traj.len();
    if m < 5 {
        return Err(Error::TooShort { needed: 5, got: m });
    }
    let h = uniform_step(&traj.times)?;
    let y = traj.component(k);
    Ok((2..m - 2)
        .map(|i| {
            let d1 = (-y[i + 2] + 8.0 * y[i + 1] - 8.0 * y[i - 1] + y[i - 2]) / (12.0 * h);
            (traj.times[i], y[i], d1)
        })
        .collect())
}

/// Max over interior samples of `|y'' − rhs(t, y)|` where `y` is component
/// `k` of the state and `y''` comes from a five-point stencil.
pub fn residual_ode_check<F>(traj: &Trajectory, k: usize, rhs: F) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    Ok(second_derivative(traj, k)?
        .into_iter()
        .map(|(t, y, d2)| (d2 - rhs(t, y)).abs())
        .fold(0.0, f64::max))
}
