//! `simulate` and `sweep`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use lieham_core::integrate::{monitor_invariants, InvariantSeries};
use lieham_core::{integrate, ScalarField, Status, SystemSpec, TimeCoefficient, Trajectory};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{build_checked, LoadedConfig, RunConfig};
use crate::{status_code, VERSION};

/// Seventeen significant digits: enough to round-trip any `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// A finished run: the trajectory and the monitored series, `H` first.
pub struct RunResult {
    pub system: SystemSpec,
    pub trajectory: Trajectory,
    pub series: Vec<InvariantSeries>,
}

impl RunResult {
    pub fn drifts(&self) -> impl Iterator<Item = (&str, f64)> {
        self.series.iter().map(|s| (s.name.as_str(), s.drift))
    }
}

fn monitored(sys: &SystemSpec, names: &[String]) -> Result<Vec<(String, Arc<dyn ScalarField>)>> {
    let mut out = vec![("H".to_string(), sys.invariant("H")?)];
    for n in names {
        if n == "H" {
            continue;
        }
        let f = sys.invariant(n).map_err(|e| anyhow!("system `{}`: {e}", sys.name()))?;
        out.push((n.clone(), f));
    }
    Ok(out)
}

/// Integrates `sys` from the config's initial state.
pub fn run_system(cfg: &RunConfig, sys: SystemSpec) -> Result<RunResult> {
    let x0 = cfg.initial_state(sys.n())?;
    let icfg = cfg.integrator()?;
    let fields = monitored(&sys, &cfg.invariant_names(&sys))?;
    let [t0, t1] = cfg.tspan;
    if !(t0.is_finite() && t1.is_finite()) {
        bail!("tspan must be finite");
    }
    let trajectory = integrate(&sys, &x0, t0, t1, &icfg)?;
    let series = monitor_invariants(&trajectory, &fields)?;
    Ok(RunResult {
        system: sys,
        trajectory,
        series,
    })
}

pub fn run_config(cfg: &RunConfig) -> Result<RunResult> {
    run_system(cfg, cfg.build()?)
}

/// CSV with columns `t, q1..qn, p1..pn, H, <invariants>`.
pub fn trajectory_csv(r: &RunResult) -> String {
    let n = r.system.n();
    let mut out = String::from("t");
    for i in 1..=n {
        write!(out, ",q{i}").unwrap();
    }
    for i in 1..=n {
        write!(out, ",p{i}").unwrap();
    }
    for s in &r.series {
        write!(out, ",{}", s.name).unwrap();
    }
    out.push('\n');
    for (k, (t, x)) in r.trajectory.times.iter().zip(&r.trajectory.states).enumerate() {
        out.push_str(&fmt_float(*t));
        for v in x {
            out.push(',');
            out.push_str(&fmt_float(*v));
        }
        for s in &r.series {
            out.push(',');
            out.push_str(&fmt_float(s.values[k]));
        }
        out.push('\n');
    }
    out
}

fn status_json(s: Status) -> serde_json::Value {
    match s {
        Status::Completed => json!({"kind": "completed"}),
        Status::DomainViolation(t) => json!({"kind": "domain_violation", "t": t}),
        Status::StepUnderflow(t) => json!({"kind": "step_underflow", "t": t}),
        Status::MaxSteps(t) => json!({"kind": "max_steps", "t": t}),
    }
}

pub fn manifest(loaded: &LoadedConfig, r: &RunResult, csv_path: &Path) -> serde_json::Value {
    let drifts: serde_json::Map<String, serde_json::Value> =
        r.drifts().map(|(n, d)| (n.to_string(), json!(d))).collect();
    json!({
        "version": VERSION,
        "config": loaded.raw,
        "system": r.system.name(),
        "output": csv_path.file_name().map(|f| f.to_string_lossy().into_owned()),
        "status": status_json(r.trajectory.status),
        "samples": r.trajectory.len(),
        "accepted_steps": r.trajectory.accepted,
        "rejected_steps": r.trajectory.rejected,
        "domain_retries": r.trajectory.domain_retries,
        "drifts": drifts,
    })
}

fn manifest_path(csv: &Path) -> PathBuf {
    let stem = csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    csv.with_file_name(format!("{stem}.manifest.json"))
}

fn output_path(loaded: &LoadedConfig, over: Option<&Path>, fallback: &str) -> PathBuf {
    match over {
        Some(p) => p.to_path_buf(),
        None => loaded.resolve(loaded.config.output.as_deref().unwrap_or(Path::new(fallback))),
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Runs a config, writes its CSV and manifest, returns the exit code.
pub fn simulate(loaded: &LoadedConfig, out: Option<&Path>) -> Result<i32> {
    let r = run_config(&loaded.config)?;
    let csv_path = output_path(loaded, out, &format!("{}.csv", loaded.config.system));
    write(&csv_path, &trajectory_csv(&r))?;
    let m = serde_json::to_string_pretty(&manifest(loaded, &r, &csv_path))?;
    write(&manifest_path(&csv_path), &(m + "\n"))?;
    println!(
        "{}: {} ({} samples, {} accepted, {} rejected) -> {}",
        r.system.name(),
        r.trajectory.status,
        r.trajectory.len(),
        r.trajectory.accepted,
        r.trajectory.rejected,
        csv_path.display()
    );
    for (name, d) in r.drifts() {
        println!("  drift {name} = {d:.3e}");
    }
    Ok(status_code(r.trajectory.status))
}

/// One sweep job: the config with `target` set to `value`.
fn sweep_system(cfg: &RunConfig, target: &str, value: f64) -> Result<SystemSpec> {
    let mut params = cfg.system_params()?;
    let mut coefficients = cfg.coefficient_exprs()?;
    if let Some(i) = target.strip_prefix("c_") {
        let i: usize = i.parse().map_err(|_| anyhow!("bad sweep target `{target}`"))?;
        if i == 0 || i > params.n {
            bail!("sweep target `{target}` out of range for n = {}", params.n);
        }
        params.c[i - 1] = value;
    } else {
        match target {
            "kappa" => params.kappa = value,
            "lambda" => params.lambda = value,
            "eta" => params.eta = value,
            "b" => params.b = value,
            name => {
                let resolved = lieham_core::catalog::resolve_coefficients(&cfg.system, &coefficients)
                    .map_err(|e| anyhow!("{e}"))?;
                let base: TimeCoefficient = resolved
                    .get(name)
                    .cloned()
                    .ok_or_else(|| anyhow!("unknown sweep target `{name}` for system `{}`", cfg.system))?;
                coefficients.insert(name.to_string(), base.scaled(value));
            }
        }
    }
    build_checked(&cfg.system, &params, &coefficients)
}

pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub status: Status,
    pub drifts: Vec<(String, f64)>,
}

/// Runs every sweep value on a pool of `workers` threads. Rows come back in
/// sweep order whatever the schedule.
pub fn sweep_rows(cfg: &RunConfig, workers: Option<usize>) -> Result<Vec<SweepRow>> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| anyhow!("config has no `sweep` block"))?;
    if sweep.values.is_empty() {
        bail!("sweep values list is empty");
    }
    if let Some(v) = sweep.values.iter().find(|v| !v.is_finite()) {
        bail!("sweep value {v} is not finite");
    }
    // Build every system up front so configuration errors surface before
    // any work starts.
    let systems = sweep
        .values
        .iter()
        .map(|&v| sweep_system(cfg, &sweep.target, v))
        .collect::<Result<Vec<_>>>()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        pool = pool.num_threads(w.max(1));
    }
    let pool = pool.build()?;
    pool.install(|| {
        systems
            .into_par_iter()
            .zip(sweep.values.par_iter())
            .enumerate()
            .map(|(index, (sys, &value))| {
                let r = run_system(cfg, sys)?;
                Ok(SweepRow {
                    index,
                    value,
                    status: r.trajectory.status,
                    drifts: r.drifts().map(|(n, d)| (n.to_string(), d)).collect(),
                })
            })
            .collect()
    })
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("index,value,status");
    if let Some(first) = rows.first() {
        for (name, _) in &first.drifts {
            write!(out, ",drift_{name}").unwrap();
        }
    }
    out.push('\n');
    for r in rows {
        write!(out, "{},{},{}", r.index, fmt_float(r.value), r.status).unwrap();
        for (_, d) in &r.drifts {
            out.push(',');
            out.push_str(&fmt_float(*d));
        }
        out.push('\n');
    }
    out
}

pub fn sweep(loaded: &LoadedConfig, out: Option<&Path>, workers: Option<usize>) -> Result<i32> {
    let rows = sweep_rows(&loaded.config, workers)?;
    let path = output_path(loaded, out, &format!("{}_sweep.csv", loaded.config.system));
    write(&path, &sweep_csv(&rows))?;
    let done = rows.iter().filter(|r| r.status.is_completed()).count();
    println!("sweep: {} runs, {done} completed -> {}", rows.len(), path.display());
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 6.02e23, 0.0] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn manifest_sits_beside_csv() {
        assert_eq!(
            manifest_path(Path::new("out/sw.csv")),
            PathBuf::from("out/sw.manifest.json")
        );
    }
}
