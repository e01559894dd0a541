//! JSON run configurations.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use lieham_core::catalog::{self, Coefficients, SystemParams};
use lieham_core::{IntegratorConfig, Method, SystemSpec, TimeCoefficient};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub n: Option<usize>,
    pub c: Option<Vec<f64>>,
    pub kappa: Option<f64>,
    pub lambda: Option<f64>,
    pub eta: Option<f64>,
    pub b: Option<f64>,
    pub space: Option<String>,
    pub potential: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorBlock {
    pub method: Option<String>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub h0: Option<f64>,
    pub hmax: Option<f64>,
    pub hmin: Option<f64>,
    pub max_steps: Option<usize>,
    pub stride: Option<usize>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    /// `c_<i>`, `kappa`, `lambda`, `eta`, `b`, or a coefficient name (whose
    /// expression is multiplied by each value).
    pub target: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: String,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub coefficients: BTreeMap<String, String>,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub tspan: [f64; 2],
    #[serde(default)]
    pub integrator: IntegratorBlock,
    pub invariants: Option<Vec<String>>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub sweep: Option<SweepBlock>,
}

/// A parsed configuration together with the directory relative paths
/// resolve against.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub raw: serde_json::Value,
    pub base_dir: PathBuf,
}

pub fn load(path: &Path) -> Result<LoadedConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let raw: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let config: RunConfig =
        serde_json::from_value(raw.clone()).with_context(|| format!("invalid config {}", path.display()))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedConfig { config, raw, base_dir })
}

impl LoadedConfig {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

impl RunConfig {
    /// Registry defaults overlaid with the config's parameters.
    pub fn system_params(&self) -> Result<SystemParams> {
        let mut sp = catalog::default_params(&self.system)?;
        let pc = &self.params;
        match (pc.n, &pc.c) {
            (Some(n), Some(c)) => {
                if c.len() != n {
                    bail!("params.c has {} entries but n = {n}", c.len());
                }
                sp.n = n;
                sp.c = c.clone();
            }
            (None, Some(c)) => {
                sp.n = c.len();
                sp.c = c.clone();
            }
            (Some(n), None) if n != sp.n => {
                sp.n = n;
                sp.c = vec![0.0; n];
            }
            _ => {}
        }
        sp.kappa = pc.kappa.unwrap_or(sp.kappa);
        sp.lambda = pc.lambda.unwrap_or(sp.lambda);
        sp.eta = pc.eta.unwrap_or(sp.eta);
        sp.b = pc.b.unwrap_or(sp.b);
        if let Some(s) = &pc.space {
            sp.space = s.clone();
        }
        if let Some(s) = &pc.potential {
            sp.potential = s.clone();
        }
        Ok(sp)
    }

    pub fn coefficient_exprs(&self) -> Result<Coefficients> {
        self.coefficients
            .iter()
            .map(|(k, v)| {
                let c = TimeCoefficient::parse(v).map_err(|e| anyhow!("coefficient `{k}`: {e}"))?;
                Ok((k.clone(), c))
            })
            .collect()
    }

    pub fn build(&self) -> Result<SystemSpec> {
        let params = self.system_params()?;
        let coefficients = self.coefficient_exprs()?;
        build_checked(&self.system, &params, &coefficients)
    }

    pub fn initial_state(&self, n: usize) -> Result<Vec<f64>> {
        if self.q.len() != n || self.p.len() != n {
            bail!(
                "initial q and p must have {n} entries (got {} and {})",
                self.q.len(),
                self.p.len()
            );
        }
        Ok(self.q.iter().chain(&self.p).copied().collect())
    }

    pub fn integrator(&self) -> Result<IntegratorConfig> {
        let b = &self.integrator;
        let mut cfg = IntegratorConfig::default();
        if let Some(m) = &b.method {
            cfg.method = m.parse::<Method>()?;
        }
        if cfg.method == Method::Rk4Fixed {
            cfg = IntegratorConfig::rk4(b.h0.unwrap_or(1e-3));
        }
        cfg.rtol = b.rtol.unwrap_or(cfg.rtol);
        cfg.atol = b.atol.unwrap_or(cfg.atol);
        cfg.h0 = b.h0.unwrap_or(cfg.h0);
        cfg.hmax = b.hmax.unwrap_or(cfg.hmax.max(cfg.h0));
        cfg.hmin = b.hmin.unwrap_or(cfg.hmin.min(cfg.h0));
        cfg.max_steps = b.max_steps.unwrap_or(cfg.max_steps);
        cfg.stride = b.stride.unwrap_or(cfg.stride);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn invariant_names(&self, sys: &SystemSpec) -> Vec<String> {
        self.invariants.clone().unwrap_or_else(|| sys.default_invariants())
    }
}

pub fn build_checked(name: &str, params: &SystemParams, coefficients: &Coefficients) -> Result<SystemSpec> {
    catalog::build_system(name, params, coefficients).map_err(|e| anyhow!("system `{name}`: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(v: serde_json::Value) -> RunConfig {
        serde_json::from_value(v).unwrap()
    }

    fn base() -> serde_json::Value {
        serde_json::json!({"system": "sw", "q": [1.0, 1.0, 1.0], "p": [0.0, 0.0, 0.0], "tspan": [0.0, 1.0]})
    }

    #[test]
    fn params_fall_back_to_registry_defaults() {
        let p = parse(base()).system_params().unwrap();
        assert_eq!(p.n, 3);
        assert_eq!(p.c, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn new_dimension_without_c_gets_zeros() {
        let mut v = base();
        v["params"] = serde_json::json!({"n": 2});
        assert_eq!(parse(v).system_params().unwrap().c, vec![0.0, 0.0]);
    }

    #[test]
    fn mismatched_c_is_rejected() {
        let mut v = base();
        v["params"] = serde_json::json!({"n": 2, "c": [1.0]});
        assert!(parse(v).system_params().is_err());
    }

    #[test]
    fn rk4_uses_h0_as_its_step() {
        let mut v = base();
        v["integrator"] = serde_json::json!({"method": "rk4", "h0": 0.01});
        let cfg = parse(v).integrator().unwrap();
        assert_eq!(cfg.method, Method::Rk4Fixed);
        assert_eq!(cfg.h0, 0.01);
    }

    #[test]
    fn default_integrator_is_adaptive() {
        let cfg = parse(base()).integrator().unwrap();
        assert_eq!((cfg.rtol, cfg.atol, cfg.h0, cfg.hmax), (1e-10, 1e-10, 1e-3, 0.1));
    }

    #[test]
    fn relative_output_resolves_against_config_dir() {
        let loaded = LoadedConfig {
            config: parse(base()),
            raw: base(),
            base_dir: PathBuf::from("/tmp/runs"),
        };
        assert_eq!(loaded.resolve(Path::new("a.csv")), PathBuf::from("/tmp/runs/a.csv"));
        assert_eq!(loaded.resolve(Path::new("/x/a.csv")), PathBuf::from("/x/a.csv"));
    }
}
