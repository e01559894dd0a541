//! Named systems, realizations and curved-space utilities.

pub mod benchmarks;
pub mod curvature;
pub mod realizations;
pub mod systems;

pub use curvature::{scalar_curvature, ConformalFactor, CurvedSpaceSpec, KineticPair, Metric};
pub use systems::{
    make_central, make_curved_oscillator, make_darboux3, make_henon_heiles, make_hh_preset, make_ho_h4, make_ho_sl2,
    make_kc, make_painleve2, make_sw, make_taubnut, Chart, Coefficients, HenonHeilesPreset, RadialPotential,
    SystemParams, SystemSpec,
};

use crate::error::{Error, Result};
use crate::phase::TimeCoefficient;

/// Registry entry: what a system needs from a run configuration.
#[derive(Clone, Copy, Debug)]
pub struct SystemInfo {
    pub name: &'static str,
    pub summary: &'static str,
    /// Numeric parameters the system reads.
    pub params: &'static [&'static str],
    /// Coefficient names with their default expressions.
    pub coefficients: &'static [(&'static str, &'static str)],
}

const OMEGA: &[(&str, &str)] = &[("omega2", "1")];
const KEPLER: &[(&str, &str)] = &[("K", "1")];
const NC: &[&str] = &["n", "c"];
const NCK: &[&str] = &["n", "c", "kappa"];

pub const SYSTEMS: &[SystemInfo] = &[
    SystemInfo {
        name: "sw",
        summary: "Smorodinsky-Winternitz system h = h+/2 + omega2(t) h-/2",
        params: NC,
        coefficients: OMEGA,
    },
    SystemInfo {
        name: "ho_sl2",
        summary: "isotropic oscillator on the sl(2,R) realization",
        params: &["n"],
        coefficients: OMEGA,
    },
    SystemInfo {
        name: "ho_h4",
        summary: "one-dimensional oscillator on the oscillator algebra",
        params: &[],
        coefficients: OMEGA,
    },
    SystemInfo {
        name: "henon_heiles",
        summary: "generic Henon-Heiles family on sl(2,R) + h3",
        params: &[],
        coefficients: &[("Omega1", "0.5"), ("Omega2", "0.5"), ("alpha", "1"), ("beta", "1/3")],
    },
    SystemInfo {
        name: "hh_sk",
        summary: "Sawada-Kotera Henon-Heiles preset",
        params: &[],
        coefficients: &[("omega2", "1"), ("alpha", "1")],
    },
    SystemInfo {
        name: "hh_kdv12",
        summary: "KdV 1:2 Henon-Heiles preset",
        params: &[],
        coefficients: &[("omega2", "1"), ("alpha", "1")],
    },
    SystemInfo {
        name: "hh_kk",
        summary: "Kaup-Kupershmidt Henon-Heiles preset",
        params: &[],
        coefficients: &[("omega2", "1"), ("alpha", "1")],
    },
    SystemInfo {
        name: "painleve2",
        summary: "second Painleve equation on the Heisenberg realization",
        params: &["b"],
        coefficients: &[],
    },
    SystemInfo {
        name: "central",
        summary: "central potential on a curved space (space: flat|poincare|beltrami|darboux3|taubnut, potential: oscillator|kepler)",
        params: &["n", "c", "space", "potential", "kappa", "lambda", "eta"],
        coefficients: &[("omega2", "1"), ("K", "1")],
    },
    SystemInfo {
        name: "osc_poincare",
        summary: "curved oscillator in Poincare coordinates",
        params: NCK,
        coefficients: OMEGA,
    },
    SystemInfo {
        name: "osc_beltrami",
        summary: "curved oscillator in Beltrami coordinates",
        params: NCK,
        coefficients: OMEGA,
    },
    SystemInfo {
        name: "darboux3",
        summary: "Darboux III oscillator",
        params: &["n", "c", "lambda"],
        coefficients: OMEGA,
    },
    SystemInfo {
        name: "kc_euclidean",
        summary: "Euclidean Kepler-Coulomb system",
        params: NC,
        coefficients: KEPLER,
    },
    SystemInfo {
        name: "kc_poincare",
        summary: "Kepler-Coulomb system in Poincare coordinates",
        params: NCK,
        coefficients: KEPLER,
    },
    SystemInfo {
        name: "kc_beltrami",
        summary: "Kepler-Coulomb system in Beltrami coordinates",
        params: NCK,
        coefficients: KEPLER,
    },
    SystemInfo {
        name: "kc_taubnut",
        summary: "Taub-NUT Kepler-Coulomb system",
        params: &["n", "c", "eta"],
        coefficients: KEPLER,
    },
];

pub fn info(name: &str) -> Result<&'static SystemInfo> {
    SYSTEMS
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::unknown("system", name))
}

/// Parameters used when a configuration leaves them out.
pub fn default_params(name: &str) -> Result<SystemParams> {
    let with = |n: usize| -> SystemParams {
        let c = if n == 3 { vec![1.0, 2.0, 3.0] } else { vec![0.0; n] };
        SystemParams::with_c(&c)
    };
    let p = match info(name)?.name {
        "sw" | "central" | "kc_euclidean" => with(3),
        "ho_sl2" => with(2),
        "ho_h4" => with(1),
        "henon_heiles" | "hh_sk" | "hh_kdv12" | "hh_kk" => with(2),
        "painleve2" => SystemParams { b: 0.5, ..with(1) },
        "osc_poincare" | "osc_beltrami" | "kc_poincare" | "kc_beltrami" => SystemParams { kappa: 0.5, ..with(3) },
        "darboux3" => SystemParams { lambda: 1.0, ..with(3) },
        "kc_taubnut" => SystemParams { eta: 1.0, ..with(3) },
        _ => unreachable!("registry and defaults out of sync"),
    };
    Ok(p)
}

/// Coefficients of `name` with defaults filled in; unknown names are errors.
pub fn resolve_coefficients(name: &str, given: &Coefficients) -> Result<Coefficients> {
    let info = info(name)?;
    if let Some(bad) = given.keys().find(|k| !info.coefficients.iter().any(|(n, _)| n == *k)) {
        return Err(Error::unknown("coefficient", format!("{bad} (system {name})")));
    }
    let mut out = Coefficients::new();
    for (k, default) in info.coefficients {
        let v = match given.get(*k) {
            Some(v) => v.clone(),
            None => TimeCoefficient::parse(default)?,
        };
        out.insert(k.to_string(), v);
    }
    Ok(out)
}

fn central_space(p: &SystemParams) -> Result<CurvedSpaceSpec> {
    let n = p.n;
    Ok(match p.space.as_str() {
        "flat" => CurvedSpaceSpec::conformal(n, ConformalFactor::flat()),
        "poincare" => CurvedSpaceSpec::conformal(n, ConformalFactor::poincare(p.kappa)),
        "beltrami" => CurvedSpaceSpec::kinetic(n, KineticPair::beltrami(p.kappa)),
        "darboux3" => CurvedSpaceSpec::conformal(n, ConformalFactor::darboux3(p.lambda)),
        "taubnut" => CurvedSpaceSpec::conformal(n, ConformalFactor::taubnut(p.eta)),
        other => return Err(Error::unknown("space", other)),
    })
}

/// Builds a registered system from parameters and (possibly partial)
/// coefficients.
pub fn build_system(name: &str, p: &SystemParams, given: &Coefficients) -> Result<SystemSpec> {
    let co = resolve_coefficients(name, given)?;
    let get = |k: &str| co[k].clone();
    match name {
        "sw" => make_sw(p.n, &p.c, get("omega2")),
        "ho_sl2" => {
            if p.c.iter().any(|&c| c != 0.0) {
                return Err(Error::InvalidParameter(
                    "ho_sl2 has no centrifugal terms; c must be zero".into(),
                ));
            }
            make_ho_sl2(p.n, get("omega2"))
        }
        "ho_h4" => {
            if p.n != 1 {
                return Err(Error::InvalidParameter(format!("ho_h4 requires n = 1, got {}", p.n)));
            }
            make_ho_h4(get("omega2"))
        }
        "henon_heiles" | "hh_sk" | "hh_kdv12" | "hh_kk" => {
            if p.n != 2 {
                return Err(Error::InvalidParameter(format!("{name} requires n = 2, got {}", p.n)));
            }
            match name {
                "henon_heiles" => make_henon_heiles(get("Omega1"), get("Omega2"), get("alpha"), get("beta")),
                "hh_sk" => make_hh_preset(HenonHeilesPreset::SawadaKotera, get("omega2"), get("alpha")),
                "hh_kdv12" => make_hh_preset(HenonHeilesPreset::KdV12, get("omega2"), get("alpha")),
                _ => make_hh_preset(HenonHeilesPreset::KaupKupershmidt, get("omega2"), get("alpha")),
            }
        }
        "painleve2" => make_painleve2(p.b),
        "central" => {
            let potential = match p.potential.as_str() {
                "oscillator" => RadialPotential::oscillator(get("omega2")),
                "kepler" => RadialPotential::kepler(get("K")),
                other => return Err(Error::unknown("potential", other)),
            };
            make_central(&p.c, central_space(p)?, potential)
        }
        "osc_poincare" => make_curved_oscillator(Chart::Poincare, p.n, p.kappa, &p.c, get("omega2")),
        "osc_beltrami" => make_curved_oscillator(Chart::Beltrami, p.n, p.kappa, &p.c, get("omega2")),
        "darboux3" => make_darboux3(p.n, p.lambda, &p.c, get("omega2")),
        "kc_euclidean" => make_kc(Chart::Euclidean, p.n, 0.0, &p.c, get("K")),
        "kc_poincare" => make_kc(Chart::Poincare, p.n, p.kappa, &p.c, get("K")),
        "kc_beltrami" => make_kc(Chart::Beltrami, p.n, p.kappa, &p.c, get("K")),
        "kc_taubnut" => make_taubnut(p.n, p.eta, &p.c, get("K")),
        _ => Err(Error::unknown("system", name)),
    }
}

/// One row of the printed equation-of-motion tables, instantiated with
/// t-dependent coefficients.
pub struct TableRow {
    pub label: String,
    pub system: SystemSpec,
}

/// Every system whose equations of motion are printed, with both curvature
/// signs where the chart allows them.
pub fn table_rows() -> Result<Vec<TableRow>> {
    let w = TimeCoefficient::parse("1+0.1*sin(t)")?;
    let k = TimeCoefficient::parse("1+0.2*cos(t)")?;
    let a = TimeCoefficient::parse("0.3+0.05*cos(t)")?;
    let c = [1.0, 2.0, 3.0];
    let mut rows = vec![
        (
            "hh_sk".to_string(),
            make_hh_preset(HenonHeilesPreset::SawadaKotera, w.clone(), a.clone())?,
        ),
        (
            "hh_kdv12".into(),
            make_hh_preset(HenonHeilesPreset::KdV12, w.clone(), a.clone())?,
        ),
        (
            "hh_kk".into(),
            make_hh_preset(HenonHeilesPreset::KaupKupershmidt, w.clone(), a.clone())?,
        ),
        (
            "henon_heiles".into(),
            make_henon_heiles(
                w.scaled(0.5),
                w.scaled(1.5),
                a.clone(),
                TimeCoefficient::parse("0.5+0.1*t")?,
            )?,
        ),
        ("sw".into(), make_sw(3, &c, w.clone())?),
        ("kc_euclidean".into(), make_kc(Chart::Euclidean, 3, 0.0, &c, k.clone())?),
        ("kc_taubnut(eta=1)".into(), make_taubnut(3, 1.0, &c, k.clone())?),
        ("kc_taubnut(eta=-0.2)".into(), make_taubnut(3, -0.2, &c, k.clone())?),
    ];
    for kappa in [0.5, -0.5] {
        rows.push((
            format!("osc_poincare(kappa={kappa})"),
            make_curved_oscillator(Chart::Poincare, 3, kappa, &c, w.clone())?,
        ));
        rows.push((
            format!("osc_beltrami(kappa={kappa})"),
            make_curved_oscillator(Chart::Beltrami, 3, kappa, &c, w.clone())?,
        ));
        rows.push((
            format!("darboux3(lambda={kappa})"),
            make_darboux3(3, kappa, &c, w.clone())?,
        ));
        rows.push((
            format!("kc_poincare(kappa={kappa})"),
            make_kc(Chart::Poincare, 3, kappa, &c, k.clone())?,
        ));
        rows.push((
            format!("kc_beltrami(kappa={kappa})"),
            make_kc(Chart::Beltrami, 3, kappa, &c, k.clone())?,
        ));
    }
    Ok(rows
        .into_iter()
        .map(|(label, system)| TableRow { label, system })
        .collect())
}

/// Max-norm difference between the closed-form equations of motion and the
/// composed Hamiltonian field over seeded samples.
pub fn closed_form_residual(sys: &SystemSpec, samples: usize, seed: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for (t, x) in sys.samples(samples, seed)? {
        let direct = sys.vector_field(t, &x)?;
        let Some(closed) = sys.closed_form_field(t, &x)? else {
            return Err(Error::InvalidParameter(format!("{} has no closed form", sys.name())));
        };
        for (a, b) in direct.iter().zip(&closed) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_registered_system_builds_with_defaults() {
        for s in SYSTEMS {
            let p = default_params(s.name).unwrap();
            let sys = build_system(s.name, &p, &Coefficients::new()).unwrap();
            assert_eq!(sys.name(), s.name);
        }
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(info("nosuch").is_err());
        let p = default_params("sw").unwrap();
        let mut co = Coefficients::new();
        co.insert("K".into(), TimeCoefficient::constant(1.0));
        assert!(build_system("sw", &p, &co).is_err());
        assert!(build_system("ho_h4", &SystemParams::with_c(&[0.0, 0.0]), &Coefficients::new()).is_err());
    }

    #[test]
    fn tables_agree_with_composition() {
        for row in table_rows().unwrap() {
            let r = closed_form_residual(&row.system, 50, 11).unwrap();
            assert!(r <= 1e-10, "{}: {r}", row.label);
        }
    }
}
