//! TOML run configuration.
//!
//! Sections: `[eos]`, `[domain]`, `[initial]`, `[solver]`, `[diagnostics]`,
//! `[output]`. See the README for every key. Expressions in `[initial]` and
//! `g` use the variables `x` and `M`; custom pressure-law expressions use
//! `eta` (and `theta` for `kappa`).

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::domain::{DomainSpec, Forcing};
use crate::eos::{EosFunctions, EosParams, EosSpec, Family};
use crate::expr::Expr;
use crate::model::Model;
use crate::solver::{RunSettings, StepParams, StopRule};
use crate::state::{initialize, InitialProfiles, State};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub eos: RawEos,
    pub domain: RawDomain,
    pub initial: RawInitial,
    #[serde(default)]
    pub solver: RawSolver,
    #[serde(default)]
    pub diagnostics: RawDiagnostics,
    #[serde(default)]
    pub output: RawOutput,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEos {
    pub builtin: Option<String>,
    pub family: Option<String>,
    pub big_p0: Option<String>,
    pub big_p1: Option<String>,
    pub p0: Option<String>,
    pub p1: Option<String>,
    pub kappa: Option<String>,
    pub cv: Option<f64>,
    pub nu: Option<f64>,
    pub kappa_lo: Option<f64>,
    pub kappa_hi: Option<f64>,
    pub eta_check: Option<f64>,
    pub eta_hat: Option<f64>,
    pub eval_bracket: Option<[f64; 2]>,
    pub operating_box: Option<[f64; 4]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RawForcing {
    Constant(f64),
    Expr(String),
    Table(Vec<[f64; 3]>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDomain {
    pub mass: f64,
    pub cells: usize,
    pub p_gamma: f64,
    pub theta_gamma: f64,
    pub g: Option<RawForcing>,
    #[serde(default)]
    pub allow_nonpositive_ps: bool,
    pub ps_floor: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInitial {
    pub eta: String,
    pub v: String,
    pub theta: String,
    pub theta_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSolver {
    pub dt: Option<f64>,
    pub dt_min: Option<f64>,
    pub dt_max: Option<f64>,
    pub picard_tol: Option<f64>,
    pub picard_max: Option<usize>,
    pub positivity_floor: Option<f64>,
    pub t_end: Option<f64>,
    pub grow_max_sweeps: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDiagnostics {
    pub q_list: Option<Vec<f64>>,
    pub stop: Option<bool>,
    pub v_threshold: Option<f64>,
    pub theta_threshold: Option<f64>,
    pub p_threshold: Option<f64>,
    pub dwell_fraction: Option<f64>,
    pub class_tol: Option<f64>,
    pub root_bracket: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub stride: Option<usize>,
    pub snapshot_times: Option<Vec<f64>>,
}

pub const DEFAULT_PS_FLOOR: f64 = 1e-6;
pub const DEFAULT_CLASS_TOL: f64 = 1e-2;

/// A validated configuration, ready to run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub name: String,
    pub model: Model,
    pub initial: State,
    pub warnings: Vec<String>,
    pub settings: RunSettings,
    pub class_tol: f64,
    pub root_bracket: Option<(f64, f64)>,
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    parse_config_with(path, &[])
}

/// Parses `path` after replacing numeric keys (dotted paths such as
/// `domain.p_gamma`) with the given values.
pub fn parse_config_with(path: &Path, overrides: &[(String, f64)]) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config_str(&text, overrides)
}

pub fn parse_config_str(text: &str, overrides: &[(String, f64)]) -> Result<RunConfig, ConfigError> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    for (key, value) in overrides {
        set_numeric(&mut table, key, *value)?;
    }
    let raw: RawConfig = table.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    build(raw)
}

fn set_numeric(table: &mut toml::Table, key: &str, value: f64) -> Result<(), ConfigError> {
    let bad = |m: &str| ConfigError::Invalid(vec![format!("sweep key {key}: {m}")]);
    let parts: Vec<&str> = key.split('.').collect();
    let (last, head) = parts.split_last().ok_or_else(|| bad("empty key"))?;
    let mut cur = table;
    for p in head {
        cur = cur
            .get_mut(*p)
            .and_then(|v| v.as_table_mut())
            .ok_or_else(|| bad("no such section"))?;
    }
    let new = match cur.get(*last) {
        Some(toml::Value::Integer(_)) => {
            if value.fract() != 0.0 || value.abs() > i64::MAX as f64 {
                return Err(bad("integer key needs an integer value"));
            }
            toml::Value::Integer(value as i64)
        }
        Some(toml::Value::Float(_)) | None => toml::Value::Float(value),
        Some(_) => return Err(bad("not a numeric key")),
    };
    cur.insert(last.to_string(), new);
    Ok(())
}

fn family_of(name: &str) -> Option<Family> {
    match name.to_ascii_lowercase().as_str() {
        "nuclear" => Some(Family::Nuclear),
        "thermoviscoelastic" => Some(Family::Thermoviscoelastic),
        _ => None,
    }
}

fn scalar_fn(label: &str, text: &Option<String>, errs: &mut Vec<String>) -> Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>> {
    let Some(text) = text else {
        errs.push(format!("eos.{label} is required for a custom pressure law"));
        return None;
    };
    match Expr::parse(text, &["eta"]) {
        Ok(e) => Some(Arc::new(move |eta: f64| e.eval(&[eta]))),
        Err(e) => {
            errs.push(format!("eos.{label}: {e}"));
            None
        }
    }
}

fn build_eos(raw: &RawEos, errs: &mut Vec<String>) -> Option<EosSpec> {
    let custom_keys = [&raw.big_p0, &raw.big_p1, &raw.p0, &raw.p1].iter().any(|k| k.is_some());
    if let Some(name) = &raw.builtin {
        if custom_keys {
            errs.push("eos.builtin cannot be combined with custom expressions".to_string());
            return None;
        }
        let spec = match name.to_ascii_uppercase().as_str() {
            "NUC-1" => EosSpec::nuc1(),
            "TVE-1" => EosSpec::tve1(),
            other => {
                errs.push(format!("unknown eos.builtin {other:?} (expected NUC-1 or TVE-1)"));
                return None;
            }
        };
        if let Some(f) = &raw.family {
            match family_of(f) {
                Some(fam) if fam == spec.family() => {}
                Some(fam) => return Some(spec.with_family(fam)),
                None => errs.push(format!("unknown eos.family {f:?}")),
            }
        }
        return Some(spec);
    }
    let family = match raw.family.as_deref().map(family_of) {
        Some(Some(f)) => Some(f),
        Some(None) => {
            errs.push(format!("unknown eos.family {:?}", raw.family.as_deref().unwrap_or("")));
            None
        }
        None => {
            errs.push("eos.family is required for a custom pressure law".to_string());
            None
        }
    };
    let big_p0 = scalar_fn("big_p0", &raw.big_p0, errs);
    let big_p1 = scalar_fn("big_p1", &raw.big_p1, errs);
    let p0 = scalar_fn("p0", &raw.p0, errs);
    let p1 = scalar_fn("p1", &raw.p1, errs);
    let kappa_text = raw.kappa.clone().unwrap_or_else(|| "1".to_string());
    let kappa = match Expr::parse(&kappa_text, &["eta", "theta"]) {
        Ok(e) => Some(e),
        Err(e) => {
            errs.push(format!("eos.kappa: {e}"));
            None
        }
    };
    let (family, big_p0, big_p1, p0, p1, kappa) = (family?, big_p0?, big_p1?, p0?, p1?, kappa?);
    let mut params = EosParams::new("custom", family);
    let k_const = kappa.as_constant();
    params.cv = raw.cv.unwrap_or(1.0);
    params.nu = raw.nu.unwrap_or(1.0);
    params.kappa_lo = raw.kappa_lo.or(k_const).unwrap_or(1.0);
    params.kappa_hi = raw.kappa_hi.or(k_const).unwrap_or(1.0);
    params.eta_check = raw.eta_check;
    params.eta_hat = raw.eta_hat;
    if let Some([a, b]) = raw.eval_bracket {
        params.eval_bracket = (a, b);
    }
    if let Some([a, b, c, d]) = raw.operating_box {
        params.operating_box = (a, b, c, d);
    }
    let funcs = EosFunctions {
        big_p0,
        big_p1,
        p0,
        p1,
        kappa: Arc::new(move |eta, theta| kappa.eval(&[eta, theta])),
    };
    match EosSpec::new(funcs, params) {
        Ok(s) => Some(s),
        Err(e) => {
            errs.push(e.to_string());
            None
        }
    }
}

fn expr(label: &str, text: &str, errs: &mut Vec<String>) -> Option<Expr> {
    match Expr::parse(text, &["x", "M"]) {
        Ok(e) => Some(e),
        Err(e) => {
            errs.push(format!("{label}: {e}"));
            None
        }
    }
}

fn build(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let mut errs = Vec::new();
    let spec = build_eos(&raw.eos, &mut errs);

    let d = &raw.domain;
    let forcing = match &d.g {
        None => Some(Forcing::Zero),
        Some(RawForcing::Constant(g)) => Some(if *g == 0.0 { Forcing::Zero } else { Forcing::Constant(*g) }),
        Some(RawForcing::Expr(t)) => expr("domain.g", t, &mut errs).map(|e| match e.as_constant() {
            Some(c) => Forcing::Constant(c),
            None => Forcing::Expr(e),
        }),
        Some(RawForcing::Table(rows)) => Some(Forcing::Table(rows.iter().map(|r| (r[0], r[1], r[2])).collect())),
    };
    let domain = forcing.and_then(|f| match DomainSpec::new(d.mass, d.cells, d.p_gamma, d.theta_gamma, f) {
        Ok(d) => Some(d),
        Err(e) => {
            errs.push(e.to_string());
            None
        }
    });

    let i = &raw.initial;
    let eta = expr("initial.eta", &i.eta, &mut errs);
    let v = expr("initial.v", &i.v, &mut errs);
    let theta = expr("initial.theta", &i.theta, &mut errs);

    let s = &raw.solver;
    let defaults = StepParams::default();
    let params = StepParams {
        dt: s.dt.unwrap_or(defaults.dt),
        dt_min: s.dt_min.unwrap_or(defaults.dt_min),
        dt_max: s.dt_max.unwrap_or(defaults.dt_max),
        picard_tol: s.picard_tol.unwrap_or(defaults.picard_tol),
        picard_max: s.picard_max.unwrap_or(defaults.picard_max),
        positivity_floor: s.positivity_floor.unwrap_or(defaults.positivity_floor),
        t_end: s.t_end.unwrap_or(defaults.t_end),
        output_stride: raw.output.stride.unwrap_or(defaults.output_stride),
        grow_max_sweeps: s.grow_max_sweeps.unwrap_or(defaults.grow_max_sweeps),
    };
    errs.extend(params.validate());

    let g = &raw.diagnostics;
    let rule_defaults = StopRule::default();
    let rule = StopRule {
        v_l2: g.v_threshold.unwrap_or(rule_defaults.v_l2),
        theta_l2: g.theta_threshold.unwrap_or(rule_defaults.theta_l2),
        p_l2: g.p_threshold.unwrap_or(rule_defaults.p_l2),
        dwell_fraction: g.dwell_fraction.unwrap_or(rule_defaults.dwell_fraction),
    };
    if !(rule.v_l2 > 0.0 && rule.theta_l2 > 0.0 && rule.p_l2 > 0.0) {
        errs.push("stopping thresholds must be positive".to_string());
    }
    if !(rule.dwell_fraction >= 0.0 && rule.dwell_fraction < 1.0) {
        errs.push("dwell_fraction must lie in [0, 1)".to_string());
    }
    let q_list = g.q_list.clone().unwrap_or_default();
    if let Some(q) = q_list.iter().find(|q| !(**q >= 1.0)) {
        errs.push(format!("q_list entries must be >= 1 (or inf), got {q}"));
    }
    let class_tol = g.class_tol.unwrap_or(DEFAULT_CLASS_TOL);
    if !(class_tol > 0.0) {
        errs.push("class_tol must be positive".to_string());
    }
    let root_bracket = g.root_bracket.map(|[a, b]| (a, b));
    if let Some((a, b)) = root_bracket {
        if !(a > 0.0 && b > a) {
            errs.push(format!("root_bracket ({a}, {b}) must be positive and ordered"));
        }
    }
    let snapshot_times = raw.output.snapshot_times.clone().unwrap_or_default();
    if snapshot_times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        errs.push("snapshot_times must be nonnegative".to_string());
    }

    let ps_floor = d.ps_floor.unwrap_or(DEFAULT_PS_FLOOR);
    let mut model = None;
    if let (Some(spec), Some(domain)) = (spec, domain) {
        match Model::new(spec, domain) {
            Ok(m) => {
                if m.spec.family() == Family::Nuclear && !d.allow_nonpositive_ps && m.ps.min < ps_floor {
                    errs.push(format!(
                        "stationary pressure p_S must stay >= {ps_floor} for the nuclear family (min p_S = {}); \
                         set domain.allow_nonpositive_ps = true to opt out",
                        m.ps.min
                    ));
                }
                model = Some(m);
            }
            Err(e) => errs.push(e.to_string()),
        }
    }

    let mut initial = None;
    let mut warnings = Vec::new();
    if let (Some(m), Some(eta), Some(v), Some(theta)) = (&model, eta, v, theta) {
        let profiles = InitialProfiles {
            eta,
            v,
            theta,
            theta_tol: i.theta_tol.unwrap_or(1e-12),
        };
        match initialize(&profiles, &m.grid, &m.domain) {
            Ok(init) => {
                let bad = init.state.eta.iter().position(|&e| m.spec.pressure(e, 1.0).is_err());
                if let Some(cell) = bad {
                    errs.push(format!(
                        "initial eta = {} at cell {cell} is outside the pressure law's evaluation bracket",
                        init.state.eta[cell]
                    ));
                }
                warnings = init.warnings;
                initial = Some(init.state);
            }
            Err(e) => errs.push(format!("initial data: {e}")),
        }
    }

    if !errs.is_empty() {
        return Err(ConfigError::Invalid(errs));
    }
    let (model, initial) = (model.expect("checked"), initial.expect("checked"));
    let stop = g.stop.unwrap_or(true).then_some(rule);
    Ok(RunConfig {
        name: raw.name.clone().unwrap_or_else(|| "run".to_string()),
        model,
        initial,
        warnings,
        settings: RunSettings {
            params,
            q_list,
            stop,
            snapshot_times,
        },
        class_tol,
        root_bracket,
    })
}

impl RunConfig {
    /// Stopping thresholds, whether or not the stopping rule is enabled.
    pub fn thresholds(&self) -> StopRule {
        self.settings.stop.clone().unwrap_or_default()
    }

    pub fn bracket(&self) -> (f64, f64) {
        self.root_bracket
            .unwrap_or_else(|| crate::stationary::default_bracket(&self.initial.eta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[eos]
builtin = "NUC-1"

[domain]
mass = 1.0
cells = 20
p_gamma = 0.5
theta_gamma = 0.1

[initial]
eta = "0.4833"
v = "0"
theta = "0.1"

[solver]
t_end = 0.1
"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = parse_config_str(BASE, &[]).unwrap();
        assert_eq!(cfg.model.cells(), 20);
        assert_eq!(cfg.settings.params.t_end, 0.1);
        assert!(cfg.settings.stop.is_some());
        assert!(cfg.warnings.is_empty());
    }

    #[test]
    fn negative_boundary_temperature_is_rejected() {
        let text = BASE.replace("theta_gamma = 0.1", "theta_gamma = -1.0");
        let err = parse_config_str(&text, &[]).unwrap_err().to_string();
        assert!(err.contains("theta_gamma must be positive"), "{err}");
    }

    #[test]
    fn nuclear_tension_needs_opt_out() {
        let text = BASE.replace("p_gamma = 0.5", "p_gamma = -0.5");
        let err = parse_config_str(&text, &[]).unwrap_err().to_string();
        assert!(err.contains("stationary pressure p_S"), "{err}");
        let text = text.replace("theta_gamma = 0.1", "theta_gamma = 0.1\nallow_nonpositive_ps = true");
        assert!(parse_config_str(&text, &[]).is_ok());
    }

    #[test]
    fn errors_are_collected() {
        let text = BASE
            .replace("cells = 20", "cells = 1")
            .replace("v = \"0\"", "v = \"sin(\"")
            .replace("t_end = 0.1", "t_end = 0.1\npicard_max = 0");
        let ConfigError::Invalid(errs) = parse_config_str(&text, &[]).unwrap_err() else {
            panic!("expected validation error");
        };
        assert_eq!(errs.len(), 3, "{errs:?}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_config_str("[domain\nmass = 1", &[]).unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn overrides_replace_keys() {
        let cfg = parse_config_str(BASE, &[("domain.p_gamma".into(), 0.2), ("domain.cells".into(), 10.0)]).unwrap();
        assert_eq!(cfg.model.p_gamma(), 0.2);
        assert_eq!(cfg.model.cells(), 10);
        assert!(parse_config_str(BASE, &[("domain.cells".into(), 10.5)]).is_err());
        assert!(parse_config_str(BASE, &[("nope.key".into(), 1.0)]).is_err());
    }

    #[test]
    fn custom_law_and_forcing_table() {
        let text = r#"
[eos]
family = "nuclear"
big_p0 = "-0.5*eta^-2"
big_p1 = "ln(eta)"
p0 = "eta^-3"
p1 = "1/eta"

[domain]
mass = 1.0
cells = 10
p_gamma = 0.5
theta_gamma = 0.1
g = [[0.3, 0.4, -18.0], [0.5, 0.6, 18.0]]
allow_nonpositive_ps = true

[initial]
eta = "1"
v = "0"
theta = "0.1"
"#;
        let cfg = parse_config_str(text, &[]).unwrap();
        assert!((cfg.model.ps.min - (-1.3)).abs() < 1e-12);
        assert!((cfg.model.spec.pressure(1.0, 0.1).unwrap() - 1.1).abs() < 1e-15);
    }
}
