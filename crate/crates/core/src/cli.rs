//! Command-line front end.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{parse_config, parse_config_with, ConfigError, RunConfig};
use crate::eos::{Family, ValidationOptions};
use crate::output::{self, fmt};
use crate::solver::{run, RunResult, StopReason};
use crate::stationary::{classify_limit, convergence_metrics, steady_profile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_STEP_FAILURE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

/// Caps the number of parallel sweep workers.
pub const THREADS_ENV: &str = "NSSTAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "nsstab", version, about = "1D Lagrangian Navier-Stokes stabilization laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one configuration and write series, profiles, steady table and summary.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the pressure law against its family conditions.
    ValidateEos {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the per-cell roots of p(eta, theta_gamma) = pS without running dynamics.
    AnalyzeStationary {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run one simulation per value of a numeric key, in parallel.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Dotted key, e.g. domain.p_gamma.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Simulate { config, out } => simulate_cmd(&config, &out),
        Command::ValidateEos { config } => validate_eos_cmd(&config),
        Command::AnalyzeStationary { config } => analyze_stationary_cmd(&config),
        Command::Sweep {
            config,
            axis,
            values,
            out,
        } => sweep_cmd(&config, &axis, &values, &out),
    }
}

fn load(path: &Path) -> Option<RunConfig> {
    match parse_config(path) {
        Ok(c) => {
            for w in &c.warnings {
                eprintln!("warning: {w}");
            }
            Some(c)
        }
        Err(e) => {
            eprintln!("{e}");
            None
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub exit_code: i32,
    pub result: RunResult,
}

/// Runs `cfg` and writes every output file into `out`.
pub fn simulate(cfg: &RunConfig, out: &Path) -> io::Result<SimulationOutcome> {
    fs::create_dir_all(out)?;
    let (result, exit_code) = match run(&cfg.model, &cfg.initial, &cfg.settings) {
        Ok(r) => (r, EXIT_OK),
        Err(e) => (*e.partial, EXIT_STEP_FAILURE),
    };
    output::write_series(&out.join("series.csv"), &result.records, &cfg.settings.q_list)?;
    for (t, st) in &result.snapshots {
        output::write_profile(&out.join(output::profile_file_name(*t)), &cfg.model, st)?;
    }
    output::write_profile(&out.join("profile_final.csv"), &cfg.model, &result.final_state)?;
    let passage = convergence_metrics(&result.records, &cfg.thresholds());
    let classified = steady_profile(&cfg.model, cfg.bracket()).ok().map(|p| {
        let c = classify_limit(&cfg.model, &result.final_state, &p);
        (p, c)
    });
    let mut summary_profile = None;
    if let Some((raw, classified)) = &classified {
        match classified {
            Ok(c) => {
                output::write_steady(&out.join("steady.csv"), c, &result.final_state)?;
                summary_profile = Some(c);
            }
            Err(_) => output::write_steady(&out.join("steady.csv"), raw, &result.final_state)?,
        }
    }
    let text = output::summary_text(&cfg.name, &result, &passage, summary_profile, cfg.class_tol);
    fs::write(out.join("summary.txt"), text)?;
    Ok(SimulationOutcome { exit_code, result })
}

fn simulate_cmd(config: &Path, out: &Path) -> i32 {
    let Some(cfg) = load(config) else {
        return EXIT_CONFIG;
    };
    match simulate(&cfg, out) {
        Ok(o) => {
            println!("{}: {}", cfg.name, o.result.stop_reason);
            o.exit_code
        }
        Err(e) => {
            eprintln!("cannot write outputs to {}: {e}", out.display());
            EXIT_STEP_FAILURE
        }
    }
}

/// Plateau scan window (in η) and flatness tolerance used by `validate-eos`.
pub const PLATEAU_WINDOW: f64 = 0.05;
pub const PLATEAU_FLAT_TOL: f64 = 1e-10;

/// Validation report text and whether every check passed.
pub fn validate_eos_report(cfg: &RunConfig) -> (String, bool) {
    let m = &cfg.model;
    let tg = m.theta_gamma();
    let report = m.spec.validate(m.ps.min, m.ps.max, &ValidationOptions::default());
    let mut text = format!("{report}");
    let bracket = cfg.bracket();
    let inf = m.spec.inf_pressure(tg, bracket);
    let mut ok = report.passed();
    match &inf {
        Ok(v) => text.push_str(&format!("m(theta_gamma = {tg}) on [{:e}, {:e}]: {v}\n", bracket.0, bracket.1)),
        Err(e) => {
            text.push_str(&format!("m(theta_gamma) unavailable: {e}\n"));
            ok = false;
        }
    }
    if let Ok(v) = inf {
        if let Some(mv) = v.value() {
            if m.spec.family() == Family::Nuclear && m.ps.min <= mv {
                text.push_str(&format!("note: min pS = {} <= m(theta_gamma)\n", m.ps.min));
            }
        }
    }
    let plateaus = m
        .spec
        .check_nondegeneracy(tg, (m.ps.min, m.ps.max), bracket, PLATEAU_WINDOW, PLATEAU_FLAT_TOL);
    if plateaus.is_empty() {
        text.push_str("  [pass] no pressure plateau at stationary levels\n");
    } else {
        ok = false;
        for p in &plateaus {
            text.push_str(&format!(
                "  [FAIL] pressure plateau at level {} on eta in [{}, {}]\n",
                p.level, p.eta_lo, p.eta_hi
            ));
        }
    }
    text.push_str(if ok { "result: pass\n" } else { "result: FAIL\n" });
    (text, ok)
}

fn validate_eos_cmd(config: &Path) -> i32 {
    let Some(cfg) = load(config) else {
        return EXIT_CONFIG;
    };
    let (text, ok) = validate_eos_report(&cfg);
    print!("{text}");
    if ok {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    }
}

fn analyze_stationary_cmd(config: &Path) -> i32 {
    let Some(cfg) = load(config) else {
        return EXIT_CONFIG;
    };
    let (text, mut ok) = validate_eos_report(&cfg);
    print!("{text}");
    match steady_profile(&cfg.model, cfg.bracket()) {
        Ok(p) => {
            println!("bracket: [{}, {}]", fmt(p.bracket.0), fmt(p.bracket.1));
            for w in &p.warnings {
                println!("warning: {w}");
            }
            println!("cell,x,pS,root_count,roots");
            for (i, set) in p.sets.iter().enumerate() {
                let roots: Vec<String> = set.roots.iter().map(|&r| fmt(r)).collect();
                println!("{i},{},{},{},{}", fmt(p.x[i]), fmt(p.ps[i]), set.roots.len(), roots.join(";"));
            }
            if !p.empty_cells.is_empty() {
                println!("cells without roots: {}", p.empty_cells.len());
                ok = false;
            }
        }
        Err(e) => {
            println!("root search failed: {e}");
            ok = false;
        }
    }
    if ok {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub exit_code: i32,
    pub stop_reason: String,
    pub t_final: f64,
    pub volume: f64,
    pub v_l2: f64,
    pub theta_l2: f64,
    pub p_l2: f64,
}

pub fn parse_values(values: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = values.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if parts.is_empty() {
        return Err(ConfigError::Invalid(vec!["sweep value list is empty".to_string()]));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| ConfigError::Invalid(vec![format!("sweep value {p:?} is not a number")]))
        })
        .collect()
}

fn sweep_one(config: &Path, axis: &str, index: usize, value: f64, out: &Path) -> SweepRow {
    let failed = |reason: String| SweepRow {
        index,
        value,
        exit_code: EXIT_CONFIG,
        stop_reason: reason,
        t_final: f64::NAN,
        volume: f64::NAN,
        v_l2: f64::NAN,
        theta_l2: f64::NAN,
        p_l2: f64::NAN,
    };
    let cfg = match parse_config_with(config, &[(axis.to_string(), value)]) {
        Ok(c) => c,
        Err(e) => return failed(format!("config error: {}", e.to_string().replace('\n', " "))),
    };
    match simulate(&cfg, &out.join(format!("run_{index}"))) {
        Ok(o) => {
            let last = o.result.records.last();
            let pick = |f: fn(&crate::diagnostics::DiagRecord) -> f64| last.map(f).unwrap_or(f64::NAN);
            SweepRow {
                index,
                value,
                exit_code: o.exit_code,
                stop_reason: match &o.result.stop_reason {
                    StopReason::StepFailure(_) => "step failure".to_string(),
                    r => r.to_string(),
                },
                t_final: o.result.final_state.t,
                volume: pick(|r| r.volume),
                v_l2: pick(|r| r.v_l2),
                theta_l2: pick(|r| r.theta_l2),
                p_l2: pick(|r| r.p_l2),
            }
        }
        Err(e) => SweepRow {
            exit_code: EXIT_STEP_FAILURE,
            ..failed(format!("io error: {e}"))
        },
    }
}

/// Runs every value on a worker pool; rows come back in input order.
pub fn sweep(config: &Path, axis: &str, values: &[f64], out: &Path, threads: Option<usize>) -> io::Result<Vec<SweepRow>> {
    fs::create_dir_all(out)?;
    let work = || -> Vec<SweepRow> {
        values
            .par_iter()
            .enumerate()
            .map(|(i, &v)| sweep_one(config, axis, i, v, out))
            .collect()
    };
    let rows = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(io::Error::other)?
            .install(work),
        None => work(),
    };
    let mut w = csv::Writer::from_path(out.join("sweep_index.csv")).map_err(io::Error::other)?;
    w.write_record([
        "index",
        "value",
        "exit_code",
        "stop_reason",
        "t_final",
        "V_final",
        "v_l2",
        "theta_l2",
        "p_l2",
    ])
    .map_err(io::Error::other)?;
    for r in &rows {
        w.write_record([
            r.index.to_string(),
            fmt(r.value),
            r.exit_code.to_string(),
            r.stop_reason.clone(),
            fmt(r.t_final),
            fmt(r.volume),
            fmt(r.v_l2),
            fmt(r.theta_l2),
            fmt(r.p_l2),
        ])
        .map_err(io::Error::other)?;
    }
    w.flush()?;
    Ok(rows)
}

fn sweep_cmd(config: &Path, axis: &str, values: &str, out: &Path) -> i32 {
    let values = match parse_values(values) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    // validate the template (with the first value) before fanning out
    if let Err(e) = parse_config_with(config, &[(axis.to_string(), values[0])]) {
        eprintln!("{e}");
        return EXIT_CONFIG;
    }
    let threads = std::env::var(THREADS_ENV).ok().and_then(|s| s.parse().ok());
    match sweep(config, axis, &values, out, threads) {
        Ok(rows) => {
            for r in &rows {
                println!("{} {} -> {}", r.index, r.value, r.stop_reason);
            }
            if rows.iter().all(|r| r.exit_code == EXIT_OK) {
                EXIT_OK
            } else {
                EXIT_STEP_FAILURE
            }
        }
        Err(e) => {
            eprintln!("sweep failed: {e}");
            EXIT_STEP_FAILURE
        }
    }
}
