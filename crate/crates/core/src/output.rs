//! CSV and text outputs. Every float is written as `{:.16e}` so files are
//! byte-stable across runs and platforms.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::diagnostics::DiagRecord;
use crate::model::Model;
use crate::solver::RunResult;
use crate::state::State;
use crate::stationary::{FirstPassage, SteadyProfile};

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn series_header(q_list: &[f64]) -> Vec<String> {
    let mut h: Vec<String> = [
        "t", "step", "dt", "E", "D", "V", "v_l2", "v2_l2", "theta_l2", "p_l2", "v_l4", "v_linf",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend(q_list.iter().map(|q| format!("v_l{q}")));
    h.extend(
        [
            "eta_min",
            "eta_max",
            "p_max_dev",
            "v_integral",
            "eta_first",
            "balance_residual",
            "sweeps",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    h
}

pub fn series_row(r: &DiagRecord) -> Vec<String> {
    let mut row = vec![fmt(r.t), r.step.to_string(), fmt(r.dt)];
    row.extend(
        [r.energy, r.dissipation, r.volume, r.v_l2, r.v2_l2, r.theta_l2, r.p_l2, r.v_l4, r.v_linf]
            .iter()
            .map(|&x| fmt(x)),
    );
    row.extend(r.v_lq.iter().map(|&x| fmt(x)));
    row.extend(
        [r.eta_min, r.eta_max, r.p_max_dev, r.v_integral, r.eta_first, r.balance_residual]
            .iter()
            .map(|&x| fmt(x)),
    );
    row.push(r.sweeps.to_string());
    row
}

pub fn write_series(path: &Path, records: &[DiagRecord], q_list: &[f64]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(series_header(q_list)).map_err(csv_err)?;
    for r in records {
        w.write_record(series_row(r)).map_err(csv_err)?;
    }
    w.flush()
}

/// Cell table: centers, η, θ, p and v averaged from the two nodes.
pub fn write_profile(path: &Path, model: &Model, state: &State) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["x", "eta", "theta", "v", "p"]).map_err(csv_err)?;
    for i in 0..state.cells() {
        let p = model.spec.pressure(state.eta[i], state.theta[i]).unwrap_or(f64::NAN);
        w.write_record([
            fmt(model.grid.centers[i]),
            fmt(state.eta[i]),
            fmt(state.theta[i]),
            fmt(0.5 * (state.v[i] + state.v[i + 1])),
            fmt(p),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
}

pub fn profile_file_name(t: f64) -> String {
    format!("profile_t{t}.csv")
}

/// Per-cell root table; the selection columns are empty if the profile was
/// not classified.
pub fn write_steady(path: &Path, profile: &SteadyProfile, final_state: &State) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
        "x",
        "pS",
        "root_count",
        "roots",
        "eta_final",
        "selected_root",
        "distance",
        "pressure_residual",
    ])
    .map_err(csv_err)?;
    for i in 0..profile.sets.len() {
        let roots: Vec<String> = profile.sets[i].roots.iter().map(|&r| fmt(r)).collect();
        let opt = |x: Option<f64>| x.filter(|v| !v.is_nan()).map(fmt).unwrap_or_default();
        w.write_record([
            fmt(profile.x[i]),
            fmt(profile.ps[i]),
            profile.sets[i].roots.len().to_string(),
            roots.join(";"),
            fmt(final_state.eta[i]),
            opt(profile.selected_root(i)),
            opt(Some(profile.distance[i])),
            opt(Some(profile.pressure_residual[i])),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return 0.0;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Records with `t` in `[lo, hi]`.
pub fn window(records: &[DiagRecord], lo: f64, hi: f64) -> Vec<&DiagRecord> {
    records.iter().filter(|r| r.t >= lo && r.t <= hi).collect()
}

/// Indicators for the two alternatives of unbounded behavior when `p_S`
/// touches zero at the fixed end: growth of `|∫v|` and of η next to the wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthIndicators {
    pub v_integral_initial_scale: f64,
    pub v_integral_final: f64,
    pub v_integral_max: f64,
    pub eta_first_initial: f64,
    pub eta_first_final: f64,
    /// η at the first cell strictly increases over the final third.
    pub eta_first_increasing: bool,
}

pub fn growth_indicators(records: &[DiagRecord]) -> GrowthIndicators {
    let t_end = records.last().map(|r| r.t).unwrap_or(0.0);
    let early = window(records, 0.0, 0.1 * t_end);
    let scale = early.iter().map(|r| r.v_integral.abs()).fold(0.0, f64::max);
    let tail = window(records, 2.0 * t_end / 3.0, t_end);
    let increasing = tail.len() >= 2 && tail.windows(2).all(|w| w[1].eta_first > w[0].eta_first);
    GrowthIndicators {
        v_integral_initial_scale: scale,
        v_integral_final: records.last().map(|r| r.v_integral).unwrap_or(0.0),
        v_integral_max: records.iter().map(|r| r.v_integral.abs()).fold(0.0, f64::max),
        eta_first_initial: records.first().map(|r| r.eta_first).unwrap_or(f64::NAN),
        eta_first_final: records.last().map(|r| r.eta_first).unwrap_or(f64::NAN),
        eta_first_increasing: increasing,
    }
}

fn opt_time(t: Option<f64>) -> String {
    t.map(fmt).unwrap_or_else(|| "never".to_string())
}

pub fn summary_text(
    name: &str,
    result: &RunResult,
    passage: &FirstPassage,
    profile: Option<&SteadyProfile>,
    class_tol: f64,
) -> String {
    let mut s = String::new();
    let rec = &result.records;
    let first = rec.first();
    let last = rec.last();
    let _ = writeln!(s, "run: {name}");
    let _ = writeln!(s, "stop_reason: {}", result.stop_reason);
    let _ = writeln!(s, "t_final: {}", fmt(result.final_state.t));
    let _ = writeln!(s, "steps: {}", result.steps);
    let _ = writeln!(s, "dt_retries: {}", result.retries);
    let _ = writeln!(s, "picard_contraction_violations: {}", result.contraction_violations);
    let _ = writeln!(s, "first_passage_v_l2: {}", opt_time(passage.v_l2));
    let _ = writeln!(s, "first_passage_theta_l2: {}", opt_time(passage.theta_l2));
    let _ = writeln!(s, "first_passage_p_l2: {}", opt_time(passage.p_l2));
    if let (Some(a), Some(b)) = (first, last) {
        let eta_min = rec.iter().map(|r| r.eta_min).fold(f64::INFINITY, f64::min);
        let eta_max = rec.iter().map(|r| r.eta_max).fold(f64::NEG_INFINITY, f64::max);
        let max_res = rec.iter().map(|r| r.balance_residual.abs()).fold(0.0, f64::max);
        let _ = writeln!(s, "eta_min_over_run: {}", fmt(eta_min));
        let _ = writeln!(s, "eta_max_over_run: {}", fmt(eta_max));
        let _ = writeln!(s, "volume_initial: {}", fmt(a.volume));
        let _ = writeln!(s, "volume_final: {}", fmt(b.volume));
        let _ = writeln!(s, "volume_ratio: {}", fmt(b.volume / a.volume));
        let _ = writeln!(s, "energy_initial: {}", fmt(a.energy));
        let _ = writeln!(s, "energy_final: {}", fmt(b.energy));
        let _ = writeln!(s, "max_balance_residual: {}", fmt(max_res));
        let g = growth_indicators(rec);
        let _ = writeln!(s, "v_integral_initial_scale: {}", fmt(g.v_integral_initial_scale));
        let _ = writeln!(s, "v_integral_final: {}", fmt(g.v_integral_final));
        let _ = writeln!(s, "v_integral_max: {}", fmt(g.v_integral_max));
        let _ = writeln!(s, "eta_first_initial: {}", fmt(g.eta_first_initial));
        let _ = writeln!(s, "eta_first_final: {}", fmt(g.eta_first_final));
        let _ = writeln!(s, "eta_first_increasing_final_third: {}", g.eta_first_increasing);
    }
    match profile {
        Some(p) => {
            let stuck = p.distance.iter().filter(|d| !(**d <= class_tol)).count();
            let _ = writeln!(s, "mixed_phase: {}", p.mixed_phase);
            let _ = writeln!(s, "max_root_distance: {}", fmt(p.max_distance()));
            let _ = writeln!(s, "cells_away_from_roots: {stuck}");
        }
        None => {
            let _ = writeln!(s, "classification: unavailable (some cells have no root)");
        }
    }
    s
}
