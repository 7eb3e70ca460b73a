//! Roots of `p(η, θ_Γ) = p_S(x)` per cell, classification of a final state
//! against them, and first-passage times of the monitored norms.

use std::collections::HashMap;

use thiserror::Error;

use crate::diagnostics::DiagRecord;
use crate::eos::{log_grid, EosError, EosSpec};
use crate::model::Model;
use crate::solver::StopRule;
use crate::state::State;

pub const SCAN_SAMPLES: usize = 4097;
pub const DEFAULT_ROOT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub level: f64,
    pub roots: Vec<f64>,
    pub bracket: (f64, f64),
    pub residuals: Vec<f64>,
    /// Points where `p − c` touches zero without changing sign.
    pub tangencies: Vec<f64>,
}

impl RootSet {
    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Index and distance of the root nearest to `eta`.
    pub fn nearest(&self, eta: f64) -> Option<(usize, f64)> {
        self.roots
            .iter()
            .map(|r| (r - eta).abs())
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Sign-change scan of `p(·, θ_Γ) − c` on a log grid and bisection on every
/// bracketing pair.
pub fn roots(spec: &EosSpec, theta_gamma: f64, c: f64, bracket: (f64, f64), root_tol: f64) -> Result<RootSet, EosError> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(EosError::Invalid(format!("root bracket ({lo}, {hi}) is not positive and ordered")));
    }
    let f = |e: f64| spec.pressure(e, theta_gamma).map(|p| p - c);
    let grid = log_grid(lo, hi, SCAN_SAMPLES);
    let mut vals = Vec::with_capacity(grid.len());
    for &e in &grid {
        let v = f(e)?;
        if !v.is_finite() {
            return Err(EosError::Bracket { eta: e, value: v });
        }
        vals.push(v);
    }
    let mut roots = Vec::new();
    let mut tangencies = Vec::new();
    for k in 0..grid.len() - 1 {
        let (fa, fb) = (vals[k], vals[k + 1]);
        if fa == 0.0 {
            // exact hit; a zero at the interior of a sign-preserving dip is a tangency
            let left = if k > 0 { vals[k - 1] } else { fb };
            if k == 0 || left.signum() != fb.signum() || fb == 0.0 {
                roots.push(grid[k]);
            } else {
                tangencies.push(grid[k]);
            }
            continue;
        }
        if fa.signum() != fb.signum() && fb != 0.0 {
            let (mut a, mut b, mut fa) = (grid[k], grid[k + 1], fa);
            for _ in 0..200 {
                if b - a <= root_tol * a.max(1.0) {
                    break;
                }
                let m = 0.5 * (a + b);
                let fm = f(m)?;
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fm.signum() == fa.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        } else if k > 0 && fb != 0.0 && vals[k - 1].signum() == fa.signum() && fa.signum() == fb.signum() {
            // local extremum of |f| that may touch zero between samples
            if fa.abs() < vals[k - 1].abs() && fa.abs() < fb.abs() {
                let s = fa.signum();
                let (arg, min) = crate::eos::golden_section_min(
                    |e| f(e).map(|v| s * v).unwrap_or(f64::INFINITY),
                    grid[k - 1],
                    grid[k + 1],
                    1e-14,
                );
                if min.abs() <= 1e-12 * c.abs().max(1.0) {
                    tangencies.push(arg);
                }
            }
        }
    }
    if vals[grid.len() - 1] == 0.0 {
        roots.push(grid[grid.len() - 1]);
    }
    let mut residuals = Vec::with_capacity(roots.len());
    for &r in &roots {
        residuals.push(f(r)?.abs());
    }
    Ok(RootSet {
        level: c,
        roots,
        bracket,
        residuals,
        tangencies,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyProfile {
    pub x: Vec<f64>,
    pub ps: Vec<f64>,
    pub sets: Vec<RootSet>,
    /// Cell indices whose level has no root in the bracket.
    pub empty_cells: Vec<usize>,
    pub bracket: (f64, f64),
    /// Index into each cell's roots; filled by [`classify_limit`].
    pub selected: Vec<Option<usize>>,
    pub distance: Vec<f64>,
    pub pressure_residual: Vec<f64>,
    pub mixed_phase: bool,
    pub warnings: Vec<String>,
}

impl SteadyProfile {
    pub fn selected_root(&self, cell: usize) -> Option<f64> {
        self.selected[cell].map(|k| self.sets[cell].roots[k])
    }

    pub fn max_distance(&self) -> f64 {
        self.distance.iter().copied().fold(0.0, f64::max)
    }
}

/// Default bracket `[min η⁰/10, max η⁰·10]`.
pub fn default_bracket(eta0: &[f64]) -> (f64, f64) {
    let lo = eta0.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eta0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo / 10.0, hi * 10.0)
}

const WIDEN_ROUNDS: usize = 3;

/// Root sets for every cell. When some level has no root the bracket is
/// widened tenfold on each side, up to three times, within the pressure
/// law's evaluation bracket.
pub fn steady_profile(model: &Model, bracket: (f64, f64)) -> Result<SteadyProfile, EosError> {
    let tg = model.theta_gamma();
    let (elo, ehi) = model.spec.params().eval_bracket;
    let clamp = |(lo, hi): (f64, f64)| {
        let lo = if elo > 0.0 { lo.max(elo * (1.0 + 1e-9)) } else { lo };
        let hi = if ehi.is_finite() { hi.min(ehi * (1.0 - 1e-9)) } else { hi };
        (lo, hi)
    };
    let mut bracket = clamp(bracket);
    let mut warnings = Vec::new();
    let mut round = 0;
    loop {
        let mut cache: HashMap<u64, RootSet> = HashMap::new();
        let mut sets = Vec::with_capacity(model.cells());
        for &c in &model.ps.values {
            let set = match cache.get(&c.to_bits()) {
                Some(s) => s.clone(),
                None => {
                    let s = roots(&model.spec, tg, c, bracket, DEFAULT_ROOT_TOL)?;
                    cache.insert(c.to_bits(), s.clone());
                    s
                }
            };
            sets.push(set);
        }
        let empty_cells: Vec<usize> = sets.iter().enumerate().filter(|(_, s)| s.is_empty()).map(|(i, _)| i).collect();
        if !empty_cells.is_empty() && round < WIDEN_ROUNDS {
            let wider = clamp((bracket.0 / 10.0, bracket.1 * 10.0));
            if wider != bracket {
                warnings.push(format!(
                    "no root for {} cells in [{:e}, {:e}]; widening",
                    empty_cells.len(),
                    bracket.0,
                    bracket.1
                ));
                bracket = wider;
                round += 1;
                continue;
            }
        }
        let tangent: usize = sets.iter().filter(|s| !s.tangencies.is_empty()).count();
        if tangent > 0 {
            warnings.push(format!("{tangent} cells have a tangential level (excluded from roots)"));
        }
        let n = sets.len();
        return Ok(SteadyProfile {
            x: model.grid.centers.clone(),
            ps: model.ps.values.clone(),
            sets,
            empty_cells,
            bracket,
            selected: vec![None; n],
            distance: vec![f64::NAN; n],
            pressure_residual: vec![f64::NAN; n],
            mixed_phase: false,
            warnings,
        });
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("cannot classify cells without roots: {cells:?}")]
pub struct ClassifyError {
    pub cells: Vec<usize>,
}

/// Assigns each cell of `final_state` to the nearest root of its level.
pub fn classify_limit(model: &Model, final_state: &State, profile: &SteadyProfile) -> Result<SteadyProfile, ClassifyError> {
    if !profile.empty_cells.is_empty() {
        return Err(ClassifyError {
            cells: profile.empty_cells.clone(),
        });
    }
    let tg = model.theta_gamma();
    let mut out = profile.clone();
    for (i, set) in profile.sets.iter().enumerate() {
        let eta = final_state.eta[i];
        let (k, d) = set.nearest(eta).expect("nonempty root set");
        out.selected[i] = Some(k);
        out.distance[i] = d;
        out.pressure_residual[i] = match model.spec.pressure(eta, tg) {
            Ok(p) => (p - profile.ps[i]).abs(),
            Err(_) => f64::INFINITY,
        };
    }
    let first = out.selected[0];
    out.mixed_phase = out.selected.iter().any(|s| *s != first);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstPassage {
    pub v_l2: Option<f64>,
    pub theta_l2: Option<f64>,
    pub p_l2: Option<f64>,
}

impl FirstPassage {
    pub fn all_finite(&self) -> bool {
        self.v_l2.is_some() && self.theta_l2.is_some() && self.p_l2.is_some()
    }
}

/// Earliest record time after which the series stays below `threshold`
/// through the end of the trajectory.
pub fn first_passage(records: &[DiagRecord], threshold: f64, get: impl Fn(&DiagRecord) -> f64) -> Option<f64> {
    let mut t = None;
    for r in records.iter().rev() {
        if get(r) < threshold {
            t = Some(r.t);
        } else {
            break;
        }
    }
    t
}

pub fn convergence_metrics(records: &[DiagRecord], thresholds: &StopRule) -> FirstPassage {
    FirstPassage {
        v_l2: first_passage(records, thresholds.v_l2, |r| r.v_l2),
        theta_l2: first_passage(records, thresholds.theta_l2, |r| r.theta_l2),
        p_l2: first_passage(records, thresholds.p_l2, |r| r.p_l2),
    }
}
