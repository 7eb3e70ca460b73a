//! Time stepping.
//!
//! One step is a Picard iteration of the linearized map
//! `(η̃, ṽ, θ̃) ↦ (η, v, θ)`: a backward-Euler heat equation for θ with
//! coefficients frozen at the iterate, then a backward-Euler momentum
//! equation for v using the new θ and the frozen η̃, then exact discrete
//! continuity for η. The loop runs until the iterate stops moving, so an
//! accepted step is the fully implicit scheme up to `picard_tol`.

use thiserror::Error;

use crate::diagnostics::{self, DiagRecord};
use crate::eos::EosError;
use crate::model::Model;
use crate::state::{face_conductance, heat_flux, State, StateError};
use crate::tridiag::{TridiagError, Tridiagonal};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("positivity lost: {field} at cell {cell} went from {old} to {new}")]
    Positivity {
        field: &'static str,
        cell: usize,
        old: f64,
        new: f64,
    },
    #[error("linear solve failed: {0}")]
    Linear(#[from] TridiagError),
    #[error("fixed point not reached in {sweeps} sweeps (last change {change:e})")]
    PicardExhausted { sweeps: usize, change: f64 },
    #[error("step failed with dt = {dt:e} below dt_min = {dt_min:e}: {cause}")]
    Stalled { dt: f64, dt_min: f64, cause: Box<SolverError> },
    #[error("explicit step dt = {dt:e} exceeds the stability limit {limit:e}")]
    ExplicitUnstable { dt: f64, limit: f64 },
    #[error(transparent)]
    Eos(#[from] EosError),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepParams {
    pub dt: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    /// A step is rejected if η or θ falls below this fraction of its old value.
    pub positivity_floor: f64,
    pub t_end: f64,
    pub output_stride: usize,
    /// dt grows by `GROWTH_FACTOR` after steps that needed at most this many sweeps.
    pub grow_max_sweeps: usize,
}

pub const GROWTH_FACTOR: f64 = 1.2;

impl Default for StepParams {
    fn default() -> Self {
        StepParams {
            dt: 1e-3,
            dt_min: 1e-10,
            dt_max: 1e-2,
            picard_tol: 1e-12,
            picard_max: 60,
            positivity_floor: 0.5,
            t_end: 1.0,
            output_stride: 1,
            grow_max_sweeps: 2,
        }
    }
}

impl StepParams {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt && self.dt <= self.dt_max) {
            errs.push(format!(
                "need 0 < dt_min <= dt <= dt_max, got {} / {} / {}",
                self.dt_min, self.dt, self.dt_max
            ));
        }
        if !(self.picard_tol > 0.0) {
            errs.push("picard_tol must be positive".to_string());
        }
        if self.picard_max < 1 {
            errs.push("picard_max must be at least 1".to_string());
        }
        if !(self.positivity_floor > 0.0 && self.positivity_floor < 1.0) {
            errs.push("positivity_floor must lie in (0, 1)".to_string());
        }
        if !(self.t_end >= 0.0) {
            errs.push("t_end must be nonnegative".to_string());
        }
        if self.output_stride < 1 {
            errs.push("output_stride must be at least 1".to_string());
        }
        errs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub accepted: bool,
    pub sweeps: usize,
    pub dt_used: f64,
    pub max_change: f64,
    pub retries: usize,
    /// Proposed size of the next step.
    pub next_dt: f64,
    /// Sweeps whose change exceeded the previous sweep's (above the noise floor).
    pub contraction_violations: usize,
}

/// Backward-Euler heat equation with κρ frozen at `frozen` and the work term
/// `p1(η̃)·v_x·θ` taken implicitly. Returns the new cell temperatures.
pub fn theta_solve(model: &Model, old: &State, frozen: &State, v: &[f64], dt: f64) -> Result<Vec<f64>, SolverError> {
    let n = model.cells();
    let dm = model.dm();
    let dm2 = dm * dm;
    let spec = &model.spec;
    let (cv, nu, tg) = (spec.cv(), spec.nu(), model.theta_gamma());
    let k = face_conductance(&frozen.eta, &frozen.theta, spec, tg);
    let mut m = Tridiagonal::zeros(n);
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        let vx = (v[i + 1] - v[i]) / dm;
        let eta = frozen.eta[i];
        let mut diag = cv / dt + spec.p1(eta) * vx;
        rhs[i] = cv * old.theta[i] / dt + nu * vx * vx / eta;
        if i == 0 {
            diag += 2.0 * k[0] / dm2;
            rhs[i] += 2.0 * k[0] * tg / dm2;
        } else {
            diag += k[i] / dm2;
            m.lower[i] = -k[i] / dm2;
        }
        if i + 1 < n {
            diag += k[i + 1] / dm2;
            m.upper[i] = -k[i + 1] / dm2;
        }
        m.diag[i] = diag;
    }
    m.check_dominance(1e-12)?;
    Ok(m.solve(&rhs)?)
}

/// Backward-Euler momentum equation with viscous coefficient and pressure
/// frozen at η̃ and the new temperatures. Node 0 is pinned to zero; the
/// last node has a half control volume closed by the ghost stress `−p_Γ`.
pub fn velocity_solve(
    model: &Model,
    old: &State,
    frozen: &State,
    theta_new: &[f64],
    dt: f64,
) -> Result<Vec<f64>, SolverError> {
    let n = model.cells();
    let dm = model.dm();
    let spec = &model.spec;
    let nu = spec.nu();
    let g = &model.ps.node_forcing;
    let a: Vec<f64> = frozen.eta.iter().map(|e| nu / (dm * dm * e)).collect();
    let mut p = Vec::with_capacity(n);
    for i in 0..n {
        p.push(spec.pressure(frozen.eta[i], theta_new[i])?);
    }
    // unknowns v_1..v_n at rows 0..n-1
    let mut m = Tridiagonal::zeros(n);
    let mut rhs = vec![0.0; n];
    for j in 1..n {
        let r = j - 1;
        m.diag[r] = 1.0 / dt + a[j] + a[j - 1];
        if j > 1 {
            m.lower[r] = -a[j - 1];
        }
        m.upper[r] = -a[j];
        rhs[r] = old.v[j] / dt - (p[j] - p[j - 1]) / dm + g[j];
    }
    let r = n - 1;
    m.diag[r] = 1.0 / dt + 2.0 * a[n - 1];
    if n > 1 {
        m.lower[r] = -2.0 * a[n - 1];
    }
    rhs[r] = old.v[n] / dt + 2.0 * (p[n - 1] - model.p_gamma()) / dm + g[n];
    m.check_dominance(1e-12)?;
    let sol = m.solve(&rhs)?;
    let mut v = Vec::with_capacity(n + 1);
    v.push(0.0);
    v.extend(sol);
    Ok(v)
}

/// Discrete continuity `η_i ← η_i + dt·(v_{i+1} − v_i)/Δm`.
pub fn eta_update(eta_old: &[f64], v_new: &[f64], dt: f64, dm: f64, floor: f64) -> Result<Vec<f64>, SolverError> {
    let mut out = Vec::with_capacity(eta_old.len());
    for (i, &e) in eta_old.iter().enumerate() {
        let new = e + dt * (v_new[i + 1] - v_new[i]) / dm;
        if !(new > floor * e) {
            return Err(SolverError::Positivity {
                field: "eta",
                cell: i,
                old: e,
                new,
            });
        }
        out.push(new);
    }
    Ok(out)
}

/// The same continuity update written in logarithmic form,
/// `ν log η_new = ν log η_old + dt·(p − p_S) − (I*v_new − I*v_old)`, where
/// `I*v` at a cell is the node-weighted integral of v to its right and `p` is
/// evaluated at `(eta_frozen, theta)`.
pub fn eta_update_log_form(
    model: &Model,
    eta_old: &[f64],
    eta_frozen: &[f64],
    theta: &[f64],
    v_old: &[f64],
    v_new: &[f64],
    dt: f64,
) -> Result<Vec<f64>, SolverError> {
    let nu = model.spec.nu();
    let i_old = right_integral(model, v_old);
    let i_new = right_integral(model, v_new);
    let mut out = Vec::with_capacity(eta_old.len());
    for i in 0..eta_old.len() {
        let p = model.spec.pressure(eta_frozen[i], theta[i])?;
        let incr = dt * (p - model.ps.values[i]) - (i_new[i] - i_old[i]);
        out.push(eta_old[i] * (incr / nu).exp());
    }
    Ok(out)
}

/// `Σ_{j > i} w_j v_j` for each cell i.
pub fn right_integral(model: &Model, v: &[f64]) -> Vec<f64> {
    let n = model.cells();
    let w = model.grid.node_weights();
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    for i in (0..n).rev() {
        acc += w[i + 1] * v[i + 1];
        out[i] = acc;
    }
    out
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
}

/// Max-norm change between iterates, relative per field; velocities are
/// normalized by `max(‖v‖∞, 1)`.
pub fn relative_change(a: &State, b: &State) -> f64 {
    let de = max_abs_diff(&a.eta, &b.eta) / max_abs(&b.eta);
    let dt = max_abs_diff(&a.theta, &b.theta) / max_abs(&b.theta);
    let dv = max_abs_diff(&a.v, &b.v) / max_abs(&b.v).max(1.0);
    de.max(dt).max(dv)
}

struct FixedPoint {
    state: State,
    sweeps: usize,
    change: f64,
    violations: usize,
}

fn fixed_point(model: &Model, old: &State, params: &StepParams, dt: f64) -> Result<FixedPoint, SolverError> {
    let mut it = old.clone();
    let mut prev_change = f64::INFINITY;
    let mut violations = 0;
    let noise = 100.0 * params.picard_tol;
    for sweep in 1..=params.picard_max {
        let theta = theta_solve(model, old, &it, &it.v, dt)?;
        if let Some((cell, (&new, &o))) = theta
            .iter()
            .zip(&old.theta)
            .enumerate()
            .find(|(_, (n, o))| !(**n > params.positivity_floor * **o))
        {
            return Err(SolverError::Positivity {
                field: "theta",
                cell,
                old: o,
                new,
            });
        }
        let v = velocity_solve(model, old, &it, &theta, dt)?;
        let eta = eta_update(&old.eta, &v, dt, model.dm(), params.positivity_floor)?;
        let next = State {
            t: old.t + dt,
            eta,
            theta,
            v,
        };
        let change = relative_change(&it, &next);
        if change > prev_change && prev_change > noise {
            violations += 1;
        }
        prev_change = change;
        it = next;
        if change < params.picard_tol {
            return Ok(FixedPoint {
                state: it,
                sweeps: sweep,
                change,
                violations,
            });
        }
    }
    Err(SolverError::PicardExhausted {
        sweeps: params.picard_max,
        change: prev_change,
    })
}

/// One accepted step starting with size `dt`, halving on failure until
/// `dt_min` is crossed.
pub fn step(model: &Model, state: &State, params: &StepParams, dt: f64) -> Result<(State, StepOutcome), SolverError> {
    let mut dt = dt.min(params.dt_max);
    let mut retries = 0;
    loop {
        match fixed_point(model, state, params, dt) {
            Ok(fp) => {
                let next_dt = if fp.sweeps <= params.grow_max_sweeps {
                    (dt * GROWTH_FACTOR).min(params.dt_max)
                } else {
                    dt
                };
                let outcome = StepOutcome {
                    accepted: true,
                    sweeps: fp.sweeps,
                    dt_used: dt,
                    max_change: fp.change,
                    retries,
                    next_dt,
                    contraction_violations: fp.violations,
                };
                return Ok((fp.state, outcome));
            }
            Err(err) => {
                let recoverable = matches!(
                    err,
                    SolverError::Positivity { .. } | SolverError::PicardExhausted { .. } | SolverError::Linear(_)
                );
                if !recoverable {
                    return Err(err);
                }
                dt *= 0.5;
                retries += 1;
                if dt < params.dt_min {
                    return Err(SolverError::Stalled {
                        dt,
                        dt_min: params.dt_min,
                        cause: Box::new(err),
                    });
                }
            }
        }
    }
}

/// Forward-Euler stability bound used by [`explicit_oracle_step`]:
/// `0.9·Δm²·min η·min(1/(2ν), cV/(2κ_hi))`, the Gershgorin bound of the
/// viscous and conductive operators with a 10% margin.
pub fn explicit_dt_limit(model: &Model, state: &State) -> f64 {
    let dm = model.dm();
    let eta_min = state.eta.iter().copied().fold(f64::INFINITY, f64::min);
    let spec = &model.spec;
    0.9 * dm * dm * eta_min * (1.0 / (2.0 * spec.nu())).min(spec.cv() / (2.0 * spec.kappa_hi()))
}

/// Fully explicit update of the three balance laws with the same spatial
/// operators as the implicit scheme. Internal energy is advanced in
/// conservation form and θ recovered from it.
pub fn explicit_oracle_step(model: &Model, state: &State, dt: f64) -> Result<State, SolverError> {
    let limit = explicit_dt_limit(model, state);
    if dt > limit {
        return Err(SolverError::ExplicitUnstable { dt, limit });
    }
    let n = model.cells();
    let dm = model.dm();
    let spec = &model.spec;
    let tg = model.theta_gamma();
    let vx = state.vx(dm);
    let k = face_conductance(&state.eta, &state.theta, spec, tg);
    let pi = heat_flux(&state.theta, &k, tg, dm);
    let mut sigma = Vec::with_capacity(n);
    for i in 0..n {
        sigma.push(spec.nu() * vx[i] / state.eta[i] - spec.pressure(state.eta[i], state.theta[i])?);
    }
    let g = &model.ps.node_forcing;
    let mut v = vec![0.0; n + 1];
    for j in 1..n {
        v[j] = state.v[j] + dt * ((sigma[j] - sigma[j - 1]) / dm + g[j]);
    }
    v[n] = state.v[n] + dt * ((-model.p_gamma() - sigma[n - 1]) / (0.5 * dm) + g[n]);
    let mut eta = Vec::with_capacity(n);
    let mut theta = Vec::with_capacity(n);
    for i in 0..n {
        let e_old = spec.internal_energy(state.eta[i], state.theta[i])?;
        let e_new = e_old + dt * (sigma[i] * vx[i] + (pi[i + 1] - pi[i]) / dm);
        let eta_new = state.eta[i] + dt * vx[i];
        if !(eta_new > 0.0) {
            return Err(SolverError::Positivity {
                field: "eta",
                cell: i,
                old: state.eta[i],
                new: eta_new,
            });
        }
        let theta_new = (e_new + spec.big_p0(eta_new)) / spec.cv();
        if !(theta_new > 0.0) {
            return Err(SolverError::Positivity {
                field: "theta",
                cell: i,
                old: state.theta[i],
                new: theta_new,
            });
        }
        eta.push(eta_new);
        theta.push(theta_new);
    }
    Ok(State {
        t: state.t + dt,
        eta,
        theta,
        v,
    })
}

/// Norm thresholds for the stabilization stopping rule.
#[derive(Debug, Clone, PartialEq)]
pub struct StopRule {
    pub v_l2: f64,
    pub theta_l2: f64,
    pub p_l2: f64,
    /// Norms must stay below their thresholds for this fraction of the
    /// elapsed time.
    pub dwell_fraction: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            v_l2: 1e-3,
            theta_l2: 1e-3,
            p_l2: 1e-3,
            dwell_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub params: StepParams,
    pub q_list: Vec<f64>,
    pub stop: Option<StopRule>,
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    EndTime,
    Stabilized,
    StepFailure(String),
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StopReason::EndTime => f.write_str("t_end reached"),
            StopReason::Stabilized => f.write_str("stabilized"),
            StopReason::StepFailure(m) => write!(f, "step failure: {m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub final_state: State,
    pub records: Vec<DiagRecord>,
    pub snapshots: Vec<(f64, State)>,
    pub stop_reason: StopReason,
    pub steps: usize,
    pub retries: usize,
    pub contraction_violations: usize,
}

#[derive(Debug, Error)]
#[error("run aborted at t = {}: {error}", .partial.final_state.t)]
pub struct RunError {
    pub partial: Box<RunResult>,
    pub error: SolverError,
}

fn below(rule: &StopRule, rec: &DiagRecord) -> bool {
    rec.v_l2 < rule.v_l2 && rec.theta_l2 < rule.theta_l2 && rec.p_l2 < rule.p_l2
}

/// Integrates from `initial` until `t_end`, the stopping rule, or a fatal
/// step failure. Every accepted step is diagnosed; every `output_stride`-th
/// one (and the last) is kept in the trajectory.
pub fn run(model: &Model, initial: &State, settings: &RunSettings) -> Result<RunResult, RunError> {
    let params = &settings.params;
    let q = &settings.q_list;
    let mut state = initial.clone();
    let first = diagnostics::record(model, &state, None, 0, 0.0, 0, q).map_err(|e| RunError {
        partial: Box::new(RunResult {
            final_state: state.clone(),
            records: Vec::new(),
            snapshots: Vec::new(),
            stop_reason: StopReason::StepFailure(e.to_string()),
            steps: 0,
            retries: 0,
            contraction_violations: 0,
        }),
        error: e.into(),
    })?;
    let mut below_since = settings.stop.as_ref().filter(|r| below(r, &first)).map(|_| 0.0);
    let mut records = vec![first];
    let mut snapshots = Vec::new();
    let mut pending: Vec<f64> = settings
        .snapshot_times
        .iter()
        .copied()
        .filter(|&t| t >= 0.0 && t <= params.t_end)
        .collect();
    pending.sort_by(f64::total_cmp);
    pending.dedup();
    pending.reverse();
    while pending.last() == Some(&0.0) {
        pending.pop();
        snapshots.push((0.0, state.clone()));
    }
    let mut dt = params.dt;
    let mut steps = 0;
    let mut retries = 0;
    let mut violations = 0;
    let mut stop_reason = StopReason::EndTime;
    let t_end = params.t_end;
    while state.t < t_end * (1.0 - 1e-14) {
        let target = pending.last().copied().unwrap_or(t_end).min(t_end);
        let remaining = target - state.t;
        let clipped = dt >= remaining * (1.0 - 1e-9);
        let dt_try = if clipped { remaining } else { dt };
        let result = step(model, &state, params, dt_try);
        let (mut next, outcome) = match result {
            Ok(ok) => ok,
            Err(error) => {
                let partial = RunResult {
                    final_state: state,
                    records,
                    snapshots,
                    stop_reason: StopReason::StepFailure(error.to_string()),
                    steps,
                    retries,
                    contraction_violations: violations,
                };
                return Err(RunError {
                    partial: Box::new(partial),
                    error,
                });
            }
        };
        steps += 1;
        retries += outcome.retries;
        violations += outcome.contraction_violations;
        if clipped && outcome.retries == 0 {
            next.t = target;
        }
        let rec = diagnostics::record(model, &next, Some((&state, outcome.dt_used)), steps, outcome.dt_used, outcome.sweeps, q)
            .map_err(|error| RunError {
                partial: Box::new(RunResult {
                    final_state: next.clone(),
                    records: records.clone(),
                    snapshots: snapshots.clone(),
                    stop_reason: StopReason::StepFailure(error.to_string()),
                    steps,
                    retries,
                    contraction_violations: violations,
                }),
                error: error.into(),
            })?;
        // a clip that succeeded first time leaves the proposed size alone
        if !clipped || outcome.retries > 0 {
            dt = outcome.next_dt;
        }
        state = next;
        while let Some(&ts) = pending.last() {
            if state.t >= ts * (1.0 - 1e-12) {
                pending.pop();
                snapshots.push((ts, state.clone()));
            } else {
                break;
            }
        }
        let mut stabilized = false;
        if let Some(rule) = &settings.stop {
            if below(rule, &rec) {
                let since = *below_since.get_or_insert(state.t);
                stabilized = state.t - since >= rule.dwell_fraction * state.t;
            } else {
                below_since = None;
            }
        }
        let keep = steps % params.output_stride == 0;
        let done = stabilized || state.t >= t_end * (1.0 - 1e-14);
        if keep || done {
            records.push(rec);
        }
        if stabilized {
            stop_reason = StopReason::Stabilized;
            break;
        }
    }
    Ok(RunResult {
        final_state: state,
        records,
        snapshots,
        stop_reason,
        steps,
        retries,
        contraction_violations: violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{DomainSpec, Forcing};
    use crate::eos::EosSpec;

    fn model(spec: EosSpec, n: usize, p_gamma: f64, theta_gamma: f64) -> Model {
        Model::new(spec, DomainSpec::new(1.0, n, p_gamma, theta_gamma, Forcing::Zero).unwrap()).unwrap()
    }

    #[test]
    fn equilibrium_theta_solve_is_identity() {
        let m = model(EosSpec::tve1(), 6, 0.0, 0.8);
        let st = State::uniform(6, 1.0, 0.8);
        let th = theta_solve(&m, &st, &st, &st.v, 0.1).unwrap();
        for t in th {
            assert!((t - 0.8).abs() < 1e-15);
        }
        let v = velocity_solve(&m, &st, &st, &st.theta, 0.1).unwrap();
        assert!(v.iter().all(|&x| x.abs() < 1e-15));
    }

    #[test]
    fn eta_update_examples() {
        let eta = vec![1.0, 2.0, 3.0];
        assert_eq!(eta_update(&eta, &[0.0; 4], 0.1, 0.5, 0.5).unwrap(), eta);
        let nodes = [0.0, 0.5, 1.0, 1.5];
        let out = eta_update(&eta, &nodes, 0.1, 0.5, 0.5).unwrap();
        for (o, e) in out.iter().zip(&eta) {
            assert!((o - e - 0.1).abs() < 1e-15);
        }
        let err = eta_update(&eta, &[0.0, -1.0, -1.0, -1.0], 0.3, 0.5, 0.5).unwrap_err();
        assert!(matches!(err, SolverError::Positivity { field: "eta", cell: 0, .. }));
    }

    #[test]
    fn explicit_step_respects_limit() {
        let m = model(EosSpec::nuc1(), 4, 0.0, 1.0);
        let st = State::uniform(4, 1.0, 1.0);
        let lim = explicit_dt_limit(&m, &st);
        assert!((lim - 0.9 * 0.0625 * 0.5).abs() < 1e-15);
        assert!(matches!(
            explicit_oracle_step(&m, &st, 2.0 * lim),
            Err(SolverError::ExplicitUnstable { .. })
        ));
        // p(1, 1) = 0 = p_Γ: equilibrium
        let next = explicit_oracle_step(&m, &st, lim).unwrap();
        assert_eq!(next.eta, st.eta);
        assert_eq!(next.v, st.v);
        for t in &next.theta {
            assert!((t - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn params_validation() {
        assert!(StepParams::default().validate().is_empty());
        let bad = StepParams {
            dt: 1.0,
            dt_max: 0.1,
            picard_max: 0,
            ..StepParams::default()
        };
        assert_eq!(bad.validate().len(), 2);
    }

    #[test]
    fn zero_length_run() {
        let m = model(EosSpec::nuc1(), 4, 0.0, 1.0);
        let st = State::uniform(4, 1.0, 1.0);
        let settings = RunSettings {
            params: StepParams {
                t_end: 0.0,
                ..StepParams::default()
            },
            q_list: vec![4.0],
            stop: None,
            snapshot_times: vec![],
        };
        let res = run(&m, &st, &settings).unwrap();
        assert_eq!(res.records.len(), 1);
        assert_eq!(res.final_state, st);
        assert_eq!(res.steps, 0);
    }
}
