//! Energy-type functionals and norms of a discrete state.
//!
//! Node quantities are integrated with the trapezoid weights of
//! [`Grid::node_weights`](crate::domain::Grid::node_weights), which is the
//! same as averaging the squares of the two nodes of each cell. Cell
//! quantities use the midpoint rule.

use crate::eos::EosError;
use crate::model::Model;
use crate::state::{face_conductance, heat_flux, State};

#[derive(Debug, Clone, PartialEq)]
pub struct DiagRecord {
    pub t: f64,
    pub step: usize,
    pub dt: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub volume: f64,
    pub v_l2: f64,
    pub v2_l2: f64,
    pub theta_l2: f64,
    pub p_l2: f64,
    pub v_l4: f64,
    pub v_linf: f64,
    /// Aligned with the run's `q_list`.
    pub v_lq: Vec<f64>,
    pub eta_min: f64,
    pub eta_max: f64,
    /// `max_i |p(η_i, θ_i) − p_S,i|`.
    pub p_max_dev: f64,
    pub v_integral: f64,
    /// η in the cell next to the fixed end.
    pub eta_first: f64,
    /// Energy-balance defect of the step that produced this state (0 at t = 0).
    pub balance_residual: f64,
    pub sweeps: usize,
}

fn check_theta(state: &State) -> Result<(), EosError> {
    match state.theta.iter().find(|t| !(**t > 0.0)) {
        Some(&theta) => Err(EosError::Temperature { theta }),
        None => Ok(()),
    }
}

/// `Σ Δm [½·mean(v²) + cV·θ_Γ(α − log α) + p_S η − P(η, θ_Γ)]` with `α = θ/θ_Γ`.
pub fn lyapunov(model: &Model, state: &State) -> Result<f64, EosError> {
    check_theta(state)?;
    let spec = &model.spec;
    let tg = model.theta_gamma();
    let dm = model.dm();
    let mut e = 0.0;
    for i in 0..state.cells() {
        let (eta, theta) = (state.eta[i], state.theta[i]);
        let kin = 0.25 * (state.v[i] * state.v[i] + state.v[i + 1] * state.v[i + 1]);
        let a = theta / tg;
        let ent = spec.cv() * tg * (a - a.ln());
        let pot = model.ps.values[i] * eta - spec.potential(eta, tg);
        e += (kin + ent + pot) * dm;
    }
    Ok(e)
}

/// `θ_Γ·[Σ ν v_x²/(ηθ) Δm + Σ_faces k (Δθ)²/(h θ_l θ_r)]`, where the faces
/// include the half cell at the fixed end with `θ_Γ` on its outer side.
pub fn dissipation(model: &Model, state: &State) -> Result<f64, EosError> {
    check_theta(state)?;
    let spec = &model.spec;
    let tg = model.theta_gamma();
    let dm = model.dm();
    let vx = state.vx(dm);
    let mut visc = 0.0;
    for i in 0..state.cells() {
        visc += spec.nu() * vx[i] * vx[i] / (state.eta[i] * state.theta[i]) * dm;
    }
    let k = face_conductance(&state.eta, &state.theta, spec, tg);
    let t0 = state.theta[0];
    let mut cond = k[0] * (t0 - tg) * (t0 - tg) / (0.5 * dm * t0 * tg);
    for j in 1..state.cells() {
        let (l, r) = (state.theta[j - 1], state.theta[j]);
        cond += k[j] * (r - l) * (r - l) / (dm * l * r);
    }
    Ok(tg * (visc + cond))
}

/// `Σ ½ w v² + Σ e Δm`.
pub fn total_energy(model: &Model, state: &State) -> Result<f64, EosError> {
    let w = model.grid.node_weights();
    let kin: f64 = state.v.iter().zip(&w).map(|(v, w)| 0.5 * w * v * v).sum();
    let mut int = 0.0;
    for i in 0..state.cells() {
        int += model.spec.internal_energy(state.eta[i], state.theta[i])? * model.dm();
    }
    Ok(kin + int)
}

/// Power supplied through the boundary and the body force:
/// `−p_Γ v_n − π_0 + Σ w_j g_j v_j`.
pub fn energy_input(model: &Model, state: &State) -> f64 {
    let n = state.cells();
    let tg = model.theta_gamma();
    let k = face_conductance(&state.eta, &state.theta, &model.spec, tg);
    let pi = heat_flux(&state.theta, &k, tg, model.dm());
    let w = model.grid.node_weights();
    let body: f64 = (0..=n).map(|j| w[j] * model.ps.node_forcing[j] * state.v[j]).sum();
    -model.p_gamma() * state.v[n] - pi[0] + body
}

/// Time level at which the energy input is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// New state (backward Euler).
    Implicit,
    /// Old state (forward Euler).
    Explicit,
}

/// Defect of the discrete total-energy identity over one step.
pub fn energy_balance(model: &Model, prev: &State, next: &State, dt: f64, level: Level) -> Result<f64, EosError> {
    let input = match level {
        Level::Implicit => energy_input(model, next),
        Level::Explicit => energy_input(model, prev),
    };
    Ok(total_energy(model, next)? - total_energy(model, prev)? - dt * input)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Norms {
    pub v_l2: f64,
    pub v2_l2: f64,
    pub theta_l2: f64,
    pub p_l2: f64,
    pub v_l4: f64,
    pub v_linf: f64,
    pub v_lq: Vec<f64>,
    pub volume: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub p_max_dev: f64,
    pub v_integral: f64,
}

/// `(Σ w |v|^q)^{1/q}`; `q = ∞` gives the max.
pub fn node_lq(v: &[f64], w: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        return v.iter().fold(0.0, |m, x| f64::max(m, x.abs()));
    }
    let s: f64 = v.iter().zip(w).map(|(v, w)| w * v.abs().powf(q)).sum();
    s.powf(1.0 / q)
}

pub fn norms(model: &Model, state: &State, q_list: &[f64]) -> Result<Norms, EosError> {
    let dm = model.dm();
    let tg = model.theta_gamma();
    let w = model.grid.node_weights();
    let v = &state.v;
    let v_l2 = node_lq(v, &w, 2.0);
    let v2: Vec<f64> = v.iter().map(|x| x * x).collect();
    let v2_l2 = node_lq(&v2, &w, 2.0);
    let theta_l2 = state.theta.iter().map(|t| (t - tg).powi(2) * dm).sum::<f64>().sqrt();
    let mut p2 = 0.0;
    let mut p_max_dev: f64 = 0.0;
    for i in 0..state.cells() {
        let d = model.spec.pressure(state.eta[i], state.theta[i])? - model.ps.values[i];
        p2 += d * d * dm;
        p_max_dev = p_max_dev.max(d.abs());
    }
    Ok(Norms {
        v_l2,
        v2_l2,
        theta_l2,
        p_l2: p2.sqrt(),
        v_l4: node_lq(v, &w, 4.0),
        v_linf: node_lq(v, &w, f64::INFINITY),
        v_lq: q_list.iter().map(|&q| node_lq(v, &w, q)).collect(),
        volume: state.eta.iter().sum::<f64>() * dm,
        eta_min: state.eta.iter().copied().fold(f64::INFINITY, f64::min),
        eta_max: state.eta.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        p_max_dev,
        v_integral: v.iter().zip(&w).map(|(v, w)| v * w).sum(),
    })
}

/// Full record for `state`; `prev` is the state before the step and its dt.
pub fn record(
    model: &Model,
    state: &State,
    prev: Option<(&State, f64)>,
    step: usize,
    dt: f64,
    sweeps: usize,
    q_list: &[f64],
) -> Result<DiagRecord, EosError> {
    let n = norms(model, state, q_list)?;
    let balance_residual = match prev {
        Some((p, dt)) => energy_balance(model, p, state, dt, Level::Implicit)?,
        None => 0.0,
    };
    Ok(DiagRecord {
        t: state.t,
        step,
        dt,
        energy: lyapunov(model, state)?,
        dissipation: dissipation(model, state)?,
        volume: n.volume,
        v_l2: n.v_l2,
        v2_l2: n.v2_l2,
        theta_l2: n.theta_l2,
        p_l2: n.p_l2,
        v_l4: n.v_l4,
        v_linf: n.v_linf,
        v_lq: n.v_lq,
        eta_min: n.eta_min,
        eta_max: n.eta_max,
        p_max_dev: n.p_max_dev,
        v_integral: n.v_integral,
        eta_first: state.eta[0],
        balance_residual,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{DomainSpec, Forcing};
    use crate::eos::EosSpec;

    fn nuc_model(n: usize, p_gamma: f64, theta_gamma: f64) -> Model {
        Model::new(
            EosSpec::nuc1(),
            DomainSpec::new(1.0, n, p_gamma, theta_gamma, Forcing::Zero).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn two_cell_values() {
        let m = nuc_model(2, 0.5, 1.0);
        let st = State {
            t: 0.0,
            eta: vec![1.0, 1.0],
            theta: vec![1.0, 1.0],
            v: vec![0.0, 1.0, 0.0],
        };
        assert!((dissipation(&m, &st).unwrap() - 4.0).abs() < 1e-14);
        // kinetic ¼(0+1)·½ per cell, entropy 1, potential 0.5 − P(1, 1) = 0.5 − 1.5
        let expected = 2.0 * 0.5 * (0.25 + 1.0 + 0.5 - 1.5);
        assert!((lyapunov(&m, &st).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn equilibrium_has_no_dissipation() {
        let m = nuc_model(10, 0.5, 0.1);
        let st = State::uniform(10, 0.4834391209898797, 0.1);
        assert_eq!(dissipation(&m, &st).unwrap(), 0.0);
        assert!(energy_balance(&m, &st, &st, 0.1, Level::Implicit).unwrap().abs() < 1e-14);
    }

    #[test]
    fn heating_one_cell_raises_energy() {
        let m = nuc_model(4, 0.5, 0.1);
        let st = State::uniform(4, 0.5, 0.1);
        let mut hot = st.clone();
        hot.theta[2] = 0.2;
        assert!(lyapunov(&m, &hot).unwrap() > lyapunov(&m, &st).unwrap());
    }

    #[test]
    fn norm_examples() {
        let m = nuc_model(64, 0.5, 0.1);
        let mut st = State::uniform(64, 1.0, 1.1);
        let n0 = norms(&m, &st, &[3.0]).unwrap();
        assert_eq!((n0.v_l2, n0.v_l4, n0.v_linf, n0.v_lq[0]), (0.0, 0.0, 0.0, 0.0));
        assert!((n0.theta_l2 - 1.0).abs() < 1e-12);
        assert!((n0.volume - 1.0).abs() < 1e-14);
        st.v = m.grid.nodes.clone();
        let n1 = norms(&m, &st, &[f64::INFINITY]).unwrap();
        assert!((n1.v_l4 - 0.2f64.powf(0.25)).abs() < 1e-3);
        assert_eq!(n1.v_lq[0], 1.0);
    }

    #[test]
    fn theta_must_be_positive() {
        let m = nuc_model(3, 0.5, 0.1);
        let mut st = State::uniform(3, 1.0, 0.1);
        st.theta[1] = -0.1;
        assert!(lyapunov(&m, &st).is_err());
        assert!(dissipation(&m, &st).is_err());
    }
}
