//! Discrete fields on the staggered mass grid and the pointwise quantities
//! derived from them.
//!
//! Layout: η, θ, p, σ live at cells `0..n`; v and the heat flux π live at
//! nodes `0..=n`. The fixed end `x = 0` carries `v = 0` and `θ = θ_Γ`
//! (the latter through a half-cell flux, never by overwriting cell 0); the
//! free end `x = M` carries `σ = −p_Γ` and `π = 0`.

use thiserror::Error;

use crate::domain::{DomainSpec, Grid};
use crate::eos::{EosError, EosSpec};
use crate::expr::Expr;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("non-positive {field} = {value} at cell {cell}")]
    Positivity { field: &'static str, cell: usize, value: f64 },
    #[error("field lengths do not match the grid: {0}")]
    Shape(String),
    #[error(transparent)]
    Eos(#[from] EosError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub eta: Vec<f64>,
    pub theta: Vec<f64>,
    pub v: Vec<f64>,
}

impl State {
    pub fn cells(&self) -> usize {
        self.eta.len()
    }

    pub fn check(&self) -> Result<(), StateError> {
        let n = self.eta.len();
        if self.theta.len() != n || self.v.len() != n + 1 {
            return Err(StateError::Shape(format!(
                "eta {}, theta {}, v {}",
                n,
                self.theta.len(),
                self.v.len()
            )));
        }
        for (field, vals) in [("eta", &self.eta), ("theta", &self.theta)] {
            if let Some((cell, &value)) = vals.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
                return Err(StateError::Positivity { field, cell, value });
            }
        }
        Ok(())
    }

    /// Uniform state with `v ≡ 0`.
    pub fn uniform(n: usize, eta: f64, theta: f64) -> Self {
        State {
            t: 0.0,
            eta: vec![eta; n],
            theta: vec![theta; n],
            v: vec![0.0; n + 1],
        }
    }

    /// `(v_{i+1} − v_i)/Δm` per cell.
    pub fn vx(&self, dm: f64) -> Vec<f64> {
        self.v.windows(2).map(|w| (w[1] - w[0]) / dm).collect()
    }
}

/// Heat-flux face coefficients `κρ` for the solver and dissipation: index 0
/// is the half-cell face at `x = 0`, index `j` (1..n) the interior face between
/// cells `j − 1` and `j`. There is no coefficient for `x = M` (π = 0 there).
pub fn face_conductance(eta: &[f64], theta: &[f64], spec: &EosSpec, theta_gamma: f64) -> Vec<f64> {
    let n = eta.len();
    let mut k = Vec::with_capacity(n);
    k.push(spec.kappa(eta[0], 0.5 * (theta[0] + theta_gamma)) / eta[0]);
    for j in 1..n {
        let eb = 0.5 * (eta[j - 1] + eta[j]);
        let tb = 0.5 * (theta[j - 1] + theta[j]);
        k.push(spec.kappa(eb, tb) / eb);
    }
    k
}

/// Heat flux π at nodes `0..=n` from face conductances.
pub fn heat_flux(theta: &[f64], conductance: &[f64], theta_gamma: f64, dm: f64) -> Vec<f64> {
    let n = theta.len();
    let mut pi = vec![0.0; n + 1];
    pi[0] = conductance[0] * (theta[0] - theta_gamma) / (0.5 * dm);
    for j in 1..n {
        pi[j] = conductance[j] * (theta[j] - theta[j - 1]) / dm;
    }
    pi
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedFields {
    pub rho: Vec<f64>,
    pub p: Vec<f64>,
    pub sigma: Vec<f64>,
    pub pi: Vec<f64>,
    pub e: Vec<f64>,
}

pub fn derived(state: &State, spec: &EosSpec, domain: &DomainSpec, grid: &Grid) -> Result<DerivedFields, StateError> {
    state.check()?;
    let dm = grid.dm;
    let nu = spec.nu();
    let vx = state.vx(dm);
    let mut rho = Vec::with_capacity(state.cells());
    let mut p = Vec::with_capacity(state.cells());
    let mut sigma = Vec::with_capacity(state.cells());
    let mut e = Vec::with_capacity(state.cells());
    for i in 0..state.cells() {
        let (eta, theta) = (state.eta[i], state.theta[i]);
        let pi_ = spec.pressure(eta, theta)?;
        rho.push(1.0 / eta);
        p.push(pi_);
        sigma.push(nu * vx[i] / eta - pi_);
        e.push(spec.internal_energy(eta, theta)?);
    }
    let k = face_conductance(&state.eta, &state.theta, spec, domain.theta_gamma());
    let pi = heat_flux(&state.theta, &k, domain.theta_gamma(), dm);
    Ok(DerivedFields { rho, p, sigma, pi, e })
}

/// Initial-profile expressions in `x` and `M`.
#[derive(Debug, Clone)]
pub struct InitialProfiles {
    pub eta: Expr,
    pub v: Expr,
    pub theta: Expr,
    /// Allowed `|θ⁰(0) − θ_Γ|` before a compatibility warning.
    pub theta_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Initialized {
    pub state: State,
    pub warnings: Vec<String>,
}

pub fn initialize(profiles: &InitialProfiles, grid: &Grid, domain: &DomainSpec) -> Result<Initialized, StateError> {
    let m = domain.mass();
    let eta: Vec<f64> = grid.centers.iter().map(|&x| profiles.eta.eval(&[x, m])).collect();
    let theta: Vec<f64> = grid.centers.iter().map(|&x| profiles.theta.eval(&[x, m])).collect();
    let mut v: Vec<f64> = grid.nodes.iter().map(|&x| profiles.v.eval(&[x, m])).collect();
    let mut warnings = Vec::new();
    if v[0].abs() > 1e-12 {
        warnings.push(format!("v0(0) = {} clamped to 0", v[0]));
    }
    v[0] = 0.0;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(StateError::Shape("v0 is not finite everywhere".to_string()));
    }
    let theta_at_zero = profiles.theta.eval(&[0.0, m]);
    if (theta_at_zero - domain.theta_gamma()).abs() > profiles.theta_tol {
        warnings.push(format!(
            "theta0(0) = {theta_at_zero} differs from theta_gamma = {}",
            domain.theta_gamma()
        ));
    }
    let state = State { t: 0.0, eta, theta, v };
    state.check()?;
    Ok(Initialized { state, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_grid, Forcing};

    fn setup(n: usize, p_gamma: f64, theta_gamma: f64) -> (EosSpec, DomainSpec, Grid) {
        let d = DomainSpec::new(1.0, n, p_gamma, theta_gamma, Forcing::Zero).unwrap();
        let g = build_grid(&d);
        (EosSpec::nuc1(), d, g)
    }

    fn profiles(eta: &str, v: &str, theta: &str, tol: f64) -> InitialProfiles {
        let p = |s: &str| Expr::parse(s, &["x", "M"]).unwrap();
        InitialProfiles {
            eta: p(eta),
            v: p(v),
            theta: p(theta),
            theta_tol: tol,
        }
    }

    #[test]
    fn equilibrium_has_uniform_stress() {
        // TVE-1: p(1, θ) = 0 for every θ
        let d = DomainSpec::new(1.0, 5, 0.0, 0.7, Forcing::Zero).unwrap();
        let g = build_grid(&d);
        let st = State::uniform(5, 1.0, 0.7);
        let f = derived(&st, &EosSpec::tve1(), &d, &g).unwrap();
        assert!(f.sigma.iter().all(|&s| s == 0.0));
        assert!(f.pi.iter().all(|&q| q == 0.0));
    }

    #[test]
    fn two_cell_stress() {
        let (spec, d, g) = setup(2, 0.0, 1.0);
        let st = State {
            t: 0.0,
            eta: vec![1.0, 1.0],
            theta: vec![1.0, 1.0],
            v: vec![0.0, 0.5, 0.5],
        };
        let f = derived(&st, &spec, &d, &g).unwrap();
        assert_eq!(f.sigma, vec![1.0, 0.0]);
        assert_eq!(f.rho, vec![1.0, 1.0]);
        assert_eq!(f.e, vec![-0.5, -0.5]);
    }

    #[test]
    fn linear_temperature_gives_constant_flux() {
        let (spec, d, g) = setup(8, 0.5, 1.0);
        let theta: Vec<f64> = g.centers.iter().map(|x| 1.0 + x).collect();
        let st = State {
            t: 0.0,
            eta: vec![1.0; 8],
            theta,
            v: vec![0.0; 9],
        };
        let f = derived(&st, &spec, &d, &g).unwrap();
        for j in 1..8 {
            assert!((f.pi[j] - 1.0).abs() < 1e-12);
        }
        // half-cell boundary difference sees the same slope
        assert!((f.pi[0] - 1.0).abs() < 1e-12);
        assert_eq!(f.pi[8], 0.0);
        for (r, e) in f.rho.iter().zip(&st.eta) {
            assert!((r * e - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn derived_rejects_nonpositive_fields() {
        let (spec, d, g) = setup(2, 0.5, 1.0);
        let mut st = State::uniform(2, 1.0, 1.0);
        st.theta[1] = 0.0;
        assert!(matches!(
            derived(&st, &spec, &d, &g),
            Err(StateError::Positivity { field: "theta", cell: 1, .. })
        ));
    }

    #[test]
    fn initialize_examples() {
        let (_, d, g) = setup(16, 0.5, 0.1);
        let init = initialize(&profiles("1", "0", "0.1", 1e-12), &g, &d).unwrap();
        assert!(init.warnings.is_empty());
        assert_eq!(init.state, State::uniform(16, 1.0, 0.1));

        let init = initialize(&profiles("1", "sin(pi*x/M)", "0.1", 0.0), &g, &d).unwrap();
        assert_eq!(init.state.v[0], 0.0);
        assert!(init.warnings.is_empty());

        let init = initialize(&profiles("1", "0", "0.1 + x", 0.0), &g, &d).unwrap();
        assert!(init.warnings.is_empty());
        let init = initialize(&profiles("1", "0", "0.2", 0.0), &g, &d).unwrap();
        assert_eq!(init.warnings.len(), 1);
        assert!(init.warnings[0].contains("theta0(0)"));

        let init = initialize(&profiles("1", "1 + x", "0.1", 1e-12), &g, &d).unwrap();
        assert_eq!(init.state.v[0], 0.0);
        assert!(init.warnings[0].contains("clamped"));
    }

    #[test]
    fn initialize_reports_offending_cell() {
        let (_, d, g) = setup(4, 0.5, 0.1);
        let err = initialize(&profiles("x - 0.3", "0", "0.1", 1e-12), &g, &d).unwrap_err();
        assert_eq!(
            err,
            StateError::Positivity {
                field: "eta",
                cell: 0,
                value: 0.125 - 0.3
            }
        );
    }
}
