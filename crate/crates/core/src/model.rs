use crate::domain::{build_grid, stationary_pressure, DomainError, DomainSpec, Grid, StationaryPressure};
use crate::eos::EosSpec;

/// Everything that stays fixed during a run: the pressure law, the domain,
/// its grid and the stationary pressure.
#[derive(Debug, Clone)]
pub struct Model {
    pub spec: EosSpec,
    pub domain: DomainSpec,
    pub grid: Grid,
    pub ps: StationaryPressure,
}

impl Model {
    pub fn new(spec: EosSpec, domain: DomainSpec) -> Result<Self, DomainError> {
        let grid = build_grid(&domain);
        let ps = stationary_pressure(&domain, &grid)?;
        Ok(Model { spec, domain, grid, ps })
    }

    pub fn cells(&self) -> usize {
        self.grid.cells()
    }

    pub fn dm(&self) -> f64 {
        self.grid.dm
    }

    pub fn theta_gamma(&self) -> f64 {
        self.domain.theta_gamma()
    }

    pub fn p_gamma(&self) -> f64 {
        self.domain.p_gamma()
    }
}
