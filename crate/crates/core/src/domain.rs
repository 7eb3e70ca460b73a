//! Mass interval, uniform mass grid, body force and the stationary pressure
//! `p_S(x) = p_Γ − ∫_x^M g(ξ) dξ`.

use thiserror::Error;

use crate::expr::Expr;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("invalid domain: {0}")]
    Invalid(String),
    #[error("body force evaluation failed at x={x}: got {value}")]
    Quadrature { x: f64, value: f64 },
}

/// Body force per unit mass.
#[derive(Debug, Clone)]
pub enum Forcing {
    Zero,
    Constant(f64),
    /// Expression in `x` and `M`.
    Expr(Expr),
    /// Piecewise-constant cells `(x0, x1, value)`; zero outside every cell.
    Table(Vec<(f64, f64, f64)>),
}

impl Forcing {
    pub fn eval(&self, x: f64, mass: f64) -> f64 {
        match self {
            Forcing::Zero => 0.0,
            Forcing::Constant(g) => *g,
            Forcing::Expr(e) => e.eval(&[x, mass]),
            Forcing::Table(cells) => cells
                .iter()
                .filter(|(a, b, _)| x >= *a && x < *b)
                .map(|(_, _, v)| v)
                .sum(),
        }
    }

    /// `∫_a^b g` on a single refinement interval: exact for tables and
    /// constants, one-point midpoint rule for expressions.
    fn integrate(&self, a: f64, b: f64, mass: f64) -> Result<f64, DomainError> {
        let val = match self {
            Forcing::Zero => 0.0,
            Forcing::Constant(g) => g * (b - a),
            Forcing::Table(cells) => cells
                .iter()
                .map(|&(c0, c1, v)| v * (b.min(c1) - a.max(c0)).max(0.0))
                .sum(),
            Forcing::Expr(e) => {
                let xm = 0.5 * (a + b);
                let g = e.eval(&[xm, mass]);
                if !g.is_finite() {
                    return Err(DomainError::Quadrature { x: xm, value: g });
                }
                g * (b - a)
            }
        };
        Ok(val)
    }
}

#[derive(Debug, Clone)]
pub struct DomainSpec {
    mass: f64,
    cells: usize,
    p_gamma: f64,
    theta_gamma: f64,
    forcing: Forcing,
}

impl DomainSpec {
    pub fn new(
        mass: f64,
        cells: usize,
        p_gamma: f64,
        theta_gamma: f64,
        forcing: Forcing,
    ) -> Result<Self, DomainError> {
        let mut errs = Vec::new();
        if !(mass > 0.0 && mass.is_finite()) {
            errs.push(format!("M must be positive, got {mass}"));
        }
        if cells < 2 {
            errs.push(format!("n must be at least 2, got {cells}"));
        }
        if !(theta_gamma > 0.0 && theta_gamma.is_finite()) {
            errs.push("theta_gamma must be positive".to_string());
        }
        if !p_gamma.is_finite() {
            errs.push(format!("p_gamma must be finite, got {p_gamma}"));
        }
        if let Forcing::Table(t) = &forcing {
            if let Some((a, b, _)) = t.iter().find(|(a, b, v)| !(a < b) || !v.is_finite()) {
                errs.push(format!("g table cell ({a}, {b}) is malformed"));
            }
        }
        if !errs.is_empty() {
            return Err(DomainError::Invalid(errs.join("; ")));
        }
        Ok(DomainSpec {
            mass,
            cells,
            p_gamma,
            theta_gamma,
            forcing,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn p_gamma(&self) -> f64 {
        self.p_gamma
    }

    pub fn theta_gamma(&self) -> f64 {
        self.theta_gamma
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    pub fn g(&self, x: f64) -> f64 {
        self.forcing.eval(x, self.mass)
    }

    /// Copy with a different cell count (other data unchanged).
    pub fn with_cells(&self, cells: usize) -> Result<Self, DomainError> {
        DomainSpec::new(self.mass, cells, self.p_gamma, self.theta_gamma, self.forcing.clone())
    }

    pub fn with_p_gamma(&self, p_gamma: f64) -> Result<Self, DomainError> {
        DomainSpec::new(self.mass, self.cells, p_gamma, self.theta_gamma, self.forcing.clone())
    }
}

/// Uniform mass grid. Cells are indexed `0..n`, nodes `0..=n`; cell `i` lies
/// between nodes `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub dm: f64,
    pub centers: Vec<f64>,
    pub nodes: Vec<f64>,
}

impl Grid {
    pub fn cells(&self) -> usize {
        self.centers.len()
    }

    /// Quadrature weights of the node values: half cells at both ends.
    pub fn node_weights(&self) -> Vec<f64> {
        let n = self.cells();
        let mut w = vec![self.dm; n + 1];
        w[0] = 0.5 * self.dm;
        w[n] = 0.5 * self.dm;
        w
    }
}

pub fn build_grid(domain: &DomainSpec) -> Grid {
    let n = domain.cells;
    let dm = domain.mass / n as f64;
    let centers = (0..n).map(|i| (i as f64 + 0.5) * dm).collect();
    let mut nodes: Vec<f64> = (0..=n).map(|j| j as f64 * dm).collect();
    nodes[n] = domain.mass;
    Grid { dm, centers, nodes }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryPressure {
    /// `p_S` at cell centers.
    pub values: Vec<f64>,
    pub at_zero: f64,
    pub min: f64,
    pub max: f64,
    /// Dual-cell averages of `g` at nodes, consistent with `values`:
    /// interior `(p_S,i − p_S,i−1)/Δm`, last node `(p_Γ − p_S,n−1)/(Δm/2)`.
    pub node_forcing: Vec<f64>,
}

pub const DEFAULT_REFINEMENT: usize = 8;

pub fn stationary_pressure(domain: &DomainSpec, grid: &Grid) -> Result<StationaryPressure, DomainError> {
    stationary_pressure_refined(domain, grid, DEFAULT_REFINEMENT)
}

/// Composite midpoint quadrature of `g` on `refine` sub-intervals per cell
/// (`refine` even, at least 8), accumulated from `x = M` leftwards.
pub fn stationary_pressure_refined(
    domain: &DomainSpec,
    grid: &Grid,
    refine: usize,
) -> Result<StationaryPressure, DomainError> {
    if refine < 8 || refine % 2 != 0 {
        return Err(DomainError::Invalid(format!("refinement {refine} must be even and >= 8")));
    }
    let n = grid.cells();
    let fine = n * refine;
    let h = grid.dm / refine as f64;
    // tail[k] = ∫_{k h}^{M} g
    let mut tail = vec![0.0; fine + 1];
    for k in (0..fine).rev() {
        let a = k as f64 * h;
        let b = if k + 1 == fine { domain.mass } else { (k + 1) as f64 * h };
        tail[k] = tail[k + 1] + domain.forcing.integrate(a, b, domain.mass)?;
    }
    let pg = domain.p_gamma;
    let values: Vec<f64> = (0..n).map(|i| pg - tail[i * refine + refine / 2]).collect();
    let (min, max) = tail
        .iter()
        .map(|t| pg - t)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let mut node_forcing = vec![0.0; n + 1];
    for j in 1..n {
        node_forcing[j] = (values[j] - values[j - 1]) / grid.dm;
    }
    node_forcing[n] = (pg - values[n - 1]) / (0.5 * grid.dm);
    Ok(StationaryPressure {
        values,
        at_zero: pg - tail[0],
        min,
        max,
        node_forcing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn domain(mass: f64, n: usize, forcing: Forcing) -> DomainSpec {
        DomainSpec::new(mass, n, 1.0, 0.1, forcing).unwrap()
    }

    #[test]
    fn grid_examples() {
        let g = build_grid(&domain(1.0, 2, Forcing::Zero));
        assert_eq!(g.dm, 0.5);
        assert_eq!(g.centers, vec![0.25, 0.75]);
        assert_eq!(g.nodes, vec![0.0, 0.5, 1.0]);
        assert_eq!(build_grid(&domain(2.0, 4, Forcing::Zero)).dm, 0.5);
        assert!(DomainSpec::new(1.0, 1, 0.0, 1.0, Forcing::Zero).is_err());
    }

    #[test]
    fn invalid_domains_report_every_problem() {
        let err = DomainSpec::new(-1.0, 1, 0.0, -1.0, Forcing::Zero).unwrap_err().to_string();
        assert!(err.contains("M must be positive"));
        assert!(err.contains("n must be at least 2"));
        assert!(err.contains("theta_gamma must be positive"));
    }

    #[test]
    fn zero_and_constant_forcing() {
        let d = domain(1.0, 10, Forcing::Zero);
        let ps = stationary_pressure(&d, &build_grid(&d)).unwrap();
        assert!(ps.values.iter().all(|&v| v == 1.0));
        assert_eq!((ps.min, ps.max, ps.at_zero), (1.0, 1.0, 1.0));

        let d = domain(2.0, 10, Forcing::Constant(0.3));
        let grid = build_grid(&d);
        let ps = stationary_pressure(&d, &grid).unwrap();
        for (x, v) in grid.centers.iter().zip(&ps.values) {
            assert!((v - (1.0 - 0.3 * (2.0 - x))).abs() < 1e-14);
        }
        assert!((ps.at_zero - 0.4).abs() < 1e-14);
        assert!(ps.min <= 1.0 && 1.0 <= ps.max);
    }

    #[test]
    fn table_forcing_integrates_exactly() {
        // cell boundaries deliberately off the refinement grid
        let d = domain(1.0, 7, Forcing::Table(vec![(0.31, 0.42, -2.0), (0.5, 0.61, 3.0)]));
        let grid = build_grid(&d);
        let ps = stationary_pressure(&d, &grid).unwrap();
        let exact = |x: f64| {
            let overlap = |a: f64, b: f64| (b - x.max(a)).max(0.0).min(b - a);
            1.0 - (-2.0 * overlap(0.31, 0.42) + 3.0 * overlap(0.5, 0.61))
        };
        for (x, v) in grid.centers.iter().zip(&ps.values) {
            assert!((v - exact(*x)).abs() < 1e-13, "{x}");
        }
        assert!((ps.at_zero - (1.0 - (-0.22 + 0.33))).abs() < 1e-13);
    }

    #[test]
    fn node_forcing_telescopes_to_ps() {
        let d = domain(1.0, 16, Forcing::Expr(Expr::parse("sin(3*x) + x", &["x", "M"]).unwrap()));
        let grid = build_grid(&d);
        let ps = stationary_pressure(&d, &grid).unwrap();
        let w = grid.node_weights();
        for i in 0..grid.cells() {
            let tail: f64 = (i + 1..=grid.cells()).map(|j| w[j] * ps.node_forcing[j]).sum();
            assert!((ps.values[i] - (d.p_gamma() - tail)).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_coarse_refinement() {
        let d = domain(1.0, 4, Forcing::Zero);
        assert!(stationary_pressure_refined(&d, &build_grid(&d), 4).is_err());
        assert!(stationary_pressure_refined(&d, &build_grid(&d), 9).is_err());
    }
}
