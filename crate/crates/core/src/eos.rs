//! Two-term pressure laws `p(η, θ) = p0(η) + p1(η)·θ` and the thermodynamic
//! potentials generated by the free energy
//! `Ψ(η, θ) = −cV·θ·log θ − P0(η) − P1(η)·θ`.
//!
//! Besides pointwise evaluation this module checks membership in the two
//! admissible families (nuclear fluid and thermoviscoelastic solid), finds
//! the infimum pressure along the boundary isotherm, and scans for pressure
//! plateaus that would break pointwise stabilization of η.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ConductivityFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EosError {
    #[error("specific volume {eta} outside the evaluation bracket ({lo}, {hi})")]
    Domain { eta: f64, lo: f64, hi: f64 },
    #[error("temperature {theta} must be positive")]
    Temperature { theta: f64 },
    #[error("invalid equation of state: {0}")]
    Invalid(String),
    #[error("pressure evaluation failed at eta={eta}: got {value}")]
    Bracket { eta: f64, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Nuclear,
    Thermoviscoelastic,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Nuclear => "nuclear",
            Family::Thermoviscoelastic => "thermoviscoelastic",
        })
    }
}

/// The closed-form pieces of a pressure law. `p0` and `p1` must be the
/// derivatives of `big_p0` and `big_p1`; [`EosSpec::new`] cross-checks this.
#[derive(Clone)]
pub struct EosFunctions {
    pub big_p0: ScalarFn,
    pub big_p1: ScalarFn,
    pub p0: ScalarFn,
    pub p1: ScalarFn,
    pub kappa: ConductivityFn,
}

/// Scalar material parameters and family metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct EosParams {
    pub name: String,
    pub family: Family,
    pub cv: f64,
    pub nu: f64,
    pub kappa_lo: f64,
    pub kappa_hi: f64,
    pub eta_check: Option<f64>,
    pub eta_hat: Option<f64>,
    /// Open interval of admissible η for evaluation.
    pub eval_bracket: (f64, f64),
    /// Box `(eta_lo, eta_hi, theta_lo, theta_hi)` used for invariant sampling.
    pub operating_box: (f64, f64, f64, f64),
}

impl EosParams {
    pub fn new(name: &str, family: Family) -> Self {
        EosParams {
            name: name.to_string(),
            family,
            cv: 1.0,
            nu: 1.0,
            kappa_lo: 1.0,
            kappa_hi: 1.0,
            eta_check: None,
            eta_hat: None,
            eval_bracket: (0.0, f64::INFINITY),
            operating_box: (0.05, 50.0, 0.01, 10.0),
        }
    }
}

#[derive(Clone)]
pub struct EosSpec {
    funcs: EosFunctions,
    params: EosParams,
}

impl fmt::Debug for EosSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EosSpec").field("params", &self.params).finish()
    }
}

const CONSISTENCY_RTOL: f64 = 1e-6;

impl EosSpec {
    /// Builds a spec and verifies its invariants: derivative consistency of
    /// `p0`/`p1` against finite differences of `P0`/`P1`, the declared κ bounds
    /// on the operating box, and `0 < η̌ ≤ η̂` for the thermoviscoelastic family.
    pub fn new(funcs: EosFunctions, params: EosParams) -> Result<Self, EosError> {
        let bad = |m: String| Err(EosError::Invalid(m));
        if !(params.cv > 0.0) {
            return bad(format!("cV must be positive, got {}", params.cv));
        }
        if !(params.nu > 0.0) {
            return bad(format!("nu must be positive, got {}", params.nu));
        }
        if !(params.kappa_lo > 0.0 && params.kappa_hi >= params.kappa_lo) {
            return bad(format!(
                "kappa bounds must satisfy 0 < kappa_lo <= kappa_hi, got [{}, {}]",
                params.kappa_lo, params.kappa_hi
            ));
        }
        let (blo, bhi) = params.eval_bracket;
        if !(blo >= 0.0 && bhi > blo) {
            return bad(format!("evaluation bracket ({blo}, {bhi}) is empty"));
        }
        if params.family == Family::Thermoviscoelastic {
            match (params.eta_check, params.eta_hat) {
                (Some(c), Some(h)) if c > 0.0 && c <= h && h.is_finite() => {}
                (c, h) => {
                    return bad(format!(
                        "thermoviscoelastic family needs 0 < eta_check <= eta_hat < inf, got {c:?}, {h:?}"
                    ))
                }
            }
        }
        let spec = EosSpec { funcs, params };
        spec.check_consistency()?;
        Ok(spec)
    }

    fn check_consistency(&self) -> Result<(), EosError> {
        let (elo, ehi, tlo, thi) = self.params.operating_box;
        let samples = log_grid(elo, ehi, 41);
        for &eta in &samples {
            for (label, big, small) in [
                ("p0", &self.funcs.big_p0, &self.funcs.p0),
                ("p1", &self.funcs.big_p1, &self.funcs.p1),
            ] {
                let fd = richardson_derivative(|e| big(e), eta);
                let exact = small(eta);
                let scale = exact.abs().max(big(eta).abs() / eta).max(1e-8);
                if !exact.is_finite() || (fd - exact).abs() > CONSISTENCY_RTOL * scale {
                    return Err(EosError::Invalid(format!(
                        "{label}({eta}) = {exact} disagrees with the finite-difference derivative {fd}"
                    )));
                }
            }
            for &theta in &log_grid(tlo, thi, 9) {
                let k = (self.funcs.kappa)(eta, theta);
                let slack = 1e-12 * self.params.kappa_hi;
                if !(k >= self.params.kappa_lo - slack && k <= self.params.kappa_hi + slack) {
                    return Err(EosError::Invalid(format!(
                        "kappa({eta}, {theta}) = {k} outside declared bounds [{}, {}]",
                        self.params.kappa_lo, self.params.kappa_hi
                    )));
                }
            }
        }
        Ok(())
    }

    /// `P0(η) = −½η⁻² + 2η⁻¹`, `P1(η) = log η`, `cV = ν = κ = 1`.
    pub fn nuc1() -> Self {
        let funcs = EosFunctions {
            big_p0: Arc::new(|e: f64| -0.5 / (e * e) + 2.0 / e),
            big_p1: Arc::new(|e: f64| e.ln()),
            p0: Arc::new(|e: f64| 1.0 / (e * e * e) - 2.0 / (e * e)),
            p1: Arc::new(|e: f64| 1.0 / e),
            kappa: Arc::new(|_, _| 1.0),
        };
        EosSpec::new(funcs, EosParams::new("NUC-1", Family::Nuclear)).expect("NUC-1 is consistent")
    }

    /// `P0(η) = η − η²/2`, `P1(η) = η − η³/3`, `η̌ = 0.8`, `η̂ = 1.2`.
    pub fn tve1() -> Self {
        let funcs = EosFunctions {
            big_p0: Arc::new(|e: f64| e - 0.5 * e * e),
            big_p1: Arc::new(|e: f64| e - e * e * e / 3.0),
            p0: Arc::new(|e: f64| 1.0 - e),
            p1: Arc::new(|e: f64| 1.0 - e * e),
            kappa: Arc::new(|_, _| 1.0),
        };
        let mut params = EosParams::new("TVE-1", Family::Thermoviscoelastic);
        params.eta_check = Some(0.8);
        params.eta_hat = Some(1.2);
        params.operating_box = (0.05, 5.0, 0.01, 10.0);
        EosSpec::new(funcs, params).expect("TVE-1 is consistent")
    }

    pub fn params(&self) -> &EosParams {
        &self.params
    }

    pub fn family(&self) -> Family {
        self.params.family
    }

    pub fn cv(&self) -> f64 {
        self.params.cv
    }

    pub fn nu(&self) -> f64 {
        self.params.nu
    }

    pub fn kappa_hi(&self) -> f64 {
        self.params.kappa_hi
    }

    /// Same pressure law relabelled as a different family (used to test
    /// validation against the wrong condition class).
    pub fn with_family(&self, family: Family) -> Self {
        let mut out = self.clone();
        out.params.family = family;
        out
    }

    fn check_eta(&self, eta: f64) -> Result<(), EosError> {
        let (lo, hi) = self.params.eval_bracket;
        if eta > lo && eta < hi && eta > 0.0 {
            Ok(())
        } else {
            Err(EosError::Domain { eta, lo, hi })
        }
    }

    pub fn big_p0(&self, eta: f64) -> f64 {
        (self.funcs.big_p0)(eta)
    }

    pub fn big_p1(&self, eta: f64) -> f64 {
        (self.funcs.big_p1)(eta)
    }

    pub fn p0(&self, eta: f64) -> f64 {
        (self.funcs.p0)(eta)
    }

    pub fn p1(&self, eta: f64) -> f64 {
        (self.funcs.p1)(eta)
    }

    /// `P(η, θ) = P0(η) + P1(η)·θ`.
    pub fn potential(&self, eta: f64, theta: f64) -> f64 {
        self.big_p0(eta) + self.big_p1(eta) * theta
    }

    pub fn kappa(&self, eta: f64, theta: f64) -> f64 {
        (self.funcs.kappa)(eta, theta)
    }

    pub fn pressure(&self, eta: f64, theta: f64) -> Result<f64, EosError> {
        self.check_eta(eta)?;
        Ok(self.p0(eta) + self.p1(eta) * theta)
    }

    pub fn internal_energy(&self, eta: f64, theta: f64) -> Result<f64, EosError> {
        self.check_eta(eta)?;
        if theta < 0.0 {
            return Err(EosError::Temperature { theta });
        }
        Ok(-self.big_p0(eta) + self.params.cv * theta)
    }

    pub fn free_energy(&self, eta: f64, theta: f64) -> Result<f64, EosError> {
        self.check_eta(eta)?;
        if !(theta > 0.0) {
            return Err(EosError::Temperature { theta });
        }
        Ok(-self.params.cv * theta * theta.ln() - self.big_p0(eta) - self.big_p1(eta) * theta)
    }

    /// Infimum of `p(·, θ_Γ)`: dense log-grid minimization on the bracket,
    /// polished by golden-section search around the best sample.
    ///
    /// A minimum sitting on the right end of the bracket with the samples
    /// still decreasing is a tail effect. For the nuclear family `p → 0` as
    /// `η → ∞`, so the infimum is `min(0, sampled min)`; for the
    /// thermoviscoelastic family the law may fall without bound.
    pub fn inf_pressure(&self, theta_gamma: f64, bracket: (f64, f64)) -> Result<InfPressure, EosError> {
        let (lo, hi) = bracket;
        if !(lo > 0.0 && hi > lo) {
            return Err(EosError::Invalid(format!("bracket ({lo}, {hi}) is not positive and ordered")));
        }
        let grid = log_grid(lo, hi, 8193);
        let mut vals = Vec::with_capacity(grid.len());
        for &eta in &grid {
            let p = self.pressure(eta, theta_gamma)?;
            if !p.is_finite() {
                return Err(EosError::Bracket { eta, value: p });
            }
            vals.push(p);
        }
        let (k, _) = vals
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        let last = grid.len() - 1;
        let tail_decreasing = k == last && vals[last - 8..].windows(2).all(|w| w[1] < w[0]);
        if tail_decreasing {
            return Ok(match self.params.family {
                Family::Thermoviscoelastic => InfPressure::UnboundedBelow,
                Family::Nuclear if vals[last] > 0.0 => InfPressure::AtInfinity { value: 0.0 },
                Family::Nuclear => InfPressure::Attained {
                    value: vals[last],
                    argmin: grid[last],
                },
            });
        }
        let a = grid[k.saturating_sub(1)];
        let b = grid[(k + 1).min(last)];
        let f = |e: f64| self.p0(e) + self.p1(e) * theta_gamma;
        let (argmin, value) = golden_section_min(f, a, b, 1e-13);
        let (argmin, value) = if value <= vals[k] { (argmin, value) } else { (grid[k], vals[k]) };
        if self.params.family == Family::Nuclear && value > 0.0 {
            return Ok(InfPressure::AtInfinity { value: 0.0 });
        }
        Ok(InfPressure::Attained { value, argmin })
    }

    /// Checks the family conditions on a log-spaced sample grid. Failures are
    /// data: every failed check carries the sample that violated it.
    pub fn validate(&self, ps_min: f64, ps_max: f64, opts: &ValidationOptions) -> EosValidationReport {
        let grid = log_grid(opts.eta_min, opts.eta_max, opts.samples);
        let mut checks = Vec::new();
        let mut warnings = Vec::new();
        match self.params.family {
            Family::Nuclear => {
                let p0s: Vec<f64> = grid.iter().map(|&e| self.p0(e)).collect();
                // p0 → +∞ as η → 0
                let first = p0s[0];
                let rival = p0s[1..]
                    .iter()
                    .zip(&grid[1..])
                    .find(|(&v, _)| v >= first)
                    .map(|(&v, &e)| (e, v));
                let witness = if first <= opts.p0_large {
                    Some(Witness::eta(grid[0], format!("p0 = {first} <= threshold {}", opts.p0_large)))
                } else {
                    rival.map(|(e, v)| Witness::eta(e, format!("p0 = {v} >= p0(eta_min) = {first}")))
                };
                checks.push(Check::new("p0 -> +inf as eta -> 0", witness));
                // p0 → 0 as η → ∞, checked on the last few samples
                let tail = grid.len().saturating_sub(opts.tail_samples);
                let witness = (tail..grid.len())
                    .find(|&i| p0s[i].abs() >= opts.p0_small)
                    .map(|i| Witness::eta(grid[i], format!("|p0| = {} >= threshold {}", p0s[i].abs(), opts.p0_small)));
                checks.push(Check::new("p0 -> 0 as eta -> inf", witness));
                let witness = grid
                    .iter()
                    .map(|&e| (e, self.p1(e)))
                    .find(|&(_, v)| v < 0.0)
                    .map(|(e, v)| Witness::eta(e, format!("p1 = {v} < 0")));
                checks.push(Check::new("p1 >= 0", witness));
                let witness = grid[tail..]
                    .iter()
                    .map(|&e| (e, e * self.p1(e)))
                    .find(|&(_, v)| v.abs() > opts.eta_p1_bound)
                    .map(|(e, v)| Witness::eta(e, format!("eta*p1 = {v} exceeds bound {}", opts.eta_p1_bound)));
                checks.push(Check::new("eta*p1 = O(1) as eta -> inf", witness));
                warnings.push(format!(
                    "limit conditions checked at finite samples eta in [{}, {}] only",
                    opts.eta_min, opts.eta_max
                ));
            }
            Family::Thermoviscoelastic => {
                let check = self.params.eta_check.unwrap_or(0.0);
                let hat = self.params.eta_hat.unwrap_or(f64::INFINITY);
                let low: Vec<f64> = grid.iter().copied().filter(|&e| e <= check).collect();
                let high: Vec<f64> = grid.iter().copied().filter(|&e| e >= hat).collect();
                let mut low = low;
                if check > 0.0 {
                    low.push(check);
                }
                let mut high = high;
                if hat.is_finite() {
                    high.insert(0, hat);
                }
                let find = |set: &[f64], f: &dyn Fn(f64) -> Option<String>| -> Option<Witness> {
                    set.iter().find_map(|&e| f(e).map(|m| Witness::eta(e, m)))
                };
                checks.push(Check::new(
                    "p0 >= pS_max for eta <= eta_check",
                    find(&low, &|e| {
                        let v = self.p0(e);
                        (v < ps_max).then(|| format!("p0 = {v} < pS_max = {ps_max}"))
                    }),
                ));
                checks.push(Check::new(
                    "p1 >= 0 for eta <= eta_check",
                    find(&low, &|e| {
                        let v = self.p1(e);
                        (v < 0.0).then(|| format!("p1 = {v} < 0"))
                    }),
                ));
                checks.push(Check::new(
                    "p0 <= pS_min for eta >= eta_hat",
                    find(&high, &|e| {
                        let v = self.p0(e);
                        (v > ps_min).then(|| format!("p0 = {v} > pS_min = {ps_min}"))
                    }),
                ));
                checks.push(Check::new(
                    "p1 <= 0 for eta >= eta_hat",
                    find(&high, &|e| {
                        let v = self.p1(e);
                        (v > 0.0).then(|| format!("p1 = {v} > 0"))
                    }),
                ));
                if low.is_empty() || high.is_empty() {
                    warnings.push("sample grid does not reach one of the tail regions".to_string());
                }
            }
        }
        EosValidationReport {
            family: self.params.family,
            checks,
            warnings,
        }
    }

    /// Flags every maximal η-window of width ≥ `window` on which `p(·, θ_Γ)`
    /// oscillates by less than `flat_tol` at a level inside `levels`.
    pub fn check_nondegeneracy(
        &self,
        theta_gamma: f64,
        levels: (f64, f64),
        bracket: (f64, f64),
        window: f64,
        flat_tol: f64,
    ) -> Vec<Plateau> {
        let (lo, hi) = bracket;
        if !(lo > 0.0 && hi > lo) || window > hi - lo {
            return Vec::new();
        }
        let grid = log_grid(lo, hi, 40001);
        let vals: Vec<f64> = grid.iter().map(|&e| self.p0(e) + self.p1(e) * theta_gamma).collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < grid.len() {
            let (mut vmin, mut vmax) = (vals[i], vals[i]);
            let mut j = i;
            while j + 1 < grid.len() {
                let v = vals[j + 1];
                let (nmin, nmax) = (vmin.min(v), vmax.max(v));
                if nmax - nmin >= flat_tol {
                    break;
                }
                vmin = nmin;
                vmax = nmax;
                j += 1;
            }
            let level = 0.5 * (vmin + vmax);
            if grid[j] - grid[i] >= window && level >= levels.0 && level <= levels.1 {
                out.push(Plateau {
                    eta_lo: grid[i],
                    eta_hi: grid[j],
                    level,
                });
                i = j + 1;
            } else {
                i += 1;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfPressure {
    Attained { value: f64, argmin: f64 },
    /// Approached only as `η → ∞`.
    AtInfinity { value: f64 },
    UnboundedBelow,
}

impl InfPressure {
    pub fn value(&self) -> Option<f64> {
        match *self {
            InfPressure::Attained { value, .. } | InfPressure::AtInfinity { value } => Some(value),
            InfPressure::UnboundedBelow => None,
        }
    }
}

impl fmt::Display for InfPressure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfPressure::Attained { value, argmin } => write!(f, "{value:.10} at eta = {argmin:.10}"),
            InfPressure::AtInfinity { value } => write!(f, "{value} (approached as eta -> inf)"),
            InfPressure::UnboundedBelow => f.write_str("unbounded below"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationOptions {
    pub eta_min: f64,
    pub eta_max: f64,
    pub samples: usize,
    pub tail_samples: usize,
    /// p0 at the smallest sample must exceed this.
    pub p0_large: f64,
    /// |p0| at the largest samples must stay below this.
    pub p0_small: f64,
    /// Bound on |η·p1| at large η.
    pub eta_p1_bound: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            eta_min: 1e-3,
            eta_max: 1e3,
            samples: 601,
            tail_samples: 5,
            p0_large: 1e3,
            p0_small: 1e-2,
            eta_p1_bound: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub eta: f64,
    pub theta: Option<f64>,
    pub violated: String,
}

impl Witness {
    fn eta(eta: f64, violated: String) -> Self {
        Witness {
            eta,
            theta: None,
            violated,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub witness: Option<Witness>,
}

impl Check {
    fn new(name: &str, witness: Option<Witness>) -> Self {
        Check {
            name: name.to_string(),
            passed: witness.is_none(),
            witness,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EosValidationReport {
    pub family: Family,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl EosValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for EosValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "family: {}", self.family)?;
        for c in &self.checks {
            match &c.witness {
                None => writeln!(f, "  [pass] {}", c.name)?,
                Some(w) => writeln!(f, "  [FAIL] {} (eta = {}: {})", c.name, w.eta, w.violated)?,
            }
        }
        for w in &self.warnings {
            writeln!(f, "  warning: {w}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub level: f64,
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    let mut out: Vec<f64> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect();
    out[0] = lo;
    out[count - 1] = hi;
    out
}

fn richardson_derivative(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-3 * x;
    let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
    let d2 = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h;
    (4.0 * d2 - d1) / 3.0
}

/// Golden-section minimization on `[a, b]`; returns `(argmin, min)`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol * (1.0 + c.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
