//! One-dimensional Lagrangian Navier-Stokes solver for heat-conducting media
//! with two-term pressure laws `p(η, θ) = p0(η) + p1(η)·θ`.
//!
//! The fixed end `x = 0` carries a no-slip wall at temperature `θ_Γ`; the
//! free end `x = M` is exposed to an outer pressure `p_Γ` and is insulated.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod domain;
pub mod eos;
pub mod expr;
pub mod model;
pub mod output;
pub mod solver;
pub mod state;
pub mod stationary;
pub mod tridiag;
