//! Independent brute-force, Monte Carlo and quadrature oracles, and the
//! registry of golden values they produce.

mod bruteforce;
mod goldens;
mod montecarlo;
mod psd;
mod quadrature;

pub use bruteforce::{bruteforce_discrete_cross_term, hyp2f1_direct, DEFAULT_GRID_STEPS};
pub use goldens::{derive_golden, regenerate_goldens, GoldenEntry, GoldenRegistry, REQUIRED_GOLDENS};
pub use montecarlo::{
    cholesky_paths, mc_covariance, mc_formula_check, mc_terminal_variance, McConfig, McMoment,
};
pub use psd::{is_feasible, psd_feasibility_sampler, FeasibleGammaSampler};
pub use quadrature::{quadrature_crosscheck, Integrand, QuadScheme};

use serde::{Deserialize, Serialize};

/// How a verdict's tolerance is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceMode {
    Absolute,
    /// Relative to `max(|target|, |oracle|)`.
    Relative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub target: f64,
    pub oracle: f64,
    /// Absolute tolerance actually applied.
    pub tolerance: f64,
    pub mode: ToleranceMode,
    pub pass: bool,
    pub diagnostics: String,
}

impl OracleVerdict {
    pub fn compare(target: f64, oracle: f64, tolerance: f64, mode: ToleranceMode, diagnostics: String) -> Self {
        let abs_tol = match mode {
            ToleranceMode::Absolute => tolerance,
            ToleranceMode::Relative => tolerance * target.abs().max(oracle.abs()),
        };
        Self {
            target,
            oracle,
            tolerance: abs_tol,
            mode,
            pass: (target - oracle).abs() <= abs_tol,
            diagnostics,
        }
    }
}
