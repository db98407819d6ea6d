//! Adapted (bicausal) 2-Wasserstein distances between Gaussian processes:
//! the discrete Cholesky formula, the continuous kernel formulas for unit and
//! higher multiplicity, the triangular integral and the trace-norm bound.

mod continuous;
mod discrete;
mod levy;
mod trace_bound;
mod triangular;

pub use continuous::{continuous_aw_fbm, continuous_aw_multi, continuous_aw_unit};
pub use discrete::{
    cholesky_causal_factor, cross_diagonal, discrete_aw, discrete_aw_from_factors, discretized_covariance,
    fbm_discretized_covariance, midpoint_times, CovMatrix, TriangularFactor, PIVOT_TOL,
};
pub use levy::{levy_noncanonical_check, LevyReport};
pub use trace_bound::{psd_sqrt, trace_bound_optimal_gamma, trace_norm, PSD_TOL};
pub use triangular::triangular_integral;

pub(crate) use discrete::sign;

use serde::{Deserialize, Serialize};

use crate::quadrature::{QuadratureGrid, Scheme};

/// Resolution record attached to every distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct GridMeta {
    /// `discrete`, `unit`, `fbm` or `multi`.
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_grading: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stieltjes_nodes: Option<usize>,
    /// Relative disagreement with the other quadrature scheme, when checked.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crosscheck_rel: Option<f64>,
}

impl GridMeta {
    pub fn discrete(n: usize) -> Self {
        Self {
            method: "discrete".into(),
            dimension: Some(n),
            ..Self::default()
        }
    }

    pub(crate) fn continuous(method: &str, grid: &QuadratureGrid, s_grading: f64) -> Self {
        Self {
            method: method.into(),
            s_nodes: Some(grid.s_nodes),
            t_nodes: Some(grid.t_nodes),
            scheme: Some(grid.scheme),
            s_grading: Some(s_grading),
            ..Self::default()
        }
    }
}

/// Squared adapted distance with its decomposition and optimal coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub distance_squared: f64,
    pub trace_term: f64,
    pub cross_term: f64,
    /// Per-step (discrete) or per-node (continuous) correlation of the optimal coupling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimal_correlation: Option<Vec<f64>>,
    /// Quadrature nodes matching `optimal_correlation` or `coupling_factors`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<f64>>,
    /// Per-node orthogonal factors `U V` for higher multiplicity, row-major.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_factors: Option<Vec<Vec<Vec<f64>>>>,
    pub grid: GridMeta,
}

impl DistanceReport {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
