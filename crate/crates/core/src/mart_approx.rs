//! Best adapted-Wasserstein approximation of a fractional Brownian motion by
//! martingales `M(t) = int_0^t rho(r) dB(r)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::interp_linear;
use crate::kernels::eval_mg_kernel;
use crate::quadrature::{grading_for_exponent, kernel_grading, Cluster, QuadratureGrid, Rule, Scheme};
use crate::reduce::pairwise_dot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleApproxResult {
    pub hurst: f64,
    pub horizon: f64,
    /// Tabulation nodes of `rho`.
    pub r: Vec<f64>,
    pub rho: Vec<f64>,
    pub distance_squared: f64,
}

impl MartingaleApproxResult {
    /// Linear interpolation of the tabulated `rho`, flat beyond the end nodes.
    pub fn rho_at(&self, r: f64) -> f64 {
        interp_linear(&self.r, &self.rho, r)
    }
}

fn check(hurst: f64, r: f64, horizon: f64) -> Result<()> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::Domain(format!("Hurst parameter {hurst} outside (0, 1)")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Domain(format!("horizon {horizon} must be positive")));
    }
    if r >= horizon {
        return Err(Error::Domain(format!("r = {r} must be below the horizon {horizon}")));
    }
    if r <= 0.0 && hurst != 0.5 {
        return Err(Error::Singularity);
    }
    Ok(())
}

/// Rule on `[r, T]` clustered at the kernel's diagonal singularity.
fn window_rule(hurst: f64, r: f64, horizon: f64, nodes: usize, scheme: Scheme) -> Rule {
    Rule::graded(r, horizon, nodes, kernel_grading(hurst), Cluster::Left, scheme)
}

/// `(1 / sum w) sum w k` on a window rule: the exact minimiser of the discrete
/// cost `sum w (k - c)^2` over constants.
fn average(rule: &Rule, ks: &[f64]) -> f64 {
    pairwise_dot(&rule.weights, ks) / rule.weights.iter().sum::<f64>()
}

fn kernel_window(hurst: f64, r: f64, rule: &Rule) -> Result<Vec<f64>> {
    rule.nodes.iter().map(|&s| eval_mg_kernel(hurst, s, r)).collect()
}

/// `rho_H(r) = (1 / (T - r)) int_r^T k_H(s, r) ds`.
pub fn optimal_volatility(hurst: f64, r: f64, horizon: f64, quad_nodes: usize) -> Result<f64> {
    optimal_volatility_with(hurst, r, horizon, quad_nodes, Scheme::GradedGaussLegendre)
}

pub fn optimal_volatility_with(hurst: f64, r: f64, horizon: f64, quad_nodes: usize, scheme: Scheme) -> Result<f64> {
    check(hurst, r, horizon)?;
    if hurst == 0.5 {
        return Ok(1.0);
    }
    let rule = window_rule(hurst, r, horizon, quad_nodes, scheme);
    Ok(average(&rule, &kernel_window(hurst, r, &rule)?))
}

/// `int_r^T (k_H(s, r) - c)^2 ds` on the same rule that defines `rho_H`.
pub fn pointwise_cost(hurst: f64, r: f64, horizon: f64, c: f64, quad_nodes: usize) -> Result<f64> {
    check(hurst, r, horizon)?;
    let rule = window_rule(hurst, r, horizon, quad_nodes, Scheme::GradedGaussLegendre);
    let ks = kernel_window(hurst, r, &rule)?;
    let sq: Vec<f64> = ks.iter().map(|k| (k - c) * (k - c)).collect();
    Ok(pairwise_dot(&rule.weights, &sq))
}

fn outer_rule(hurst: f64, horizon: f64, grid: &QuadratureGrid) -> Rule {
    // k_H(s, r)^2 ~ r^(1 - 2H) near the origin when H > 1/2
    let alpha = (1.0 - 2.0 * hurst).min(0.0);
    let g = grid.grading.unwrap_or_else(|| grading_for_exponent(alpha));
    Rule::graded(0.0, horizon, grid.s_nodes, g, Cluster::Left, grid.scheme)
}

/// `int_0^T int_r^T (k_H(s, r) - rho(r))^2 ds dr` for an arbitrary volatility `rho`.
pub fn martingale_cost<F>(hurst: f64, horizon: f64, grid: &QuadratureGrid, rho: F) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    grid.validate()?;
    check(hurst, 0.5 * horizon, horizon)?;
    let outer = outer_rule(hurst, horizon, grid);
    let inner = outer
        .nodes
        .par_iter()
        .map(|&r| {
            let rule = window_rule(hurst, r, horizon, grid.t_nodes, grid.scheme);
            let c = rho(r);
            let sq = kernel_window(hurst, r, &rule)?
                .into_iter()
                .map(|k| (k - c) * (k - c))
                .collect::<Vec<_>>();
            Ok(pairwise_dot(&rule.weights, &sq))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_dot(&outer.weights, &inner))
}

/// The infimum over martingales and its optimal volatility, tabulated at the outer nodes.
pub fn mart_approx_distance(hurst: f64, horizon: f64, grid: &QuadratureGrid) -> Result<MartingaleApproxResult> {
    grid.validate()?;
    check(hurst, 0.5 * horizon, horizon)?;
    let outer = outer_rule(hurst, horizon, grid);
    let per_node = outer
        .nodes
        .par_iter()
        .map(|&r| {
            let rule = window_rule(hurst, r, horizon, grid.t_nodes, grid.scheme);
            let ks = if hurst == 0.5 {
                vec![1.0; rule.len()]
            } else {
                kernel_window(hurst, r, &rule)?
            };
            let rho = if hurst == 0.5 { 1.0 } else { average(&rule, &ks) };
            let sq: Vec<f64> = ks.iter().map(|k| (k - rho) * (k - rho)).collect();
            Ok((rho, pairwise_dot(&rule.weights, &sq)))
        })
        .collect::<Result<Vec<_>>>()?;
    let costs: Vec<f64> = per_node.iter().map(|p| p.1).collect();
    Ok(MartingaleApproxResult {
        hurst,
        horizon,
        r: outer.nodes.clone(),
        rho: per_node.iter().map(|p| p.0).collect(),
        distance_squared: pairwise_dot(&outer.weights, &costs),
    })
}

/// Leading behaviour of `rho_H(r)` as `r -> T`: `k_H(T, r) / (H + 1/2)`.
pub fn terminal_asymptote(hurst: f64, r: f64, horizon: f64) -> Result<f64> {
    Ok(eval_mg_kernel(hurst, horizon, r)? / (hurst + 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn near_the_horizon_rho_follows_the_averaged_kernel() {
        // the window average of (s - r)^(H - 1/2) carries the factor 1 / (H + 1/2)
        let r = 1.0 - 1e-4;
        let rho = optimal_volatility(0.7, r, 1.0, 256).unwrap();
        let k = eval_mg_kernel(0.7, 1.0, r).unwrap();
        assert!((rho - terminal_asymptote(0.7, r, 1.0).unwrap()).abs() < 1e-3, "{rho}");
        assert!((rho - k).abs() > 1e-2);
    }

    #[test]
    fn brownian_needs_no_approximation() {
        assert_eq!(optimal_volatility(0.5, 0.3, 1.0, 64).unwrap(), 1.0);
        let res = mart_approx_distance(0.5, 1.0, &QuadratureGrid::with_nodes(64, 64)).unwrap();
        assert!(res.distance_squared.abs() <= 1e-10);
        assert!(res.rho.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(optimal_volatility(0.7, 0.0, 1.0, 64), Err(Error::Singularity)));
        assert!(optimal_volatility(0.7, 1.0, 1.0, 64).is_err());
        assert!(optimal_volatility(1.3, 0.5, 1.0, 64).is_err());
    }

    #[test]
    fn optimum_beats_constant_shift() {
        let rho = optimal_volatility(0.7, 0.4, 1.0, 128).unwrap();
        let best = pointwise_cost(0.7, 0.4, 1.0, rho, 128).unwrap();
        for d in [-0.1, -1e-4, 1e-4, 0.1] {
            assert!(pointwise_cost(0.7, 0.4, 1.0, rho + d, 128).unwrap() > best);
        }
    }

    #[test]
    fn json_round_trip() {
        let res = mart_approx_distance(0.7, 1.0, &QuadratureGrid::with_nodes(16, 16)).unwrap();
        let s = serde_json::to_string(&res).unwrap();
        let back: MartingaleApproxResult = serde_json::from_str(&s).unwrap();
        assert_eq!(back, res);
        assert_eq!(res.rho_at(-1.0), res.rho[0]);
    }
}
