use nalgebra::DMatrix;
use rayon::prelude::*;

use super::trace_bound::svd_parts;
use super::{sign, DistanceReport};
use crate::error::{Error, Result};
use crate::kernels::{GaussianProcessSpec, IntensityMeasure, VolterraKernel};
use crate::quadrature::{Cluster, QuadratureGrid, Rule};
use crate::reduce::{pairwise_dot, pairwise_sum};

/// Grading exponents for the outer (origin) and inner (diagonal) integrals
/// of products of the given kernels.
pub(crate) fn gradings(grid: &QuadratureGrid, kernels: &[&VolterraKernel]) -> (f64, f64) {
    let origin = kernels.iter().map(|k| k.origin_exponent()).fold(0.0, f64::min);
    let mut diag = f64::INFINITY;
    for a in kernels {
        for b in kernels {
            diag = diag.min(a.diagonal_exponent() + b.diagonal_exponent());
        }
    }
    (grid.grading_for(2.0 * origin), grid.grading_for(diag))
}

pub(crate) fn outer_rule(horizon: f64, grid: &QuadratureGrid, g: f64) -> Rule {
    Rule::graded(0.0, horizon, grid.s_nodes, g, Cluster::Left, grid.scheme)
}

pub(crate) fn inner_rule(s: f64, horizon: f64, grid: &QuadratureGrid, g: f64) -> Rule {
    Rule::graded(s, horizon, grid.t_nodes, g, Cluster::Left, grid.scheme)
}

/// `k(t_j, s)` along an inner rule.
pub(crate) fn kernel_column(k: &VolterraKernel, s: f64, rule: &Rule) -> Result<Vec<f64>> {
    rule.nodes.iter().map(|&t| k.eval(t, s)).collect()
}

pub(crate) fn weighted_inner(rule: &Rule, a: &[f64], b: &[f64]) -> f64 {
    let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    pairwise_dot(&rule.weights, &prods)
}

fn check_pair(spec1: &GaussianProcessSpec, spec2: &GaussianProcessSpec) -> Result<f64> {
    if spec1.horizon() != spec2.horizon() {
        return Err(Error::HorizonMismatch(spec1.horizon(), spec2.horizon()));
    }
    Ok(spec1.horizon())
}

fn with_crosscheck<F>(grid: &QuadratureGrid, compute: F) -> Result<DistanceReport>
where
    F: Fn(&QuadratureGrid) -> Result<DistanceReport>,
{
    grid.validate()?;
    let mut report = compute(grid)?;
    if let Some(tol) = grid.crosscheck_tol {
        let other_grid = QuadratureGrid {
            crosscheck_tol: None,
            ..grid.with_scheme(grid.scheme.other())
        };
        let other = compute(&other_grid)?;
        let a = report.distance_squared;
        let b = other.distance_squared;
        let scale = a.abs().max(b.abs()).max(f64::EPSILON * report.trace_term.abs());
        let rel = if scale > 0.0 { (a - b).abs() / scale } else { 0.0 };
        if rel > tol {
            return Err(Error::Quadrature { a, b, rel, tol });
        }
        report.grid.crosscheck_rel = Some(rel);
    }
    Ok(report)
}

/// `int ||k(., s)||^2 mu(ds)` against the singular measure by a Riemann–Stieltjes
/// sum on uniform cells; cells without mass are skipped.
fn singular_trace(k: &VolterraKernel, measure: &IntensityMeasure, grid: &QuadratureGrid, g_inner: f64) -> Result<f64> {
    let horizon = k.horizon;
    let n = grid.stieltjes_nodes;
    let h = horizon / n as f64;
    let cdf = |s: f64| measure.singular_cdf(s, horizon).unwrap_or(0.0);
    let cells: Vec<(f64, f64)> = (0..n)
        .filter_map(|i| {
            let lo = i as f64 * h;
            let hi = if i + 1 == n { horizon } else { lo + h };
            let mass = cdf(hi) - cdf(lo);
            (mass > 0.0).then_some((0.5 * (lo + hi), mass))
        })
        .collect();
    let terms = cells
        .par_iter()
        .map(|&(s, mass)| {
            let rule = inner_rule(s, horizon, grid, g_inner);
            let col = kernel_column(k, s, &rule)?;
            Ok(mass * weighted_inner(&rule, &col, &col))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms))
}

/// Squared adapted distance of two unit-multiplicity processes:
/// `int ||k1||^2 mu1 + int ||k2||^2 mu2 - 2 int |<k1, k2>| sqrt(mu1 mu2)`.
pub fn continuous_aw_unit(
    spec1: &GaussianProcessSpec,
    spec2: &GaussianProcessSpec,
    grid: &QuadratureGrid,
) -> Result<DistanceReport> {
    let horizon = check_pair(spec1, spec2)?;
    if spec1.multiplicity() != 1 || spec2.multiplicity() != 1 {
        return Err(Error::Invalid(format!(
            "unit formula needs multiplicity 1, got {} and {}",
            spec1.multiplicity(),
            spec2.multiplicity()
        )));
    }
    let (k1, m1) = (spec1.kernel(0), spec1.measure(0));
    let (k2, m2) = (spec2.kernel(0), spec2.measure(0));
    if m1.is_singular() && m2.is_singular() {
        return Err(Error::UnsupportedMeasure("both intensity measures are singular".into()));
    }
    with_crosscheck(grid, |grid| {
        let (g_s, g_t) = gradings(grid, &[k1, k2]);
        let mut meta = super::GridMeta::continuous("unit", grid, g_s);
        if m1.is_singular() || m2.is_singular() {
            // mutually singular intensities: the cross term vanishes
            let trace_of = |k: &VolterraKernel, m: &IntensityMeasure| -> Result<f64> {
                if m.is_singular() {
                    singular_trace(k, m, grid, g_t)
                } else {
                    let rule = outer_rule(horizon, grid, g_s);
                    let terms = rule
                        .nodes
                        .par_iter()
                        .map(|&s| {
                            let inner = inner_rule(s, horizon, grid, g_t);
                            let col = kernel_column(k, s, &inner)?;
                            Ok(weighted_inner(&inner, &col, &col) * m.density_at(s)?)
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    Ok(pairwise_dot(&rule.weights, &terms))
                }
            };
            let trace_term = trace_of(k1, m1)? + trace_of(k2, m2)?;
            meta.stieltjes_nodes = Some(grid.stieltjes_nodes);
            return Ok(DistanceReport {
                distance_squared: trace_term,
                trace_term,
                cross_term: 0.0,
                optimal_correlation: None,
                nodes: None,
                coupling_factors: None,
                grid: meta,
            });
        }
        let rule = outer_rule(horizon, grid, g_s);
        let per_node = rule
            .nodes
            .par_iter()
            .map(|&s| {
                let inner = inner_rule(s, horizon, grid, g_t);
                let c1 = kernel_column(k1, s, &inner)?;
                let c2 = kernel_column(k2, s, &inner)?;
                let d1 = m1.density_at(s)?;
                let d2 = m2.density_at(s)?;
                let a12 = weighted_inner(&inner, &c1, &c2);
                let trace = weighted_inner(&inner, &c1, &c1) * d1 + weighted_inner(&inner, &c2, &c2) * d2;
                Ok((trace, a12.abs() * (d1 * d2).sqrt(), sign(a12)))
            })
            .collect::<Result<Vec<_>>>()?;
        let traces: Vec<f64> = per_node.iter().map(|p| p.0).collect();
        let crosses: Vec<f64> = per_node.iter().map(|p| p.1).collect();
        let trace_term = pairwise_dot(&rule.weights, &traces);
        let cross_term = pairwise_dot(&rule.weights, &crosses);
        Ok(DistanceReport {
            distance_squared: trace_term - 2.0 * cross_term,
            trace_term,
            cross_term,
            optimal_correlation: Some(per_node.iter().map(|p| p.2).collect()),
            nodes: Some(rule.nodes.clone()),
            coupling_factors: None,
            grid: meta,
        })
    })
}

/// Distance between two fractional Brownian motions under the synchronous
/// coupling, `int int (k_H1 - k_H2)^2 dt ds`.
pub fn continuous_aw_fbm(h1: f64, h2: f64, horizon: f64, grid: &QuadratureGrid) -> Result<DistanceReport> {
    let k1 = VolterraKernel::molchan_golosov(h1, horizon)?;
    let k2 = VolterraKernel::molchan_golosov(h2, horizon)?;
    with_crosscheck(grid, |grid| {
        let (g_s, g_t) = gradings(grid, &[&k1, &k2]);
        let rule = outer_rule(horizon, grid, g_s);
        let per_node = rule
            .nodes
            .par_iter()
            .map(|&s| {
                let inner = inner_rule(s, horizon, grid, g_t);
                let c1 = kernel_column(&k1, s, &inner)?;
                let c2 = kernel_column(&k2, s, &inner)?;
                let diff: Vec<f64> = c1.iter().zip(&c2).map(|(a, b)| a - b).collect();
                Ok((
                    weighted_inner(&inner, &diff, &diff),
                    weighted_inner(&inner, &c1, &c1) + weighted_inner(&inner, &c2, &c2),
                    weighted_inner(&inner, &c1, &c2),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let col = |f: fn(&(f64, f64, f64)) -> f64| -> Vec<f64> { per_node.iter().map(f).collect() };
        Ok(DistanceReport {
            distance_squared: pairwise_dot(&rule.weights, &col(|p| p.0)),
            trace_term: pairwise_dot(&rule.weights, &col(|p| p.1)),
            cross_term: pairwise_dot(&rule.weights, &col(|p| p.2)),
            optimal_correlation: Some(vec![1.0; rule.len()]),
            nodes: Some(rule.nodes.clone()),
            coupling_factors: None,
            grid: super::GridMeta::continuous("fbm", grid, g_s),
        })
    })
}

/// `sqrt(d_n / d_1)` with `0 / 0 = 0`.
fn rn_scale(d: f64, base: f64) -> f64 {
    if base == 0.0 {
        0.0
    } else {
        (d / base).sqrt()
    }
}

/// Higher-multiplicity distance: the cross term integrates the trace norm of
/// `M_ij(s) = <k1~^i(., s), k2~^j(., s)>` against `sqrt(mu1^1 mu2^1)`.
pub fn continuous_aw_multi(
    spec1: &GaussianProcessSpec,
    spec2: &GaussianProcessSpec,
    grid: &QuadratureGrid,
) -> Result<DistanceReport> {
    let horizon = check_pair(spec1, spec2)?;
    let singular = spec1.components().iter().chain(spec2.components()).any(|(_, m)| m.is_singular());
    if singular {
        if spec1.multiplicity() == 1 && spec2.multiplicity() == 1 {
            return continuous_aw_unit(spec1, spec2, grid);
        }
        return Err(Error::UnsupportedMeasure(
            "singular intensities are only supported at unit multiplicity".into(),
        ));
    }
    let kernels: Vec<&VolterraKernel> = spec1.components().iter().chain(spec2.components()).map(|(k, _)| k).collect();
    with_crosscheck(grid, |grid| {
        let (g_s, g_t) = gradings(grid, &kernels);
        let rule = outer_rule(horizon, grid, g_s);
        spec1.check_ordering(&rule.nodes)?;
        spec2.check_ordering(&rule.nodes)?;
        let (m, n) = (spec1.multiplicity(), spec2.multiplicity());
        let per_node = rule
            .nodes
            .par_iter()
            .map(|&s| {
                let inner = inner_rule(s, horizon, grid, g_t);
                let mut trace = 0.0;
                let mut scaled = |spec: &GaussianProcessSpec| -> Result<(Vec<Vec<f64>>, f64)> {
                    let base = spec.measure(0).density_at(s)?;
                    let mut cols = Vec::with_capacity(spec.multiplicity());
                    for (k, mu) in spec.components() {
                        let d = mu.density_at(s)?;
                        let c = kernel_column(k, s, &inner)?;
                        trace += weighted_inner(&inner, &c, &c) * d;
                        let r = rn_scale(d, base);
                        cols.push(c.into_iter().map(|v| v * r).collect());
                    }
                    Ok((cols, base))
                };
                let (c1, b1) = scaled(spec1)?;
                let (c2, b2) = scaled(spec2)?;
                let mat = DMatrix::from_fn(m, n, |i, j| weighted_inner(&inner, &c1[i], &c2[j]));
                let (norm, gamma) = if m == 1 && n == 1 {
                    (mat[(0, 0)].abs(), DMatrix::from_element(1, 1, sign(mat[(0, 0)])))
                } else {
                    let (u, sv, vt) = svd_parts(&mat).ok_or(Error::Svd(s))?;
                    (sv.sum(), u * vt)
                };
                Ok((trace, norm * (b1 * b2).sqrt(), gamma))
            })
            .collect::<Result<Vec<_>>>()?;
        let traces: Vec<f64> = per_node.iter().map(|p| p.0).collect();
        let crosses: Vec<f64> = per_node.iter().map(|p| p.1).collect();
        let trace_term = pairwise_dot(&rule.weights, &traces);
        let cross_term = pairwise_dot(&rule.weights, &crosses);
        let factors = per_node
            .iter()
            .map(|p| p.2.row_iter().map(|r| r.iter().copied().collect()).collect())
            .collect();
        Ok(DistanceReport {
            distance_squared: trace_term - 2.0 * cross_term,
            trace_term,
            cross_term,
            optimal_correlation: None,
            nodes: Some(rule.nodes.clone()),
            coupling_factors: Some(factors),
            grid: super::GridMeta::continuous("multi", grid, g_s),
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::ScalarFn;

    #[test]
    fn identical_fbm_is_zero() {
        let g = QuadratureGrid::with_nodes(64, 64);
        let a = GaussianProcessSpec::fbm(0.7, 1.0).unwrap();
        let r = continuous_aw_unit(&a, &a, &g).unwrap();
        assert_eq!(r.distance_squared, 0.0);
        assert_eq!(continuous_aw_fbm(0.5, 0.5, 1.0, &g).unwrap().distance_squared, 0.0);
    }

    #[test]
    fn brownian_scaled_volatility() {
        // k1 = 1, k2 = 2: distance = int_0^1 (1-s)(1 - 2)^2 ds = 1/2
        let g = QuadratureGrid::with_nodes(128, 128);
        let a = GaussianProcessSpec::brownian(1.0).unwrap();
        let b = GaussianProcessSpec::unit(VolterraKernel::constant_volatility(ScalarFn::constant(2.0), 1.0).unwrap());
        let r = continuous_aw_unit(&a, &b, &g).unwrap();
        assert!((r.distance_squared - 0.5).abs() < 1e-4, "{}", r.distance_squared);
    }

    #[test]
    fn antithetic_kernel_flips_sign() {
        let g = QuadratureGrid::with_nodes(64, 64);
        let a = GaussianProcessSpec::brownian(1.0).unwrap();
        let b = GaussianProcessSpec::unit(VolterraKernel::constant_volatility(ScalarFn::constant(-1.0), 1.0).unwrap());
        let r = continuous_aw_unit(&a, &b, &g).unwrap();
        assert!(r.distance_squared.abs() < 1e-12);
        assert!(r.optimal_correlation.unwrap().iter().all(|&c| c == -1.0));
    }

    #[test]
    fn horizon_mismatch() {
        let g = QuadratureGrid::with_nodes(16, 16);
        let a = GaussianProcessSpec::fbm(0.7, 1.0).unwrap();
        let b = GaussianProcessSpec::fbm(0.7, 2.0).unwrap();
        assert!(matches!(continuous_aw_unit(&a, &b, &g), Err(Error::HorizonMismatch(..))));
    }
}
