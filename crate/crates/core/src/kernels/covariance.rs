use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{IntensityMeasure, VolterraKernel};
use crate::error::{Error, Result};
use crate::quadrature::{Cluster, QuadratureGrid, Rule};

/// `R(t, s) = int_0^{t ^ s} k(t, r) k(s, r) mu(dr)` by graded quadrature
/// clustered at the origin and at the diagonal.
pub fn covariance(
    kernel: &VolterraKernel,
    measure: &IntensityMeasure,
    t: f64,
    s: f64,
    grid: &QuadratureGrid,
) -> Result<f64> {
    if let Some(tag) = measure.singular {
        return Err(Error::UnsupportedMeasure(format!("covariance against the {tag:?} measure")));
    }
    if t < 0.0 || s < 0.0 {
        return Err(Error::Domain(format!("negative time in covariance({t}, {s})")));
    }
    let (lo, hi) = if t <= s { (t, s) } else { (s, t) };
    if lo == 0.0 {
        return Ok(0.0);
    }
    let alpha0 = 2.0 * kernel.origin_exponent();
    let beta = kernel.diagonal_exponent().min(0.0);
    let alpha_diag = if lo == hi { 2.0 * beta } else { beta };
    let g = grid.grading_for(alpha0.min(alpha_diag));
    let rule = Rule::graded(0.0, lo, grid.s_nodes, g, Cluster::Both, grid.scheme);
    rule.try_integrate(|r| Ok(kernel.eval(hi, r)? * kernel.eval(lo, r)? * measure.density_at(r)?))
}

/// Covariance matrix at the given times, rows computed in parallel.
pub fn covariance_matrix(
    kernel: &VolterraKernel,
    measure: &IntensityMeasure,
    times: &[f64],
    grid: &QuadratureGrid,
) -> Result<DMatrix<f64>> {
    let n = times.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..=i)
                .map(|j| covariance(kernel, measure, times[i], times[j], grid))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::ScalarFn;

    fn fbm_cov(h: f64, t: f64, s: f64) -> f64 {
        0.5 * (t.powf(2.0 * h) + s.powf(2.0 * h) - (t - s).abs().powf(2.0 * h))
    }

    #[test]
    fn brownian_is_min() {
        let g = QuadratureGrid::default();
        let k = VolterraKernel::brownian(1.0).unwrap();
        let leb = IntensityMeasure::lebesgue();
        assert!((covariance(&k, &leb, 0.7, 0.4, &g).unwrap() - 0.4).abs() < 1e-12);
        let mg = VolterraKernel::molchan_golosov(0.5, 1.0).unwrap();
        for &(t, s) in &[(0.3, 0.9), (1.0, 1.0), (0.25, 0.1)] {
            let c = covariance(&mg, &leb, t, s, &g).unwrap();
            assert!((c - f64::min(t, s)).abs() <= 1e-10);
        }
    }

    #[test]
    fn mg_reproduces_fbm_covariance() {
        let g = QuadratureGrid::default();
        let leb = IntensityMeasure::lebesgue();
        for &h in &[0.3, 0.6, 0.75, 0.9] {
            let k = VolterraKernel::molchan_golosov(h, 1.0).unwrap();
            for &(t, s) in &[(1.0, 0.5), (0.8, 0.8), (0.3, 0.7)] {
                let c = covariance(&k, &leb, t, s, &g).unwrap();
                let e = fbm_cov(h, t, s);
                assert!((c - e).abs() < 2e-3 * e, "H = {h} ({t}, {s}): {c} vs {e}");
            }
        }
    }

    #[test]
    fn symmetric_and_rejects_cantor() {
        let g = QuadratureGrid::default();
        let k = VolterraKernel::molchan_golosov(0.7, 1.0).unwrap();
        let m = IntensityMeasure::with_density(ScalarFn::Linear {
            slope: 1.0,
            intercept: 0.5,
        });
        let a = covariance(&k, &m, 0.9, 0.35, &g).unwrap();
        let b = covariance(&k, &m, 0.35, 0.9, &g).unwrap();
        assert!((a - b).abs() <= 1e-12);
        assert!(matches!(
            covariance(&k, &IntensityMeasure::cantor(), 0.5, 0.5, &g),
            Err(Error::UnsupportedMeasure(_))
        ));
    }

    #[test]
    fn matrix_is_symmetric() {
        let g = QuadratureGrid::with_nodes(64, 64);
        let k = VolterraKernel::molchan_golosov(0.6, 1.0).unwrap();
        let times = [0.25, 0.5, 0.75, 1.0];
        let m = covariance_matrix(&k, &IntensityMeasure::lebesgue(), &times, &g).unwrap();
        assert_eq!(m, m.transpose());
        assert!(m.clone().cholesky().is_some());
    }
}
