use serde::{Deserialize, Serialize};

use super::continuous_aw_unit;
use crate::error::Result;
use crate::kernels::{covariance, GaussianProcessSpec, IntensityMeasure, KernelKind, VolterraKernel};
use crate::quadrature::QuadratureGrid;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovariancePoint {
    pub t: f64,
    pub s: f64,
    pub value: f64,
    pub expected: f64,
}

/// Lévy's non-canonical representation of Brownian motion run through the
/// canonical-representation formula.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevyReport {
    pub covariance: Vec<CovariancePoint>,
    pub max_covariance_error: f64,
    /// Output of the unit formula for (Brownian kernel, Lévy kernel). Positive
    /// although both processes are standard Brownian motions.
    pub naive_distance_squared: f64,
    pub naive_cross_term: f64,
    /// Brownian kernel against itself.
    pub self_distance_squared: f64,
}

/// Times at which the Lévy covariance is compared with `min(t, s)`.
const CHECK_TIMES: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

pub fn levy_noncanonical_check(grid: &QuadratureGrid) -> Result<LevyReport> {
    grid.validate()?;
    let levy = VolterraKernel::new(KernelKind::LevyNoncanonical, 1.0)?;
    let leb = IntensityMeasure::lebesgue();
    let mut points = Vec::new();
    for &t in &CHECK_TIMES {
        for &s in CHECK_TIMES.iter().filter(|&&s| s <= t) {
            let value = covariance(&levy, &leb, t, s, grid)?;
            points.push(CovariancePoint {
                t,
                s,
                value,
                expected: s.min(t),
            });
        }
    }
    let max_covariance_error = points.iter().map(|p| (p.value - p.expected).abs()).fold(0.0, f64::max);
    let bm = GaussianProcessSpec::brownian(1.0)?;
    let naive = continuous_aw_unit(&bm, &GaussianProcessSpec::unit(levy), grid)?;
    let own = continuous_aw_unit(&bm, &bm, grid)?;
    Ok(LevyReport {
        covariance: points,
        max_covariance_error,
        naive_distance_squared: naive.distance_squared,
        naive_cross_term: naive.cross_term,
        self_distance_squared: own.distance_squared,
    })
}
