use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{DistanceReport, GridMeta};
use crate::error::{Error, Result};
use crate::kernels::{covariance_matrix, GaussianProcessSpec};
use crate::quadrature::QuadratureGrid;

/// Relative pivot tolerance of the causal factorization.
pub const PIVOT_TOL: f64 = 1e-10;

const SYMMETRY_TOL: f64 = 1e-12;

/// Symmetric positive definite covariance matrix of an N-step process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct CovMatrix {
    entries: DMatrix<f64>,
}

impl TryFrom<Vec<Vec<f64>>> for CovMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<CovMatrix> for Vec<Vec<f64>> {
    fn from(m: CovMatrix) -> Self {
        m.entries.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

impl CovMatrix {
    /// Validates squareness, finiteness and symmetry. Positive definiteness is
    /// checked by the factorization.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "covariance must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("covariance has non-finite entries".into()));
        }
        let scale = entries.amax().max(1.0);
        let n = entries.nrows();
        for i in 0..n {
            for j in 0..i {
                if (entries[(i, j)] - entries[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::Invalid(format!("covariance is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("covariance rows must all have length N".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// CSV with N rows of N comma-separated reals and no header.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| Error::Invalid(format!("bad number '{f}': {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            entries: &self.entries * c,
        }
    }
}

/// Lower-triangular factor `K` of `K K^T`. Cholesky factors have a positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularFactor {
    entries: DMatrix<f64>,
}

impl TriangularFactor {
    /// Any square, finite, lower-triangular matrix.
    pub fn from_lower(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Dimension(format!("factor must be square, got {:?}", entries.shape())));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("factor has non-finite entries".into()));
        }
        let n = entries.nrows();
        if (0..n).any(|i| (i + 1..n).any(|j| entries[(i, j)] != 0.0)) {
            return Err(Error::Invalid("factor is not lower triangular".into()));
        }
        Ok(Self { entries })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `K K^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.entries * self.entries.transpose()
    }
}

/// Cholesky factor `K` with `K K^T = sigma`, the causal factorization at matrix scale.
pub fn cholesky_causal_factor(sigma: &CovMatrix) -> Result<TriangularFactor> {
    let a = &sigma.entries;
    let n = a.nrows();
    let tol = PIVOT_TOL * a.diagonal().max();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > tol) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d, tol });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / ljj;
        }
    }
    Ok(TriangularFactor { entries: l })
}

/// `sign(x)` with ties broken towards `+1`.
pub(crate) fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Diagonal of `K1^T K2`.
pub fn cross_diagonal(k1: &DMatrix<f64>, k2: &DMatrix<f64>) -> Vec<f64> {
    (0..k1.ncols()).map(|n| k1.column(n).dot(&k2.column(n))).collect()
}

/// Adapted distance from two lower-triangular factors of arbitrary diagonal sign.
pub fn discrete_aw_from_factors(k1: &DMatrix<f64>, k2: &DMatrix<f64>) -> Result<DistanceReport> {
    if k1.shape() != k2.shape() || k1.nrows() != k1.ncols() {
        return Err(Error::Dimension(format!("factor shapes {:?} and {:?}", k1.shape(), k2.shape())));
    }
    let trace_term = k1.norm_squared() + k2.norm_squared();
    let d = cross_diagonal(k1, k2);
    let cross_term: f64 = d.iter().map(|x| x.abs()).sum();
    Ok(DistanceReport {
        distance_squared: trace_term - 2.0 * cross_term,
        trace_term,
        cross_term,
        optimal_correlation: Some(d.iter().map(|&x| sign(x)).collect()),
        nodes: None,
        coupling_factors: None,
        grid: GridMeta::discrete(k1.nrows()),
    })
}

/// `tr(S1 + S2) - 2 sum_n |(K1^T K2)_nn|` with `K_i` the Cholesky factor of `S_i`.
pub fn discrete_aw(sigma1: &CovMatrix, sigma2: &CovMatrix) -> Result<DistanceReport> {
    if sigma1.dim() != sigma2.dim() {
        return Err(Error::Dimension(format!("{} vs {} steps", sigma1.dim(), sigma2.dim())));
    }
    let k1 = cholesky_causal_factor(sigma1)?;
    let k2 = cholesky_causal_factor(sigma2)?;
    let mut report = discrete_aw_from_factors(&k1.entries, &k2.entries)?;
    report.trace_term = sigma1.trace() + sigma2.trace();
    report.distance_squared = report.trace_term - 2.0 * report.cross_term;
    Ok(report)
}

/// Midpoint observation times `(i - 1/2) T / n`, `i = 1..n`.
pub fn midpoint_times(horizon: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) * horizon / n as f64).collect()
}

/// `dt * R(t_i, t_j)` for standard fBM at midpoint times, from the closed-form
/// covariance. With this scaling `tr` approximates `int_0^T E X(t)^2 dt`.
pub fn fbm_discretized_covariance(hurst: f64, horizon: f64, n: usize) -> Result<CovMatrix> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::Domain(format!("Hurst parameter {hurst} outside (0, 1)")));
    }
    if n == 0 {
        return Err(Error::Invalid("need at least one step".into()));
    }
    let t = midpoint_times(horizon, n);
    let dt = horizon / n as f64;
    let h2 = 2.0 * hurst;
    let m = DMatrix::from_fn(n, n, |i, j| {
        0.5 * dt * (t[i].powf(h2) + t[j].powf(h2) - (t[i] - t[j]).abs().powf(h2))
    });
    CovMatrix::new(m)
}

/// `dt * R(t_i, t_j)` for a unit-multiplicity spec, covariance by quadrature.
pub fn discretized_covariance(spec: &GaussianProcessSpec, n: usize, grid: &QuadratureGrid) -> Result<CovMatrix> {
    if spec.multiplicity() != 1 {
        return Err(Error::Invalid("discretized covariance needs unit multiplicity".into()));
    }
    let horizon = spec.horizon();
    let t = midpoint_times(horizon, n);
    let r = covariance_matrix(spec.kernel(0), spec.measure(0), &t, grid)?;
    CovMatrix::new(r * (horizon / n as f64))
}
