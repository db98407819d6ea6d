use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{OracleVerdict, ToleranceMode};
use crate::error::{Error, Result};
use crate::fsde::{
    estimate_coupling_cost, euler_path, CouplingControl, FsdeSpec, NoiseGenerator, TimeGrid,
};
use crate::func::ScalarFn;
use crate::gauss_aw::{cholesky_causal_factor, continuous_aw_unit, CovMatrix};
use crate::kernels::{covariance_matrix, GaussianProcessSpec, IntensityMeasure, VolterraKernel};
use crate::quadrature::QuadratureGrid;
use crate::reduce::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    /// Relative discretisation budget added to the statistical tolerance.
    pub allowance_rel: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            steps: 256,
            n_paths: 10_000,
            seed: 1,
            allowance_rel: 0.02,
        }
    }
}

/// Sample mean of a seeded Monte Carlo quantity with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McMoment {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

impl McMoment {
    fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = pairwise_sum(xs) / n;
        let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        Self {
            mean,
            std_error: (pairwise_sum(&sq) / (n - 1.0) / n).sqrt(),
            n_paths: xs.len(),
        }
    }
}

fn is_plain_lebesgue(m: &IntensityMeasure) -> bool {
    !m.is_singular() && matches!(m.density, ScalarFn::Constant { value } if value == 1.0)
}

/// Simulates the optimal coupling of the unit formula (correlation
/// `sign <k1(., s), k2(., s)>`) and compares the Monte Carlo cost with the
/// formula within `3 SE + allowance_rel * |formula|`.
pub fn mc_formula_check(
    spec1: &GaussianProcessSpec,
    spec2: &GaussianProcessSpec,
    grid: &QuadratureGrid,
    cfg: &McConfig,
) -> Result<OracleVerdict> {
    for s in [spec1, spec2] {
        if s.multiplicity() != 1 || !is_plain_lebesgue(s.measure(0)) {
            return Err(Error::UnsupportedMeasure(
                "Monte Carlo check needs unit multiplicity and Lebesgue intensity".into(),
            ));
        }
    }
    let report = continuous_aw_unit(spec1, spec2, grid)?;
    let (nodes, signs) = match (&report.nodes, &report.optimal_correlation) {
        (Some(n), Some(r)) => (n.clone(), r.clone()),
        _ => return Err(Error::Invalid("formula returned no coupling".into())),
    };
    let control = CouplingControl::Tabulated { t: nodes, rho: signs };
    let x1 = FsdeSpec::additive(spec1.kernel(0).clone());
    let x2 = FsdeSpec::additive(spec2.kernel(0).clone());
    let tgrid = TimeGrid::new(spec1.horizon(), cfg.steps)?;
    let est = estimate_coupling_cost(&x1, &x2, &control, tgrid, cfg.n_paths, cfg.seed)?;
    let target = report.distance_squared;
    let stat = 3.0 * est.std_error;
    let bias = cfg.allowance_rel * target.abs();
    let mut v = OracleVerdict::compare(
        target,
        est.mean,
        stat + bias,
        ToleranceMode::Absolute,
        String::new(),
    );
    v.diagnostics = format!(
        "formula {target:.10e}, Monte Carlo {:.10e} +- {:.3e} (SE); gap {:.3e}; statistical allowance {stat:.3e}, discretisation allowance {bias:.3e}; M = {}, n_paths = {}, seed = {}",
        est.mean,
        est.std_error,
        (target - est.mean).abs(),
        cfg.steps,
        cfg.n_paths,
        cfg.seed
    );
    Ok(v)
}

fn grid_index(grid: &TimeGrid, t: f64) -> Result<usize> {
    let m = (t / grid.dt()).round() as usize;
    if m > grid.steps || (grid.time(m) - t).abs() > 1e-12 * grid.horizon {
        return Err(Error::Invalid(format!("t = {t} is not a node of the {}-step grid", grid.steps)));
    }
    Ok(m)
}

/// `E[Z(t) Z(s)]` from the midpoint noise generator; `t`, `s` must be grid nodes.
pub fn mc_covariance(kernel: &VolterraKernel, t: f64, s: f64, steps: usize, n_paths: usize, seed: u64) -> Result<McMoment> {
    let grid = TimeGrid::new(kernel.horizon, steps)?;
    let (i, j) = (grid_index(&grid, t)?, grid_index(&grid, s)?);
    let gen = NoiseGenerator::new(kernel, kernel, grid)?;
    let rhos = gen.cell_correlations(&CouplingControl::Independent)?;
    let nc = gen.n_cells();
    let prods: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let (mut xi1, mut xi2) = (vec![0.0; nc], vec![0.0; nc]);
            gen.draw(seed, p, &rhos, &mut xi1, &mut xi2);
            let mut z = vec![0.0; steps + 1];
            gen.z1(&xi1, &mut z);
            z[i] * z[j]
        })
        .collect();
    Ok(McMoment::from_samples(&prods))
}

/// Sample variance of `X(T)` under the Euler scheme; the standard error is
/// that of the sample variance, `sqrt((m4 - var^2) / n)`.
pub fn mc_terminal_variance(spec: &FsdeSpec, steps: usize, n_paths: usize, seed: u64) -> Result<McMoment> {
    let grid = TimeGrid::new(spec.horizon(), steps)?;
    let k = &spec.noise_kernel;
    let gen = NoiseGenerator::new(k, k, grid)?;
    let rhos = gen.cell_correlations(&CouplingControl::Synchronous)?;
    let finals = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let (z, _) = gen.pair(seed, p, &rhos);
            euler_path(spec, &z, grid.dt()).map(|x| x[steps])
        })
        .collect::<Vec<Result<f64>>>()
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let n = n_paths as f64;
    let mean = pairwise_sum(&finals) / n;
    let c2: Vec<f64> = finals.iter().map(|x| (x - mean).powi(2)).collect();
    let c4: Vec<f64> = finals.iter().map(|x| (x - mean).powi(4)).collect();
    let var = pairwise_sum(&c2) / (n - 1.0);
    let m4 = pairwise_sum(&c4) / n;
    Ok(McMoment {
        mean: var,
        std_error: ((m4 - var * var) / n).max(0.0).sqrt(),
        n_paths,
    })
}

/// Exact-in-law samples of `(Z(t_1), ..., Z(t_n))` through the Cholesky factor
/// of the quadrature covariance. Marginal laws only: no increments are exposed.
pub fn cholesky_paths(
    kernel: &VolterraKernel,
    times: &[f64],
    n_paths: usize,
    seed: u64,
    grid: &QuadratureGrid,
) -> Result<Vec<Vec<f64>>> {
    let cov = covariance_matrix(kernel, &IntensityMeasure::lebesgue(), times, grid)?;
    let sym = (&cov + cov.transpose()) * 0.5;
    let k = cholesky_causal_factor(&CovMatrix::new(sym)?)?.into_matrix();
    let n = times.len();
    Ok((0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(p as u64);
            let xi: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            (0..n).map(|i| (0..=i).map(|j| k[(i, j)] * xi[j]).sum()).collect()
        })
        .collect())
}
