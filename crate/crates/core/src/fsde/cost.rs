use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::euler::Stepper;
use super::{CouplingControl, FsdeSpec, NoiseGenerator, TimeGrid};
use crate::error::{Error, Result};
use crate::reduce::pairwise_sum;

/// Monte Carlo estimate of `E[int_0^T |X1 - X2|^2 dt]` under one control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n_paths)`.
    pub std_error: f64,
    pub n_paths: usize,
    pub control: CouplingControl,
}

impl CostEstimate {
    pub(crate) fn from_samples(samples: &[f64], control: CouplingControl) -> Self {
        let n = samples.len() as f64;
        let mean = pairwise_sum(samples) / n;
        let sq: Vec<f64> = samples.iter().map(|c| (c - mean) * (c - mean)).collect();
        let var = pairwise_sum(&sq) / (n - 1.0);
        Self {
            mean,
            std_error: (var / n).sqrt(),
            n_paths: samples.len(),
            control,
        }
    }
}

/// Per-path costs for a prepared noise generator; the kernels of `gen` must be
/// those of `spec1` and `spec2`.
pub fn estimate_with_generator(
    gen: &NoiseGenerator,
    spec1: &FsdeSpec,
    spec2: &FsdeSpec,
    control: &CouplingControl,
    n_paths: usize,
    seed: u64,
) -> Result<CostEstimate> {
    if n_paths < 2 {
        return Err(Error::Invalid("cost estimation needs at least two paths".into()));
    }
    let rhos = gen.cell_correlations(control)?;
    let (s1, s2) = (Stepper::new(spec1)?, Stepper::new(spec2)?);
    let grid = gen.grid();
    let dt = grid.dt();
    let nc = gen.n_cells();
    let n = grid.steps + 1;
    let per_path: Vec<Result<f64>> = (0..n_paths)
        .into_par_iter()
        .map_init(
            || (vec![0.0; nc], vec![0.0; nc], vec![0.0; n], vec![0.0; n], Vec::new(), Vec::new()),
            |(xi1, xi2, z1, z2, x1, x2), p| {
                gen.draw(seed, p, &rhos, xi1, xi2);
                gen.z1(xi1, z1);
                gen.z2(xi2, z2);
                s1.run(z1, dt, p, x1)?;
                s2.run(z2, dt, p, x2)?;
                let d: Vec<f64> = (0..grid.steps).map(|m| (x1[m] - x2[m]).powi(2)).collect();
                Ok(pairwise_sum(&d) * dt)
            },
        )
        .collect();
    let samples = per_path.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(CostEstimate::from_samples(&samples, control.clone()))
}

pub fn estimate_coupling_cost(
    spec1: &FsdeSpec,
    spec2: &FsdeSpec,
    control: &CouplingControl,
    grid: TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<CostEstimate> {
    if spec1.horizon() != spec2.horizon() {
        return Err(Error::HorizonMismatch(spec1.horizon(), spec2.horizon()));
    }
    let gen = NoiseGenerator::new(&spec1.noise_kernel, &spec2.noise_kernel, grid)?;
    estimate_with_generator(&gen, spec1, spec2, control, n_paths, seed)
}

/// `count` piecewise-constant controls with `cells` values uniform on `[-1, 1]`.
pub fn random_piecewise_controls(count: usize, cells: usize, seed: u64) -> Vec<CouplingControl> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| CouplingControl::PiecewiseConstant {
            values: (0..cells).map(|_| rng.random_range(-1.0..=1.0)).collect(),
        })
        .collect()
}
