use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CouplingControl, TimeGrid};
use crate::error::{Error, Result};
use crate::kernels::VolterraKernel;

/// Dyadic levels into which the first time cell is split, so that kernels
/// singular at the origin are sampled where their mass sits.
pub const REFINE_LEVELS: usize = 20;

const SUBSTREAM_POLICY: &str = "chacha8: key from seed, stream = path index; per cell draws (xi1, xi~) in time order";

/// Paths sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub times: Vec<f64>,
    /// `paths[p][m]` is path `p` at `times[m]`.
    pub paths: Vec<Vec<f64>>,
    pub seed: u64,
    pub substreams: String,
}

impl PathEnsemble {
    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    /// Values of every path at grid index `m`.
    pub fn column(&self, m: usize) -> Vec<f64> {
        self.paths.iter().map(|p| p[m]).collect()
    }
}

/// Precomputed weights `k_i(t_m, mid_c) sqrt(|c|)` of the midpoint noise
/// discretisation `Z_i(t_m) = sum_c k_i(t_m, mid_c) dW_i(c)` for two kernels.
#[derive(Debug, Clone)]
pub struct NoiseGenerator {
    grid: TimeGrid,
    cells: Vec<(f64, f64)>,
    control_times: Vec<f64>,
    /// Number of cells ending at or before `t_m`.
    prefix: Vec<usize>,
    w1: Vec<f64>,
    w2: Option<Vec<f64>>,
}

fn cells_for(grid: &TimeGrid) -> (Vec<(f64, f64)>, Vec<f64>, Vec<usize>) {
    let dt = grid.dt();
    let mut cells = Vec::with_capacity(grid.steps + REFINE_LEVELS);
    let mut control = Vec::with_capacity(grid.steps + REFINE_LEVELS);
    let mut edges: Vec<f64> = (0..=REFINE_LEVELS).map(|l| dt / 2f64.powi((REFINE_LEVELS - l) as i32)).collect();
    edges.insert(0, 0.0);
    for w in edges.windows(2) {
        cells.push((w[0], w[1]));
        control.push(0.0);
    }
    for j in 1..grid.steps {
        cells.push((grid.time(j), grid.time(j + 1)));
        control.push(grid.time(j));
    }
    let first = REFINE_LEVELS + 1;
    let prefix = (0..=grid.steps).map(|m| if m == 0 { 0 } else { first + m - 1 }).collect();
    (cells, control, prefix)
}

fn weights(k: &VolterraKernel, grid: &TimeGrid, cells: &[(f64, f64)], prefix: &[usize]) -> Result<Vec<f64>> {
    let nc = cells.len();
    let rows = (0..=grid.steps)
        .into_par_iter()
        .map(|m| {
            let t = grid.time(m);
            let mut row = vec![0.0; nc];
            for (c, &(lo, hi)) in cells.iter().enumerate().take(prefix[m]) {
                row[c] = k.eval(t, 0.5 * (lo + hi))? * (hi - lo).sqrt();
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.concat())
}

fn same_kernel(a: &VolterraKernel, b: &VolterraKernel) -> bool {
    match (serde_json::to_string(a), serde_json::to_string(b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

impl NoiseGenerator {
    pub fn new(k1: &VolterraKernel, k2: &VolterraKernel, grid: TimeGrid) -> Result<Self> {
        for k in [k1, k2] {
            if k.horizon != grid.horizon {
                return Err(Error::HorizonMismatch(grid.horizon, k.horizon));
            }
        }
        let (cells, control_times, prefix) = cells_for(&grid);
        let w1 = weights(k1, &grid, &cells, &prefix)?;
        let w2 = if same_kernel(k1, k2) {
            None
        } else {
            Some(weights(k2, &grid, &cells, &prefix)?)
        };
        Ok(Self {
            grid,
            cells,
            control_times,
            prefix,
            w1,
            w2,
        })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Control correlation applied to each cell, evaluated at the left end of its grid step.
    pub fn cell_correlations(&self, control: &CouplingControl) -> Result<Vec<f64>> {
        control.validate()?;
        Ok(self
            .control_times
            .iter()
            .map(|&t| control.rho_at(t, self.grid.horizon))
            .collect())
    }

    /// Standard normal draws of path `path`: `xi1` drives `Z1`, `xi2 = rho xi1 + sqrt(1 - rho^2) xi~` drives `Z2`.
    pub fn draw(&self, seed: u64, path: usize, rhos: &[f64], xi1: &mut [f64], xi2: &mut [f64]) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path as u64);
        for c in 0..self.cells.len() {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            let r = rhos[c];
            xi1[c] = a;
            xi2[c] = r * a + (1.0 - r * r).sqrt() * b;
        }
    }

    fn values(&self, w: &[f64], xi: &[f64], out: &mut [f64]) {
        let nc = self.cells.len();
        for (m, o) in out.iter_mut().enumerate() {
            let row = &w[m * nc..m * nc + self.prefix[m]];
            *o = row.iter().zip(xi).map(|(a, b)| a * b).sum();
        }
    }

    /// `Z1(t_m)`, `m = 0..=M`.
    pub fn z1(&self, xi1: &[f64], out: &mut [f64]) {
        self.values(&self.w1, xi1, out);
    }

    /// `Z2(t_m)`, `m = 0..=M`.
    pub fn z2(&self, xi2: &[f64], out: &mut [f64]) {
        self.values(self.w2.as_ref().unwrap_or(&self.w1), xi2, out);
    }

    /// Both noises of one path.
    pub fn pair(&self, seed: u64, path: usize, rhos: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let nc = self.n_cells();
        let (mut xi1, mut xi2) = (vec![0.0; nc], vec![0.0; nc]);
        self.draw(seed, path, rhos, &mut xi1, &mut xi2);
        let (mut z1, mut z2) = (vec![0.0; self.grid.steps + 1], vec![0.0; self.grid.steps + 1]);
        self.z1(&xi1, &mut z1);
        self.z2(&xi2, &mut z2);
        (z1, z2)
    }
}

/// Two Volterra noises driven by correlated Brownian increments.
pub fn simulate_coupled_noise(
    k1: &VolterraKernel,
    k2: &VolterraKernel,
    control: &CouplingControl,
    grid: TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<(PathEnsemble, PathEnsemble)> {
    let gen = NoiseGenerator::new(k1, k2, grid)?;
    let rhos = gen.cell_correlations(control)?;
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..n_paths).into_par_iter().map(|p| gen.pair(seed, p, &rhos)).collect();
    let (a, b): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let wrap = |paths| PathEnsemble {
        times: grid.times(),
        paths,
        seed,
        substreams: SUBSTREAM_POLICY.into(),
    };
    Ok((wrap(a), wrap(b)))
}
