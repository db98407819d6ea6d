use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gauss_aw::psd_sqrt;

/// Stream of `Gamma = A^(1/2) Q B^(1/2)` with `Q` a random contraction, so that
/// `[[A, Gamma], [Gamma^T, B]]` is positive semidefinite.
#[derive(Debug, Clone)]
pub struct FeasibleGammaSampler {
    a_half: DMatrix<f64>,
    b_half: DMatrix<f64>,
    rng: ChaCha8Rng,
    remaining: usize,
}

impl Iterator for FeasibleGammaSampler {
    type Item = DMatrix<f64>;

    fn next(&mut self) -> Option<DMatrix<f64>> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let (m, n) = (self.a_half.nrows(), self.b_half.nrows());
        let rng = &mut self.rng;
        let q = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let top = q.singular_values().max();
        let u: f64 = self.rng.random();
        let q = if top > 0.0 { q * (u / top) } else { q };
        Some(&self.a_half * q * &self.b_half)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

pub fn psd_feasibility_sampler(a: &DMatrix<f64>, b: &DMatrix<f64>, n_samples: usize, seed: u64) -> Result<FeasibleGammaSampler> {
    Ok(FeasibleGammaSampler {
        a_half: psd_sqrt(a)?,
        b_half: psd_sqrt(b)?,
        rng: ChaCha8Rng::seed_from_u64(seed),
        remaining: n_samples,
    })
}

/// Smallest eigenvalue of `[[A, Gamma], [Gamma^T, B]]` and whether it is at least `-tol`.
pub fn is_feasible(a: &DMatrix<f64>, b: &DMatrix<f64>, gamma: &DMatrix<f64>, tol: f64) -> Result<(bool, f64)> {
    let (m, n) = (a.nrows(), b.nrows());
    if gamma.shape() != (m, n) {
        return Err(Error::Dimension(format!("Gamma is {:?}, expected ({m}, {n})", gamma.shape())));
    }
    let mut block = DMatrix::zeros(m + n, m + n);
    block.view_mut((0, 0), (m, m)).copy_from(a);
    block.view_mut((m, m), (n, n)).copy_from(b);
    block.view_mut((0, m), (m, n)).copy_from(gamma);
    block.view_mut((m, 0), (n, m)).copy_from(&gamma.transpose());
    let min = SymmetricEigen::new(block).eigenvalues.min();
    Ok((min >= -tol, min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss_aw::{trace_bound_optimal_gamma, PSD_TOL};

    fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
        let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        &g * g.transpose()
    }

    #[test]
    fn zero_and_identity_contractions() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (a, b) = (random_psd(&mut rng, 3), random_psd(&mut rng, 3));
        assert!(is_feasible(&a, &b, &DMatrix::zeros(3, 3), PSD_TOL).unwrap().0);
        let g = psd_sqrt(&a).unwrap() * psd_sqrt(&b).unwrap();
        assert!(is_feasible(&a, &b, &g, PSD_TOL).unwrap().0);
    }

    #[test]
    fn samples_respect_the_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (a, b) = (random_psd(&mut rng, 3), random_psd(&mut rng, 4));
        for _ in 0..10 {
            let c = DMatrix::from_fn(3, 4, |_, _| rng.sample::<f64, _>(StandardNormal));
            let (bound, _) = trace_bound_optimal_gamma(&a, &b, &c).unwrap();
            let mut best = f64::NEG_INFINITY;
            for g in psd_feasibility_sampler(&a, &b, 1000, 6).unwrap() {
                assert!(is_feasible(&a, &b, &g, PSD_TOL).unwrap().0);
                best = best.max((&c * g.transpose()).trace());
            }
            assert!(best <= bound + 1e-9);
        }
    }
}
