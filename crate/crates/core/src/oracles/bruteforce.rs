use crate::error::{Error, Result};
use crate::gauss_aw::TriangularFactor;

/// Grid steps across `[-1, 1]` for a search step of `1e-4`.
pub const DEFAULT_GRID_STEPS: usize = 20_000;

/// `max over rho in [-1, 1]^N of sum_n rho_n (K1^T K2)_nn` by a dense grid
/// search in each coordinate (the objective is separable).
pub fn bruteforce_discrete_cross_term(k1: &TriangularFactor, k2: &TriangularFactor, grid_steps: usize) -> Result<f64> {
    let (a, b) = (k1.matrix(), k2.matrix());
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    let steps = grid_steps.max(1);
    let mut total = 0.0;
    for n in 0..a.ncols() {
        let mut d = 0.0;
        for m in 0..a.nrows() {
            d += a[(m, n)] * b[(m, n)];
        }
        let mut best = f64::NEG_INFINITY;
        for i in 0..=steps {
            let rho = -1.0 + 2.0 * i as f64 / steps as f64;
            best = best.max(rho * d);
        }
        total += best;
    }
    Ok(total)
}

/// Plain partial sums of `F(a, b; c; z)` for `|z| < 1`, stopped after three
/// consecutive terms below `rel_tol` relative to the running sum.
pub fn hyp2f1_direct(a: f64, b: f64, c: f64, z: f64, rel_tol: f64, max_terms: usize) -> Result<f64> {
    if z.abs() >= 1.0 {
        return Err(Error::Domain(format!("direct series needs |z| < 1, got {z}")));
    }
    let (mut sum, mut comp) = (1.0f64, 0.0f64);
    let mut term = 1.0f64;
    let mut small = 0;
    for k in 0..max_terms {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term.abs() <= rel_tol * sum.abs() {
            small += 1;
            if small == 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence { terms: max_terms, z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss_aw::{cholesky_causal_factor, CovMatrix};

    fn factor(rows: Vec<Vec<f64>>) -> TriangularFactor {
        cholesky_causal_factor(&CovMatrix::from_rows(&rows).unwrap()).unwrap()
    }

    fn diag(d: &[f64]) -> TriangularFactor {
        TriangularFactor::from_lower(nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(d))).unwrap()
    }

    #[test]
    fn identity_pair() {
        let i = factor(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        assert!((bruteforce_discrete_cross_term(&i, &i, DEFAULT_GRID_STEPS).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn separable_signs() {
        let a = diag(&[2.0, -3.0]);
        let i = diag(&[1.0, 1.0]);
        assert!((bruteforce_discrete_cross_term(&a, &i, 10).unwrap() - 5.0).abs() < 1e-12);
        assert!(TriangularFactor::from_lower(nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn log_identity() {
        let v = hyp2f1_direct(1.0, 1.0, 2.0, 0.5, 1e-16, 10_000).unwrap();
        assert!((v - 2.0 * std::f64::consts::LN_2).abs() < 1e-15);
        assert!(hyp2f1_direct(1.0, 1.0, 2.0, -1.0, 1e-16, 10).is_err());
    }
}
