use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

/// Eigenvalue tolerance (relative to the largest magnitude, at least absolute) for PSD inputs.
pub const PSD_TOL: f64 = 1e-10;

/// Thin SVD `m = U diag(sv) V^T`; returns `(U, sv, V^T)`.
pub(crate) fn svd_parts(m: &DMatrix<f64>) -> Option<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
    let svd = SVD::try_new(m.clone(), true, true, f64::EPSILON, 0)?;
    Some((svd.u?, svd.singular_values, svd.v_t?))
}

/// Sum of singular values.
pub fn trace_norm(m: &DMatrix<f64>) -> Result<f64> {
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, 0).ok_or(Error::Svd(f64::NAN))?;
    Ok(svd.singular_values.sum())
}

/// Symmetric square root of a PSD matrix; eigenvalues down to `-PSD_TOL` are clamped to 0.
pub fn psd_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!("PSD matrix must be square, got {:?}", a.shape())));
    }
    let scale = a.amax().max(1.0);
    for i in 0..a.nrows() {
        for j in 0..i {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::Invalid("PSD input is not symmetric".into()));
            }
        }
    }
    let eig = SymmetricEigen::new(a.clone());
    let tol = PSD_TOL * scale;
    if let Some(&bad) = eig.eigenvalues.iter().find(|&&l| l < -tol) {
        return Err(Error::NotPsd { eigenvalue: bad, tol });
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose())
}

/// `sup { tr(C Gamma^T) : [[A, Gamma], [Gamma^T, B]] >= 0 } = ||A^1/2 C B^1/2||_tr`,
/// attained at `Gamma = A^1/2 U V B^1/2` where `A^1/2 C B^1/2 = U S V`.
pub fn trace_bound_optimal_gamma(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
    if c.nrows() != a.nrows() || c.ncols() != b.nrows() {
        return Err(Error::Dimension(format!(
            "C is {:?} but A is {:?} and B is {:?}",
            c.shape(),
            a.shape(),
            b.shape()
        )));
    }
    let ra = psd_sqrt(a)?;
    let rb = psd_sqrt(b)?;
    let m = &ra * c * &rb;
    let (u, sv, vt) = svd_parts(&m).ok_or(Error::Svd(f64::NAN))?;
    let gamma = &ra * u * vt * &rb;
    Ok((sv.sum(), gamma))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_case() {
        let i = DMatrix::<f64>::identity(2, 2);
        let (bound, g) = trace_bound_optimal_gamma(&i, &i, &i).unwrap();
        assert!((bound - 2.0).abs() < 1e-14);
        assert!((g - &i).amax() < 1e-14);
    }

    #[test]
    fn arbitrary_c_gives_polar_factor() {
        let i = DMatrix::<f64>::identity(2, 2);
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -0.5, 0.3]);
        let (bound, g) = trace_bound_optimal_gamma(&i, &i, &c).unwrap();
        assert!((bound - trace_norm(&c).unwrap()).abs() < 1e-13);
        assert!((g.transpose() * &g - &i).amax() < 1e-12);
        assert!(((&c * g.transpose()).trace() - bound).abs() < 1e-12);
    }

    #[test]
    fn rejects_indefinite() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let i = DMatrix::<f64>::identity(2, 2);
        assert!(matches!(trace_bound_optimal_gamma(&a, &i, &i), Err(Error::NotPsd { .. })));
    }
}
