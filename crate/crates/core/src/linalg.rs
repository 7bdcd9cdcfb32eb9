//! Dense factorizations with a reconstruction check.

use nalgebra::{DMatrix, SymmetricEigen, SVD};

use crate::error::{Error, Result};

/// Relative reconstruction tolerance for an accepted SVD.
const SVD_TOL: f64 = 1e-11;

/// Thin SVD whose factors reconstruct `m`.
///
/// nalgebra's bidiagonal iteration can stop early on clusters of equal
/// singular values (for instance the unit cosines of intersecting
/// subspaces) and return factors that do not reproduce the input. Each
/// attempt is checked; on failure the iteration is rerun with other
/// convergence thresholds and on the transpose.
pub(crate) fn checked_svd(m: &DMatrix<f64>) -> Result<SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    let scale = m.norm().max(1.0);
    let accept = |svd: &SVD<f64, nalgebra::Dyn, nalgebra::Dyn>, target: &DMatrix<f64>| {
        svd.singular_values.iter().all(|s| s.is_finite())
            && svd
                .clone()
                .recompose()
                .is_ok_and(|r| (r - target).norm() <= SVD_TOL * scale)
    };
    let first = m.clone().svd(true, true);
    if accept(&first, m) {
        return Ok(first);
    }
    let eps_list = [f64::EPSILON, 1e-14, 1e-12];
    for eps in eps_list {
        if let Some(svd) = m.clone().try_svd(true, true, eps, 0) {
            if accept(&svd, m) {
                return Ok(svd);
            }
        }
    }
    let mt = m.transpose();
    for eps in eps_list {
        if let Some(t) = mt.clone().try_svd(true, true, eps, 0) {
            if accept(&t, &mt) {
                return Ok(SVD {
                    u: t.v_t.map(|v| v.transpose()),
                    v_t: t.u.map(|u| u.transpose()),
                    singular_values: t.singular_values,
                });
            }
        }
    }
    Err(Error::Consistency(format!(
        "no SVD attempt reconstructs the {}x{} input",
        m.nrows(),
        m.ncols()
    )))
}

/// `sum |lambda_i|` of the symmetric part of `m`.
pub(crate) fn symmetric_trace_norm(m: DMatrix<f64>) -> f64 {
    let sym = (&m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .sum()
}
