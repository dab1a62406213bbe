//! Small dense linear-algebra helpers shared by the geometry and quadrature code.
//!
//! Everything here works on `nalgebra` dynamic matrices. Dimensions in this
//! crate are tiny (ambient dimension at most four plus one time slot), so the
//! helpers favour clarity over allocation-free tricks.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TransportError};

/// Gram matrix `AᵀA` of the columns of `a`.
pub fn gram(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.transpose() * a
}

/// Determinant of the Gram matrix. A matrix with zero columns has determinant one.
pub fn gram_determinant(a: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 {
        return 1.0;
    }
    gram(a).determinant()
}

/// `√det(AᵀA)`, the k-dimensional volume stretch of the columns of `a`.
///
/// Fails with `RankDeficient` when the Gram determinant does not exceed `rank_tol`.
pub fn jacobian_of(a: &DMatrix<f64>, rank_tol: f64) -> Result<f64> {
    let det = gram_determinant(a);
    if !det.is_finite() {
        return Err(TransportError::non_finite("gram determinant", &[det]));
    }
    if det <= rank_tol {
        return Err(TransportError::RankDeficient {
            gram_det: det,
            tol: rank_tol,
        });
    }
    Ok(det.sqrt())
}

/// Orthonormal basis of the column span of `a` by modified Gram-Schmidt.
///
/// Columns whose residual norm drops below `rank_tol` (relative to the largest
/// column) make the basis rank deficient and trigger an error.
pub fn orthonormal_columns(a: &DMatrix<f64>, rank_tol: f64) -> Result<DMatrix<f64>> {
    let scale = a
        .column_iter()
        .map(|c| c.norm())
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut q = DMatrix::zeros(a.nrows(), a.ncols());
    for j in 0..a.ncols() {
        let mut v: DVector<f64> = a.column(j).into_owned();
        // two passes keep the basis orthogonal to machine precision
        for _ in 0..2 {
            for i in 0..j {
                let qi = q.column(i);
                let c = qi.dot(&v);
                v -= qi * c;
            }
        }
        let norm = v.norm();
        if !(norm > rank_tol.sqrt() * scale) {
            return Err(TransportError::RankDeficient {
                gram_det: norm * norm,
                tol: rank_tol,
            });
        }
        q.set_column(j, &(v / norm));
    }
    Ok(q)
}

/// Unit vector orthogonal to every column of `a` (an `m × (m-1)` matrix), i.e.
/// the orthogonal complement of a hyperplane in `R^m`. Sign is arbitrary.
pub fn hyperplane_normal(a: &DMatrix<f64>, rank_tol: f64) -> Result<DVector<f64>> {
    let m = a.nrows();
    debug_assert_eq!(a.ncols() + 1, m);
    let q = orthonormal_columns(a, rank_tol)?;
    let mut best: Option<DVector<f64>> = None;
    let mut best_norm = -1.0;
    for k in 0..m {
        let mut v = DVector::zeros(m);
        v[k] = 1.0;
        for _ in 0..2 {
            for i in 0..q.ncols() {
                let qi = q.column(i);
                let c = qi.dot(&v);
                v -= qi * c;
            }
        }
        let norm = v.norm();
        if norm > best_norm {
            best_norm = norm;
            best = Some(v);
        }
    }
    let v = best.expect("m >= 1");
    Ok(v / best_norm)
}

/// Central finite difference of a vector-valued map of one real variable.
pub fn central_difference<F>(f: F, x: f64, step: f64) -> DVector<f64>
where
    F: Fn(f64) -> DVector<f64>,
{
    (f(x + step) - f(x - step)) / (2.0 * step)
}

/// Central finite-difference Jacobian of `f: R^k → R^d` at `u`.
pub fn central_jacobian<F>(f: F, u: &[f64], step: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> DVector<f64>,
{
    let k = u.len();
    let mut cols = Vec::with_capacity(k);
    let mut shifted = u.to_vec();
    for i in 0..k {
        shifted[i] = u[i] + step;
        let plus = f(&shifted);
        shifted[i] = u[i] - step;
        let minus = f(&shifted);
        shifted[i] = u[i];
        cols.push((plus - minus) / (2.0 * step));
    }
    if cols.is_empty() {
        let d = f(u).len();
        return DMatrix::zeros(d, 0);
    }
    DMatrix::from_columns(&cols)
}

pub(crate) fn ensure_finite_vec(what: &str, v: &DVector<f64>) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(TransportError::non_finite(what, v.as_slice()))
    }
}

pub(crate) fn ensure_finite_mat(what: &str, m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(TransportError::non_finite(what, m.as_slice()))
    }
}

pub(crate) fn ensure_finite(what: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(TransportError::non_finite(what, &[x]))
    }
}

/// `√det(AᵀA)` without a rank threshold, for bulk parametrizations whose
/// Jacobian vanishes on a null set (polar axes, sphere poles).
pub fn volume_factor(a: &DMatrix<f64>) -> Result<f64> {
    let det = gram_determinant(a);
    if !det.is_finite() {
        return Err(TransportError::non_finite("gram determinant", &[det]));
    }
    Ok(det.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn jacobian_of_empty_matrix_is_one() {
        let a = DMatrix::<f64>::zeros(3, 0);
        assert_eq!(jacobian_of(&a, 1e-10).unwrap(), 1.0);
    }

    #[test]
    fn hyperplane_normal_in_plane() {
        let a = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        let n = hyperplane_normal(&a, 1e-10).unwrap();
        assert_relative_eq!(n.norm(), 1.0, epsilon = 1e-15);
        assert!(n.dot(&a.column(0)).abs() < 1e-15);
    }

    #[test]
    fn dependent_columns_are_rejected() {
        let a = DMatrix::from_column_slice(3, 2, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert!(matches!(
            orthonormal_columns(&a, 1e-10),
            Err(TransportError::RankDeficient { .. })
        ));
    }

    #[test]
    fn central_jacobian_of_linear_map_is_exact() {
        let f = |u: &[f64]| DVector::from_vec(vec![2.0 * u[0] - u[1], 3.0 * u[1]]);
        let j = central_jacobian(f, &[0.3, -0.7], 1e-3);
        assert_relative_eq!(j[(0, 0)], 2.0, epsilon = 1e-12);
        assert_relative_eq!(j[(0, 1)], -1.0, epsilon = 1e-12);
        assert_relative_eq!(j[(1, 1)], 3.0, epsilon = 1e-12);
    }
}
