//! Krylov subspace dimension, `K(A, p) = span(p, Ap, A^2 p, ...)`.

use nalgebra::{DMatrix, DVector};

use super::QuadraticError;

/// Relative residual below which a candidate basis vector counts as already
/// spanned. The subspace dimension is exact in exact arithmetic; a drop
/// tolerance stands in for that in floating point.
const DROP_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct KrylovBasis {
    /// Orthonormal basis of K(A, p), in generation order (first is p/|p|).
    pub basis: Vec<Vec<f64>>,
    pub dim: usize,
}

impl KrylovBasis {
    /// Norm of the component of `v` outside the spanned subspace, relative
    /// to `|v|`. Zero means contained.
    pub fn containment_residual(&self, v: &[f64]) -> f64 {
        let scale = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if scale == 0.0 {
            return 0.0;
        }
        let mut rest = DVector::from_column_slice(v);
        for q in &self.basis {
            let qv = DVector::from_column_slice(q);
            let coeff = qv.dot(&rest);
            rest -= qv * coeff;
        }
        rest.norm() / scale
    }
}

/// Builds an orthonormal basis by repeated multiplication with full
/// re-orthogonalization, stopping when the next candidate's residual falls
/// below `DROP_TOL` relative to the largest `|A q|` seen.
pub fn krylov_dim(a: &DMatrix<f64>, p: &[f64]) -> Result<KrylovBasis, QuadraticError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(QuadraticError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if p.len() != n {
        return Err(QuadraticError::DimensionMismatch {
            expected: n,
            got: p.len(),
        });
    }
    let p0 = DVector::from_column_slice(p);
    let p_norm = p0.norm();
    if !(p_norm > 0.0) {
        return Err(QuadraticError::ZeroDirection);
    }

    let mut basis: Vec<DVector<f64>> = vec![p0 / p_norm];
    let mut largest_product = 0.0f64;
    while basis.len() < n {
        let mut next = a * basis.last().expect("basis never empty");
        largest_product = largest_product.max(next.norm());
        for _ in 0..2 {
            for q in &basis {
                let coeff = q.dot(&next);
                next -= q * coeff;
            }
        }
        let residual = next.norm();
        if residual <= DROP_TOL * largest_product {
            break;
        }
        basis.push(next / residual);
    }

    let dim = basis.len();
    Ok(KrylovBasis {
        basis: basis.into_iter().map(|q| q.as_slice().to_vec()).collect(),
        dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(values))
    }

    #[test]
    fn any_vector_spans_one_dimension_under_identity() {
        let a = DMatrix::<f64>::identity(4, 4);
        let k = krylov_dim(&a, &[0.3, -1.0, 2.0, 0.0]).unwrap();
        assert_eq!(k.dim, 1);
    }

    #[test]
    fn distinct_eigenvalues_touched_determine_the_dimension() {
        // three distinct eigenvalues, all touched
        let k = krylov_dim(&diag(&[1.0, 2.0, 3.0]), &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(k.dim, 3);
        // repeated eigenvalue collapses two components into one
        let k = krylov_dim(&diag(&[1.0, 1.0, 3.0]), &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(k.dim, 2);
        // zero component: eigenvalue 2 never enters the subspace
        let k = krylov_dim(&diag(&[1.0, 2.0, 3.0]), &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(k.dim, 2);
    }

    #[test]
    fn basis_is_orthonormal() {
        let k = krylov_dim(&diag(&[1.0, 2.0, 3.0, 4.0]), &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(k.dim, 4);
        for i in 0..k.dim {
            for j in 0..=i {
                let d: f64 = k.basis[i]
                    .iter()
                    .zip(&k.basis[j])
                    .map(|(a, b)| a * b)
                    .sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((d - expected).abs() < 1e-12, "q_{i}.q_{j} = {d}");
            }
        }
    }

    #[test]
    fn containment_residual_detects_membership() {
        let k = krylov_dim(&diag(&[1.0, 1.0, 3.0]), &[1.0, 1.0, 1.0]).unwrap();
        // (1,1,3) = A p lies inside; e_1 - e_2 is orthogonal to the subspace
        assert!(k.containment_residual(&[1.0, 1.0, 3.0]) < 1e-12);
        assert!(k.containment_residual(&[1.0, -1.0, 0.0]) > 0.99);
    }

    #[test]
    fn zero_direction_is_rejected() {
        let a = DMatrix::<f64>::identity(3, 3);
        assert!(matches!(
            krylov_dim(&a, &[0.0, 0.0, 0.0]),
            Err(QuadraticError::ZeroDirection)
        ));
    }
}
