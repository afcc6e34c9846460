//! Reference linear conjugate gradient for `A x = b`.
//!
//! Kept deliberately close to the textbook recurrences so it can serve as an
//! independent oracle: residuals drive the search, directions are combined
//! with the Fletcher-Reeves ratio of residual norms, and steps come from the
//! exact quadratic minimization.

use nalgebra::{DMatrix, DVector};

use super::QuadraticError;
use crate::transform::norm;

/// One iteration of the reference CG run. Index `k` starts at 1; the fields
/// hold the direction `n_k`, step `alpha_k`, mixing coefficient `beta_k`
/// (zero on the first iteration), and the post-step iterate and residual.
#[derive(Debug, Clone)]
pub struct LinearCgState {
    pub k: usize,
    pub beta: f64,
    pub n_dir: Vec<f64>,
    pub alpha: f64,
    pub x: Vec<f64>,
    pub r: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LinearCgRun {
    pub r0: Vec<f64>,
    pub states: Vec<LinearCgState>,
    pub converged: bool,
}

impl LinearCgRun {
    pub fn iterations(&self) -> usize {
        self.states.len()
    }

    pub fn solution(&self) -> Option<&[f64]> {
        self.states.last().map(|s| s.x.as_slice())
    }
}

/// Runs CG from `x0` until `||r_k|| <= tol * ||r_0||` or `n` iterations.
///
/// Fails with `Breakdown` if a direction has non-positive curvature, which
/// cannot happen for a genuinely SPD matrix.
pub fn linear_cg(
    a: &DMatrix<f64>,
    b: &[f64],
    x0: &[f64],
    tol: f64,
) -> Result<LinearCgRun, QuadraticError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(QuadraticError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    for len in [b.len(), x0.len()] {
        if len != n {
            return Err(QuadraticError::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }

    let bv = DVector::from_column_slice(b);
    let mut x = DVector::from_column_slice(x0);
    let mut r = &bv - a * &x;
    let r0 = r.as_slice().to_vec();
    let threshold = tol * norm(&r0);

    let mut states = Vec::new();
    let mut converged = norm(r.as_slice()) <= threshold;
    let mut n_dir = DVector::zeros(n);
    let mut rr_prev = 0.0;

    for k in 1..=n {
        if converged {
            break;
        }
        let rr = r.dot(&r);
        let beta = if k == 1 { 0.0 } else { rr / rr_prev };
        n_dir = &n_dir * beta + &r;
        let an = a * &n_dir;
        let curvature = n_dir.dot(&an);
        if !(curvature > 0.0) {
            return Err(QuadraticError::Breakdown { curvature });
        }
        let alpha = rr / curvature;
        x += &n_dir * alpha;
        r -= an * alpha;
        rr_prev = rr;
        converged = norm(r.as_slice()) <= threshold;
        states.push(LinearCgState {
            k,
            beta,
            n_dir: n_dir.as_slice().to_vec(),
            alpha,
            x: x.as_slice().to_vec(),
            r: r.as_slice().to_vec(),
        });
    }

    Ok(LinearCgRun {
        r0,
        states,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadratic::QuadraticObjective;
    use crate::transform::dot;

    #[test]
    fn identity_converges_in_one_iteration() {
        let a = DMatrix::<f64>::identity(3, 3);
        let run = linear_cg(&a, &[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0], 1e-12).unwrap();
        assert!(run.converged);
        assert_eq!(run.iterations(), 1);
        assert_eq!(run.solution().unwrap(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn first_step_on_diagonal_system_matches_hand_values() {
        // A = diag(1,2), b = 0, x0 = (1,1):
        //   r0 = (-1,-2), alpha_1 = 5/9, x1 = (4/9, -1/9), r1 = (-4/9, 2/9)
        let a = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 2.0]));
        let run = linear_cg(&a, &[0.0, 0.0], &[1.0, 1.0], 1e-14).unwrap();
        assert_eq!(run.r0, vec![-1.0, -2.0]);
        let s1 = &run.states[0];
        assert!((s1.alpha - 5.0 / 9.0).abs() < 1e-15);
        assert!((s1.x[0] - 4.0 / 9.0).abs() < 1e-15);
        assert!((s1.x[1] + 1.0 / 9.0).abs() < 1e-15);
        assert!((s1.r[0] + 4.0 / 9.0).abs() < 1e-15);
        assert!((s1.r[1] - 2.0 / 9.0).abs() < 1e-15);
        assert!(run.converged);
        assert_eq!(run.iterations(), 2);
    }

    #[test]
    fn residuals_are_mutually_orthogonal() {
        let q = QuadraticObjective::random_spd(10, 1e2, 7).unwrap();
        let x0 = vec![1.0; 10];
        let run = linear_cg(q.a(), q.b().as_slice(), &x0, 1e-8).unwrap();
        assert!(run.converged);
        let mut residuals: Vec<&[f64]> = vec![&run.r0];
        residuals.extend(run.states.iter().map(|s| s.r.as_slice()));
        let scale: f64 = residuals
            .iter()
            .map(|r| dot(r, r))
            .fold(0.0, f64::max);
        for i in 0..residuals.len() {
            for j in 0..i {
                let ortho = dot(residuals[i], residuals[j]).abs() / scale;
                assert!(ortho < 1e-8, "r_{i} . r_{j} = {ortho:e}");
            }
        }
    }

    #[test]
    fn tracked_residual_matches_true_residual() {
        let q = QuadraticObjective::random_spd(9, 100.0, 21).unwrap();
        let x0 = vec![0.5; 9];
        let run = linear_cg(q.a(), q.b().as_slice(), &x0, 1e-10).unwrap();
        for s in &run.states {
            let true_r = q.residual(&s.x);
            let dev: f64 = s
                .r
                .iter()
                .zip(&true_r)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(dev < 1e-10 * norm(&run.r0), "iteration {}: {dev:e}", s.k);
        }
    }

    #[test]
    fn breakdown_reported_for_indefinite_matrix() {
        let a = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, -1.0]));
        let err = linear_cg(&a, &[0.0, 1.0], &[0.0, 0.0], 1e-10).unwrap_err();
        assert!(matches!(err, QuadraticError::Breakdown { .. }));
    }

    #[test]
    fn starting_at_solution_does_zero_iterations() {
        let a = DMatrix::<f64>::identity(2, 2);
        let run = linear_cg(&a, &[1.0, 1.0], &[1.0, 1.0], 1e-10).unwrap();
        assert!(run.converged);
        assert_eq!(run.iterations(), 0);
        assert!(run.solution().is_none());
    }
}
