//! Convex-quadratic laboratory.
//!
//! Dense `f(w) = w^T A w / 2 - b^T w` objectives plus the machinery used to
//! check the method's quadratic-case theory: the explicit change-of-variables
//! algorithm, a reference linear conjugate gradient, Krylov subspace
//! dimensions, and verifiers for the CG-equivalence and secant results.
//! Everything here forms matrices explicitly and is meant for n up to a few
//! hundred; the production optimizers stay matrix-free.

mod algorithm1;
mod krylov;
mod linear_cg;
mod verify;

pub use algorithm1::{algorithm1_quadratic, Algorithm1Run, Algorithm1State};
pub use krylov::{krylov_dim, KrylovBasis};
pub use linear_cg::{linear_cg, LinearCgRun, LinearCgState};
pub use verify::{
    verify_algorithm_equivalence, verify_cg_equivalence, verify_secant,
    verify_subspace_shrinkage, AlgorithmEquivalenceReport, CgEquivalenceReport,
    IterationDeviation, SecantReport, ShrinkageReport, StateDeviation, VerifyError,
};

use nalgebra::{Cholesky, DMatrix, DVector};
use thiserror::Error;

use crate::objective::ObjectiveOracle;
use crate::rng::SeededRng;
use crate::transform::dot;

#[derive(Debug, Error)]
pub enum QuadraticError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is {n}x{n} but b has length {b_len}")]
    ShapeMismatch { n: usize, b_len: usize },
    #[error("matrix is not symmetric: max |A - A^T| = {deviation:e} exceeds {tol:e}")]
    NotSymmetric { deviation: f64, tol: f64 },
    #[error("matrix is not positive definite (dense factorization failed)")]
    NotPositiveDefinite,
    #[error("conjugate direction has non-positive curvature {curvature:e}; input is not SPD")]
    Breakdown { curvature: f64 },
    #[error("direction vector is zero")]
    ZeroDirection,
    #[error("argument has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Transform(#[from] crate::transform::TransformError),
}

/// `f(w) = w^T A w / 2 - b^T w` with A symmetric positive definite,
/// verified at construction.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl QuadraticObjective {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self, QuadraticError> {
        if a.nrows() != a.ncols() {
            return Err(QuadraticError::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        if b.len() != a.nrows() {
            return Err(QuadraticError::ShapeMismatch {
                n: a.nrows(),
                b_len: b.len(),
            });
        }
        let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let deviation = (0..a.nrows())
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| (a[(i, j)] - a[(j, i)]).abs())
            .fold(0.0f64, f64::max);
        let tol = 1e-12 * scale;
        if deviation > tol {
            return Err(QuadraticError::NotSymmetric { deviation, tol });
        }
        if Cholesky::new(a.clone()).is_none() {
            return Err(QuadraticError::NotPositiveDefinite);
        }
        Ok(Self { a, b })
    }

    /// `A = Q diag(eigenvalues) Q^T` with Q drawn from the QR factorization
    /// of a seeded Gaussian matrix, and Gaussian b from the same stream.
    pub fn with_eigenvalues(eigenvalues: &[f64], seed: u64) -> Result<Self, QuadraticError> {
        let n = eigenvalues.len();
        let mut rng = SeededRng::new(seed);
        let gauss = DMatrix::from_fn(n, n, |_, _| rng.standard_normal());
        let q = gauss.qr().q();
        let lambda = DMatrix::from_diagonal(&DVector::from_column_slice(eigenvalues));
        let mut a = &q * lambda * q.transpose();
        // rounding breaks exact symmetry of Q L Q^T; restore it
        a = (&a + a.transpose()) * 0.5;
        let b = DVector::from_fn(n, |_, _| rng.standard_normal());
        Self::new(a, b)
    }

    /// Random SPD objective with eigenvalues log-uniform in [1, kappa].
    pub fn random_spd(n: usize, kappa: f64, seed: u64) -> Result<Self, QuadraticError> {
        assert!(n > 0 && kappa >= 1.0);
        let mut rng = SeededRng::new(seed.wrapping_add(0x9e3779b97f4a7c15));
        let eigenvalues: Vec<f64> = (0..n)
            .map(|_| 10f64.powf(rng.uniform_in(0.0, kappa.log10())))
            .collect();
        Self::with_eigenvalues(&eigenvalues, seed)
    }

    pub fn dimension(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn a_apply(&self, v: &[f64]) -> Vec<f64> {
        let av = &self.a * DVector::from_column_slice(v);
        av.as_slice().to_vec()
    }

    /// Unique minimizer, `A x = b` by dense factorization.
    pub fn minimizer(&self) -> Vec<f64> {
        Cholesky::new(self.a.clone())
            .expect("verified SPD at construction")
            .solve(&self.b)
            .as_slice()
            .to_vec()
    }

    /// Residual `b - A x`, the negative gradient.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let r = &self.b - &self.a * DVector::from_column_slice(x);
        r.as_slice().to_vec()
    }
}

impl ObjectiveOracle for QuadraticObjective {
    fn dimension(&self) -> usize {
        self.a.nrows()
    }

    fn value_at(&self, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        0.5 * xv.dot(&(&self.a * &xv)) - self.b.dot(&xv)
    }

    fn gradient_at(&self, x: &[f64]) -> Vec<f64> {
        let g = &self.a * DVector::from_column_slice(x) - &self.b;
        g.as_slice().to_vec()
    }

    fn exact_step(&self, x: &[f64], d: &[f64]) -> Option<f64> {
        let ad = self.a_apply(d);
        let curvature = dot(d, &ad);
        if !(curvature > 0.0) {
            return None;
        }
        let slope = dot(&self.gradient_at(x), d);
        Some(-slope / curvature)
    }
}
