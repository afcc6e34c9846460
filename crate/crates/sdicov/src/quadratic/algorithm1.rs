//! Explicit change-of-variables steepest descent on a quadratic.
//!
//! Rewrites the objective after every step: the rank-one basis change l_k is
//! composed into the quadratic data as `A_k = l_k^T A_{k-1} l_k` and
//! `b_k = l_k^T b_{k-1}`, and the iterate is pulled back through `l_k^{-1}`.
//! This is the conceptual form of the method; the production optimizer keeps
//! the chain implicit instead. Dense and O(n^3) per step, for checking only.

use nalgebra::{DMatrix, DVector};

use super::{QuadraticError, QuadraticObjective};
use crate::transform::{norm, RankOneTransform, TransformChain, EPS_INV};

/// One completed step. `a` and `b` are the composed quadratic data in force
/// after the step (unchanged from the previous state on the terminal step,
/// where no basis change is made). `p`, `alpha`, `w_tilde`, `g`, `w` are the
/// step direction, exact step length, post-step point, negative post-step
/// gradient, and pulled-back iterate, all in the coordinates the step ran in.
#[derive(Debug, Clone)]
pub struct Algorithm1State {
    pub k: usize,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub p: Vec<f64>,
    pub alpha: f64,
    pub w_tilde: Vec<f64>,
    pub g: Vec<f64>,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Algorithm1Run {
    pub states: Vec<Algorithm1State>,
    /// Basis changes composed so far; one per non-terminal step.
    pub chain: TransformChain,
    /// Final iterate mapped back to the original coordinates.
    pub solution: Vec<f64>,
    pub converged: bool,
    pub initial_residual_norm: f64,
}

impl Algorithm1Run {
    pub fn iterations(&self) -> usize {
        self.states.len()
    }
}

fn dense_transform(t: &RankOneTransform) -> DMatrix<f64> {
    let n = t.dimension();
    let p = t.p();
    let g = t.g();
    let scale = 1.0 / t.p_norm_sq();
    DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta + p[i] * g[j] * scale
    })
}

/// Runs the explicit algorithm from `w0` until the current-coordinates
/// gradient norm falls to `tol` times its initial value, or `n` steps.
///
/// The step length is the closed-form quadratic minimizer `p.p / p.Ap`. On
/// the terminal step the basis change is skipped; the gradient is already
/// (numerically) zero and there is nothing left to precondition.
pub fn algorithm1_quadratic(
    q: &QuadraticObjective,
    w0: &[f64],
    tol: f64,
) -> Result<Algorithm1Run, QuadraticError> {
    let n = q.dimension();
    if w0.len() != n {
        return Err(QuadraticError::DimensionMismatch {
            expected: n,
            got: w0.len(),
        });
    }

    let mut a = q.a().clone();
    let mut b = q.b().clone();
    let mut w = DVector::from_column_slice(w0);
    let mut chain = TransformChain::new(n);
    let mut states = Vec::new();

    let initial_residual_norm = norm((&b - &a * &w).as_slice());
    let threshold = tol * initial_residual_norm;
    let mut converged = initial_residual_norm <= threshold;

    for k in 1..=n {
        if converged {
            break;
        }
        let p = &b - &a * &w;
        let ap = &a * &p;
        let curvature = p.dot(&ap);
        if !(curvature > 0.0) {
            return Err(QuadraticError::Breakdown { curvature });
        }
        let alpha = p.dot(&p) / curvature;
        let w_tilde = &w + &p * alpha;
        let g = &b - &a * &w_tilde;

        converged = norm(g.as_slice()) <= threshold;
        let w_next = if converged {
            w_tilde.clone()
        } else {
            let t = chain.try_append(p.as_slice().to_vec(), g.as_slice().to_vec(), EPS_INV)?;
            let l = dense_transform(t);
            let composed = l.transpose() * &a * &l;
            a = (&composed + composed.transpose()) * 0.5;
            b = l.transpose() * &b;
            let pulled = t.apply_inverse(w_tilde.as_slice())?;
            DVector::from_column_slice(&pulled)
        };

        states.push(Algorithm1State {
            k,
            a: a.clone(),
            b: b.clone(),
            p: p.as_slice().to_vec(),
            alpha,
            w_tilde: w_tilde.as_slice().to_vec(),
            g: g.as_slice().to_vec(),
            w: w_next.as_slice().to_vec(),
        });
        w = w_next;
    }

    let solution = chain.forward(w.as_slice())?;
    Ok(Algorithm1Run {
        states,
        chain,
        solution,
        converged,
        initial_residual_norm,
    })
}

/// Value of `w^T A w / 2 - b^T w` for composed data, used by the
/// consistency checks below.
#[cfg(test)]
pub(crate) fn composed_value(a: &DMatrix<f64>, b: &DVector<f64>, w: &[f64]) -> f64 {
    let wv = DVector::from_column_slice(w);
    0.5 * wv.dot(&(a * &wv)) - b.dot(&wv)
}
