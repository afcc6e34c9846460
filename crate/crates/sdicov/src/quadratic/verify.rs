//! Cross-checks between independent implementations of the same runs.
//!
//! The deviations reported here are normalized by the largest magnitude the
//! quantity reaches over the whole run, not per iteration: the compared
//! sequences all decay toward zero, and a pointwise relative error at the
//! converged tail would compare rounding noise against rounding noise.

use nalgebra::DVector;
use thiserror::Error;

use super::{algorithm1_quadratic, krylov_dim, linear_cg, QuadraticError, QuadraticObjective};
use crate::objective::ObjectiveOracle;
use crate::optimizers::{minimize, OptimizerKind, RunOptions, RunReport, StepEvent, TerminationPolicy};
use crate::transform::{norm, TransformChain, TransformError, EPS_INV};

/// Relative tolerance the internal comparison runs are driven to.
const RUN_TOL: f64 = 1e-8;

/// Looser tolerance for the subspace-shrinkage run. The direction vectors
/// come out of a cancellation of order-one quantities, so they carry an
/// absolute rounding floor near machine epsilon times the problem scale.
const SHRINKAGE_RUN_TOL: f64 = 1e-4;

/// Directions below this fraction of the initial residual are excluded from
/// the subspace checks. Their spurious off-subspace content, machine epsilon
/// amplified by the accumulated rewrites and divided by the direction's own
/// shrinking norm, approaches the Krylov rank-drop tolerance, so the
/// measured dimension would report noise rather than the subspace.
const SHRINKAGE_INSPECT_FLOOR: f64 = 1e-2;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("step index {k} out of range for a run of {iterations} iterations")]
    IndexOutOfRange { k: usize, iterations: usize },
    #[error("record {k} carries no transformed direction pair; run was not produced by the transform-chain method")]
    MissingTrace { k: usize },
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Quadratic(#[from] QuadraticError),
}

/// Per-iteration deviations between the transform-chain run and the
/// reference CG run, each scaled by the run-level magnitude of the quantity.
#[derive(Debug, Clone, Copy)]
pub struct IterationDeviation {
    pub k: usize,
    pub p_dev: f64,
    pub m_dev: f64,
    pub g_dev: f64,
    pub alpha_dev: f64,
}

impl IterationDeviation {
    pub fn max(&self) -> f64 {
        self.p_dev.max(self.m_dev).max(self.g_dev).max(self.alpha_dev)
    }
}

#[derive(Debug, Clone)]
pub struct CgEquivalenceReport {
    pub deviations: Vec<IterationDeviation>,
    pub max_deviation: f64,
    pub sdicov_iterations: usize,
    pub cg_iterations: usize,
}

impl CgEquivalenceReport {
    pub fn lengths_match(&self) -> bool {
        self.sdicov_iterations == self.cg_iterations
    }
}

fn run_scale<'a, I>(pairs: I) -> f64
where
    I: Iterator<Item = (&'a [f64], &'a [f64])>,
{
    pairs
        .map(|(a, b)| norm(a).max(norm(b)))
        .fold(0.0, f64::max)
}

fn scaled_dev(a: &[f64], b: &[f64], scale: f64) -> f64 {
    if scale == 0.0 {
        return 0.0;
    }
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    diff / scale
}

/// Runs the transform-chain method with exact steps and the reference CG
/// from the same start, then lines up `p_k` with `r_{k-1}`, `m_k` with
/// `n_k`, `g_k` with `r_k`, and the step lengths.
pub fn verify_cg_equivalence(
    q: &QuadraticObjective,
    x0: &[f64],
) -> Result<CgEquivalenceReport, VerifyError> {
    let n = q.dimension();
    let term = TerminationPolicy {
        grad_rel_tol: RUN_TOL,
        max_iterations: n.max(1),
        ..TerminationPolicy::default()
    };
    let run = minimize(OptimizerKind::Sdicov, q, x0, &RunOptions::exact(term));
    let cg = linear_cg(q.a(), q.b().as_slice(), x0, RUN_TOL)?;

    let common = run.records.len().min(cg.states.len());
    let mut p_pairs = Vec::with_capacity(common);
    let mut m_pairs = Vec::with_capacity(common);
    let mut g_pairs = Vec::with_capacity(common);
    let mut alphas = Vec::with_capacity(common);
    for i in 0..common {
        let rec = &run.records[i];
        let state = &cg.states[i];
        let p = rec.p.as_deref().ok_or(VerifyError::MissingTrace { k: i })?;
        let g = rec.g.as_deref().ok_or(VerifyError::MissingTrace { k: i })?;
        let r_prev: &[f64] = if i == 0 { &cg.r0 } else { &cg.states[i - 1].r };
        p_pairs.push((p, r_prev));
        m_pairs.push((rec.m.as_slice(), state.n_dir.as_slice()));
        g_pairs.push((g, state.r.as_slice()));
        alphas.push((rec.alpha, state.alpha));
    }

    let p_scale = run_scale(p_pairs.iter().copied());
    let m_scale = run_scale(m_pairs.iter().copied());
    let g_scale = run_scale(g_pairs.iter().copied());
    let alpha_scale = alphas
        .iter()
        .map(|(a, b)| a.abs().max(b.abs()))
        .fold(0.0, f64::max);

    let mut deviations = Vec::with_capacity(common);
    let mut max_deviation = 0.0f64;
    for i in 0..common {
        let dev = IterationDeviation {
            k: i + 1,
            p_dev: scaled_dev(p_pairs[i].0, p_pairs[i].1, p_scale),
            m_dev: scaled_dev(m_pairs[i].0, m_pairs[i].1, m_scale),
            g_dev: scaled_dev(g_pairs[i].0, g_pairs[i].1, g_scale),
            alpha_dev: if alpha_scale == 0.0 {
                0.0
            } else {
                (alphas[i].0 - alphas[i].1).abs() / alpha_scale
            },
        };
        max_deviation = max_deviation.max(dev.max());
        deviations.push(dev);
    }

    Ok(CgEquivalenceReport {
        deviations,
        max_deviation,
        sdicov_iterations: run.records.len(),
        cg_iterations: cg.states.len(),
    })
}

/// Per-iteration deviations between the explicit rewrite run and the
/// transform-chain driver, scaled by run-level magnitudes. `x_dev` compares
/// the driver iterate against the pulled-back iterate mapped through the
/// basis changes made so far.
#[derive(Debug, Clone, Copy)]
pub struct StateDeviation {
    pub k: usize,
    pub p_dev: f64,
    pub g_dev: f64,
    pub alpha_dev: f64,
    pub x_dev: f64,
}

impl StateDeviation {
    pub fn max(&self) -> f64 {
        self.p_dev.max(self.g_dev).max(self.alpha_dev).max(self.x_dev)
    }
}

#[derive(Debug, Clone)]
pub struct AlgorithmEquivalenceReport {
    pub deviations: Vec<StateDeviation>,
    pub max_deviation: f64,
    pub explicit_iterations: usize,
    pub chain_iterations: usize,
}

impl AlgorithmEquivalenceReport {
    pub fn lengths_match(&self) -> bool {
        self.explicit_iterations == self.chain_iterations
    }
}

/// Applies the first `count` basis changes to `w`, mapping a pulled-back
/// iterate to original coordinates.
fn forward_prefix(chain: &TransformChain, count: usize, w: &[f64]) -> Result<Vec<f64>, VerifyError> {
    let mut x = w.to_vec();
    for t in chain.members()[..count].iter().rev() {
        x = t.apply(&x)?;
    }
    Ok(x)
}

/// Runs the explicit objective-rewrite form and the transform-chain driver
/// from the same start and lines up their `p_k`, `g_k`, `alpha_k` traces,
/// plus the coordinate identity mapping each rewritten-space iterate back to
/// the driver's.
pub fn verify_algorithm_equivalence(
    q: &QuadraticObjective,
    x0: &[f64],
) -> Result<AlgorithmEquivalenceReport, VerifyError> {
    let n = q.dimension();
    let term = TerminationPolicy {
        grad_rel_tol: RUN_TOL,
        max_iterations: n.max(1),
        ..TerminationPolicy::default()
    };
    let run = minimize(OptimizerKind::Sdicov, q, x0, &RunOptions::exact(term));
    let explicit = algorithm1_quadratic(q, x0, RUN_TOL)?;

    let common = run.records.len().min(explicit.states.len());
    let mut p_pairs = Vec::with_capacity(common);
    let mut g_pairs = Vec::with_capacity(common);
    let mut alphas = Vec::with_capacity(common);
    let mut x_pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(common);
    for i in 0..common {
        let rec = &run.records[i];
        let state = &explicit.states[i];
        let p = rec.p.as_deref().ok_or(VerifyError::MissingTrace { k: i })?;
        let g = rec.g.as_deref().ok_or(VerifyError::MissingTrace { k: i })?;
        p_pairs.push((p, state.p.as_slice()));
        g_pairs.push((g, state.g.as_slice()));
        alphas.push((rec.alpha, state.alpha));
        let applied = (i + 1).min(explicit.chain.len());
        let mapped = forward_prefix(&explicit.chain, applied, &state.w)?;
        x_pairs.push((rec.x.clone(), mapped));
    }

    let p_scale = run_scale(p_pairs.iter().copied());
    let g_scale = run_scale(g_pairs.iter().copied());
    let alpha_scale = alphas
        .iter()
        .map(|(a, b)| a.abs().max(b.abs()))
        .fold(0.0, f64::max);
    let x_scale = run_scale(x_pairs.iter().map(|(a, b)| (a.as_slice(), b.as_slice())));

    let mut deviations = Vec::with_capacity(common);
    let mut max_deviation = 0.0f64;
    for i in 0..common {
        let dev = StateDeviation {
            k: i + 1,
            p_dev: scaled_dev(p_pairs[i].0, p_pairs[i].1, p_scale),
            g_dev: scaled_dev(g_pairs[i].0, g_pairs[i].1, g_scale),
            alpha_dev: if alpha_scale == 0.0 {
                0.0
            } else {
                (alphas[i].0 - alphas[i].1).abs() / alpha_scale
            },
            x_dev: scaled_dev(&x_pairs[i].0, &x_pairs[i].1, x_scale),
        };
        max_deviation = max_deviation.max(dev.max());
        deviations.push(dev);
    }

    Ok(AlgorithmEquivalenceReport {
        deviations,
        max_deviation,
        explicit_iterations: explicit.states.len(),
        chain_iterations: run.records.len(),
    })
}

#[derive(Debug, Clone)]
pub struct ShrinkageReport {
    /// dim K(A_{k-1}, p_k) for each inspected step: those whose direction
    /// norm still sits above the signal floor.
    pub dims: Vec<usize>,
    /// Every consecutive pair drops by at least one.
    pub strictly_decreasing: bool,
    /// Largest component of any next-step basis vector outside the previous
    /// Krylov subspace, relative.
    pub max_containment_residual: f64,
    /// Largest |cos| between a next-step basis vector and the previous step
    /// direction; the theorem puts the next subspace inside p_k-perp.
    pub max_direction_overlap: f64,
    pub converged: bool,
}

/// Tracks the invariant subspace K(A_{k-1}, p_k) along an explicit
/// change-of-variables run: its dimension must fall every step, and the next
/// subspace must sit inside the previous one, orthogonal to the direction
/// just searched.
pub fn verify_subspace_shrinkage(
    q: &QuadraticObjective,
    w0: &[f64],
) -> Result<ShrinkageReport, VerifyError> {
    let run = algorithm1_quadratic(q, w0, SHRINKAGE_RUN_TOL)?;

    // The first direction equals the initial residual, so at least one step
    // is always inspected.
    let floor = SHRINKAGE_INSPECT_FLOOR * run.initial_residual_norm;
    let inspected: Vec<_> = run
        .states
        .iter()
        .take_while(|state| norm(&state.p) >= floor)
        .collect();

    let mut bases = Vec::with_capacity(inspected.len());
    for (i, state) in inspected.iter().enumerate() {
        let a_prev = if i == 0 { q.a() } else { &inspected[i - 1].a };
        bases.push(krylov_dim(a_prev, &state.p)?);
    }
    let dims: Vec<usize> = bases.iter().map(|b| b.dim).collect();
    let strictly_decreasing = dims.windows(2).all(|w| w[1] < w[0]);

    let mut max_containment_residual = 0.0f64;
    let mut max_direction_overlap = 0.0f64;
    for i in 0..bases.len().saturating_sub(1) {
        let p = &inspected[i].p;
        let p_norm = norm(p);
        for v in &bases[i + 1].basis {
            max_containment_residual =
                max_containment_residual.max(bases[i].containment_residual(v));
            let overlap = v.iter().zip(p).map(|(a, b)| a * b).sum::<f64>().abs() / p_norm;
            max_direction_overlap = max_direction_overlap.max(overlap);
        }
    }

    Ok(ShrinkageReport {
        dims,
        strictly_decreasing,
        max_containment_residual,
        max_direction_overlap,
        converged: run.converged,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SecantReport {
    pub k: usize,
    /// `|H_{k+1} y_k - m_k| / |m_k|`.
    pub residual: f64,
    pub m_norm: f64,
}

/// Checks the quasi-Newton secant condition on a transform-chain run.
///
/// For `k >= 1` the operator is built from the first k recorded (p, g)
/// pairs, so it includes the basis change made at step k, and the condition
/// relates it to step k's own direction and gradient change. `k = 0` checks
/// the initial (identity) operator against the first step; that residual is
/// only small when one step already solves the problem. Records whose
/// transform the run skipped as near-singular are skipped here too, so the
/// rebuilt operator matches the one the run actually used. Requires
/// `k + 1 <= run.iterations`: the step-k transform exists only if the run
/// continued past step k.
pub fn verify_secant<O: ObjectiveOracle + ?Sized>(
    f: &O,
    run: &RunReport,
    k: usize,
) -> Result<SecantReport, VerifyError> {
    if k + 1 > run.iterations {
        return Err(VerifyError::IndexOutOfRange {
            k,
            iterations: run.iterations,
        });
    }

    let mut chain = TransformChain::new(run.x0.len());
    for (j, rec) in run.records.iter().take(k).enumerate() {
        if matches!(rec.event, Some(StepEvent::TransformSkipped { .. })) {
            continue;
        }
        let p = rec.p.clone().ok_or(VerifyError::MissingTrace { k: j })?;
        let g = rec.g.clone().ok_or(VerifyError::MissingTrace { k: j })?;
        chain.try_append(p, g, EPS_INV)?;
    }

    let obs = &run.records[k.max(1) - 1];
    let x_prev: &[f64] = if k >= 2 {
        &run.records[k - 2].x
    } else {
        &run.x0
    };
    let grad_cur = DVector::from_column_slice(&f.gradient_at(&obs.x));
    let grad_prev = DVector::from_column_slice(&f.gradient_at(x_prev));
    let y = grad_cur - grad_prev;

    let hy = chain.h_apply(y.as_slice())?;
    let m_norm = norm(&obs.m);
    let diff: f64 = hy
        .iter()
        .zip(&obs.m)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let residual = if m_norm == 0.0 { diff } else { diff / m_norm };

    Ok(SecantReport {
        k,
        residual,
        m_norm,
    })
}
