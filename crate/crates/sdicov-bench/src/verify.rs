//! Seeded theorem checks runnable from the command line. Each suite draws
//! `trials` random instances, tracks the worst residual against its bound,
//! and reports the first failing seed.

use clap::ValueEnum;
use nalgebra::{DMatrix, DVector};
use sdicov::quadratic::{verify_cg_equivalence, verify_secant, verify_subspace_shrinkage};
use sdicov::rng::SeededRng;
use sdicov::transform::{RankOneTransform, TransformChain, EPS_INV};
use sdicov::{
    minimize, OptimizerKind, QuadraticObjective, RunOptions, RunStatus, TerminationPolicy,
};

use crate::config::ConfigError;

/// Largest dense dimension the verifiers accept.
pub const MAX_SIZE: usize = 50;

/// Tighter cap for the shrinkage suite. Its Krylov dimension estimate grows
/// a basis by repeated multiplication, which amplifies roundoff roughly
/// exponentially in the dimension; past this size the estimate reports
/// noise rather than the subspace.
pub const SHRINKAGE_MAX_SIZE: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Chain operations against explicit dense matrices.
    Transforms,
    /// Transform-chain runs against linear conjugate gradients.
    CgEquivalence,
    /// Convergence within the space dimension on quadratics.
    Termination,
    /// Strict Krylov-dimension decrease along rewrite runs.
    Shrinkage,
    /// Quasi-Newton secant condition on transform-chain runs.
    Secant,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Transforms => "transforms",
            Suite::CgEquivalence => "cg-equivalence",
            Suite::Termination => "termination",
            Suite::Shrinkage => "shrinkage",
            Suite::Secant => "secant",
        }
    }
}

#[derive(Debug)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub size: usize,
    pub trials: usize,
    pub seed: u64,
    pub max_residual: f64,
    pub bound: f64,
    /// Seed and description of the first failed trial.
    pub failure: Option<(u64, String)>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

pub fn run_suite(
    suite: Suite,
    size: usize,
    trials: usize,
    seed: u64,
) -> Result<SuiteReport, ConfigError> {
    if size == 0 || size > MAX_SIZE {
        return Err(ConfigError::Invalid(format!(
            "size must lie in 1..={MAX_SIZE}, got {size}"
        )));
    }
    if suite == Suite::Shrinkage && size > SHRINKAGE_MAX_SIZE {
        return Err(ConfigError::Invalid(format!(
            "the shrinkage suite accepts size <= {SHRINKAGE_MAX_SIZE}: its Krylov \
             dimension estimate amplifies roundoff exponentially with size, got {size}"
        )));
    }
    if trials == 0 {
        return Err(ConfigError::Invalid("trials must be at least 1".into()));
    }
    let mut report = SuiteReport {
        suite: suite.name(),
        size,
        trials,
        seed,
        max_residual: 0.0,
        bound: match suite {
            Suite::Transforms => 1e-10,
            Suite::CgEquivalence | Suite::Secant => 1e-8,
            Suite::Termination => 1.0,
            Suite::Shrinkage => 1e-6,
        },
        failure: None,
    };
    for trial in 0..trials {
        let s = seed + trial as u64;
        let outcome = match suite {
            Suite::Transforms => check_transforms(size, s),
            Suite::CgEquivalence => check_cg_equivalence(size, s),
            Suite::Termination => check_termination(size, s),
            Suite::Shrinkage => check_shrinkage(size, s),
            Suite::Secant => check_secant(size, s),
        };
        match outcome {
            Ok(residual) => report.max_residual = report.max_residual.max(residual),
            Err(detail) => {
                report.failure = Some((s, detail));
                break;
            }
        }
    }
    Ok(report)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dense_of(t: &RankOneTransform) -> DMatrix<f64> {
    let n = t.dimension();
    let (p, g) = (t.p(), t.g());
    let pn2: f64 = p.iter().map(|x| x * x).sum();
    DMatrix::from_fn(n, n, |i, j| {
        let eye = if i == j { 1.0 } else { 0.0 };
        eye + p[i] * g[j] / pn2
    })
}

/// Random member with `mu` bounded away from zero, so chains stay far from
/// the near-singular guard and dense agreement is sharp.
fn draw_member(rng: &mut SeededRng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let p: Vec<f64> = loop {
        let cand: Vec<f64> = (0..n).map(|_| rng.uniform_in(-3.0, 3.0)).collect();
        if norm(&cand) >= 0.5 {
            break cand;
        }
    };
    let mut g: Vec<f64> = (0..n).map(|_| rng.uniform_in(-3.0, 3.0)).collect();
    let gn = norm(&g);
    if gn > 0.0 {
        let scale = 0.6 * norm(&p) / gn;
        for gi in &mut g {
            *gi *= scale;
        }
    }
    (p, g)
}

/// Compares forward/adjoint/inverse/h_apply of a random chain against an
/// explicitly multiplied dense matrix. Returns the worst relative deviation.
fn check_transforms(size: usize, seed: u64) -> Result<f64, String> {
    let mut rng = SeededRng::new(seed);
    let n = 1 + rng.below(size);
    let members = rng.below(7);
    let mut chain = TransformChain::new(n);
    let mut dense = DMatrix::<f64>::identity(n, n);
    for _ in 0..members {
        let (p, g) = draw_member(&mut rng, n);
        let t = RankOneTransform::new(p, g, EPS_INV).map_err(|e| e.to_string())?;
        dense = &dense * dense_of(&t);
        chain.push(t).map_err(|e| e.to_string())?;
    }
    let x: Vec<f64> = (0..n).map(|_| rng.uniform_in(-2.0, 2.0)).collect();
    let xv = DVector::from_column_slice(&x);

    let mut worst = 0.0f64;
    let mut check = |got: Vec<f64>, want: DVector<f64>, op: &str| -> Result<(), String> {
        let dev = got
            .iter()
            .zip(want.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let scale = norm(&x) + norm(want.as_slice());
        let rel = dev / scale;
        worst = worst.max(rel);
        if rel <= 1e-10 {
            Ok(())
        } else {
            Err(format!(
                "{op} deviates from the dense oracle by {rel:.3e} (n={n}, members={members})"
            ))
        }
    };
    check(chain.forward(&x).map_err(|e| e.to_string())?, &dense * &xv, "forward")?;
    check(
        chain.adjoint(&x).map_err(|e| e.to_string())?,
        dense.transpose() * &xv,
        "adjoint",
    )?;
    check(
        chain.h_apply(&x).map_err(|e| e.to_string())?,
        &dense * (dense.transpose() * &xv),
        "h_apply",
    )?;
    let solved = dense
        .clone()
        .lu()
        .solve(&xv)
        .ok_or_else(|| "dense chain matrix is singular".to_string())?;
    check(chain.inverse(&x).map_err(|e| e.to_string())?, solved, "inverse")?;
    Ok(worst)
}

fn spd(size: usize, kappa: f64, seed: u64) -> Result<QuadraticObjective, String> {
    QuadraticObjective::random_spd(size, kappa, seed).map_err(|e| e.to_string())
}

fn check_cg_equivalence(size: usize, seed: u64) -> Result<f64, String> {
    let q = spd(size, 12.0, seed)?;
    let x0 = vec![1.0; size];
    let rep = verify_cg_equivalence(&q, &x0).map_err(|e| e.to_string())?;
    if !rep.lengths_match() {
        return Err(format!(
            "iteration counts differ: transform-chain {} vs cg {}",
            rep.sdicov_iterations, rep.cg_iterations
        ));
    }
    if rep.max_deviation > 1e-8 {
        return Err(format!(
            "iterate deviation {:.3e} exceeds 1e-8",
            rep.max_deviation
        ));
    }
    Ok(rep.max_deviation)
}

fn exact_options(tol: f64, max_iterations: usize) -> RunOptions {
    RunOptions::exact(TerminationPolicy {
        grad_rel_tol: tol,
        max_iterations,
        ..TerminationPolicy::default()
    })
}

/// Residual is iterations divided by the dimension; the termination theorem
/// bounds it by 1.
fn check_termination(size: usize, seed: u64) -> Result<f64, String> {
    let q = spd(size, 10.0, seed)?;
    let x0 = vec![1.0; size];
    let run = minimize(OptimizerKind::Sdicov, &q, &x0, &exact_options(1e-8, size + 10));
    if run.status != RunStatus::GradConverged {
        return Err(format!("run ended {} after {} iterations", run.status, run.iterations));
    }
    if run.iterations > size {
        return Err(format!(
            "took {} iterations on a {size}-dimensional quadratic",
            run.iterations
        ));
    }
    Ok(run.iterations as f64 / size as f64)
}

fn check_shrinkage(size: usize, seed: u64) -> Result<f64, String> {
    let q = spd(size, 3.0, seed)?;
    let w0 = vec![0.5; size];
    let rep = verify_subspace_shrinkage(&q, &w0).map_err(|e| e.to_string())?;
    if !rep.strictly_decreasing {
        return Err(format!("Krylov dimensions failed to drop each step: {:?}", rep.dims));
    }
    let residual = rep.max_containment_residual.max(rep.max_direction_overlap);
    if residual > 1e-6 {
        return Err(format!(
            "subspace residual {residual:.3e} exceeds 1e-6 (containment {:.3e}, overlap {:.3e})",
            rep.max_containment_residual, rep.max_direction_overlap
        ));
    }
    Ok(residual)
}

fn check_secant(size: usize, seed: u64) -> Result<f64, String> {
    let q = spd(size, 100.0, seed)?;
    let x0 = vec![1.0; size];
    let run = minimize(OptimizerKind::Sdicov, &q, &x0, &exact_options(1e-8, 4 * size));
    let mut worst = 0.0f64;
    for k in 1..run.iterations {
        let rep = verify_secant(&q, &run, k).map_err(|e| e.to_string())?;
        worst = worst.max(rep.residual);
        if rep.residual > 1e-8 {
            return Err(format!(
                "secant residual {:.3e} at step {k} exceeds 1e-8",
                rep.residual
            ));
        }
    }
    Ok(worst)
}
