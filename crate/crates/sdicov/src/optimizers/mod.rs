//! Five line-search descent methods behind one driver: steepest descent
//! with iterated change of variables (the transform-chain method this crate
//! is named for), product-form BFGS and DFP, and nonlinear CG in the
//! Polak-Ribiere (clamped) and Fletcher-Reeves variants.
//!
//! The driver owns iteration bookkeeping, line-search dispatch, termination,
//! and the per-iteration trace; each method only supplies search directions
//! and reacts to completed steps.

use crate::line_search::{
    bisection_search, LineSearchResult, LineSearchSpec, LineSearchStatus,
};
use crate::objective::{CountingOracle, ObjectiveOracle};
use crate::transform::{dot, norm, EPS_INV};

mod nonlinear_cg;
mod quasi_newton;
mod sdicov_method;

use nonlinear_cg::{CgMethod, CgVariant};
use quasi_newton::{BfgsMethod, DfpMethod};
use sdicov_method::SdicovMethod;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptimizerKind {
    Sdicov,
    Bfgs,
    Dfp,
    CgPrPlus,
    CgFr,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 5] = [
        OptimizerKind::Sdicov,
        OptimizerKind::Bfgs,
        OptimizerKind::Dfp,
        OptimizerKind::CgPrPlus,
        OptimizerKind::CgFr,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Sdicov => "sdicov",
            OptimizerKind::Bfgs => "bfgs",
            OptimizerKind::Dfp => "dfp",
            OptimizerKind::CgPrPlus => "cg-pr+",
            OptimizerKind::CgFr => "cg-fr",
        }
    }
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sdicov" => Ok(OptimizerKind::Sdicov),
            "bfgs" => Ok(OptimizerKind::Bfgs),
            "dfp" => Ok(OptimizerKind::Dfp),
            "cg-pr+" | "cg-pr" => Ok(OptimizerKind::CgPrPlus),
            "cg-fr" => Ok(OptimizerKind::CgFr),
            other => Err(format!(
                "unknown optimizer {other:?}; expected one of sdicov, bfgs, dfp, cg-pr+, cg-fr"
            )),
        }
    }
}

/// Stopping rules shared by all optimizers.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminationPolicy {
    /// Stop once `||grad|| <= grad_rel_tol * ||grad at x0||`.
    pub grad_rel_tol: f64,
    pub max_iterations: usize,
    /// Number of consecutive steps that must all fail to improve before the
    /// run is declared stagnated.
    pub stagnation_window: usize,
    /// Relative decrease in f or `||grad||` that counts as improvement.
    pub stagnation_rel: f64,
}

impl Default for TerminationPolicy {
    fn default() -> Self {
        Self {
            grad_rel_tol: 1e-5,
            max_iterations: 5000,
            stagnation_window: 4,
            stagnation_rel: 1e-8,
        }
    }
}

impl TerminationPolicy {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.grad_rel_tol > 0.0) {
            return Err(format!("grad_rel_tol must be positive, got {}", self.grad_rel_tol));
        }
        if self.max_iterations == 0 {
            return Err("max_iterations must be at least 1".into());
        }
        if self.stagnation_window == 0 {
            return Err("stagnation_window must be at least 1".into());
        }
        if !(self.stagnation_rel > 0.0) {
            return Err(format!("stagnation_rel must be positive, got {}", self.stagnation_rel));
        }
        Ok(())
    }
}

/// How step lengths are chosen along each direction.
#[derive(Debug, Clone, PartialEq)]
pub enum LineSearchMethod {
    /// Closed-form minimizer along the direction; requires the oracle to
    /// implement `exact_step` (quadratics do). The run fails otherwise.
    Exact,
    Bisection(LineSearchSpec),
}

impl Default for LineSearchMethod {
    fn default() -> Self {
        LineSearchMethod::Bisection(LineSearchSpec::default())
    }
}

/// Anomaly observed during one iteration; the run continues.
#[derive(Debug, Clone, PartialEq)]
pub enum StepEvent {
    /// The (p, g) pair built a near-singular transform; the chain was left
    /// unchanged this iteration.
    TransformSkipped { mu: f64 },
    /// Quasi-Newton curvature condition failed (`y.s <= 0`, or `y.Hy <= 0`
    /// for the rank-one term form); the inverse-Hessian update was dropped.
    CurvatureSkipped { ys: f64 },
    /// The conjugate-gradient direction was not a descent direction and was
    /// reset to steepest descent.
    DirectionReset,
}

impl std::fmt::Display for StepEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StepEvent::TransformSkipped { mu } => write!(f, "transform-skipped(mu={mu:.3e})"),
            StepEvent::CurvatureSkipped { ys } => write!(f, "curvature-skipped(ys={ys:.3e})"),
            StepEvent::DirectionReset => write!(f, "direction-reset"),
        }
    }
}

/// One completed iteration. `x` is the iterate after the step, so
/// `x = previous x + alpha * m` reconstructs the trajectory exactly.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    /// 1-based iteration index.
    pub k: usize,
    pub x: Vec<f64>,
    /// Search direction in original coordinates.
    pub m: Vec<f64>,
    pub alpha: f64,
    /// Transformed steepest-descent direction (transform-chain method only).
    pub p: Option<Vec<f64>>,
    /// Transformed negative gradient at `x` (transform-chain method only).
    pub g: Option<Vec<f64>>,
    pub f_value: f64,
    pub grad_norm: f64,
    pub ls_status: LineSearchStatus,
    /// Directional derivative of f along `m` at the step start; negative for
    /// descent directions.
    pub dir_slope: f64,
    pub event: Option<StepEvent>,
    /// Rank-one factor applications spent forming this direction.
    pub factor_ops: usize,
    /// Cumulative objective evaluations at the end of this iteration.
    pub f_evals: u64,
    /// Cumulative gradient evaluations at the end of this iteration.
    pub g_evals: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    /// Gradient norm fell to `grad_rel_tol` times its starting value.
    GradConverged,
    /// `stagnation_window` consecutive steps improved neither f nor the
    /// gradient norm significantly.
    Stagnated,
    MaxIterations,
    /// The line search could not produce a usable step.
    LineSearchFailure,
}

impl RunStatus {
    pub fn is_success(&self) -> bool {
        *self == RunStatus::GradConverged
    }
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RunStatus::GradConverged => "grad-converged",
            RunStatus::Stagnated => "stagnated",
            RunStatus::MaxIterations => "max-iterations",
            RunStatus::LineSearchFailure => "line-search-failure",
        };
        f.write_str(s)
    }
}

/// Full outcome of one optimizer run, including the per-iteration trace.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub optimizer: OptimizerKind,
    pub status: RunStatus,
    pub iterations: usize,
    pub records: Vec<IterationRecord>,
    pub x0: Vec<f64>,
    pub initial_f: f64,
    pub initial_grad_norm: f64,
    pub final_x: Vec<f64>,
    pub final_f: f64,
    pub final_grad_norm: f64,
    pub f_evals: u64,
    pub g_evals: u64,
    /// Human-readable cause when status is LineSearchFailure.
    pub failure_detail: Option<String>,
}

/// Driver knobs beyond the spec-level signatures. The transform-specific
/// fields are ignored by the other four methods.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub line_search: LineSearchMethod,
    pub termination: TerminationPolicy,
    /// Invertibility margin below which a new transform is skipped.
    pub eps_inv: f64,
    /// Reuse the previous transformed gradient when forming the next
    /// direction instead of re-applying the whole adjoint chain. The two
    /// code paths perform identical arithmetic; this only saves work.
    pub direction_shortcut: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            line_search: LineSearchMethod::default(),
            termination: TerminationPolicy::default(),
            eps_inv: EPS_INV,
            direction_shortcut: true,
        }
    }
}

impl RunOptions {
    pub fn exact(termination: TerminationPolicy) -> Self {
        Self {
            line_search: LineSearchMethod::Exact,
            termination,
            ..Self::default()
        }
    }

    pub fn bisection(spec: LineSearchSpec, termination: TerminationPolicy) -> Self {
        Self {
            line_search: LineSearchMethod::Bisection(spec),
            termination,
            ..Self::default()
        }
    }
}

/// What a method hands the driver for iteration k.
pub(crate) struct DirectionOutcome {
    pub m: Vec<f64>,
    /// Recorded as IterationRecord::p when present.
    pub record_p: Option<Vec<f64>>,
    pub factor_ops: usize,
    pub event: Option<StepEvent>,
}

/// Step data the driver shows a method after moving to the new iterate.
pub(crate) struct StepContext<'a> {
    pub grad_new: &'a [f64],
    pub prev_grad: &'a [f64],
    pub alpha: f64,
    pub m: &'a [f64],
    /// False on the terminal iteration; methods skip state updates then.
    pub continuing: bool,
}

pub(crate) struct AfterOutcome {
    /// Recorded as IterationRecord::g when present.
    pub record_g: Option<Vec<f64>>,
    pub event: Option<StepEvent>,
}

impl AfterOutcome {
    pub(crate) fn none() -> Self {
        Self {
            record_g: None,
            event: None,
        }
    }
}

pub(crate) trait DirectionMethod {
    fn direction(&mut self, grad: &[f64]) -> DirectionOutcome;
    fn after_step(&mut self, ctx: StepContext<'_>) -> AfterOutcome;
}

pub(crate) fn add_scaled(x: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect()
}

pub(crate) fn negated(v: &[f64]) -> Vec<f64> {
    v.iter().map(|vi| -vi).collect()
}

/// True iff the last `stagnation_window` steps improved neither the
/// objective nor the gradient norm by the relative margin. Needs
/// `stagnation_window + 1` records to have a baseline.
pub fn check_stagnation(records: &[IterationRecord], policy: &TerminationPolicy) -> bool {
    let w = policy.stagnation_window;
    if records.len() < w + 1 {
        return false;
    }
    let significant = |prev: f64, cur: f64| {
        let drop = prev - cur;
        drop > 0.0 && drop >= policy.stagnation_rel * prev.abs()
    };
    records[records.len() - (w + 1)..].windows(2).all(|pair| {
        !significant(pair[0].f_value, pair[1].f_value)
            && !significant(pair[0].grad_norm, pair[1].grad_norm)
    })
}

/// Runs `kind` on `f` from `x0`. Failures are reported through
/// `RunReport::status`, never panics, so benchmark sweeps survive bad trials.
pub fn minimize<O: ObjectiveOracle>(
    kind: OptimizerKind,
    f: &O,
    x0: &[f64],
    opts: &RunOptions,
) -> RunReport {
    match kind {
        OptimizerKind::Sdicov => {
            let method = SdicovMethod::new(x0.len(), opts.eps_inv, opts.direction_shortcut);
            drive(kind, f, x0, method, opts)
        }
        OptimizerKind::Bfgs => drive(kind, f, x0, BfgsMethod::default(), opts),
        OptimizerKind::Dfp => drive(kind, f, x0, DfpMethod::default(), opts),
        OptimizerKind::CgPrPlus => drive(kind, f, x0, CgMethod::new(CgVariant::PrPlus), opts),
        OptimizerKind::CgFr => drive(kind, f, x0, CgMethod::new(CgVariant::Fr), opts),
    }
}

pub fn sdicov_minimize<O: ObjectiveOracle>(
    f: &O,
    x0: &[f64],
    ls: &LineSearchSpec,
    term: &TerminationPolicy,
) -> RunReport {
    minimize(OptimizerKind::Sdicov, f, x0, &RunOptions::bisection(ls.clone(), term.clone()))
}

pub fn bfgs_minimize<O: ObjectiveOracle>(
    f: &O,
    x0: &[f64],
    ls: &LineSearchSpec,
    term: &TerminationPolicy,
) -> RunReport {
    minimize(OptimizerKind::Bfgs, f, x0, &RunOptions::bisection(ls.clone(), term.clone()))
}

pub fn dfp_minimize<O: ObjectiveOracle>(
    f: &O,
    x0: &[f64],
    ls: &LineSearchSpec,
    term: &TerminationPolicy,
) -> RunReport {
    minimize(OptimizerKind::Dfp, f, x0, &RunOptions::bisection(ls.clone(), term.clone()))
}

pub fn cg_pr_minimize<O: ObjectiveOracle>(
    f: &O,
    x0: &[f64],
    ls: &LineSearchSpec,
    term: &TerminationPolicy,
) -> RunReport {
    minimize(OptimizerKind::CgPrPlus, f, x0, &RunOptions::bisection(ls.clone(), term.clone()))
}

pub fn cg_fr_minimize<O: ObjectiveOracle>(
    f: &O,
    x0: &[f64],
    ls: &LineSearchSpec,
    term: &TerminationPolicy,
) -> RunReport {
    minimize(OptimizerKind::CgFr, f, x0, &RunOptions::bisection(ls.clone(), term.clone()))
}

fn drive<O: ObjectiveOracle, M: DirectionMethod>(
    kind: OptimizerKind,
    oracle: &O,
    x0: &[f64],
    mut method: M,
    opts: &RunOptions,
) -> RunReport {
    let oracle = CountingOracle::new(oracle);
    let term = &opts.termination;

    let mut x = x0.to_vec();
    let initial_f = oracle.value_at(&x);
    let mut grad = oracle.gradient_at(&x);
    let initial_grad_norm = norm(&grad);
    let mut f_cur = initial_f;

    let mut records: Vec<IterationRecord> = Vec::new();
    let mut status = RunStatus::MaxIterations;
    let mut failure_detail = None;

    if !initial_f.is_finite() || !initial_grad_norm.is_finite() {
        status = RunStatus::LineSearchFailure;
        failure_detail = Some("objective or gradient non-finite at the start point".to_string());
    } else if initial_grad_norm == 0.0 {
        status = RunStatus::GradConverged;
    } else {
        let grad_tol = term.grad_rel_tol * initial_grad_norm;
        for k in 1..=term.max_iterations {
            let dir = method.direction(&grad);
            let m = dir.m;
            let dir_slope = dot(&grad, &m);

            let ls_result = match &opts.line_search {
                LineSearchMethod::Exact => {
                    if !(dir_slope < 0.0) {
                        status = RunStatus::LineSearchFailure;
                        failure_detail = Some(format!(
                            "non-descent direction at iteration {k} (slope {dir_slope:e})"
                        ));
                        break;
                    }
                    match oracle.exact_step(&x, &m) {
                        Some(alpha) if alpha.is_finite() && alpha > 0.0 => LineSearchResult {
                            alpha,
                            phi0_slope: dir_slope,
                            phi_alpha_slope: 0.0,
                            f_evals: 0,
                            g_evals: 0,
                            status: LineSearchStatus::Converged,
                        },
                        Some(alpha) => {
                            status = RunStatus::LineSearchFailure;
                            failure_detail = Some(format!(
                                "exact step was not a positive finite number at iteration {k}: {alpha}"
                            ));
                            break;
                        }
                        None => {
                            status = RunStatus::LineSearchFailure;
                            failure_detail = Some(format!(
                                "objective provides no closed-form step at iteration {k}; \
                                 use the bisection search instead"
                            ));
                            break;
                        }
                    }
                }
                LineSearchMethod::Bisection(spec) => {
                    let phi = |a: f64| {
                        if a == 0.0 {
                            f_cur
                        } else {
                            oracle.value_at(&add_scaled(&x, a, &m))
                        }
                    };
                    let phi_prime = |a: f64| {
                        if a == 0.0 {
                            dir_slope
                        } else {
                            dot(&oracle.gradient_at(&add_scaled(&x, a, &m)), &m)
                        }
                    };
                    bisection_search(phi, phi_prime, spec)
                }
            };

            if !ls_result.usable() {
                status = RunStatus::LineSearchFailure;
                failure_detail = Some(format!(
                    "line search failed at iteration {k}: {:?} (slope {:e})",
                    ls_result.status, ls_result.phi0_slope
                ));
                break;
            }

            let alpha = ls_result.alpha;
            let x_new = add_scaled(&x, alpha, &m);
            let f_new = oracle.value_at(&x_new);
            let grad_new = oracle.gradient_at(&x_new);
            let grad_norm = norm(&grad_new);

            let converged = grad_norm <= grad_tol;
            let after = method.after_step(StepContext {
                grad_new: &grad_new,
                prev_grad: &grad,
                alpha,
                m: &m,
                continuing: !converged,
            });

            records.push(IterationRecord {
                k,
                x: x_new.clone(),
                m,
                alpha,
                p: dir.record_p,
                g: after.record_g,
                f_value: f_new,
                grad_norm,
                ls_status: ls_result.status,
                dir_slope,
                event: dir.event.or(after.event),
                factor_ops: dir.factor_ops,
                f_evals: oracle.value_calls(),
                g_evals: oracle.gradient_calls(),
            });

            x = x_new;
            grad = grad_new;
            f_cur = f_new;

            if converged {
                status = RunStatus::GradConverged;
                break;
            }
            if check_stagnation(&records, term) {
                status = RunStatus::Stagnated;
                break;
            }
        }
    }

    let final_grad_norm = norm(&grad);
    RunReport {
        optimizer: kind,
        status,
        iterations: records.len(),
        records,
        x0: x0.to_vec(),
        initial_f,
        initial_grad_norm,
        final_x: x,
        final_f: f_cur,
        final_grad_norm,
        f_evals: oracle.value_calls(),
        g_evals: oracle.gradient_calls(),
        failure_detail,
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use crate::objective::ObjectiveOracle;
    use crate::transform::dot;

    /// f(x) = 1/2 x^T diag(d) x - b.x; exact steps available.
    pub(crate) struct DiagQuadratic {
        pub diag: Vec<f64>,
        pub b: Vec<f64>,
    }

    impl DiagQuadratic {
        pub(crate) fn homogeneous(diag: Vec<f64>) -> Self {
            let n = diag.len();
            Self {
                diag,
                b: vec![0.0; n],
            }
        }

        fn a_apply(&self, v: &[f64]) -> Vec<f64> {
            self.diag.iter().zip(v).map(|(d, vi)| d * vi).collect()
        }
    }

    impl ObjectiveOracle for DiagQuadratic {
        fn dimension(&self) -> usize {
            self.diag.len()
        }

        fn value_at(&self, x: &[f64]) -> f64 {
            0.5 * dot(x, &self.a_apply(x)) - dot(&self.b, x)
        }

        fn gradient_at(&self, x: &[f64]) -> Vec<f64> {
            self.a_apply(x)
                .iter()
                .zip(&self.b)
                .map(|(ax, bi)| ax - bi)
                .collect()
        }

        fn exact_step(&self, x: &[f64], d: &[f64]) -> Option<f64> {
            let curvature = dot(d, &self.a_apply(d));
            if curvature <= 0.0 {
                return None;
            }
            let slope = dot(&self.gradient_at(x), d);
            Some(-slope / curvature)
        }
    }
}
