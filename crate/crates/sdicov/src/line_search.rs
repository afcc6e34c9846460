//! Step-length selection: closed-form steps for quadratics and a
//! derivative-shrinking bisection search for general objectives.

use thiserror::Error;

use crate::transform::dot;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LineSearchError {
    /// `p . A p <= 0`; the quadratic has no minimizer along `p`.
    #[error("non-positive curvature along search direction: p.Ap = {curvature:e}")]
    NonPositiveCurvature { curvature: f64 },
    #[error("invalid line search parameter: {0}")]
    InvalidSpec(String),
}

/// Parameters of the bisection search.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchSpec {
    /// Shrink factor `c`: accept `alpha` once `|phi'(alpha)| <= c |phi'(0)|`.
    pub shrink_factor: f64,
    /// First trial step of the doubling expansion.
    pub initial_step: f64,
    /// Doubling budget before the search gives up bracketing.
    pub max_expansions: usize,
    /// Bisection budget once a bracket is found.
    pub max_bisections: usize,
}

impl Default for LineSearchSpec {
    fn default() -> Self {
        Self {
            shrink_factor: 0.2,
            initial_step: 1.0,
            max_expansions: 60,
            max_bisections: 100,
        }
    }
}

impl LineSearchSpec {
    pub fn validate(&self) -> Result<(), LineSearchError> {
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0) {
            return Err(LineSearchError::InvalidSpec(format!(
                "shrink_factor must lie in (0,1), got {}",
                self.shrink_factor
            )));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(LineSearchError::InvalidSpec(format!(
                "initial_step must be positive and finite, got {}",
                self.initial_step
            )));
        }
        if self.max_expansions == 0 || self.max_bisections == 0 {
            return Err(LineSearchError::InvalidSpec(
                "iteration budgets must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineSearchStatus {
    /// `|phi'(alpha)| <= c |phi'(0)|` holds at the returned step.
    Converged,
    /// Budgets exhausted; the result carries the step with the smallest
    /// `|phi'|` seen, which callers may use but should flag.
    MaxIterations,
    /// `phi'(0) >= 0` or non-finite: not a descent direction.
    NonDescent,
    /// No step with a finite objective value was found.
    DomainSafeguard,
}

impl std::fmt::Display for LineSearchStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            LineSearchStatus::Converged => "converged",
            LineSearchStatus::MaxIterations => "max-iterations",
            LineSearchStatus::NonDescent => "non-descent",
            LineSearchStatus::DomainSafeguard => "domain-safeguard",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchResult {
    pub alpha: f64,
    /// `phi'(0)`, the directional derivative at the current iterate.
    pub phi0_slope: f64,
    /// `phi'(alpha)` at the returned step (equals `phi0_slope` when no step
    /// was taken).
    pub phi_alpha_slope: f64,
    pub f_evals: u64,
    pub g_evals: u64,
    pub status: LineSearchStatus,
}

impl LineSearchResult {
    pub fn converged(&self) -> bool {
        self.status == LineSearchStatus::Converged
    }

    /// The step is usable: either converged or budget-limited with a finite
    /// trial point in hand.
    pub fn usable(&self) -> bool {
        matches!(
            self.status,
            LineSearchStatus::Converged | LineSearchStatus::MaxIterations
        )
    }
}

/// Minimizer of `alpha -> 1/2 (w + alpha p)^T A (w + alpha p) + ...` along a
/// line: `alpha = (p . p) / (p . A p)`.
pub fn exact_quadratic_alpha<F>(a_apply: F, p: &[f64]) -> Result<f64, LineSearchError>
where
    F: FnOnce(&[f64]) -> Vec<f64>,
{
    let ap = a_apply(p);
    let curvature = dot(p, &ap);
    if !(curvature > 0.0) {
        return Err(LineSearchError::NonPositiveCurvature { curvature });
    }
    Ok(dot(p, p) / curvature)
}

fn update_best(best: &mut Option<(f64, f64)>, alpha: f64, slope: f64) {
    if best.map_or(true, |(_, s)| slope.abs() < s.abs()) {
        *best = Some((alpha, slope));
    }
}

/// Finds `alpha > 0` with `|phi'(alpha)| <= c |phi'(0)|` by doubling from
/// `initial_step` until the slope turns nonnegative or the value turns
/// non-finite, then bisecting on the sign of `phi'`. Non-finite trial values
/// shrink the upper end of the bracket, so objectives with a bounded domain
/// are handled without extra machinery. Trial points with `phi(alpha) >
/// phi(0)` shrink the bracket the same way: on multimodal objectives the
/// slope criterion alone can hold at a stationary point past a hump, and
/// accepting such a step would move the iterate uphill. Accepted steps
/// therefore never increase the objective.
pub fn bisection_search<P, D>(
    mut phi: P,
    mut phi_prime: D,
    spec: &LineSearchSpec,
) -> LineSearchResult
where
    P: FnMut(f64) -> f64,
    D: FnMut(f64) -> f64,
{
    let mut f_evals = 0u64;
    let mut g_evals = 0u64;

    g_evals += 1;
    let phi0_slope = phi_prime(0.0);
    let fail = |status, f_evals, g_evals| LineSearchResult {
        alpha: 0.0,
        phi0_slope,
        phi_alpha_slope: phi0_slope,
        f_evals,
        g_evals,
        status,
    };
    if !(phi0_slope < 0.0) {
        return fail(LineSearchStatus::NonDescent, f_evals, g_evals);
    }
    let target = spec.shrink_factor * phi0_slope.abs();

    f_evals += 1;
    let phi0 = phi(0.0);
    // a non-finite start disables the descent guard rather than the search
    let phi0 = if phi0.is_finite() { phi0 } else { f64::INFINITY };

    // (alpha, slope) with the smallest |slope| among non-increasing trials
    let mut best: Option<(f64, f64)> = None;
    let mut lo = 0.0;
    let mut hi = None;
    let mut alpha = spec.initial_step;

    for _ in 0..spec.max_expansions {
        f_evals += 1;
        let value = phi(alpha);
        if !value.is_finite() {
            hi = Some(alpha);
            break;
        }
        g_evals += 1;
        let slope = phi_prime(alpha);
        if !slope.is_finite() {
            hi = Some(alpha);
            break;
        }
        if value <= phi0 {
            update_best(&mut best, alpha, slope);
            if slope.abs() <= target {
                return LineSearchResult {
                    alpha,
                    phi0_slope,
                    phi_alpha_slope: slope,
                    f_evals,
                    g_evals,
                    status: LineSearchStatus::Converged,
                };
            }
        }
        if slope >= 0.0 || value > phi0 {
            hi = Some(alpha);
            break;
        }
        lo = alpha;
        alpha *= 2.0;
    }

    if let Some(mut hi) = hi {
        for _ in 0..spec.max_bisections {
            let mid = 0.5 * (lo + hi);
            f_evals += 1;
            let value = phi(mid);
            if !value.is_finite() {
                hi = mid;
                continue;
            }
            g_evals += 1;
            let slope = phi_prime(mid);
            if !slope.is_finite() {
                hi = mid;
                continue;
            }
            if value <= phi0 {
                update_best(&mut best, mid, slope);
                if slope.abs() <= target {
                    return LineSearchResult {
                        alpha: mid,
                        phi0_slope,
                        phi_alpha_slope: slope,
                        f_evals,
                        g_evals,
                        status: LineSearchStatus::Converged,
                    };
                }
            }
            if slope < 0.0 && value <= phi0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    match best {
        Some((alpha, slope)) => LineSearchResult {
            alpha,
            phi0_slope,
            phi_alpha_slope: slope,
            f_evals,
            g_evals,
            status: LineSearchStatus::MaxIterations,
        },
        None => fail(LineSearchStatus::DomainSafeguard, f_evals, g_evals),
    }
}
