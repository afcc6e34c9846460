//! Nonlinear conjugate gradient: Fletcher-Reeves and clamped Polak-Ribiere.
//!
//! O(n) state per iteration. A direction that fails the descent test is
//! replaced by steepest descent and the reset is recorded, so a run never
//! aborts just because beta misbehaved.

use crate::optimizers::{
    negated, AfterOutcome, DirectionMethod, DirectionOutcome, StepContext, StepEvent,
};
use crate::transform::dot;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CgVariant {
    /// beta = ||g_k||^2 / ||g_{k-1}||^2
    Fr,
    /// beta = max(0, g_k.(g_k - g_{k-1}) / ||g_{k-1}||^2)
    PrPlus,
}

pub(crate) struct CgMethod {
    variant: CgVariant,
    prev_grad: Option<Vec<f64>>,
    prev_dir: Option<Vec<f64>>,
}

impl CgMethod {
    pub(crate) fn new(variant: CgVariant) -> Self {
        Self {
            variant,
            prev_grad: None,
            prev_dir: None,
        }
    }
}

impl DirectionMethod for CgMethod {
    fn direction(&mut self, grad: &[f64]) -> DirectionOutcome {
        let mut event = None;
        let mut m = match (&self.prev_grad, &self.prev_dir) {
            (Some(gp), Some(dp)) => {
                let denom = dot(gp, gp);
                let beta = match self.variant {
                    CgVariant::Fr => dot(grad, grad) / denom,
                    CgVariant::PrPlus => ((dot(grad, grad) - dot(grad, gp)) / denom).max(0.0),
                };
                grad.iter()
                    .zip(dp)
                    .map(|(gi, di)| -gi + beta * di)
                    .collect()
            }
            _ => negated(grad),
        };
        if !(dot(grad, &m) < 0.0) {
            m = negated(grad);
            event = Some(StepEvent::DirectionReset);
        }
        self.prev_grad = Some(grad.to_vec());
        self.prev_dir = Some(m.clone());
        DirectionOutcome {
            m,
            record_p: None,
            factor_ops: 0,
            event,
        }
    }

    fn after_step(&mut self, _ctx: StepContext<'_>) -> AfterOutcome {
        AfterOutcome::none()
    }
}
