//! Steepest descent with iterated change of variables.
//!
//! Each iteration: pull the negative gradient through the adjoint chain to
//! get `p_k`, push `p_k` forward to get the original-coordinate direction
//! `m_k`, take the line-search step, pull the new negative gradient through
//! the adjoint chain to get `g_k`, and append the transform built from
//! `(p_k, g_k)`. The direction equals `-H_k grad f` for the implicit
//! positive-definite `H_k = l_1...l_{k-1} l_{k-1}^T...l_1^T`, so descent can
//! only fail when a transform is close to singular.

use crate::optimizers::{
    negated, AfterOutcome, DirectionMethod, DirectionOutcome, StepContext, StepEvent,
};
use crate::transform::{TransformChain, TransformError};

pub(crate) struct SdicovMethod {
    chain: TransformChain,
    eps_inv: f64,
    /// Use p_k = l_{k-1}^T(g_{k-1}) instead of re-applying the whole adjoint
    /// chain; identical arithmetic, fewer factor applications.
    shortcut: bool,
    /// Next iteration's p, prepared during after_step in shortcut mode.
    p_next: Option<Vec<f64>>,
    /// p of the in-flight iteration, held between direction and after_step.
    pending_p: Option<Vec<f64>>,
    /// Factor applications spent preparing p_next, billed to the direction
    /// they produce.
    carried_ops: usize,
}

impl SdicovMethod {
    pub(crate) fn new(dimension: usize, eps_inv: f64, shortcut: bool) -> Self {
        Self {
            chain: TransformChain::new(dimension),
            eps_inv,
            shortcut,
            p_next: None,
            pending_p: None,
            carried_ops: 0,
        }
    }
}

impl DirectionMethod for SdicovMethod {
    fn direction(&mut self, grad: &[f64]) -> DirectionOutcome {
        let mut ops = self.carried_ops;
        self.carried_ops = 0;
        let p = match self.p_next.take() {
            Some(p) if self.shortcut => p,
            _ => {
                ops += self.chain.len();
                self.chain
                    .adjoint(&negated(grad))
                    .expect("chain dimension matches oracle dimension")
            }
        };
        ops += self.chain.len();
        let m = self
            .chain
            .forward(&p)
            .expect("chain dimension matches oracle dimension");
        self.pending_p = Some(p.clone());
        DirectionOutcome {
            m,
            record_p: Some(p),
            factor_ops: ops,
            event: None,
        }
    }

    fn after_step(&mut self, ctx: StepContext<'_>) -> AfterOutcome {
        let g_vec = self
            .chain
            .adjoint(&negated(ctx.grad_new))
            .expect("chain dimension matches oracle dimension");
        let p = self
            .pending_p
            .take()
            .expect("after_step follows direction");
        let mut event = None;
        if ctx.continuing {
            match self.chain.try_append(p, g_vec.clone(), self.eps_inv) {
                Ok(last) => {
                    if self.shortcut {
                        self.p_next = Some(
                            last.apply_adjoint(&g_vec)
                                .expect("chain dimension matches oracle dimension"),
                        );
                        self.carried_ops = 1;
                    }
                }
                Err(err) => {
                    // chain unchanged, so next p is g_vec itself
                    let mu = match err {
                        TransformError::NearSingular { mu, .. } => mu,
                        _ => f64::NAN,
                    };
                    event = Some(StepEvent::TransformSkipped { mu });
                    if self.shortcut {
                        self.p_next = Some(g_vec.clone());
                    }
                }
            }
        }
        AfterOutcome {
            record_g: Some(g_vec),
            event,
        }
    }
}
