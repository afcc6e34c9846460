//! Product-form BFGS and DFP with unlimited memory.
//!
//! Neither method ever forms the inverse-Hessian approximation as a matrix:
//! BFGS keeps the (s, y, 1/y.s) update pairs and applies the two-loop
//! recursion; DFP keeps the rank-one terms of
//! `H = I + sum c_j a_j a_j^T`. Either way iteration k costs O(kn),
//! matching the transform-chain method.

use crate::optimizers::{
    AfterOutcome, DirectionMethod, DirectionOutcome, StepContext, StepEvent,
};
use crate::transform::dot;

fn step_pair(ctx: &StepContext<'_>) -> (Vec<f64>, Vec<f64>) {
    let s = ctx.m.iter().map(|mi| ctx.alpha * mi).collect();
    let y = ctx
        .grad_new
        .iter()
        .zip(ctx.prev_grad)
        .map(|(gn, gp)| gn - gp)
        .collect();
    (s, y)
}

#[derive(Default)]
pub(crate) struct BfgsMethod {
    /// (s_j, y_j, 1/(y_j.s_j)) for every accepted update.
    pairs: Vec<(Vec<f64>, Vec<f64>, f64)>,
}

impl DirectionMethod for BfgsMethod {
    fn direction(&mut self, grad: &[f64]) -> DirectionOutcome {
        // two-loop recursion with H_1 = I
        let mut q = grad.to_vec();
        let mut coeffs = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            coeffs.push(a);
        }
        let mut r = q;
        for ((s, y, rho), a) in self.pairs.iter().zip(coeffs.iter().rev()) {
            let b = rho * dot(y, &r);
            for (ri, si) in r.iter_mut().zip(s) {
                *ri += (a - b) * si;
            }
        }
        for ri in r.iter_mut() {
            *ri = -*ri;
        }
        DirectionOutcome {
            m: r,
            record_p: None,
            factor_ops: 2 * self.pairs.len(),
            event: None,
        }
    }

    fn after_step(&mut self, ctx: StepContext<'_>) -> AfterOutcome {
        if !ctx.continuing {
            return AfterOutcome::none();
        }
        let (s, y) = step_pair(&ctx);
        let ys = dot(&y, &s);
        if ys <= 0.0 {
            return AfterOutcome {
                record_g: None,
                event: Some(StepEvent::CurvatureSkipped { ys }),
            };
        }
        self.pairs.push((s, y, 1.0 / ys));
        AfterOutcome::none()
    }
}

#[derive(Default)]
pub(crate) struct DfpMethod {
    /// Rank-one terms (a_j, c_j) of H = I + sum c_j a_j a_j^T.
    terms: Vec<(Vec<f64>, f64)>,
}

impl DfpMethod {
    fn apply_h(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        for (a, c) in &self.terms {
            let scale = c * dot(a, v);
            for (oi, ai) in out.iter_mut().zip(a) {
                *oi += scale * ai;
            }
        }
        out
    }
}

impl DirectionMethod for DfpMethod {
    fn direction(&mut self, grad: &[f64]) -> DirectionOutcome {
        let mut m = self.apply_h(grad);
        for mi in m.iter_mut() {
            *mi = -*mi;
        }
        DirectionOutcome {
            m,
            record_p: None,
            factor_ops: self.terms.len(),
            event: None,
        }
    }

    fn after_step(&mut self, ctx: StepContext<'_>) -> AfterOutcome {
        if !ctx.continuing {
            return AfterOutcome::none();
        }
        let (s, y) = step_pair(&ctx);
        let ys = dot(&y, &s);
        if ys <= 0.0 {
            return AfterOutcome {
                record_g: None,
                event: Some(StepEvent::CurvatureSkipped { ys }),
            };
        }
        // H+ = H + s s^T/(y.s) - (Hy)(Hy)^T/(y.Hy)
        let hy = self.apply_h(&y);
        let yhy = dot(&y, &hy);
        if yhy <= 0.0 {
            return AfterOutcome {
                record_g: None,
                event: Some(StepEvent::CurvatureSkipped { ys: yhy }),
            };
        }
        self.terms.push((s, 1.0 / ys));
        self.terms.push((hy, -1.0 / yhy));
        AfterOutcome::none()
    }
}
