//! Exact-arithmetic identities of the change-of-variables method on convex
//! quadratics, checked per step on recorded runs. Deviations are normalized
//! by the run's initial residual scale: near termination the gradient itself
//! sits at the cancellation noise floor, so ratios against it measure
//! nothing.

use nalgebra::DVector;
use sdicov::quadratic::{algorithm1_quadratic, linear_cg};
use sdicov::{minimize, OptimizerKind, QuadraticObjective, RunOptions, TerminationPolicy};

const IDENTITY_TOL: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn rewrite_run_step_identities_hold() {
    // along the explicit rewrite: the new negative gradient obeys
    // g_k = p_k - alpha_k A_{k-1} p_k, the next direction is that gradient,
    // the basis change sends A_{k-1} p_k to an eigenvector relation
    // l_k^T (A_{k-1} p_k) = p_k / alpha_k, and the composed objective value
    // is preserved across the change of variables
    for seed in 0..30 {
        let q = QuadraticObjective::random_spd(10, 3e1, seed).unwrap();
        let w0 = vec![0.5; 10];
        let run = algorithm1_quadratic(&q, &w0, 1e-4).unwrap();
        assert!(run.converged, "seed {seed} did not converge");
        let r0 = run.initial_residual_norm;

        let mut a_prev = q.a().clone();
        let mut b_prev = q.b().clone();
        for (i, s) in run.states.iter().enumerate() {
            let pv = DVector::from_column_slice(&s.p);
            let ap = &a_prev * &pv;

            let g_rec: Vec<f64> = s
                .p
                .iter()
                .zip(ap.iter())
                .map(|(pi, api)| pi - s.alpha * api)
                .collect();
            let dev = max_abs_diff(&g_rec, &s.g);
            assert!(
                dev <= IDENTITY_TOL * r0,
                "seed {seed} k={}: gradient recurrence off by {:.3e} (scale {:.3e})",
                s.k,
                dev,
                r0
            );

            if i + 1 < run.states.len() {
                let dev = max_abs_diff(&run.states[i + 1].p, &s.g);
                assert!(
                    dev <= IDENTITY_TOL * r0,
                    "seed {seed} k={}: next direction is not the recorded gradient ({:.3e})",
                    s.k,
                    dev
                );

                let l_k = &run.chain.members()[i];
                let lhs = l_k.apply_adjoint(ap.as_slice()).unwrap();
                let scaled: Vec<f64> = s.p.iter().map(|pi| pi / s.alpha).collect();
                let dev = max_abs_diff(&lhs, &scaled);
                let scale = norm(&scaled);
                assert!(
                    dev <= IDENTITY_TOL * scale,
                    "seed {seed} k={}: eigenvector relation off by {:.3e} (scale {:.3e})",
                    s.k,
                    dev,
                    scale
                );
            }

            let f_before = {
                let wt = DVector::from_column_slice(&s.w_tilde);
                0.5 * wt.dot(&(&a_prev * &wt)) - b_prev.dot(&wt)
            };
            let f_after = {
                let wv = DVector::from_column_slice(&s.w);
                0.5 * wv.dot(&(&s.a * &wv)) - s.b.dot(&wv)
            };
            let scale = f_before.abs().max(f_after.abs()).max(1e-300);
            assert!(
                (f_before - f_after).abs() <= IDENTITY_TOL * scale,
                "seed {seed} k={}: value changed across basis change ({:.6e} vs {:.6e})",
                s.k,
                f_before,
                f_after
            );

            a_prev = s.a.clone();
            b_prev = s.b.clone();
        }
    }
}

#[test]
fn cg_residuals_stay_mutually_orthogonal_and_true() {
    // pairwise orthogonality of residuals and agreement of the recurrence
    // residual with b - A x; runs stop at 1e-3 so no recorded residual sits
    // at the noise floor
    for seed in 0..30 {
        let q = QuadraticObjective::random_spd(10, 1e1, seed).unwrap();
        let x0 = vec![0.0; 10];
        let run = linear_cg(q.a(), q.b().as_slice(), &x0, 1e-3).unwrap();
        assert!(run.converged, "seed {seed} did not converge");
        let states = &run.states;
        for i in 0..states.len() {
            for j in 0..i {
                let cosine = dot(&states[i].r, &states[j].r).abs()
                    / (norm(&states[i].r) * norm(&states[j].r));
                assert!(
                    cosine <= 1e-8,
                    "seed {seed}: residuals {j} and {i} overlap ({cosine:.3e})"
                );
            }
            let true_r = q.b() - q.a() * DVector::from_column_slice(&states[i].x);
            let drift = max_abs_diff(true_r.as_slice(), &states[i].r);
            assert!(
                drift <= IDENTITY_TOL * norm(&states[i].r),
                "seed {seed} k={}: recurrence residual drifted {:.3e}",
                states[i].k,
                drift
            );
        }
    }
}

#[test]
fn exact_steps_keep_transformed_gradients_orthogonal() {
    // p_k . g_k = 0 under exact steps, relative to the run's gradient scale
    for kappa in [1e1, 3e1, 1e2] {
        for seed in 0..30 {
            let q = QuadraticObjective::random_spd(8, kappa, seed).unwrap();
            let x0 = vec![1.0; 8];
            let opts = RunOptions::exact(TerminationPolicy {
                grad_rel_tol: 1e-4,
                max_iterations: 8,
                ..TerminationPolicy::default()
            });
            let report = minimize(OptimizerKind::Sdicov, &q, &x0, &opts);
            let g0 = report.initial_grad_norm;
            for rec in &report.records {
                let (Some(p), Some(g)) = (&rec.p, &rec.g) else {
                    panic!("missing trace at k={}", rec.k)
                };
                let overlap = dot(p, g).abs();
                assert!(
                    overlap <= IDENTITY_TOL * norm(p) * g0,
                    "kappa {kappa:.0e} seed {seed} k={}: p.g = {:.3e}",
                    rec.k,
                    overlap
                );
            }
        }
    }
}

#[test]
fn few_distinct_eigenvalues_finish_in_few_steps() {
    // three distinct eigenvalues: both the linear solver and the rewrite run
    // terminate within three iterations regardless of dimension
    let eigs: Vec<f64> = (0..12).map(|i| [1.0, 4.0, 9.0][i % 3]).collect();
    let q = QuadraticObjective::with_eigenvalues(&eigs, 99).unwrap();
    let x0 = vec![1.0; 12];

    let cg = linear_cg(q.a(), q.b().as_slice(), &x0, 1e-8).unwrap();
    assert!(cg.converged);
    assert!(cg.iterations() <= 3, "linear solver took {}", cg.iterations());

    let run = algorithm1_quadratic(&q, &x0, 1e-8).unwrap();
    assert!(run.converged);
    assert!(run.iterations() <= 3, "rewrite run took {}", run.iterations());
}
