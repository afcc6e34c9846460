//! End-to-end acceptance suite. Each test covers one release gate and
//! prints a single PASS line with the measured margins (visible under
//! `cargo test --test acceptance -- --nocapture`).

use std::time::Instant;

use nalgebra::DMatrix;
use sdicov::line_search::LineSearchSpec;
use sdicov::quadratic::{
    verify_algorithm_equivalence, verify_cg_equivalence, verify_secant, verify_subspace_shrinkage,
};
use sdicov::rng::SeededRng;
use sdicov::{
    generate_distg, minimize, standard_suite, LineSearchStatus, ObjectiveOracle, OptimizerKind,
    QuadraticObjective, RankOneTransform, RunOptions, RunReport, RunStatus, Rosenbrock, StepEvent,
    TerminationPolicy, TransformChain,
};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn exact_options(tol: f64, cap: usize) -> RunOptions {
    RunOptions::exact(TerminationPolicy {
        grad_rel_tol: tol,
        max_iterations: cap,
        ..TerminationPolicy::default()
    })
}

#[test]
fn quadratics_terminate_within_dimension_steps() {
    // 100 seeded SPD instances across three sizes; condition numbers sit at
    // the double-precision feasibility edge for each size (larger kappa at
    // n = 20 pushes terminal gradients below the attainable floor)
    let t0 = Instant::now();
    let schedule: [(usize, f64, u64); 3] = [(5, 3e2, 34), (10, 3e1, 33), (20, 1e1, 33)];
    let mut runs = 0;
    let mut worst_iters_over_n = 0.0f64;
    for &(n, kappa, seeds) in &schedule {
        for seed in 0..seeds {
            let q = QuadraticObjective::random_spd(n, kappa, seed).unwrap();
            let x0 = vec![1.0; n];
            let report = minimize(OptimizerKind::Sdicov, &q, &x0, &exact_options(1e-8, n));
            assert_eq!(
                report.status,
                RunStatus::GradConverged,
                "n={n} kappa={kappa:.0e} seed={seed}: {:?} after {} iters (grad {:.3e})",
                report.status,
                report.iterations,
                report.final_grad_norm / report.initial_grad_norm
            );
            assert!(report.iterations <= n);
            worst_iters_over_n = worst_iters_over_n.max(report.iterations as f64 / n as f64);
            runs += 1;
        }
    }
    let elapsed = t0.elapsed();
    assert_eq!(runs, 100);
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:.1?}");
    println!(
        "PASS finite termination: 100/100 runs reached 1e-8 within n steps \
         (worst iters/n {worst_iters_over_n:.2}, {elapsed:.1?})"
    );
}

#[test]
fn few_distinct_eigenvalues_bound_the_iteration_count() {
    let spectra: [&[f64]; 3] = [
        &[1.0, 10.0],
        &[1.0, 5.0, 25.0],
        &[1.0, 2.0, 4.0, 8.0, 16.0],
    ];
    let n = 20;
    let mut runs = 0;
    for (si, values) in spectra.iter().enumerate() {
        let s = values.len();
        let trials = if si == 2 { 16 } else { 17 };
        for trial in 0..trials {
            let eigs: Vec<f64> = (0..n).map(|i| values[i % s]).collect();
            let q = QuadraticObjective::with_eigenvalues(&eigs, 7000 + trial).unwrap();
            let x0: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
            let report = minimize(OptimizerKind::Sdicov, &q, &x0, &exact_options(1e-8, n));
            assert_eq!(report.status, RunStatus::GradConverged, "s={s} trial={trial}");
            assert!(
                report.iterations <= s,
                "s={s} trial={trial}: took {} iterations",
                report.iterations
            );
            runs += 1;
        }
    }
    assert_eq!(runs, 50);
    println!("PASS distinct-eigenvalue bound: 50/50 runs finished within s steps for s in {{2,3,5}}");
}

#[test]
fn transform_runs_match_conjugate_gradient_iterates() {
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let q = QuadraticObjective::random_spd(10, 12.0, seed).unwrap();
        let x0 = vec![1.0; 10];
        let report = verify_cg_equivalence(&q, &x0).unwrap();
        assert!(report.lengths_match(), "seed {seed}: run lengths differ");
        assert!(
            report.max_deviation <= 1e-8,
            "seed {seed}: max deviation {:.3e}",
            report.max_deviation
        );
        worst = worst.max(report.max_deviation);
    }
    println!(
        "PASS linear-CG equivalence: direction/gradient/step traces agree over 100 runs \
         (worst deviation {worst:.2e} vs 1e-8)"
    );
}

#[test]
fn secant_condition_holds_at_every_applicable_step() {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for seed in 0..50 {
        let q = QuadraticObjective::random_spd(10, 1e2, seed).unwrap();
        let x0 = vec![1.0; 10];
        // the condition relates consecutive recorded steps; it holds whether
        // or not the run has terminated, so the status is not constrained
        let report = minimize(OptimizerKind::Sdicov, &q, &x0, &exact_options(1e-8, 10));
        for k in 1..report.iterations {
            let res = verify_secant(&q, &report, k).unwrap();
            assert!(
                res.residual <= 1e-8,
                "seed {seed} k={k}: secant residual {:.3e}",
                res.residual
            );
            worst = worst.max(res.residual);
            checked += 1;
        }
    }
    assert!(checked > 0);
    println!(
        "PASS secant condition: H_(k+1) y_k = m_k at all {checked} applicable steps \
         (worst residual {worst:.2e} vs 1e-8)"
    );
}

#[test]
fn krylov_dimension_shrinks_strictly_each_iteration() {
    let mut worst_containment = 0.0f64;
    let mut worst_overlap = 0.0f64;
    for seed in 0..25 {
        let q = QuadraticObjective::random_spd(8, 3.0, seed).unwrap();
        let w0 = vec![0.5; 8];
        let report = verify_subspace_shrinkage(&q, &w0).unwrap();
        assert!(report.converged, "seed {seed}");
        assert!(
            report.strictly_decreasing,
            "seed {seed}: dims {:?} not strictly decreasing",
            report.dims
        );
        assert!(
            report.max_containment_residual <= 1e-6,
            "seed {seed}: containment residual {:.3e}",
            report.max_containment_residual
        );
        assert!(
            report.max_direction_overlap <= 1e-6,
            "seed {seed}: overlap with searched direction {:.3e}",
            report.max_direction_overlap
        );
        worst_containment = worst_containment.max(report.max_containment_residual);
        worst_overlap = worst_overlap.max(report.max_direction_overlap);
    }
    println!(
        "PASS invariant-subspace shrinkage: 25/25 runs strictly decreasing \
         (containment {worst_containment:.2e}, direction overlap {worst_overlap:.2e} vs 1e-6)"
    );
}

/// Draws a direction with norm bounded away from zero and a partner vector
/// rescaled so the resulting map stays well-conditioned; margins compound
/// safely across chains of up to six members.
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

fn dense_of(t: &RankOneTransform) -> DMatrix<f64> {
    let n = t.dimension();
    let p = t.p();
    let g = t.g();
    let pn2 = dot(p, p);
    DMatrix::from_fn(n, n, |i, j| {
        let eye = if i == j { 1.0 } else { 0.0 };
        eye + p[i] * g[j] / pn2
    })
}

#[test]
fn transform_chain_ops_agree_with_dense_matrices() {
    let mut worst = 0.0f64;
    for case in 0..200u64 {
        let mut rng = SeededRng::new(42 + case);
        let n = 1 + rng.below(8);
        let members = rng.below(7);
        let mut chain = TransformChain::new(n);
        let mut dense = DMatrix::<f64>::identity(n, n);
        for _ in 0..members {
            let (p, g) = draw_member(&mut rng, n);
            let t = RankOneTransform::new(p, g, sdicov::transform::EPS_INV).unwrap();
            dense = &dense * dense_of(&t);
            chain.push(t).unwrap();
        }
        let x: Vec<f64> = (0..n).map(|_| rng.uniform_in(-2.0, 2.0)).collect();
        let xv = nalgebra::DVector::from_column_slice(&x);

        let mut check = |got: &[f64], want: nalgebra::DVector<f64>, op: &str| {
            let dev = max_abs_diff(got, want.as_slice());
            let scale = norm(&x) + norm(want.as_slice());
            assert!(
                dev <= 1e-10 * scale,
                "case {case} ({op}, n={n}, k={members}): deviation {dev:.3e} at scale {scale:.3e}"
            );
            worst = worst.max(dev / scale);
        };
        check(&chain.forward(&x).unwrap(), &dense * &xv, "forward");
        check(&chain.adjoint(&x).unwrap(), dense.transpose() * &xv, "adjoint");
        check(
            &chain.h_apply(&x).unwrap(),
            &dense * (dense.transpose() * &xv),
            "h_apply",
        );
        let lu = dense.clone().lu();
        let solved = lu.solve(&xv).expect("dense chain matrix is singular");
        check(&chain.inverse(&x).unwrap(), solved, "inverse");

        if members > 0 {
            let t = &chain.members()[0];
            let single = dense_of(t);
            check(&t.apply(&x).unwrap(), &single * &xv, "single apply");
            check(&t.apply_adjoint(&x).unwrap(), single.transpose() * &xv, "single adjoint");
            let lu = single.clone().lu();
            let solved = lu.solve(&xv).expect("member matrix is singular");
            check(&t.apply_inverse(&x).unwrap(), solved, "single inverse");
        }
    }
    println!(
        "PASS dense-oracle agreement: apply/adjoint/inverse/chain/h_apply over 200 cases \
         (worst relative deviation {worst:.2e} vs 1e-10)"
    );
}

#[test]
fn explicit_rewrite_and_chain_driver_traces_coincide() {
    let mut worst = 0.0f64;
    for seed in 0..25 {
        let q = QuadraticObjective::random_spd(10, 12.0, seed).unwrap();
        let x0 = vec![0.5; 10];
        let report = verify_algorithm_equivalence(&q, &x0).unwrap();
        assert!(report.lengths_match(), "seed {seed}: run lengths differ");
        assert!(
            report.max_deviation <= 1e-10,
            "seed {seed}: max deviation {:.3e}",
            report.max_deviation
        );
        worst = worst.max(report.max_deviation);
    }
    println!(
        "PASS rewrite/chain equivalence: p, g, alpha and mapped iterates agree over 25 runs \
         (worst deviation {worst:.2e} vs 1e-10)"
    );
}

#[test]
fn placement_gradient_matches_finite_differences() {
    let mut worst = 0.0f64;
    for i in 0..10u64 {
        let particles = 5 + (i as usize) % 8;
        let inst = generate_distg(particles, 0.4, 200 + i);
        for pt in 0..20u64 {
            let x = inst.initial_point(0.3, 5000 + 97 * i + pt);
            let g = inst.gradient_at(&x);
            let h = 1e-6;
            let mut fd = vec![0.0; x.len()];
            for j in 0..x.len() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                fd[j] = (inst.value_at(&xp) - inst.value_at(&xm)) / (2.0 * h);
            }
            let rel = max_abs_diff(&g, &fd) / norm(&g);
            assert!(rel <= 1e-6, "instance {i} point {pt}: relative error {rel:.3e}");
            worst = worst.max(rel);
        }
    }
    println!(
        "PASS analytic gradient: matches central differences at 200 points \
         (worst relative error {worst:.2e} vs 1e-6)"
    );
}

/// One benchmark cell: 4 seeded trials of one optimizer at one size.
fn benchmark_cell(kind: OptimizerKind, particles: usize) -> Vec<RunReport> {
    (0..4u64)
        .map(|trial| {
            let inst = generate_distg(particles, 0.35, trial);
            let x0 = inst.initial_point(0.1, 1000 + trial);
            minimize(kind, &inst, &x0, &RunOptions::default())
        })
        .collect()
}

fn converged_mean(reports: &[RunReport]) -> (usize, f64) {
    let iters: Vec<f64> = reports
        .iter()
        .filter(|r| r.status == RunStatus::GradConverged)
        .map(|r| r.iterations as f64)
        .collect();
    let mean = iters.iter().sum::<f64>() / iters.len().max(1) as f64;
    (iters.len(), mean)
}

#[test]
fn placement_benchmark_lands_in_reference_iteration_bands() {
    // reference mean iteration counts for this experiment family: 34 at 10
    // particles and 76 at 100; instance construction is seeded here, so only
    // the band [0.3x, 3x] and the method ordering are stable claims
    let t0 = Instant::now();
    let mut summary = String::new();
    for (particles, reference) in [(10usize, 34.0f64), (100, 76.0)] {
        let mut means = Vec::new();
        for kind in OptimizerKind::ALL {
            let reports = benchmark_cell(kind, particles);
            let (converged, mean) = converged_mean(&reports);
            assert!(
                converged >= 3,
                "{kind} at {particles} particles: only {converged}/4 trials converged"
            );
            means.push((kind, mean));
        }
        let sdicov_mean = means[0].1;
        assert!(
            sdicov_mean >= 0.3 * reference && sdicov_mean <= 3.0 * reference,
            "{particles} particles: mean {sdicov_mean:.1} outside [{:.1}, {:.1}]",
            0.3 * reference,
            3.0 * reference
        );
        if particles == 10 {
            let by_kind = |k: OptimizerKind| means.iter().find(|(m, _)| *m == k).unwrap().1;
            let best_qn = by_kind(OptimizerKind::Sdicov)
                .min(by_kind(OptimizerKind::Bfgs))
                .min(by_kind(OptimizerKind::Dfp));
            assert!(
                by_kind(OptimizerKind::CgFr) > by_kind(OptimizerKind::CgPrPlus) && by_kind(OptimizerKind::CgPrPlus) > best_qn,
                "10 particles: ordering CG-FR > CG-PR+ > best quasi-Newton violated: {means:?}"
            );
        }
        summary.push_str(&format!(
            " [{particles}p: {}]",
            means
                .iter()
                .map(|(k, m)| format!("{k} {m:.0}"))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:.1?}");
    println!("PASS benchmark bands: means within [0.3x, 3x] of references 34/76,{summary} ({elapsed:.1?})");
}

#[test]
fn benchmark_directions_always_descend() {
    let mut records = 0usize;
    let mut check = |report: &RunReport, label: &str| {
        for rec in &report.records {
            assert!(
                !matches!(rec.event, Some(StepEvent::TransformSkipped { .. })),
                "{label}: near-singular transform at k={}",
                rec.k
            );
            assert_ne!(
                rec.ls_status,
                LineSearchStatus::NonDescent,
                "{label}: non-descent direction at k={}",
                rec.k
            );
            assert!(
                rec.dir_slope < 0.0,
                "{label}: direction slope {:.3e} at k={}",
                rec.dir_slope,
                rec.k
            );
            records += 1;
        }
    };
    for particles in [10usize, 100] {
        for report in benchmark_cell(OptimizerKind::Sdicov, particles) {
            check(&report, &format!("{particles} particles"));
        }
    }
    for bundle in standard_suite() {
        let report = minimize(
            OptimizerKind::Sdicov,
            &bundle.oracle,
            &bundle.x0,
            &RunOptions::default(),
        );
        check(&report, &bundle.name);
    }
    println!(
        "PASS descent property: all {records} recorded directions descend, \
         zero near-singular or non-descent events"
    );
}

#[test]
fn all_five_optimizers_solve_rosenbrock() {
    let rosen = Rosenbrock::new(2);
    let opts = RunOptions::bisection(
        LineSearchSpec::default(),
        TerminationPolicy {
            max_iterations: 2000,
            ..TerminationPolicy::default()
        },
    );
    let mut counts = Vec::new();
    for kind in OptimizerKind::ALL {
        let report = minimize(kind, &rosen, &[-1.2, 1.0], &opts);
        assert_eq!(
            report.status,
            RunStatus::GradConverged,
            "{kind}: {:?} after {} iterations (grad {:.3e})",
            report.status,
            report.iterations,
            report.final_grad_norm
        );
        counts.push(format!("{kind} {}", report.iterations));
    }
    println!(
        "PASS robustness: all five optimizers converge on 2-D Rosenbrock ({})",
        counts.join(", ")
    );
}
