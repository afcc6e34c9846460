//! Executes the (problem x optimizer x trial) matrix and aggregates rows.

use sdicov::line_search::LineSearchSpec;
use sdicov::{
    generate_distg, minimize, ObjectiveOracle, OptimizerKind, QuadraticObjective, RunOptions,
    RunStatus, Rosenbrock, TerminationPolicy,
};

use crate::config::{BenchConfig, ConfigError, ProblemSpec};

/// One finished optimizer run.
#[derive(Debug, Clone)]
pub struct TrialRow {
    pub problem: String,
    pub optimizer: &'static str,
    pub trial: usize,
    pub seed: u64,
    pub status: RunStatus,
    pub iterations: usize,
    pub final_f: f64,
    /// Final gradient norm relative to the starting one.
    pub final_grad_rel: f64,
    pub f_evals: u64,
    pub g_evals: u64,
}

/// Aggregate over one (problem, optimizer) cell; means cover successful
/// trials only, and `None` marks a cell with no successes.
#[derive(Debug, Clone)]
pub struct CellSummary {
    pub problem: String,
    pub optimizer: &'static str,
    pub trials: usize,
    pub successes: usize,
    pub mean_iterations: Option<f64>,
    pub min_iterations: Option<usize>,
    pub max_iterations: Option<usize>,
    pub mean_final_f: Option<f64>,
    pub mean_final_grad_rel: Option<f64>,
    /// Statuses of failed trials, comma separated, empty when all succeeded.
    pub failure_reasons: String,
}

#[derive(Debug)]
pub struct BenchOutcome {
    pub trial_rows: Vec<TrialRow>,
    pub cells: Vec<CellSummary>,
}

impl BenchOutcome {
    /// An optimizer that failed every trial of some problem marks the whole
    /// run as degraded (exit code 2).
    pub fn any_cell_fully_failed(&self) -> bool {
        self.cells.iter().any(|c| c.successes == 0)
    }
}

/// Builds the objective and start point for one trial. The trial seed
/// offsets the configured base seed; start-point noise draws from an
/// independent stream so instance and initialization never share one.
pub fn build_trial(
    spec: &ProblemSpec,
    config: &BenchConfig,
    trial: usize,
) -> Result<(Box<dyn ObjectiveOracle>, Vec<f64>, u64), ConfigError> {
    let seed = config.seed + trial as u64;
    match *spec {
        ProblemSpec::Distg { particles } => {
            if particles < 3 {
                return Err(ConfigError::Invalid(format!(
                    "distg needs at least 3 particles, got {particles}"
                )));
            }
            let inst = generate_distg(particles, config.edge_fraction, seed);
            let x0 = inst.initial_point(config.noise_scale, 1000 + seed);
            Ok((Box::new(inst), x0, seed))
        }
        ProblemSpec::Quadratic { n, kappa } => {
            if n == 0 || kappa < 1.0 {
                return Err(ConfigError::Invalid(format!(
                    "quadratic needs n >= 1 and kappa >= 1, got n={n} kappa={kappa}"
                )));
            }
            let q = QuadraticObjective::random_spd(n, kappa, seed)
                .map_err(|e| ConfigError::Invalid(format!("quadratic generation: {e}")))?;
            Ok((Box::new(q), vec![1.0; n], seed))
        }
        ProblemSpec::Rosenbrock { n } => {
            if n < 2 {
                return Err(ConfigError::Invalid(format!(
                    "rosenbrock needs n >= 2, got {n}"
                )));
            }
            let r = Rosenbrock::new(n);
            let x0 = r.standard_start();
            Ok((Box::new(r), x0, seed))
        }
    }
}

pub fn run_options(spec: &ProblemSpec, config: &BenchConfig) -> RunOptions {
    let termination = TerminationPolicy {
        grad_rel_tol: config.tol,
        max_iterations: config.max_iterations,
        ..TerminationPolicy::default()
    };
    if spec.uses_exact_steps() {
        RunOptions::exact(termination)
    } else {
        let ls = LineSearchSpec {
            shrink_factor: config.ls_c,
            ..LineSearchSpec::default()
        };
        RunOptions::bisection(ls, termination)
    }
}

pub fn run_bench(config: &BenchConfig) -> Result<BenchOutcome, ConfigError> {
    let mut trial_rows = Vec::new();
    let mut cells = Vec::new();
    for spec in &config.problems {
        let opts = run_options(spec, config);
        for &kind in &config.optimizers {
            let mut rows = Vec::with_capacity(config.trials);
            for trial in 0..config.trials {
                let (oracle, x0, seed) = build_trial(spec, config, trial)?;
                let report = minimize(kind, &oracle, &x0, &opts);
                rows.push(TrialRow {
                    problem: spec.to_string(),
                    optimizer: kind.name(),
                    trial,
                    seed,
                    status: report.status,
                    iterations: report.iterations,
                    final_f: report.final_f,
                    final_grad_rel: report.final_grad_norm
                        / report.initial_grad_norm.max(f64::MIN_POSITIVE),
                    f_evals: report.f_evals,
                    g_evals: report.g_evals,
                });
            }
            cells.push(summarize(spec.to_string(), kind, &rows));
            trial_rows.extend(rows);
        }
    }
    Ok(BenchOutcome { trial_rows, cells })
}

fn summarize(problem: String, kind: OptimizerKind, rows: &[TrialRow]) -> CellSummary {
    let ok: Vec<&TrialRow> = rows
        .iter()
        .filter(|r| r.status == RunStatus::GradConverged)
        .collect();
    let mean = |f: &dyn Fn(&TrialRow) -> f64| -> Option<f64> {
        if ok.is_empty() {
            None
        } else {
            Some(ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64)
        }
    };
    let failures: Vec<String> = rows
        .iter()
        .filter(|r| r.status != RunStatus::GradConverged)
        .map(|r| format!("trial {}: {}", r.trial, r.status))
        .collect();
    CellSummary {
        problem,
        optimizer: kind.name(),
        trials: rows.len(),
        successes: ok.len(),
        mean_iterations: mean(&|r| r.iterations as f64),
        min_iterations: ok.iter().map(|r| r.iterations).min(),
        max_iterations: ok.iter().map(|r| r.iterations).max(),
        mean_final_f: mean(&|r| r.final_f),
        mean_final_grad_rel: mean(&|r| r.final_grad_rel),
        failure_reasons: failures.join("; "),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> BenchConfig {
        BenchConfig {
            problems: vec![ProblemSpec::Quadratic { n: 6, kappa: 10.0 }],
            optimizers: vec![OptimizerKind::Sdicov],
            trials: 2,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn quadratic_cell_converges_within_dimension() {
        let outcome = run_bench(&small_config()).unwrap();
        assert_eq!(outcome.trial_rows.len(), 2);
        assert_eq!(outcome.cells.len(), 1);
        let cell = &outcome.cells[0];
        assert_eq!(cell.successes, 2);
        assert!(cell.mean_iterations.unwrap() <= 6.0);
        assert!(!outcome.any_cell_fully_failed());
    }

    #[test]
    fn starved_iteration_budget_marks_full_failure() {
        let mut config = small_config();
        config.problems = vec![ProblemSpec::Rosenbrock { n: 2 }];
        config.max_iterations = 2;
        config.trials = 1;
        let outcome = run_bench(&config).unwrap();
        assert!(outcome.any_cell_fully_failed());
        assert_eq!(outcome.cells[0].mean_iterations, None);
        assert!(!outcome.cells[0].failure_reasons.is_empty());
    }

    #[test]
    fn means_are_recomputable_from_trial_rows() {
        let mut config = small_config();
        config.trials = 3;
        let outcome = run_bench(&config).unwrap();
        let cell = &outcome.cells[0];
        let from_rows: f64 = outcome
            .trial_rows
            .iter()
            .filter(|r| r.status == RunStatus::GradConverged)
            .map(|r| r.iterations as f64)
            .sum::<f64>()
            / cell.successes as f64;
        assert_eq!(cell.mean_iterations.unwrap(), from_rows);
    }

    #[test]
    fn degenerate_specs_are_rejected() {
        let config = BenchConfig {
            problems: vec![ProblemSpec::Distg { particles: 2 }],
            ..small_config()
        };
        assert!(run_bench(&config).is_err());
        let config = BenchConfig {
            problems: vec![ProblemSpec::Rosenbrock { n: 1 }],
            ..small_config()
        };
        assert!(run_bench(&config).is_err());
    }
}
