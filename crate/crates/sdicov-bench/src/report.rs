//! Report emission. CSV carries full 17-significant-digit precision with
//! the config echoed in comment lines; markdown mirrors the benchmark-table
//! layout (one row per optimizer, one column per problem, empty cell = no
//! successful trial).

use std::fmt::Write as _;

use crate::config::BenchConfig;
use crate::runner::BenchOutcome;

/// 17 significant digits: enough to round-trip any f64.
pub(crate) fn full(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn metadata(config: &BenchConfig, timestamp: Option<u64>, prefix: &str) -> String {
    let mut out = String::new();
    for line in config.echo_lines() {
        let _ = writeln!(out, "{prefix}config: {line}");
    }
    if let Some(ts) = timestamp {
        let _ = writeln!(out, "{prefix}timestamp: {ts}");
    }
    out
}

pub fn render_csv(config: &BenchConfig, outcome: &BenchOutcome, timestamp: Option<u64>) -> String {
    let mut out = metadata(config, timestamp, "# ");
    out.push_str(
        "row,problem,optimizer,trial,seed,status,iterations,final_f,final_grad_rel,\
         f_evals,g_evals,successes,trials,mean_iterations,min_iterations,max_iterations,\
         mean_final_f,mean_final_grad_rel,failure_reasons\n",
    );
    for r in &outcome.trial_rows {
        let _ = writeln!(
            out,
            "trial,{},{},{},{},{},{},{},{},{},{},,,,,,,,",
            csv_field(&r.problem),
            r.optimizer,
            r.trial,
            r.seed,
            r.status,
            r.iterations,
            full(r.final_f),
            full(r.final_grad_rel),
            r.f_evals,
            r.g_evals,
        );
    }
    for c in &outcome.cells {
        let opt = |v: Option<f64>| v.map(full).unwrap_or_default();
        let opt_n = |v: Option<usize>| v.map(|n| n.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "mean,{},{},,,,,,,,,{},{},{},{},{},{},{},{}",
            csv_field(&c.problem),
            c.optimizer,
            c.successes,
            c.trials,
            opt(c.mean_iterations),
            opt_n(c.min_iterations),
            opt_n(c.max_iterations),
            opt(c.mean_final_f),
            opt(c.mean_final_grad_rel),
            csv_field(&c.failure_reasons),
        );
    }
    out
}

pub fn render_markdown(
    config: &BenchConfig,
    outcome: &BenchOutcome,
    timestamp: Option<u64>,
) -> String {
    let mut out = String::from("# Benchmark report\n\n");
    for line in metadata(config, timestamp, "- ").lines() {
        let _ = writeln!(out, "{line}");
    }
    out.push('\n');

    // column per problem, preserving config order without duplicates
    let mut problems: Vec<&str> = Vec::new();
    for c in &outcome.cells {
        if !problems.contains(&c.problem.as_str()) {
            problems.push(&c.problem);
        }
    }
    let mut optimizers: Vec<&str> = Vec::new();
    for c in &outcome.cells {
        if !optimizers.contains(&c.optimizer) {
            optimizers.push(c.optimizer);
        }
    }

    out.push_str("## Mean iterations over successful trials\n\n");
    let _ = writeln!(out, "| optimizer | {} |", problems.join(" | "));
    let _ = writeln!(out, "|---|{}", "---|".repeat(problems.len()));
    for opt in &optimizers {
        let cells: Vec<String> = problems
            .iter()
            .map(|p| {
                outcome
                    .cells
                    .iter()
                    .find(|c| c.optimizer == *opt && c.problem == *p)
                    .and_then(|c| c.mean_iterations)
                    .map(|m| format!("{m:.1}"))
                    .unwrap_or_default()
            })
            .collect();
        let _ = writeln!(out, "| {opt} | {} |", cells.join(" | "));
    }

    let failures: Vec<String> = outcome
        .cells
        .iter()
        .filter(|c| !c.failure_reasons.is_empty())
        .map(|c| format!("- {} on {}: {}", c.optimizer, c.problem, c.failure_reasons))
        .collect();
    if !failures.is_empty() {
        out.push_str("\n## Failures\n\n");
        for f in failures {
            let _ = writeln!(out, "{f}");
        }
    }

    out.push_str("\n## Trials\n\n");
    out.push_str(
        "| problem | optimizer | trial | seed | status | iterations | final_f | final_grad_rel | f_evals | g_evals |\n",
    );
    out.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
    for r in &outcome.trial_rows {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {:.6e} | {:.6e} | {} | {} |",
            r.problem,
            r.optimizer,
            r.trial,
            r.seed,
            r.status,
            r.iterations,
            r.final_f,
            r.final_grad_rel,
            r.f_evals,
            r.g_evals,
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ProblemSpec;
    use crate::runner::run_bench;
    use sdicov::OptimizerKind;

    fn outcome() -> (BenchConfig, BenchOutcome) {
        let config = BenchConfig {
            problems: vec![ProblemSpec::Quadratic { n: 4, kappa: 5.0 }],
            optimizers: vec![OptimizerKind::Sdicov, OptimizerKind::Bfgs],
            trials: 2,
            ..BenchConfig::default()
        };
        let outcome = run_bench(&config).unwrap();
        (config, outcome)
    }

    #[test]
    fn csv_has_trial_and_mean_rows_under_one_header() {
        let (config, outcome) = outcome();
        let csv = render_csv(&config, &outcome, None);
        let headers: Vec<&str> = csv.lines().filter(|l| l.starts_with("row,")).collect();
        assert_eq!(headers.len(), 1);
        assert_eq!(csv.lines().filter(|l| l.starts_with("trial,")).count(), 4);
        assert_eq!(csv.lines().filter(|l| l.starts_with("mean,")).count(), 2);
        assert!(!csv.contains("timestamp"));
        let widths: Vec<usize> = csv
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| l.split(',').count())
            .collect();
        assert!(widths.windows(2).all(|w| w[0] == w[1]), "ragged rows: {widths:?}");
    }

    #[test]
    fn timestamp_is_optional_metadata() {
        let (config, outcome) = outcome();
        let csv = render_csv(&config, &outcome, Some(1234567890));
        assert!(csv.contains("# timestamp: 1234567890"));
    }

    #[test]
    fn markdown_table_has_a_column_per_problem() {
        let (config, outcome) = outcome();
        let md = render_markdown(&config, &outcome, None);
        assert!(md.contains("| optimizer | quadratic-4-k5 |"));
        assert!(md.contains("| sdicov | "));
        assert!(md.contains("## Trials"));
        let sep = md.lines().find(|l| l.starts_with("|---")).unwrap();
        let header = md.lines().find(|l| l.starts_with("| optimizer")).unwrap();
        assert_eq!(
            sep.matches('|').count(),
            header.matches('|').count(),
            "separator must align with the header: {sep}"
        );
    }

    #[test]
    fn fields_with_commas_are_quoted() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn full_precision_round_trips() {
        for v in [1.0 / 3.0, 76.0, 1e-10, -2.5e17] {
            let s = full(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }
}
