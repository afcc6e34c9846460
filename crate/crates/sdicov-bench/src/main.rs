//! Benchmark harness for the transform-chain optimizer library: run
//! optimizer/problem matrices over seeded trials, verify the quadratic-case
//! theorems, generate problem instances, and trace single runs.
//!
//! Exit codes: 0 on success, 1 on configuration or I/O errors and failed
//! verifications, 2 when some optimizer failed every trial of some problem.

mod config;
mod report;
mod runner;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use sdicov::{generate_distg, OptimizerKind};

use config::{
    parse_manifest, parse_optimizer_list, BenchConfig, ConfigError, OutputFormat, PartialConfig,
    ProblemSpec,
};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Parser)]
#[command(
    name = "sdicov-bench",
    about = "Benchmarks and verification for rank-one change-of-variables descent",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an optimizer/problem matrix over seeded trials and emit a report.
    Bench(BenchArgs),
    /// Check a theorem suite over random seeded instances.
    Verify(VerifyArgs),
    /// Generate a problem instance file.
    Gen(GenArgs),
    /// Run one optimizer on one problem and print the per-iteration trace.
    Trace(TraceArgs),
}

#[derive(Args)]
struct BenchArgs {
    /// Manifest file of `key = value` lines; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem spec: "distg <particles>", "quadratic <n> <kappa>", or
    /// "rosenbrock <n>". Repeatable; replaces the manifest's list.
    #[arg(long = "problem", value_name = "SPEC")]
    problems: Vec<String>,
    /// Comma-separated subset of sdicov,bfgs,dfp,cg-pr+,cg-fr.
    #[arg(long, value_name = "LIST")]
    optimizers: Option<String>,
    /// Trials per (problem, optimizer) cell.
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; trial t uses seed + t.
    #[arg(long)]
    seed: Option<u64>,
    /// Relative gradient-norm stopping tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Line-search slope shrink factor in (0, 1).
    #[arg(long = "ls-c")]
    ls_c: Option<f64>,
    /// Fraction of non-spanning particle pairs given a measured distance.
    #[arg(long = "edge-fraction")]
    edge_fraction: Option<f64>,
    /// Start-point noise as a fraction of the configuration diameter.
    #[arg(long = "noise")]
    noise_scale: Option<f64>,
    /// Iteration cap per run.
    #[arg(long = "max-iters")]
    max_iterations: Option<usize>,
    /// Report format: csv or markdown.
    #[arg(long)]
    format: Option<String>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit the timestamp metadata line so reruns are byte-identical.
    #[arg(long)]
    no_timestamp: bool,
}

impl BenchArgs {
    fn to_partial(&self) -> Result<PartialConfig, ConfigError> {
        let mut partial = PartialConfig {
            trials: self.trials,
            seed: self.seed,
            tol: self.tol,
            ls_c: self.ls_c,
            edge_fraction: self.edge_fraction,
            noise_scale: self.noise_scale,
            max_iterations: self.max_iterations,
            ..PartialConfig::default()
        };
        for spec in &self.problems {
            partial.problems.push(spec.parse()?);
        }
        if let Some(list) = &self.optimizers {
            partial.optimizers = Some(parse_optimizer_list(list)?);
        }
        if let Some(fmt) = &self.format {
            partial.format = Some(fmt.parse()?);
        }
        Ok(partial)
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Which theorem suite to run.
    #[arg(value_enum)]
    suite: verify::Suite,
    /// Problem dimension; dense verifiers accept at most 50.
    #[arg(long, default_value_t = 10)]
    size: usize,
    /// Number of random instances.
    #[arg(long, default_value_t = 25)]
    trials: usize,
    /// Base seed; trial t uses seed + t.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenArgs {
    /// Problem kind; only "distg" has a file format.
    kind: String,
    /// Number of particles (at least 3).
    #[arg(long, default_value_t = 10)]
    particles: usize,
    /// Fraction of non-spanning pairs given a measured distance.
    #[arg(long = "edge-fraction", default_value_t = 0.3)]
    edge_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Destination path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TraceArgs {
    /// Problem spec, as in bench.
    #[arg(long = "problem", value_name = "SPEC")]
    problem: String,
    /// One of sdicov, bfgs, dfp, cg-pr+, cg-fr.
    #[arg(long, default_value = "sdicov")]
    optimizer: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "ls-c")]
    ls_c: Option<f64>,
    #[arg(long = "edge-fraction")]
    edge_fraction: Option<f64>,
    #[arg(long = "noise")]
    noise_scale: Option<f64>,
    #[arg(long = "max-iters")]
    max_iterations: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench(args) => cmd_bench(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Trace(args) => cmd_trace(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode, CliError> {
    let mut config = BenchConfig::default();
    if let Some(path) = &args.config {
        let text = read_file(path)?;
        parse_manifest(&text)?.apply_to(&mut config);
    }
    args.to_partial()?.apply_to(&mut config);
    config.validate()?;

    let outcome = runner::run_bench(&config)?;
    let timestamp = if args.no_timestamp {
        None
    } else {
        Some(
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        )
    };
    let text = match config.format {
        OutputFormat::Csv => report::render_csv(&config, &outcome, timestamp),
        OutputFormat::Markdown => report::render_markdown(&config, &outcome, timestamp),
    };
    match &args.out {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    if outcome.any_cell_fully_failed() {
        eprintln!("warning: at least one optimizer failed every trial of some problem");
        Ok(ExitCode::from(2))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, CliError> {
    let rep = verify::run_suite(args.suite, args.size, args.trials, args.seed)?;
    println!("suite: {}", rep.suite);
    println!("size: {}  trials: {}  base seed: {}", rep.size, rep.trials, rep.seed);
    println!("max residual: {:.3e} (bound {:.0e})", rep.max_residual, rep.bound);
    if rep.passed() {
        println!("PASS");
        Ok(ExitCode::SUCCESS)
    } else {
        let (seed, detail) = rep.failure.as_ref().expect("failure details");
        println!("FAIL at seed {seed}: {detail}");
        Ok(ExitCode::from(1))
    }
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode, CliError> {
    if args.kind != "distg" {
        return Err(ConfigError::Invalid(format!(
            "unknown instance kind `{}`; only `distg` can be generated",
            args.kind
        ))
        .into());
    }
    if args.particles < 3 {
        return Err(ConfigError::Invalid(format!(
            "distg needs at least 3 particles, got {}",
            args.particles
        ))
        .into());
    }
    if !(0.0..=1.0).contains(&args.edge_fraction) {
        return Err(ConfigError::Invalid(format!(
            "edge_fraction must lie in [0, 1], got {}",
            args.edge_fraction
        ))
        .into());
    }
    let inst = generate_distg(args.particles, args.edge_fraction, args.seed);
    write_file(&args.out, &inst.to_text())?;
    eprintln!(
        "wrote {} ({} particles, {} edges, seed {})",
        args.out.display(),
        inst.n_particles(),
        inst.edges().len(),
        inst.seed()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_trace(args: TraceArgs) -> Result<ExitCode, CliError> {
    let spec: ProblemSpec = args.problem.parse()?;
    let kind: OptimizerKind = args.optimizer.parse().map_err(|detail: String| {
        ConfigError::BadValue {
            key: "optimizer".into(),
            detail,
        }
    })?;
    let mut config = BenchConfig {
        problems: vec![spec.clone()],
        optimizers: vec![kind],
        trials: 1,
        seed: args.seed,
        ..BenchConfig::default()
    };
    let overrides = PartialConfig {
        tol: args.tol,
        ls_c: args.ls_c,
        edge_fraction: args.edge_fraction,
        noise_scale: args.noise_scale,
        max_iterations: args.max_iterations,
        ..PartialConfig::default()
    };
    overrides.apply_to(&mut config);
    config.validate()?;

    let (oracle, x0, seed) = runner::build_trial(&spec, &config, 0)?;
    let opts = runner::run_options(&spec, &config);
    let run = sdicov::minimize(kind, &oracle, &x0, &opts);

    let full = report::full;
    println!("# problem: {spec}");
    println!("# optimizer: {}", kind.name());
    println!("# seed: {seed}");
    println!("# initial_f: {}", full(run.initial_f));
    println!("# initial_grad_norm: {}", full(run.initial_grad_norm));
    println!("k,f,grad_norm,alpha,ls_status,f_evals,g_evals");
    for rec in &run.records {
        println!(
            "{},{},{},{},{},{},{}",
            rec.k,
            full(rec.f_value),
            full(rec.grad_norm),
            full(rec.alpha),
            rec.ls_status,
            rec.f_evals,
            rec.g_evals
        );
    }
    println!("# status: {} after {} iterations", run.status, run.iterations);
    if let Some(detail) = &run.failure_detail {
        println!("# detail: {detail}");
    }
    if run.status.is_success() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(2))
    }
}
