//! Benchmark configuration: a flat key-value manifest file plus CLI flag
//! overrides, flags winning field by field.

use std::fmt;
use std::str::FromStr;

use sdicov::OptimizerKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("invalid value for `{key}`: {detail}")]
    BadValue { key: String, detail: String },
    #[error("invalid problem spec `{0}`: expected `distg <particles>`, `quadratic <n> <kappa>`, or `rosenbrock <n>`")]
    BadProblem(String),
    #[error("config invalid: {0}")]
    Invalid(String),
}

/// One problem family entry in the benchmark matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Distg { particles: usize },
    Quadratic { n: usize, kappa: f64 },
    Rosenbrock { n: usize },
}

impl ProblemSpec {
    /// Quadratics run with closed-form steps; everything else uses the
    /// bisection search.
    pub fn uses_exact_steps(&self) -> bool {
        matches!(self, ProblemSpec::Quadratic { .. })
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemSpec::Distg { particles } => write!(f, "distg-{particles}"),
            ProblemSpec::Quadratic { n, kappa } => write!(f, "quadratic-{n}-k{kappa:.0}"),
            ProblemSpec::Rosenbrock { n } => write!(f, "rosenbrock-{n}"),
        }
    }
}

impl FromStr for ProblemSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConfigError::BadProblem(s.to_string());
        let mut parts = s.split_whitespace();
        let kind = parts.next().ok_or_else(bad)?;
        let spec = match kind {
            "distg" => ProblemSpec::Distg {
                particles: parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?,
            },
            "quadratic" => ProblemSpec::Quadratic {
                n: parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?,
                kappa: parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?,
            },
            "rosenbrock" => ProblemSpec::Rosenbrock {
                n: parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "markdown" => Ok(OutputFormat::Markdown),
            other => Err(ConfigError::BadValue {
                key: "format".into(),
                detail: format!("expected csv or markdown, got `{other}`"),
            }),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Markdown => "markdown",
        })
    }
}

/// Fully resolved benchmark settings.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub problems: Vec<ProblemSpec>,
    pub optimizers: Vec<OptimizerKind>,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub ls_c: f64,
    pub edge_fraction: f64,
    pub noise_scale: f64,
    pub max_iterations: usize,
    pub format: OutputFormat,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            problems: Vec::new(),
            optimizers: OptimizerKind::ALL.to_vec(),
            trials: 4,
            seed: 0,
            tol: 1e-5,
            ls_c: 0.2,
            edge_fraction: 0.3,
            noise_scale: 0.05,
            max_iterations: 5000,
            format: OutputFormat::Csv,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: String| Err(ConfigError::Invalid(msg));
        if self.problems.is_empty() {
            return fail("at least one problem is required".into());
        }
        if self.optimizers.is_empty() {
            return fail("at least one optimizer is required".into());
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return fail(format!("tol must lie in (0, 1), got {}", self.tol));
        }
        if !(self.ls_c > 0.0 && self.ls_c < 1.0) {
            return fail(format!("ls_c must lie in (0, 1), got {}", self.ls_c));
        }
        if !(0.0..=1.0).contains(&self.edge_fraction) {
            return fail(format!(
                "edge_fraction must lie in [0, 1], got {}",
                self.edge_fraction
            ));
        }
        if !(self.noise_scale >= 0.0) {
            return fail(format!("noise must be nonnegative, got {}", self.noise_scale));
        }
        if self.max_iterations == 0 {
            return fail("max_iterations must be at least 1".into());
        }
        Ok(())
    }

    /// One `key = value` line per setting, for the report's config echo.
    pub fn echo_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        for p in &self.problems {
            let spec = match p {
                ProblemSpec::Distg { particles } => format!("distg {particles}"),
                ProblemSpec::Quadratic { n, kappa } => format!("quadratic {n} {kappa}"),
                ProblemSpec::Rosenbrock { n } => format!("rosenbrock {n}"),
            };
            lines.push(format!("problem = {spec}"));
        }
        lines.push(format!(
            "optimizers = {}",
            self.optimizers
                .iter()
                .map(|k| k.name())
                .collect::<Vec<_>>()
                .join(",")
        ));
        lines.push(format!("trials = {}", self.trials));
        lines.push(format!("seed = {}", self.seed));
        lines.push(format!("tol = {:e}", self.tol));
        lines.push(format!("ls_c = {}", self.ls_c));
        lines.push(format!("edge_fraction = {}", self.edge_fraction));
        lines.push(format!("noise = {}", self.noise_scale));
        lines.push(format!("max_iterations = {}", self.max_iterations));
        lines.push(format!("format = {}", self.format));
        lines
    }
}

/// Settings parsed from a manifest file or flags; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct PartialConfig {
    pub problems: Vec<ProblemSpec>,
    pub optimizers: Option<Vec<OptimizerKind>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub ls_c: Option<f64>,
    pub edge_fraction: Option<f64>,
    pub noise_scale: Option<f64>,
    pub max_iterations: Option<usize>,
    pub format: Option<OutputFormat>,
}

impl PartialConfig {
    /// Applies `self` on top of `base`; problem lists replace rather than
    /// concatenate, so flags fully override the manifest.
    pub fn apply_to(&self, base: &mut BenchConfig) {
        if !self.problems.is_empty() {
            base.problems = self.problems.clone();
        }
        if let Some(v) = &self.optimizers {
            base.optimizers = v.clone();
        }
        if let Some(v) = self.trials {
            base.trials = v;
        }
        if let Some(v) = self.seed {
            base.seed = v;
        }
        if let Some(v) = self.tol {
            base.tol = v;
        }
        if let Some(v) = self.ls_c {
            base.ls_c = v;
        }
        if let Some(v) = self.edge_fraction {
            base.edge_fraction = v;
        }
        if let Some(v) = self.noise_scale {
            base.noise_scale = v;
        }
        if let Some(v) = self.max_iterations {
            base.max_iterations = v;
        }
        if let Some(v) = self.format {
            base.format = v;
        }
    }
}

pub fn parse_optimizer_list(s: &str) -> Result<Vec<OptimizerKind>, ConfigError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<OptimizerKind>().map_err(|_| ConfigError::BadValue {
                key: "optimizers".into(),
                detail: format!("unknown optimizer `{t}`"),
            })
        })
        .collect()
}

/// Parses the flat `key = value` manifest format. Blank lines and `#`
/// comments are skipped; `problem` may repeat, every other key may not.
pub fn parse_manifest(text: &str) -> Result<PartialConfig, ConfigError> {
    let mut out = PartialConfig::default();
    let mut seen: Vec<String> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Malformed {
                line,
                text: content.to_string(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if key != "problem" {
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::BadValue {
                    key: key.to_string(),
                    detail: format!("duplicated on line {line}"),
                });
            }
            seen.push(key.to_string());
        }
        let bad = |detail: String| ConfigError::BadValue {
            key: key.to_string(),
            detail,
        };
        match key {
            "problem" => out.problems.push(value.parse()?),
            "optimizers" => out.optimizers = Some(parse_optimizer_list(value)?),
            "trials" => out.trials = Some(value.parse().map_err(|e| bad(format!("{e}")))?),
            "seed" => out.seed = Some(value.parse().map_err(|e| bad(format!("{e}")))?),
            "tol" => out.tol = Some(value.parse().map_err(|e| bad(format!("{e}")))?),
            "ls_c" => out.ls_c = Some(value.parse().map_err(|e| bad(format!("{e}")))?),
            "edge_fraction" => {
                out.edge_fraction = Some(value.parse().map_err(|e| bad(format!("{e}")))?)
            }
            "noise" => out.noise_scale = Some(value.parse().map_err(|e| bad(format!("{e}")))?),
            "max_iterations" => {
                out.max_iterations = Some(value.parse().map_err(|e| bad(format!("{e}")))?)
            }
            "format" => out.format = Some(value.parse()?),
            other => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: other.to_string(),
                })
            }
        }
    }
    Ok(out)
}
