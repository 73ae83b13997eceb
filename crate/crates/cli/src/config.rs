//! Experiment configuration: defaults, flat key-value config files, and
//! command-line overrides (in that precedence order).

use std::fmt;
use std::path::{Path, PathBuf};

use bqflab_core::correlate::XRule;
use bqflab_core::qforms::FundamentalConvention;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Densities,
    SieveBound,
    Theorem1,
    MassCheck,
    DirichletCheck,
    LeastPrime,
    PairCorrelation,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Densities => "densities",
            CommandKind::SieveBound => "sieve-bound",
            CommandKind::Theorem1 => "theorem1",
            CommandKind::MassCheck => "mass-check",
            CommandKind::DirichletCheck => "dirichlet-check",
            CommandKind::LeastPrime => "least-prime",
            CommandKind::PairCorrelation => "pair-correlation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    /// CSV only (the canonical output).
    Csv,
    /// CSV plus a JSON mirror.
    Json,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    /// Discriminant range `d_min < D <= d_max` (both negative).
    pub d_min: i64,
    pub d_max: i64,
    /// Window start: a fixed integer or the rule `hlogd`.
    pub x_rule: XRule,
    /// Sieve level; when absent, the per-discriminant rule `|D|^delta`.
    pub y: Option<u64>,
    pub delta: f64,
    /// Largest `n` in the representation-identity scan.
    pub n_max: u64,
    pub v0_list: Vec<u64>,
    /// Prime search cap for `least-prime`.
    pub bound: u64,
    pub quad_tol: f64,
    pub threads: usize,
    pub seed: u64,
    pub kappa: f64,
    pub convention: FundamentalConvention,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
}

#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

/// Unresolved overrides from a config file or the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub d_min: Option<i64>,
    pub d_max: Option<i64>,
    pub x: Option<String>,
    pub y: Option<u64>,
    pub delta: Option<f64>,
    pub n_max: Option<u64>,
    pub v0: Option<String>,
    pub bound: Option<u64>,
    pub quad_tol: Option<f64>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub kappa: Option<f64>,
    pub convention: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<String>,
}

impl Overrides {
    /// Parse a flat `key = value` file (`#` comments, blank lines allowed).
    pub fn from_file(path: &Path) -> Result<Overrides, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        let mut o = Overrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| UsageError(format!("{}:{}: expected key = value", path.display(), lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            let bad = |e: &dyn fmt::Display| {
                UsageError(format!("{}:{}: bad value for {key}: {e}", path.display(), lineno + 1))
            };
            match key {
                "d_min" => o.d_min = Some(value.parse().map_err(|e| bad(&e))?),
                "d_max" => o.d_max = Some(value.parse().map_err(|e| bad(&e))?),
                "x" => o.x = Some(value.to_string()),
                "y" => o.y = Some(value.parse().map_err(|e| bad(&e))?),
                "delta" => o.delta = Some(value.parse().map_err(|e| bad(&e))?),
                "n_max" => o.n_max = Some(value.parse().map_err(|e| bad(&e))?),
                "v0" => o.v0 = Some(value.to_string()),
                "bound" => o.bound = Some(value.parse().map_err(|e| bad(&e))?),
                "quad_tol" => o.quad_tol = Some(value.parse().map_err(|e| bad(&e))?),
                "threads" => o.threads = Some(value.parse().map_err(|e| bad(&e))?),
                "seed" => o.seed = Some(value.parse().map_err(|e| bad(&e))?),
                "kappa" => o.kappa = Some(value.parse().map_err(|e| bad(&e))?),
                "convention" => o.convention = Some(value.to_string()),
                "out_dir" => o.out_dir = Some(PathBuf::from(value)),
                "format" => o.format = Some(value.to_string()),
                _ => return usage(format!("{}:{}: unknown key '{key}'", path.display(), lineno + 1)),
            }
        }
        Ok(o)
    }

    /// Later overrides win.
    pub fn merge(self, later: Overrides) -> Overrides {
        Overrides {
            d_min: later.d_min.or(self.d_min),
            d_max: later.d_max.or(self.d_max),
            x: later.x.or(self.x),
            y: later.y.or(self.y),
            delta: later.delta.or(self.delta),
            n_max: later.n_max.or(self.n_max),
            v0: later.v0.or(self.v0),
            bound: later.bound.or(self.bound),
            quad_tol: later.quad_tol.or(self.quad_tol),
            threads: later.threads.or(self.threads),
            seed: later.seed.or(self.seed),
            kappa: later.kappa.or(self.kappa),
            convention: later.convention.or(self.convention),
            out_dir: later.out_dir.or(self.out_dir),
            format: later.format.or(self.format),
        }
    }
}

/// Resolve command defaults, a config file and CLI flags into a validated
/// configuration.
pub fn resolve(command: CommandKind, o: Overrides) -> Result<ExperimentConfig, UsageError> {
    let x_rule = match o.x.as_deref() {
        None => match command {
            CommandKind::Theorem1 => XRule::HLogD,
            _ => XRule::Fixed(1000),
        },
        Some("hlogd") => XRule::HLogD,
        Some(s) => match s.parse::<u64>() {
            Ok(v) if v >= 2 => XRule::Fixed(v),
            _ => return usage(format!("x must be an integer >= 2 or 'hlogd', got '{s}'")),
        },
    };
    let v0_list = match o.v0.as_deref() {
        None => vec![1],
        Some(s) => {
            let parsed: Result<Vec<u64>, _> = s.split(',').map(|t| t.trim().parse::<u64>()).collect();
            match parsed {
                Ok(v) if !v.is_empty() && v.iter().all(|&x| x >= 1) => v,
                _ => return usage(format!("v0 must be a comma list of positive integers, got '{s}'")),
            }
        }
    };
    let convention = match o.convention.as_deref() {
        None | Some("paper") => FundamentalConvention::Paper,
        Some("standard") => FundamentalConvention::Standard,
        Some(s) => return usage(format!("convention must be 'paper' or 'standard', got '{s}'")),
    };
    let format = match o.format.as_deref() {
        None | Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        Some(s) => return usage(format!("format must be 'csv' or 'json', got '{s}'")),
    };
    let mut out_dir = o.out_dir.unwrap_or_else(|| PathBuf::from("bqflab-out"));
    if let Ok(env_dir) = std::env::var("BQFLAB_OUT_DIR") {
        out_dir = PathBuf::from(env_dir);
    }
    let config = ExperimentConfig {
        command,
        d_min: o.d_min.unwrap_or(-100),
        d_max: o.d_max.unwrap_or(-1),
        x_rule,
        y: o.y,
        delta: o.delta.unwrap_or(0.25),
        n_max: o.n_max.unwrap_or(500),
        v0_list,
        bound: o.bound.unwrap_or(1_000_000),
        quad_tol: o.quad_tol.unwrap_or(1e-8),
        threads: o.threads.unwrap_or(0),
        seed: o.seed.unwrap_or(0),
        kappa: o.kappa.unwrap_or(bqflab_core::archimedean::KAPPA_DEFAULT),
        convention,
        out_dir,
        format,
    };
    if config.d_min >= config.d_max || config.d_max >= 0 {
        return usage(format!(
            "need d_min < d_max < 0, got d_min={} d_max={}",
            config.d_min, config.d_max
        ));
    }
    if config.quad_tol <= 0.0 || config.delta <= 0.0 {
        return usage("tolerances must be positive");
    }
    Ok(config)
}

impl ExperimentConfig {
    /// The fundamental discriminants of the configured range, smallest
    /// `|D|` first.
    pub fn discriminants(&self) -> Vec<i64> {
        bqflab_core::qforms::fundamental_range(self.d_min, self.d_max + 1, self.convention)
    }

    /// Config echo for report headers: stable `key=value` list.
    pub fn echo(&self) -> Vec<(String, String)> {
        let x = match self.x_rule {
            XRule::Fixed(v) => v.to_string(),
            XRule::HLogD => "hlogd".to_string(),
        };
        let conv = match self.convention {
            FundamentalConvention::Paper => "paper",
            FundamentalConvention::Standard => "standard",
        };
        vec![
            ("command".into(), self.command.name().into()),
            ("d_min".into(), self.d_min.to_string()),
            ("d_max".into(), self.d_max.to_string()),
            ("x".into(), x),
            (
                "y".into(),
                self.y.map(|y| y.to_string()).unwrap_or_else(|| "auto".into()),
            ),
            ("delta".into(), format!("{}", self.delta)),
            ("n_max".into(), self.n_max.to_string()),
            (
                "v0".into(),
                self.v0_list.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
            ),
            ("bound".into(), self.bound.to_string()),
            ("quad_tol".into(), format!("{:e}", self.quad_tol)),
            ("threads".into(), self.threads.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("kappa".into(), format!("{:.17}", self.kappa)),
            ("convention".into(), conv.into()),
            ("format".into(), if self.format == OutputFormat::Csv { "csv".into() } else { "json".into() }),
        ]
    }
}
