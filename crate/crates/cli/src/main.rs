//! `bqflab`: experiment driver for the binary-quadratic-form lab.
//!
//! Each subcommand runs one verification experiment over a configured
//! discriminant range, writes a canonical CSV (plus optional JSON mirror
//! and SVG plot) and exits 0 when every assertion passed, 1 on assertion
//! failures, 2 on usage errors and 3 on internal consistency errors.

mod config;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::{CommandKind, Overrides};
use report::{output_paths, write_scatter_svg};

#[derive(Parser)]
#[command(
    name = "bqflab",
    about = "Verification experiments for primes represented by binary quadratic forms",
    version
)]
struct Cli {
    /// Flat key=value configuration file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default, Clone)]
struct CommonFlags {
    /// Lower end of the discriminant range (exclusive): d_min < D.
    #[arg(long, allow_hyphen_values = true)]
    d_min: Option<i64>,
    /// Upper end of the discriminant range (inclusive): D <= d_max < 0.
    #[arg(long, allow_hyphen_values = true)]
    d_max: Option<i64>,
    /// Window start: an integer or 'hlogd' for X = ceil(h(D) log|D|).
    #[arg(long)]
    x: Option<String>,
    /// Fixed sieve level Y (default: per-discriminant |D|^delta).
    #[arg(long)]
    y: Option<u64>,
    /// Exponent for the per-discriminant sieve level.
    #[arg(long)]
    delta: Option<f64>,
    /// Largest n in the representation-identity scan.
    #[arg(long)]
    n_max: Option<u64>,
    /// Comma-separated v0 multipliers (m = D v0^2).
    #[arg(long)]
    v0: Option<String>,
    /// Prime search cap for least-prime.
    #[arg(long)]
    bound: Option<u64>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    quad_tol: Option<f64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Seed echoed into reports (experiments are deterministic).
    #[arg(long)]
    seed: Option<u64>,
    /// Archimedean calibration constant.
    #[arg(long)]
    kappa: Option<f64>,
    /// Fundamental-discriminant convention: paper | standard.
    #[arg(long)]
    convention: Option<String>,
    /// Output directory (env BQFLAB_OUT_DIR overrides).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Output format: csv | json (json adds a mirror next to the CSV).
    #[arg(long)]
    format: Option<String>,
}

impl CommonFlags {
    fn into_overrides(self) -> Overrides {
        Overrides {
            d_min: self.d_min,
            d_max: self.d_max,
            x: self.x,
            y: self.y,
            delta: self.delta,
            n_max: self.n_max,
            v0: self.v0,
            bound: self.bound,
            quad_tol: self.quad_tol,
            threads: self.threads,
            seed: self.seed,
            kappa: self.kappa,
            convention: self.convention,
            out_dir: self.out_dir,
            format: self.format,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact-equality matrix of closed local densities vs brute force.
    Densities(CommonFlags),
    /// Sifted counts against the Selberg upper bound.
    SieveBound(CommonFlags),
    /// The main inequality (pi_D/pi)^2 <= C (R/h)(1 + h/pi).
    Theorem1(CommonFlags),
    /// Hurwitz-weighted orbit counts vs the density product.
    MassCheck(CommonFlags),
    /// Dirichlet's representation identity and the multiplicity bound.
    DirichletCheck(CommonFlags),
    /// Least prime represented by each reduced class.
    LeastPrime(CommonFlags),
    /// Same-class pair witnesses and Cauchy-Schwarz bookkeeping.
    PairCorrelation(CommonFlags),
}

impl Command {
    fn split(self) -> (CommandKind, CommonFlags) {
        match self {
            Command::Densities(f) => (CommandKind::Densities, f),
            Command::SieveBound(f) => (CommandKind::SieveBound, f),
            Command::Theorem1(f) => (CommandKind::Theorem1, f),
            Command::MassCheck(f) => (CommandKind::MassCheck, f),
            Command::DirichletCheck(f) => (CommandKind::DirichletCheck, f),
            Command::LeastPrime(f) => (CommandKind::LeastPrime, f),
            Command::PairCorrelation(f) => (CommandKind::PairCorrelation, f),
        }
    }
}

fn emit_plot(
    command: CommandKind,
    rep: &report::Report,
    svg_path: &std::path::Path,
) -> std::io::Result<bool> {
    // presentation-only; the exact suites have nothing useful to draw
    let spec: Option<(&str, &str, &str, &str, &str)> = match command {
        CommandKind::Theorem1 => Some(("D", "ratio", "lhs/rhs vs |D|", "|D|", "lhs/rhs")),
        CommandKind::SieveBound => Some(("m", "ratio", "direct/bound vs |m|", "|m|", "direct/bound")),
        CommandKind::MassCheck => Some(("D", "ratio", "mass ratio vs |D|", "|D|", "ratio")),
        CommandKind::LeastPrime => Some(("D", "least_prime", "least prime vs |D|", "|D|", "p")),
        CommandKind::Densities | CommandKind::DirichletCheck | CommandKind::PairCorrelation => None,
    };
    let Some((xcol, ycol, title, xlabel, ylabel)) = spec else {
        return Ok(false);
    };
    let xs = rep.column_f64(xcol).unwrap_or_default();
    let ys = rep.column_f64(ycol).unwrap_or_default();
    let points: Vec<(f64, f64)> = xs.iter().zip(&ys).map(|(&x, &y)| (x.abs(), y)).collect();
    write_scatter_svg(svg_path, title, xlabel, ylabel, &points)?;
    Ok(true)
}

fn real_main() -> Result<u8, (u8, String)> {
    let cli = Cli::parse();
    let (kind, flags) = cli.command.split();
    let mut overrides = Overrides::default();
    if let Some(path) = &cli.config {
        overrides = overrides.merge(Overrides::from_file(path).map_err(|e| (2, e.0))?);
    }
    overrides = overrides.merge(flags.into_overrides());
    let config = config::resolve(kind, overrides).map_err(|e| (2u8, e.0))?;

    let start = Instant::now();
    let rep = run::run(&config).map_err(|e| {
        let code = match e {
            bqflab_core::Error::Range(_) | bqflab_core::Error::Domain(_) => 2u8,
            _ => 3u8,
        };
        (code, e.to_string())
    })?;
    let wall_ms = start.elapsed().as_millis();

    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| (2, format!("cannot create {}: {e}", config.out_dir.display())))?;
    let paths = output_paths(&config);
    std::fs::write(&paths.csv, rep.to_csv(&config, wall_ms))
        .map_err(|e| (3, format!("cannot write {}: {e}", paths.csv.display())))?;
    if config.format == config::OutputFormat::Json {
        std::fs::write(&paths.json, rep.to_json(&config, wall_ms))
            .map_err(|e| (3, format!("cannot write {}: {e}", paths.json.display())))?;
    }
    let plotted = emit_plot(kind, &rep, &paths.svg).map_err(|e| (3, format!("plot: {e}")))?;

    println!(
        "bqflab {}: {} rows, pass={} -> {}{}",
        config.command.name(),
        rep.rows.len(),
        rep.pass,
        paths.csv.display(),
        if plotted {
            format!(" (+{})", paths.svg.display())
        } else {
            String::new()
        }
    );
    for (k, v) in &rep.summary {
        println!("  {k} = {v}");
    }
    Ok(if rep.pass { 0 } else { 1 })
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("# error: {msg}");
            ExitCode::from(code)
        }
    }
}
