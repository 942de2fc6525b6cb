//! The `stirlab` command line.
//!
//! Exit codes: 0 on success, 1 on an internal error, 2 on invalid arguments
//! and 3 when `--assert` is set and a check fails. `all` reports the worst.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::clt_truncated::Cutoff;
use crate::convergence::GridKind;
use crate::exact_arith::DEFAULT_BITS;
use crate::experiments::{run, Experiment, ExperimentConfig, ExperimentRun};
use crate::report::{gnuplot_script, to_csv, to_json};
use crate::{Error, PrecisionContext};

/// Environment variable naming the default precision in bits.
pub const PRECISION_ENV: &str = "STIRLAB_PRECISION_BITS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ASSERT: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridArg {
    Geometric,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "stirlab",
    version,
    about = "Evaluate Stirling-type limit sequences to high precision"
)]
pub struct Args {
    /// Experiment name, or `all`.
    pub experiment: String,

    #[arg(long)]
    pub n_min: Option<u64>,

    #[arg(long)]
    pub n_max: Option<u64>,

    #[arg(long, value_enum, default_value_t = GridArg::Geometric)]
    pub grid: GridArg,

    /// Grid size; a geometric grid without it doubles from n-min.
    #[arg(long)]
    pub points: Option<usize>,

    /// Cutoff: a decimal, a fraction p/q, or `inf`.
    #[arg(long, default_value = "1")]
    pub c: String,

    /// Overrides the environment default.
    #[arg(long)]
    pub precision_bits: Option<u32>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Write a gnuplot script plotting the CSV output.
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,

    /// Exit 3 if any check attached to the experiment fails.
    #[arg(long)]
    pub assert: bool,
}

/// A validated invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiments: Vec<Experiment>,
    pub config: ExperimentConfig,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub gnuplot: Option<PathBuf>,
    pub assert: bool,
}

fn usage(msg: impl Into<String>) -> (i32, String) {
    (EXIT_USAGE, msg.into())
}

impl RunConfig {
    /// `env_bits` is the raw value of [`PRECISION_ENV`], if set.
    pub fn from_args(args: Args, env_bits: Option<&str>) -> Result<Self, (i32, String)> {
        let experiments = if args.experiment == "all" {
            Experiment::ALL.to_vec()
        } else {
            vec![Experiment::from_name(&args.experiment)
                .ok_or_else(|| usage(format!("unknown experiment '{}'", args.experiment)))?]
        };
        let bits = match (args.precision_bits, env_bits) {
            (Some(b), _) => b,
            (None, Some(s)) => s
                .trim()
                .parse()
                .map_err(|_| usage(format!("{PRECISION_ENV} must be an integer, got '{s}'")))?,
            (None, None) => DEFAULT_BITS,
        };
        let ctx = PrecisionContext::new(bits).map_err(|e| usage(e.to_string()))?;
        let c: Cutoff = args.c.parse().map_err(|e: Error| usage(format!("invalid --c: {e}")))?;
        if let (Some(lo), Some(hi)) = (args.n_min, args.n_max) {
            if lo > hi {
                return Err(usage(format!("--n-min {lo} exceeds --n-max {hi}")));
            }
        }
        if args.n_min == Some(0) {
            return Err(usage("--n-min must be at least 1"));
        }
        if args.points == Some(0) {
            return Err(usage("--points must be at least 1"));
        }
        if args.gnuplot.is_some() && (args.format != Format::Csv || args.output.is_none()) {
            return Err(usage("--gnuplot needs --format csv and an --output file"));
        }
        Ok(RunConfig {
            experiments,
            config: ExperimentConfig {
                n_min: args.n_min,
                n_max: args.n_max,
                grid: match args.grid {
                    GridArg::Geometric => GridKind::Geometric,
                    GridArg::Linear => GridKind::Linear,
                },
                points: args.points,
                c,
                ctx,
            },
            format: args.format,
            output: args.output,
            gnuplot: args.gnuplot,
            assert: args.assert,
        })
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::AtIndex { source, .. } => error_code(source),
        Error::InvalidPrecision(_) | Error::Domain(_) | Error::OutOfRange(_) | Error::EmptyGrid => EXIT_USAGE,
        _ => EXIT_INTERNAL,
    }
}

/// Runs the configured experiments, writes the report and returns the exit code.
pub fn execute(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let mut code = EXIT_OK;
    let mut runs: Vec<ExperimentRun> = Vec::new();
    for &exp in &cfg.experiments {
        match run(exp, &cfg.config) {
            Ok(r) => {
                if cfg.assert {
                    for check in r.checks.iter().filter(|c| !c.passed) {
                        let _ = writeln!(stderr, "FAIL {}: {}", check.name, check.detail);
                        code = code.max(EXIT_ASSERT);
                    }
                }
                runs.push(r);
            }
            Err(e) => {
                let _ = writeln!(stderr, "{exp}: {e}");
                code = code.max(error_code(&e));
            }
        }
    }
    let text = match cfg.format {
        Format::Csv => to_csv(&runs),
        Format::Json => match to_json(&runs) {
            Ok(t) => t,
            Err(e) => {
                let _ = writeln!(stderr, "{e}");
                return EXIT_INTERNAL;
            }
        },
    };
    let written = match &cfg.output {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "cannot write report: {e}");
        return EXIT_INTERNAL;
    }
    if let (Some(script), Some(csv)) = (&cfg.gnuplot, &cfg.output) {
        let body = gnuplot_script(&runs, &csv.to_string_lossy());
        if let Err(e) = std::fs::write(script, body) {
            let _ = writeln!(stderr, "cannot write {}: {e}", script.display());
            return EXIT_INTERNAL;
        }
    }
    code
}

/// Parses `argv`, runs and returns the exit code.
pub fn main_with<I, T>(argv: I, env_bits: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{e}");
            return EXIT_OK;
        }
    };
    match RunConfig::from_args(args, env_bits) {
        Ok(cfg) => execute(&cfg, stdout, stderr),
        Err((code, msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            code
        }
    }
}

pub fn main_from_env() -> i32 {
    let env_bits = std::env::var(PRECISION_ENV).ok();
    let code = main_with(
        std::env::args_os(),
        env_bits.as_deref(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    let _ = std::io::stdout().flush();
    code
}
