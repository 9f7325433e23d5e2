//! Command-line front end for evolving and certifying warped-product
//! Einstein-Dirac systems.
//!
//! Every config-file key has a flag twin; flags override the file.  See the
//! repository README for the file formats and exit codes.

mod config;
mod output;
mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{Format, Mode, PartialConfig};
use warped_dirac::{Parity, Sign};

#[derive(Parser)]
#[command(
    name = "warped-dirac",
    version,
    about = "Evolve, verify, tabulate, and reparametrize warped-product Einstein-Dirac systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the coupled Einstein system from admissible initial data.
    EvolveEinstein(RunFlags),
    /// Evolve the weak-Killing amplitudes over a closed-form warp factor.
    EvolveWk(RunFlags),
    /// Tabulate the closed-form warp factor and its scalar curvature.
    ClosedForm(RunFlags),
    /// Recompute the residuals of a trajectory file and gate on tolerance.
    Verify(VerifyArgs),
    /// Present a two-sided local solution globally via the arctan pullback.
    Reparam(RunFlags),
    /// Run with the mode taken from the config file.
    Run(RunFlags),
    /// Run several config files as independent sweep cells.
    Sweep(SweepArgs),
}

#[derive(Args, Default)]
struct RunFlags {
    /// Flat key=value config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dimension parity: even (n = 2m) or odd (n = 2m-1).
    #[arg(long, value_parser = parity_parser)]
    parity: Option<Parity>,
    /// Half-dimension parameter m.
    #[arg(long)]
    m: Option<u32>,
    /// Warp exponent a.
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Base Killing coupling lambda_M (0 = parallel spinor).
    #[arg(long = "lambda-m", allow_negative_numbers = true)]
    lambda_m: Option<f64>,
    /// Dirac eigenvalue lambda_Q.
    #[arg(long = "lambda-q", allow_negative_numbers = true)]
    lambda_q: Option<f64>,
    /// Energy-momentum sign (+1 or -1).
    #[arg(long, value_parser = sign_parser, allow_negative_numbers = true)]
    epsilon: Option<Sign>,
    /// Base spinor norm-square P.
    #[arg(long)]
    norm: Option<f64>,
    /// Branch of the initial warp velocity (+1 or -1).
    #[arg(long, value_parser = sign_parser, allow_negative_numbers = true)]
    sign: Option<Sign>,
    /// Warp rate c for weak-Killing and closed-form runs.
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    /// Final time; negative integrates backward.
    #[arg(long = "t-end", allow_negative_numbers = true)]
    t_end: Option<f64>,
    /// Integrator step.
    #[arg(long)]
    step: Option<f64>,
    /// Window half-width for reparam (default: 80% of the resolved window).
    #[arg(long)]
    omega: Option<f64>,
    /// Residual tolerance gating the exit status.
    #[arg(long)]
    tol: Option<f64>,
    /// Output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long, value_parser = format_parser)]
    format: Option<Format>,
    /// Input trajectory for verify.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Trajectory file to verify (alternative to --input).
    file: Option<PathBuf>,
    #[command(flatten)]
    flags: RunFlags,
}

#[derive(Args)]
struct SweepArgs {
    /// Config files, one independent run each.
    #[arg(required = true)]
    configs: Vec<PathBuf>,
}

fn parity_parser(s: &str) -> Result<Parity, String> {
    match s.to_ascii_lowercase().as_str() {
        "even" => Ok(Parity::Even),
        "odd" => Ok(Parity::Odd),
        other => Err(format!("unknown parity '{other}' (even or odd)")),
    }
}

fn sign_parser(s: &str) -> Result<Sign, String> {
    let v: f64 = s.parse().map_err(|_| format!("expected ±1, got '{s}'"))?;
    Sign::from_f64(v).map_err(|e| e.to_string())
}

fn format_parser(s: &str) -> Result<Format, String> {
    Format::parse(s)
}

impl RunFlags {
    fn to_partial(&self) -> PartialConfig {
        PartialConfig {
            mode: None,
            parity: self.parity,
            m: self.m,
            a: self.a,
            lambda_m: self.lambda_m,
            lambda_q: self.lambda_q,
            epsilon: self.epsilon,
            norm: self.norm,
            sign: self.sign,
            c: self.c,
            t_end: self.t_end,
            step: self.step,
            omega: self.omega,
            tolerance: self.tol,
            out: self.out.clone(),
            format: self.format,
            input: self.input.clone(),
        }
    }
}

/// Merge file and flags, force `mode` when a subcommand names it.
fn resolve(flags: &RunFlags, mode: Option<Mode>) -> Result<config::RunConfig, String> {
    let base = match &flags.config {
        Some(path) => PartialConfig::from_file(path)?,
        None => PartialConfig::default(),
    };
    let mut merged = flags.to_partial().over(base);
    if mode.is_some() {
        merged.mode = mode;
    }
    merged.resolve()
}

fn run_resolved(result: Result<config::RunConfig, String>) -> i32 {
    match result {
        Ok(cfg) => run::execute(&cfg),
        Err(msg) => {
            eprintln!("error: {msg}");
            run::EXIT_INVALID
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::EvolveEinstein(flags) => run_resolved(resolve(&flags, Some(Mode::EvolveEinstein))),
        Command::EvolveWk(flags) => run_resolved(resolve(&flags, Some(Mode::EvolveWk))),
        Command::ClosedForm(flags) => run_resolved(resolve(&flags, Some(Mode::ClosedForm))),
        Command::Reparam(flags) => run_resolved(resolve(&flags, Some(Mode::Reparam))),
        Command::Run(flags) => run_resolved(resolve(&flags, None)),
        Command::Verify(args) => {
            let mut flags = args.flags;
            if flags.input.is_none() {
                flags.input = args.file;
            }
            run_resolved(resolve(&flags, Some(Mode::Verify)))
        }
        Command::Sweep(args) => {
            // Sweep cells are fully independent; they run in sequence here
            // and may be distributed freely by callers.
            let mut worst = run::EXIT_OK;
            for path in &args.configs {
                println!("sweep cell: {}", path.display());
                let flags = RunFlags {
                    config: Some(path.clone()),
                    ..RunFlags::default()
                };
                let code = run_resolved(resolve(&flags, None));
                if code > worst {
                    worst = code;
                }
            }
            worst
        }
    };
    std::process::exit(code);
}
