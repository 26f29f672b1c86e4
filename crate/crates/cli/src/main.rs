//! `tfbounds`: runs the identity checks, the inequality batteries, the counterexample
//! scan and heatmap export, writing JSON, CSV and PGM artifacts.
//!
//! Exit codes: 0 when everything passes, 2 on a failed check or numerical defect,
//! 3 on an invalid or infeasible configuration, 1 on any other error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{GridConfig, RunConfig};

#[derive(Parser)]
#[command(name = "tfbounds", version, about = "Numerical verification of weighted time-frequency estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Closed-form transforms and the identities between representations.
    VerifyIdentities,
    /// The mutual estimates over signals, weights, λ and p.
    VerifyBounds,
    /// Donoho-Stark concentration bounds on phase-space sets.
    DonohoStark,
    /// Local uncertainty principles, including the Price inequalities.
    LocalUp,
    /// Two-Gaussian scan: unweighted concentration against the weighted ratio.
    Counterexample,
    /// Real part of a representation as a PGM (negative samples marked 0).
    Heatmap,
}

/// Flags override the config file, which overrides the defaults.
#[derive(Args)]
struct Overrides {
    /// JSON file mirroring the run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Grid as `M` or `HALF_WIDTH,M`.
    #[arg(long, global = true)]
    grid: Option<GridConfig>,
    /// Weights, e.g. `log,power:0.5`.
    #[arg(long, global = true, value_delimiter = ',')]
    omega: Vec<String>,
    #[arg(long, global = true, value_delimiter = ',')]
    lambda: Vec<f64>,
    #[arg(long, global = true)]
    mu: Option<f64>,
    #[arg(long = "mu-prime", global = true)]
    mu_prime: Option<f64>,
    /// Exponents, e.g. `1,2,inf`.
    #[arg(long, global = true, value_delimiter = ',')]
    p: Vec<String>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Signal; repeat for several.
    #[arg(long, global = true)]
    signal: Vec<String>,
    #[arg(long, global = true)]
    window: Option<String>,
    /// Set, e.g. `rect:-2,2,-2,2`; repeat for several.
    #[arg(long, global = true)]
    set: Vec<String>,
    /// Case ids, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    case: Vec<String>,
    /// Counterexample parameters.
    #[arg(long, global = true, value_delimiter = ',')]
    s: Vec<f64>,
    /// Representation for `heatmap`, e.g. `wigner`, `tau_wigner:0.25`, `cohen:born_jordan`.
    #[arg(long, global = true)]
    repr: Option<String>,
    /// Primary artifact path; `-` for standard output.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Additional CSV table.
    #[arg(long, global = true)]
    csv: Option<String>,
    /// JSON report for `counterexample` and `heatmap`.
    #[arg(long, global = true)]
    report: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

impl Overrides {
    fn apply(self, cfg: &mut RunConfig) {
        fn set_list<T>(target: &mut Vec<T>, v: Vec<T>) {
            if !v.is_empty() {
                *target = v;
            }
        }
        fn set_opt_list<T>(target: &mut Option<Vec<T>>, v: Vec<T>) {
            if !v.is_empty() {
                *target = Some(v);
            }
        }
        if let Some(g) = self.grid {
            cfg.grid = g;
        }
        set_list(&mut cfg.weights, self.omega);
        set_list(&mut cfg.signals, self.signal);
        set_list(&mut cfg.s_values, self.s);
        set_opt_list(&mut cfg.lambdas, self.lambda);
        set_opt_list(&mut cfg.ps, self.p);
        set_opt_list(&mut cfg.sets, self.set);
        set_opt_list(&mut cfg.cases, self.case);
        cfg.mu = self.mu.or(cfg.mu);
        cfg.mu_prime = self.mu_prime.or(cfg.mu_prime);
        cfg.tau = self.tau.or(cfg.tau);
        cfg.alpha = self.alpha.or(cfg.alpha);
        cfg.window = self.window.or(cfg.window.take());
        cfg.outputs.out = self.out.or(cfg.outputs.out.take());
        cfg.outputs.csv = self.csv.or(cfg.outputs.csv.take());
        cfg.outputs.report = self.report.or(cfg.outputs.report.take());
        if let Some(r) = self.repr {
            cfg.repr = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let mut cfg = match &cli.overrides.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let command = cli.command;
    cli.overrides.apply(&mut cfg);
    cfg.validate()?;
    let outcome = match command {
        Command::VerifyIdentities => commands::verify_identities(&cfg)?,
        Command::VerifyBounds => commands::verify_bounds(&cfg)?,
        Command::DonohoStark => commands::donoho_stark(&cfg)?,
        Command::LocalUp => commands::local_up(&cfg)?,
        Command::Counterexample => commands::counterexample(&cfg)?,
        Command::Heatmap => commands::heatmap(&cfg)?,
    };
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            commands::error_exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
