//! `fracgrav` command-line front end. Every data command writes CSV with a
//! leading `#` comment holding the resolved configuration and the SHA-256 of
//! the constants file.
//!
//! Exit codes: 0 success, 1 verification or numerical failure, 2 usage error.

mod args;
mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracgrav::LevyIndex;

use crate::args::{AlphaEntry, Beta, GridSpec};

#[derive(Debug, Parser)]
#[command(name = "fracgrav", version, about = "Fractional Schrodinger equation in a linear gravitational potential")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Constants file; the built-in CODATA set when omitted.
    #[arg(long, global = true)]
    pub constants: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true, value_parser = args::positive)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
pub enum FilterArg {
    #[default]
    All,
    Odd,
    Even,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
pub enum FormulaArg {
    #[default]
    Derivation,
    Simplified,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fractional quantum numbers for one alpha.
    Roots {
        #[arg(long, value_parser = args::parse_alpha)]
        alpha: LevyIndex,
    },
    /// |y_nu|^2 for every root over a xi grid.
    Ynorm {
        #[arg(long, value_parser = args::parse_alpha)]
        alpha: LevyIndex,
        #[arg(long, default_value = "neutron")]
        particle: String,
        /// lo:hi:count
        #[arg(long, default_value = "0:3:301", value_parser = args::parse_grid)]
        xi: GridSpec,
        /// Energy in J; only shifts the xi origin.
        #[arg(long = "E", default_value_t = 0.0, value_parser = args::finite)]
        energy: f64,
        /// Use this K instead of the particle's.
        #[arg(long = "K", value_parser = args::positive)]
        k: Option<f64>,
    },
    /// |y_nu|^2 curves for several particles.
    Particles {
        #[arg(long, default_value = "4/5", value_parser = args::parse_alpha)]
        alpha: LevyIndex,
        /// Added to electron, muon and neutron. Repeatable.
        #[arg(long)]
        particle: Vec<String>,
        #[arg(long, default_value = "0:3:301", value_parser = args::parse_grid)]
        xi: GridSpec,
    },
    /// log10 variance of |y_nu|^2 over a (mass, alpha) grid.
    Heatmap {
        /// lo:hi:count in kg, log-spaced.
        #[arg(long, default_value = "1e-37:1e-25:20", value_parser = args::parse_grid)]
        mass: GridSpec,
        /// Comma-separated n/m or decimals (snapped, m <= 40). Default 11/20 ... 19/20.
        #[arg(long, value_delimiter = ',', value_parser = args::parse_alpha_entry)]
        alphas: Vec<AlphaEntry>,
        #[arg(long, default_value_t = fracgrav::sweep::SWEEP_XI0, value_parser = args::positive)]
        xi0: f64,
    },
    /// Brute-force minimum of the root count over 1/2 < n/m < 1.
    MinNumerator {
        #[arg(long, default_value_t = 500)]
        m_max: u64,
        #[arg(long, value_enum, default_value_t)]
        filter: FilterArg,
    },
    /// Residual of the fractional equation for the auxiliary solutions.
    Residual {
        #[arg(long, value_parser = args::parse_alpha)]
        alpha: LevyIndex,
        /// Root index; all roots when omitted.
        #[arg(long)]
        root: Option<usize>,
        #[arg(long = "K", default_value_t = 1.0, value_parser = args::positive)]
        k: f64,
        /// lo:hi
        #[arg(long, default_value = "-1:1", value_parser = args::parse_range)]
        xi: (f64, f64),
        #[arg(long, default_value_t = 1e-3, value_parser = args::positive)]
        h: f64,
        #[arg(long, default_value_t = fracgrav::ResidualOptions::default().window, value_parser = args::positive)]
        window: f64,
    },
    /// Constraint rank and spectrum classification.
    Spectrum {
        #[arg(long, value_parser = args::parse_alpha)]
        alpha: LevyIndex,
        /// Take K from this particle; K = 1 otherwise.
        #[arg(long)]
        particle: Option<String>,
        #[arg(long = "K", value_parser = args::positive, conflicts_with = "particle")]
        k: Option<f64>,
        #[arg(long, default_value_t = 0.0, value_parser = args::finite)]
        xi_wall: f64,
        /// Default: 3 K^(1/(2 alpha + 1)).
        #[arg(long, value_parser = args::finite)]
        xi_far: Option<f64>,
        /// Minimal-length parameter; needs --particle.
        #[arg(long, value_parser = args::parse_beta, requires = "particle")]
        beta: Option<Beta>,
        #[arg(long = "E", default_value_t = 0.0, value_parser = args::finite)]
        energy: f64,
        /// Unperturbed eigenvalue in J; defaults to E.
        #[arg(long = "E0", value_parser = args::non_negative)]
        e0: Option<f64>,
    },
    /// Checks that roots and classification do not move under beta.
    GupCheck {
        #[arg(long, default_value = "3/4", value_parser = args::parse_alpha)]
        alpha: LevyIndex,
        #[arg(long, default_value = "electron")]
        particle: String,
        #[arg(long, default_value = "auto", value_parser = args::parse_beta)]
        beta: Beta,
        #[arg(long = "E", default_value_t = 0.0, value_parser = args::finite)]
        energy: f64,
        #[arg(long = "E0", value_parser = args::non_negative)]
        e0: Option<f64>,
        #[arg(long, value_enum, default_value_t)]
        formula: FormulaArg,
    },
    /// Runs the verification suite and writes a JSON report.
    Verify {
        #[arg(long, default_value_t = 1e-3, value_parser = args::positive)]
        h: f64,
        #[arg(long, default_value_t = fracgrav::ResidualOptions::default().window, value_parser = args::positive)]
        window: f64,
        #[arg(long, value_parser = args::parse_beta)]
        beta: Option<Beta>,
        /// Also rerun residuals at h/10.
        #[arg(long)]
        refine: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_broken_pipe() => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fracgrav: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
