//! `dmrg-lab`: run infinite-system DMRG, exact entanglement spectra,
//! divergences, angular-quantization waves and corner transfer matrices from
//! the command line.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 DMRG finished without
//! converging (output still written), 64 usage error.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Parser, Debug)]
#[command(name = "dmrg-lab", version, about = "Density matrix renormalization group workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Infinite-system DMRG on a reflection-symmetric chain.
    Dmrg(DmrgArgs),
    /// Exact ground-state entanglement spectrum of a short chain.
    Spectrum(SpectrumArgs),
    /// α-divergence of two distributions, or a Fisher matrix.
    Infogeo(InfogeoArgs),
    /// Angular-quantization waves and Gaussian half-chain spectra.
    Angular {
        #[command(subcommand)]
        command: AngularCommand,
    },
    /// Corner transfer matrix of a small Ising lattice.
    Ctm(CtmArgs),
    /// Reference values from the brute-force oracles.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Tfim,
    Heisenberg,
    Harmonic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// Transverse field of the Ising chain.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub g: f64,
    /// Anisotropy of the Heisenberg chain.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub jz: f64,
    /// Mass of the harmonic chain.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub mass: f64,
    /// Oscillator levels kept per harmonic-chain site.
    #[arg(long, default_value_t = 10)]
    pub d_levels: usize,
}

#[derive(Args, Debug)]
pub struct DmrgArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub m_max: usize,
    #[arg(long, default_value_t = 60)]
    pub iters: usize,
    /// Convergence threshold on the energy per site.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Weights of the lowest superblock states to target, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub targets: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Chain length.
    #[arg(long)]
    pub n: usize,
    /// Sites in the left part; defaults to half the chain.
    #[arg(long)]
    pub cut: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Bernoulli,
    IndependentBernoullis,
}

#[derive(Args, Debug)]
pub struct InfogeoArgs {
    /// First distribution as a JSON array.
    #[arg(long)]
    pub p: Option<String>,
    /// Second distribution as a JSON array.
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Parametric family whose Fisher matrix is evaluated.
    #[arg(long, value_enum, conflicts_with_all = ["p", "q", "alpha"])]
    pub fisher: Option<FamilyKind>,
    /// Parameters of the family, comma separated.
    #[arg(long, value_delimiter = ',', requires = "fisher")]
    pub theta: Option<Vec<f64>>,
    /// Central-difference step.
    #[arg(long, default_value_t = 1e-5)]
    pub h: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum AngularCommand {
    /// Samples of K_iℓ(mass·x) on a log-spaced grid, as CSV.
    Wave(WaveArgs),
    /// Gaussian half-chain entanglement spectrum, as JSON.
    Spectrum(GaussianArgs),
}

#[derive(Args, Debug)]
pub struct WaveArgs {
    #[arg(long)]
    pub ell: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
    #[arg(long)]
    pub xmin: f64,
    #[arg(long)]
    pub xmax: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GaussianArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub cut: usize,
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
    #[arg(long, default_value_t = dmrg_lab::angular::DEFAULT_MODES)]
    pub modes: usize,
    #[arg(long, default_value_t = dmrg_lab::angular::DEFAULT_CUTOFF)]
    pub cutoff: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BoundaryKind {
    Free,
    Fixed,
}

#[derive(Args, Debug)]
pub struct CtmArgs {
    /// Spins per semiaxis, origin excluded.
    #[arg(long = "L")]
    pub half_width: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub beta_j: f64,
    #[arg(long, value_enum, default_value_t = BoundaryKind::Free)]
    pub boundary: BoundaryKind,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Subcommand, Debug)]
pub enum OracleCommand {
    /// Thermodynamic-limit energy per site of the Ising chain.
    TfimEnergy {
        #[arg(long)]
        g: f64,
    },
    /// Reduced-density spectrum of two coupled oscillators.
    TwoOscillator {
        #[arg(long)]
        mass: f64,
    },
    /// Partition function of the full lattice by enumeration.
    IsingZ {
        #[arg(long = "L")]
        half_width: usize,
        #[arg(long, allow_negative_numbers = true)]
        beta_j: f64,
        #[arg(long, value_enum, default_value_t = BoundaryKind::Free)]
        boundary: BoundaryKind,
    },
}

/// What went wrong, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numeric(String),
}

pub const EXIT_NOT_CONVERGED: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
