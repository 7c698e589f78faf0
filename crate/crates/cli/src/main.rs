mod commands;
mod error;
mod io;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qemtk_core::Tolerances;
use serde_json::Value;

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "qemtk",
    version,
    about = "Quantum-channel algebra and error-mitigation analysis"
)]
pub struct Cli {
    /// Seed for every random draw (default: $QEMTK_SEED, else 0).
    #[arg(long, global = true, env = "QEMTK_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Tolerance override, repeatable: `--tol zero=1e-10 --tol cluster=1e-6`.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    pub tol: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Rewrite a channel in another representation.
    Convert {
        input: PathBuf,
        #[arg(long, value_enum)]
        to: Rep,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CP / TP / HP verdict of a channel.
    Check {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact, Drazin or Moore-Penrose inverse with a verdict block.
    Invert {
        #[arg(value_enum)]
        kind: InverseKind,
        input: PathBuf,
        /// Drazin construction to use.
        #[arg(long, value_enum, default_value = "both")]
        backend: Backend,
        /// Representation of the emitted inverse.
        #[arg(long, value_enum, default_value = "natural")]
        rep: Rep,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Noise-model constructors.
    #[command(subcommand)]
    Noise(NoiseCommand),
    /// Evaluate a layered circuit.
    Simulate {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, value_enum)]
        mode: SimMode,
        /// Recovery channel for `--mode effective`.
        #[arg(long)]
        recovery: Option<PathBuf>,
        /// Use Drazin inverses for non-invertible noise instead of failing.
        #[arg(long)]
        drazin_fallback: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// First-order bounds and the mismatch experiment.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Reference error-mitigation protocols.
    #[command(subcommand)]
    Protocol(ProtocolCommand),
    /// Classical binary-symmetric-channel baseline.
    #[command(subcommand)]
    Classical(ClassicalCommand),
    /// Rerun a worked example and write a pass/fail report.
    Reproduce(ReproduceArgs),
}

#[derive(Subcommand, Debug)]
pub enum NoiseCommand {
    /// Write a channel: `pauli --params p1,p2,p3`, `depolarizing --params λ`,
    /// `phasedamping --params γ`, `fixture --params example2`.
    Make {
        #[arg(value_enum)]
        model: NoiseModel,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        params: Vec<String>,
        /// Output representation (fixtures default to their stored form).
        #[arg(long, value_enum)]
        rep: Option<Rep>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum AnalyzeCommand {
    /// First-order report, observable bounds and the sufficient condition.
    Bounds {
        #[arg(long)]
        circuit: PathBuf,
        /// JSON list of operators `{"dim", "data"}`.
        #[arg(long)]
        observables: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pauli noise mitigated with the best-overlap depolarizing estimate.
    Mismatch {
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        p2: f64,
        #[arg(long)]
        p3: f64,
        #[arg(long, default_value_t = 50)]
        states: usize,
        /// CSV table; the summary then goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ProtocolCommand {
    /// Zero-noise extrapolation from values measured at scale factors.
    Richardson {
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        scales: Vec<f64>,
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        values: Vec<f64>,
        #[arg(long, value_enum, default_value = "richardson")]
        fit: FitArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quasiprobability decomposition, optionally with a sampled estimate.
    Quasiprob {
        #[arg(long)]
        target: PathBuf,
        /// Basis channels; defaults to the four Pauli conjugations.
        #[arg(long, value_delimiter = ',')]
        basis: Vec<PathBuf>,
        /// Per-basis-channel expectation values in [-1, 1].
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        expectations: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Invert a column-stochastic readout matrix (JSON list of rows).
    Readout {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        probs: Vec<f64>,
        /// Also report the nearest probability vector.
        #[arg(long)]
        project: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Virtual distillation `ρ^m / Tr ρ^m`.
    Vd {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 2)]
        copies: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ClassicalCommand {
    /// Channel matrix, optionally applied to a distribution.
    Bsc {
        #[arg(long)]
        p: f64,
        #[arg(long, value_delimiter = ',')]
        probs: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo and exact logical error of the 3-bit repetition code.
    Repetition {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Undo independent bit flips on a distribution over `k` bits (length 2^k).
    Invert {
        #[arg(long)]
        p: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        observed: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub example: Example,
    /// Flip probability for `repetition`.
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    /// Monte-Carlo trials for `repetition`.
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    /// Number of random states for `mismatch`.
    #[arg(long, default_value_t = 50)]
    pub states: usize,
    /// Number of random instances for `prop2` and `prop3`.
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    /// Where `mismatch` writes its per-state table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rep {
    Choi,
    Natural,
    Kraus,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum InverseKind {
    Exact,
    Drazin,
    Mp,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Schur,
    Spectral,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseModel {
    Pauli,
    Depolarizing,
    Phasedamping,
    Fixture,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimMode {
    Ideal,
    Noisy,
    Physical,
    Numerical,
    Effective,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitArg {
    Richardson,
    Linear,
    Exp,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Example {
    Example1,
    Example2,
    Cnot,
    Mismatch,
    Repetition,
    Prop2,
    Prop3,
}

/// Applies `name=value` overrides on top of the defaults.
pub fn tolerances(overrides: &[String]) -> Result<Tolerances, CliError> {
    let mut fields = serde_json::to_value(Tolerances::default()).expect("tolerances serialise");
    for item in overrides {
        let (name, value) = item.split_once('=').ok_or_else(|| {
            CliError::usage("BadTolerance", format!("expected NAME=VALUE, got {item:?}"))
        })?;
        let slot = fields.get_mut(name.trim()).ok_or_else(|| {
            CliError::usage("BadTolerance", format!("unknown tolerance {name:?}"))
        })?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::usage("BadTolerance", format!("{item:?}: not a number")))?;
        *slot = Value::from(value);
    }
    let tol: Tolerances = serde_json::from_value(fields).expect("fields keep their types");
    if !tol.all_positive() {
        return Err(CliError::usage(
            "BadTolerance",
            "tolerances must be positive and finite",
        ));
    }
    Ok(tol)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::usage("Usage", e.render().to_string().trim_end());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code());
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code())
        }
    }
}
