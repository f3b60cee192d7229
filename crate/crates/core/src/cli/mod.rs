//! Batch command-line interface.
//!
//! Every command resolves a [`RunConfig`] (flag > config file > default),
//! creates a fresh run directory `<out>/<timestamp>_seed<seed>`, echoes the
//! resolved config into it as `config.toml` and writes its artifacts there.
//! Commands that read a dataset use the machine model stored in the dataset.
//!
//! Failures print one JSON object to stderr and exit with a code per error
//! kind, see [`exit_code`].

mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{run, Outcome};
pub use config::{Overrides, RunConfig};

use crate::error::Error;
use crate::nn::{LossKind, NetKind, OptimizerKind, Preset};

#[derive(Debug, Parser)]
#[command(name = "pmsm", version, about = "PMSM data generation, surrogate training and KPI post-processing")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for design sampling, splits and network initialization.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output root for run directories [default: $PMSM_OUT, else ./runs].
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Network size preset.
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample designs and run the analytic model on the operating-point grid.
    Generate(GenerateArgs),
    /// Train a hybrid (measures) or direct (KPI) network on a dataset.
    Train(TrainArgs),
    /// Per-quantity and per-KPI accuracy of a checkpoint on the test split.
    Evaluate(EvaluateArgs),
    /// KPIs and characteristic curves for one design.
    Kpi(DesignArgs),
    /// Efficiency map for one design, plus the hybrid-vs-classical difference.
    Effmap(DesignArgs),
    /// Hybrid versus direct KPI accuracy over training-set fractions.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n_designs: Option<usize>,
    /// Waveform samples per electrical period.
    #[arg(long)]
    pub n_steps: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct TrainOverrideArgs {
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long, value_enum)]
    pub loss: Option<LossKind>,
    #[arg(long, value_enum)]
    pub optimizer: Option<OptimizerKind>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value = "hybrid")]
    pub mode: NetKind,
    #[arg(long, value_name = "FILE")]
    pub dataset: Option<PathBuf>,
    #[command(flatten)]
    pub train: TrainOverrideArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, value_name = "FILE")]
    pub dataset: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Design index in the dataset; omit both this and `--design-file` for
    /// the midpoint design of the configured ranges.
    #[arg(long, conflicts_with = "design_file")]
    pub design: Option<usize>,
    /// JSON design-parameter record, evaluated with the configured machine.
    #[arg(long, value_name = "FILE")]
    pub design_file: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub dataset: Option<PathBuf>,
    /// Hybrid checkpoint; enables the predicted-measures path.
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, value_name = "FILE")]
    pub dataset: Option<PathBuf>,
    /// Training fractions in percent, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
    #[command(flatten)]
    pub train: TrainOverrideArgs,
}

/// Process exit code for an error kind.
pub fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        "config" | "range" => 3,
        "missing_file" => 4,
        "format" | "version" | "truncated" | "checksum" => 5,
        "shape" | "numeric" => 6,
        "diverged" => 7,
        "io" => 8,
        _ => 1,
    }
}

/// Machine-readable error record for stderr.
pub fn error_json(e: &Error) -> serde_json::Value {
    let mut v = serde_json::json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": exit_code(e),
    });
    if let Error::Diverged { epoch, .. } = e {
        v["epoch"] = (*epoch).into();
    }
    v
}

/// Parses `std::env::args`, runs the command and returns the exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(o) => {
            println!("{}", serde_json::to_string(&o).expect("outcome serializes"));
            0
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}
