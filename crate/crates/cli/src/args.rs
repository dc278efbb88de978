//! Command-line surface.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

/// Fixed default seed so bare invocations are reproducible.
pub const DEFAULT_SEED: u64 = 1729;

#[derive(Parser, Debug)]
#[command(
    name = "shearer",
    version,
    about = "Hard-core avoidance functions, phase classification, bound certificates and point-process simulation on finite metric spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate the avoidance function Z and its ratios
    Z {
        #[command(subcommand)]
        cmd: ZCmd,
    },
    /// Classify intensity measures and scan fugacities
    Phase {
        #[command(subcommand)]
        cmd: PhaseCmd,
    },
    /// Smallest scaling λ with Z(region, λM) = 0
    Critical {
        #[arg(long)]
        space: PathBuf,
        /// Region ids (comma separated); the whole space when omitted
        #[arg(long = "A", value_delimiter = ',')]
        region: Option<Vec<String>>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Series expansion of -log z
    Cluster {
        #[command(subcommand)]
        cmd: ClusterCmd,
    },
    /// Sufficient-condition certificates with per-query lower bounds
    Lll {
        #[command(subcommand)]
        cmd: LllCmd,
    },
    /// Point-process samplers and empirical statistics
    Sim {
        #[command(subcommand)]
        cmd: SimCmd,
    },
    /// Deterministic check suite
    Audit {
        #[command(subcommand)]
        cmd: AuditCmd,
    },
}

#[derive(Subcommand, Debug)]
pub enum ZCmd {
    /// Z of one region
    Eval {
        #[arg(long)]
        space: PathBuf,
        #[arg(long = "A", value_delimiter = ',')]
        region: Vec<String>,
        #[arg(long, value_enum, default_value_t = Method::Recursion)]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// z(A, B) = Z(A ∪ B) / Z(B)
    Ratio {
        #[arg(long)]
        space: PathBuf,
        #[arg(long = "A", value_delimiter = ',')]
        a: Vec<String>,
        #[arg(long = "B", value_delimiter = ',')]
        b: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum PhaseCmd {
    /// Label the measure EMPTY / ZERO / SH_BOUNDARY / POSITIVE with a witness
    Classify {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Z and phase along a fugacity grid
    Scan {
        #[arg(long)]
        space: PathBuf,
        /// Either `start:stop:step` or a comma-separated list
        #[arg(long = "lambda-grid")]
        lambda_grid: String,
        /// Region for the Z column; the whole space when omitted
        #[arg(long = "A", value_delimiter = ',')]
        region: Option<Vec<String>>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ClusterCmd {
    /// Terms and partial sums of the -log z series
    Expand {
        #[arg(long)]
        space: PathBuf,
        #[arg(long = "A", value_delimiter = ',')]
        a: Vec<String>,
        #[arg(long = "B", value_delimiter = ',', default_value = "")]
        b: Vec<String>,
        #[arg(long, default_value_t = 6)]
        order: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum LllCmd {
    /// Unit-diameter mass against the growth-bound threshold
    Symmetric {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Membership of (1+α)M in the non-negative phase
    Inflation {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Auxiliary-measure condition; N is an id → weight JSON file
    Kp {
        #[arg(long)]
        space: PathBuf,
        #[arg(long = "N")]
        n_measure: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Homogeneous Euclidean condition: α solving λ = α e^(-αV)
    Euclidean {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum SimCmd {
    /// Sample a model and estimate the queries from a query file
    Run {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        space: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        max_attempts: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum AuditCmd {
    /// Run every check and print a pass/fail table
    All,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Recursion,
    Enumeration,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum Model {
    Shearer,
    Hardsphere,
    Matern1,
    Matern2,
    Matern3,
    Zerodep,
    Zerophase,
}
