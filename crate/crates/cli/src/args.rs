use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "homquiver", version, about = "Stability, Hom-quiver and vortex checks for holomorphic chains")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Master seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Vortex residual tolerance (sup of spectral norms).
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Worker threads for batch runs (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Report file (for `generate`: output directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Initial line-search step of the flow.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub step: f64,
    /// Give up once the metric condition number exceeds this.
    #[arg(long, global = true, default_value_t = 1e8)]
    pub cond_bound: f64,
    /// Relative singular value cutoff for numerical ranks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub rank_tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct Inputs {
    /// Instance files or directories of `*.json` instances.
    #[arg(required = true)]
    pub instances: Vec<PathBuf>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct AlphaArgs {
    /// Parameter for both chains, comma separated from vertex m down to 0.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_prime: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_dprime: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// Gaussian maps with the given dims.
    Random,
    /// Oracle-certified stable chains with their parameters.
    Stable,
    /// Polystable chains sharing one parameter, mu(C'') > mu(C').
    Polystable,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Write seeded random chain pairs.
    Generate {
        #[arg(long)]
        m: usize,
        /// Dims of both chains (or C' only, see --dims-dprime), from m down to 0.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        dims_dprime: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, value_enum, default_value = "random")]
        kind: GenKind,
    },
    /// Exact stability verdicts for both chains.
    Classify {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        alpha: AlphaArgs,
    },
    /// Extended Hom-quiver, collapsed quiver and structural checks.
    Homquiver {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        alpha: AlphaArgs,
        /// Include the matrix of d in the report.
        #[arg(long)]
        with_d: bool,
    },
    /// Solve the vortex equations for both chains and compare with the oracle.
    Vortex {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        alpha: AlphaArgs,
    },
    /// Transfer vortex solutions to the extended Hom-quiver.
    VerifyLemma {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        alpha: AlphaArgs,
        /// Tolerance on the Hom-quiver residual.
        #[arg(long, default_value_t = 1e-8)]
        hom_tol: f64,
    },
    /// Polystability of the extended Hom-quiver plus randomized subobjects.
    VerifyTransfer {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        alpha: AlphaArgs,
        #[arg(long, default_value_t = 1000)]
        candidates: usize,
    },
    /// Exact slope bookkeeping for ker/coker ledgers.
    Ags {
        #[arg(required = true)]
        ledgers: Vec<PathBuf>,
    },
}
