use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Seed used when `--seed` is not given, so every run is reproducible.
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Parser)]
#[command(name = "geowrap", version, about = "Wrapped normal distributions on the hyperboloid and the sphere")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw samples from a wrapped normal.
    Sample {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate log-densities at the points of a sample CSV.
    Logpdf {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Maximum-likelihood covariance in unwrapped coordinates.
    FitSigma {
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Inverse-Wishart posterior for the covariance.
    FitBayes {
        #[command(flatten)]
        fit: FitArgs,
        /// Prior degrees of freedom; defaults to dim + 2.
        #[arg(long)]
        prior_nu: Option<f64>,
        /// Prior scale matrix is this multiple of the identity.
        #[arg(long, default_value_t = 1.0)]
        prior_scale: f64,
    },
    /// EM fit of a wrapped normal mixture.
    FitMixture {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, default_value = "isometry_lambert")]
        variant: String,
        #[arg(long)]
        components: usize,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Latent space network model by Metropolis-Hastings.
    NetworkFit(NetworkArgs),
    /// Run the verification suite and write a JSON report.
    Verify {
        #[arg(long)]
        out: PathBuf,
    },
    /// Deviation of wrap(u) from u as the curvature vanishes.
    Limits {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct SpecArg {
    /// Distribution spec: a JSON file path or an inline JSON object.
    #[arg(long = "spec")]
    pub spec: String,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long, default_value = "isometry_lambert")]
    pub variant: String,
    /// Ambient coordinates of the location; estimated from the samples if absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub location: Option<Vec<f64>>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    #[arg(long)]
    pub edges: PathBuf,
    /// hyperboloid, sphere or euclidean.
    #[arg(long)]
    pub manifold: String,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Sampler settings as JSON; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[arg(long, default_value = "trace.csv")]
    pub trace: PathBuf,
    #[arg(long, default_value = "summary.json")]
    pub summary: PathBuf,
}
