use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Stepanov almost-periodicity diagnostics and mild-solution solvers.
///
/// Every subcommand takes an optional TOML scenario (`--config`); flags
/// override scenario keys. Data go to CSV (standard output by default),
/// reports to JSON when `--report` is given.
#[derive(Debug, Parser)]
#[command(name = "stepanov", version, about, long_about = None)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// CSV destination; `-` is standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON report destination; `-` is standard output.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Window approximation of the Stepanov norm.
    Norm(NormArgs),
    /// Measure-weighted ergodic means along an r-ladder.
    Ergodic(ErgodicArgs),
    /// Scan for ε-translation numbers.
    Translations(TranslationsArgs),
    /// Sampled modulus of uniform continuity.
    Modulus(ModulusArgs),
    /// Mittag-Leffler function values.
    Ml(MlArgs),
    /// The constant S_γ^q and its parts.
    Constants(ConstantsArgs),
    /// Meir-Keeler (ε, δ = ε²) probe of a scalar map.
    Probe(ProbeArgs),
    /// Semilinear fractional problem on a diagonal spectrum.
    SolveFrac,
    /// Fractional heat model on (0, π).
    Heat,
    /// Semilinear evolution problem with an exponential dichotomy.
    SolveEvo,
    /// Lotka-Volterra diffusion model.
    Lotka,
    /// Ergodic decay of a composition remainder.
    ComposeCheck,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    /// Signal, e.g. `sine:1,6.283185307179586` or `arctan-shift`.
    #[arg(long)]
    pub signal: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Window of cell origins, `a,b`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub window: Option<Vec<f64>>,
    /// Spacing of cell origins.
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ErgodicArgs {
    #[arg(long)]
    pub signal: Option<String>,
    /// `lebesgue`, `exp-left` or `table:<file>`.
    #[arg(long)]
    pub density: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Radii, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub r: Option<Vec<f64>>,
    /// Superlevel thresholds, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Option<Vec<f64>>,
    /// Sampling step of superlevel sets.
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TranslationsArgs {
    #[arg(long)]
    pub signal: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Largest τ scanned.
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub window: Option<Vec<f64>>,
    #[arg(long)]
    pub tau_step: Option<f64>,
    #[arg(long)]
    pub cell_step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ModulusArgs {
    #[arg(long)]
    pub signal: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub window: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub delta: Option<Vec<f64>>,
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MlArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub z: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long, value_delimiter = ',')]
    pub gamma: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// `saturating` for |x|/(1+|x|) or `linear:c` for c·x.
    #[arg(long)]
    pub map: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub range: Option<Vec<f64>>,
    /// Lattice points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Option<Vec<f64>>,
}
