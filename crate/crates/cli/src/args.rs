use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "chainamp",
    version,
    about = "Chain complexes, difference matrices and restricted Gaussian amplitudes on graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check graph invariants, d1*d2 = 0, null space and source divergence.
    Validate(InputArgs),
    /// Row-space partition function, exponent and per-mode projections.
    Amplitude(AmplitudeArgs),
    /// Certify ladder closed forms against the generic pipeline.
    Certify(CertifyArgs),
    /// Outcome density along one row-space mode over a grid.
    Probability(ProbabilityArgs),
    /// Coupled-oscillator action matrix and its comparison with the ladder Laplacian.
    Oscillator(OscillatorArgs),
    /// Closed-form ladder spectrum as CSV.
    Spectrum(SpectrumArgs),
    /// Independent numerical checks.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Tensor-product quadrature of the row-space integral.
    Quadrature(QuadratureArgs),
    /// Exponent by direct eigen-summation.
    Phi(AmplitudeArgs),
    /// Self-consistency sweep over small connected graphs.
    SccSweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Graph JSON file.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Generate the ladder graph with N vertices instead of reading a file.
    #[arg(long, value_name = "N")]
    pub ladder: Option<usize>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[command(flatten)]
    pub source: Source,
    /// Write output here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Scales {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long = "hbar-beta", default_value_t = 1.0)]
    pub hbar_beta: f64,
}

/// Where link values come from.
#[derive(Clone, Debug, PartialEq)]
pub enum LinkSource {
    /// The `link_values` field of the input file.
    File,
    Constant(f64),
    RandomIntegers {
        lo: i64,
        hi: i64,
        seed: u64,
    },
}

impl FromStr for LinkSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || format!("expected const:<v>, file or randint:<lo>:<hi>:<seed>, got `{s}`");
        match parts.as_slice() {
            ["file"] => Ok(LinkSource::File),
            ["const", v] => v.parse().map(LinkSource::Constant).map_err(|_| bad()),
            ["randint", lo, hi, seed] => {
                let lo: i64 = lo.parse().map_err(|_| bad())?;
                let hi: i64 = hi.parse().map_err(|_| bad())?;
                let seed = seed.parse().map_err(|_| bad())?;
                if lo > hi {
                    return Err(format!("randint range is empty: {lo} > {hi}"));
                }
                Ok(LinkSource::RandomIntegers { lo, hi, seed })
            }
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for LinkSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LinkSource::File => write!(f, "file"),
            LinkSource::Constant(v) => write!(f, "const:{v}"),
            LinkSource::RandomIntegers { lo, hi, seed } => write!(f, "randint:{lo}:{hi}:{seed}"),
        }
    }
}

#[derive(Debug, Args)]
pub struct AmplitudeArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub scales: Scales,
    /// const:<v> | file | randint:<lo>:<hi>:<seed>. Defaults to `file` for
    /// input files and `const:1` for generated ladders.
    #[arg(long, allow_hyphen_values = true)]
    pub links: Option<LinkSource>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Append a quadrature comparison when the rank allows it.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 40)]
    pub n_max: usize,
    #[arg(long, default_value_t = 2)]
    pub step: usize,
    /// Random integer link vectors per N.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Range of the random link values, inclusive.
    #[arg(long, default_value_t = 10)]
    pub max_link: i64,
    #[command(flatten)]
    pub scales: Scales,
    /// Permit N above 40.
    #[arg(long)]
    pub allow_large: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProbabilityArgs {
    #[command(flatten)]
    pub amplitude: AmplitudeArgs,
    /// Index into the ascending spectrum; zero modes come first.
    #[arg(long)]
    pub mode: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub q_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub q_max: Option<f64>,
    #[arg(long, default_value_t = 401)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct OscillatorArgs {
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub k12: f64,
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
    #[arg(long, default_value_t = 3)]
    pub n_time: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, value_name = "N")]
    pub ladder: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Trapezoid,
    GaussHermite,
}

#[derive(Debug, Args)]
pub struct QuadratureArgs {
    #[command(flatten)]
    pub amplitude: AmplitudeArgs,
    #[arg(long, value_enum, default_value_t = Rule::Trapezoid)]
    pub rule: Rule,
    /// Trapezoid points per axis or Gauss-Hermite order.
    #[arg(long)]
    pub points: Option<usize>,
    /// Trapezoid half-width in standard deviations.
    #[arg(long, default_value_t = 12.0)]
    pub axis_bound: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 8)]
    pub max_vertices: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
