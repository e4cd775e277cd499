//! `relmap` command-line front end.

mod commands;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "relmap", version, about = "Data representations for unreliable memories")]
pub struct Cli {
    /// Worker threads for searches and simulations (0 = all cores).
    #[arg(long, global = true, env = "RELMAP_WORKERS", default_value_t = 0)]
    pub workers: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Label cross-over matrix of a faulty memory.
    Crossover(CrossoverArgs),
    /// Quantized-LLR distributions at one SNR.
    Pmf(PmfArgs),
    /// Signal-to-error ratio of every mapping.
    Ser(SerArgs),
    /// Best mapping for a cost function.
    Optimize(OptimizeArgs),
    /// Achievable rates over SNR.
    Rates(RatesArgs),
    /// Monte-Carlo bit error rate curves.
    Ber(BerArgs),
    /// Recoding table from a fixed mapping to a target mapping.
    Recode(RecodeArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    Bsc,
    Sac,
}

impl From<Model> for relmap::FaultModel {
    fn from(m: Model) -> Self {
        match m {
            Model::Bsc => relmap::FaultModel::Bsc,
            Model::Sac => relmap::FaultModel::Sac,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cost {
    Mse,
    Mi,
    Rep,
    Msbe,
}

impl From<Cost> for relmap::CostKind {
    fn from(c: Cost) -> Self {
        match c {
            Cost::Mse => relmap::CostKind::Mse,
            Cost::Mi => relmap::CostKind::Mi,
            Cost::Rep => relmap::CostKind::Rep,
            Cost::Msbe => relmap::CostKind::Msbe,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Base {
    #[value(name = "2c")]
    TwosComplement,
    Sm,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hypothesis {
    AllZero,
    Averaged,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeArg {
    Rep,
    Conv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig5,
    Fig6,
    Fig7,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct AlphabetArgs {
    /// Word width N in bits.
    #[arg(long, default_value_t = 3)]
    pub n_bits: u32,
    /// Fractional bits F.
    #[arg(long, default_value_t = 0)]
    pub n_frac: u32,
}

#[derive(Args, Debug)]
pub struct CrossoverArgs {
    /// `fig2` prints BSC and SAC probabilities by Hamming distance at eps 1e-1 and 1e-2.
    #[arg(long)]
    pub preset: Option<Preset>,
    #[arg(long, value_enum, default_value_t = Model::Sac)]
    pub model: Model,
    #[arg(long, default_value_t = 3)]
    pub n_bits: u32,
    /// Bit-cell error probability.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub epsilon: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PmfArgs {
    #[command(flatten)]
    pub alphabet: AlphabetArgs,
    /// Quantizer scale delta.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub delta: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub snr_db: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SerArgs {
    /// `fig3` selects the default experiment parameters.
    #[arg(long)]
    pub preset: Option<Preset>,
    #[command(flatten)]
    pub alphabet: AlphabetArgs,
    #[arg(long, value_enum, default_value_t = Model::Sac)]
    pub model: Model,
    #[arg(long, default_value_t = 1e-2, allow_negative_numbers = true)]
    pub epsilon: f64,
    /// `gaussian`, `bimodal` or a CSV file with `symbol,probability` rows.
    #[arg(long, default_value = "bimodal")]
    pub dist: String,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    /// Widest word searched exhaustively; 4 needs roughly 2·10^13 evaluations.
    #[arg(long, default_value_t = relmap::optimizer::DEFAULT_MAX_BITS)]
    pub search_max_bits: u32,
    /// Only evaluate mappings that store the first symbol as all zeros.
    #[arg(long)]
    pub prune: bool,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[arg(long, value_enum)]
    pub cost: Cost,
    #[command(flatten)]
    pub alphabet: AlphabetArgs,
    #[arg(long, value_enum, default_value_t = Model::Sac)]
    pub model: Model,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub snr_db: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub delta: f64,
    /// Symbol distribution for mse and msbe instead of the quantizer output:
    /// `gaussian`, `bimodal` or a CSV file.
    #[arg(long)]
    pub dist: Option<String>,
    /// Branch hypotheses modeled by the msbe cost.
    #[arg(long, value_enum, default_value_t = Hypothesis::AllZero)]
    pub hypothesis: Hypothesis,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Heuristic random-restart local search with this many restarts instead
    /// of exhaustive search. The result is not guaranteed optimal.
    #[arg(long)]
    pub hill_climb: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Writes every evaluated mapping, best first, to this CSV file.
    #[arg(long)]
    pub dump_ranking: Option<PathBuf>,
    /// Writes the recoding table from `--base` to the optimum to this CSV file.
    #[arg(long)]
    pub recode: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Base::TwosComplement)]
    pub base: Base,
    /// Mapping JSON target.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RatesArgs {
    /// `fig5` selects the default experiment parameters.
    #[arg(long)]
    pub preset: Option<Preset>,
    #[command(flatten)]
    pub alphabet: AlphabetArgs,
    #[arg(long, value_enum, default_value_t = Model::Sac)]
    pub model: Model,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub delta: f64,
    #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
    pub snr_start: f64,
    #[arg(long, default_value_t = 8.0, allow_negative_numbers = true)]
    pub snr_stop: f64,
    #[arg(long, default_value_t = 0.5)]
    pub snr_step: f64,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BerArgs {
    /// `fig6` selects repetition coding, `fig7` convolutional coding.
    #[arg(long)]
    pub preset: Option<Preset>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Comma-separated list of `2c`, `sm`, `optimized` or mapping JSON files.
    #[arg(long, value_delimiter = ',', default_value = "2c,sm,optimized")]
    pub mapping: Vec<String>,
    /// Cost for `optimized` (default: rep for repetition, msbe for convolutional).
    #[arg(long, value_enum)]
    pub cost: Option<Cost>,
    /// Comma-separated bit-cell error probabilities, one output file each.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub epsilon: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long, value_enum, default_value_t = Model::Sac)]
    pub model: Model,
    #[command(flatten)]
    pub alphabet: AlphabetArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub snr_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub snr_stop: Option<f64>,
    #[arg(long)]
    pub snr_step: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Stop a point after this many information bits.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_bits: u64,
    /// Stop a point once this many bit errors are counted.
    #[arg(long, default_value_t = 100)]
    pub target_errors: u64,
    /// Simulate at least this many bits per point.
    #[arg(long, default_value_t = 0)]
    pub min_bits: u64,
    /// Information bits per frame.
    #[arg(long, default_value_t = relmap::sim::link::DEFAULT_FRAME_BITS)]
    pub frame_bits: usize,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct RecodeArgs {
    #[arg(long, value_enum, default_value_t = Base::TwosComplement)]
    pub base: Base,
    /// Mapping JSON file as written by `optimize`.
    #[arg(long)]
    pub target: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global() {
            eprintln!("error: cannot start {} workers: {e}", cli.workers);
            return ExitCode::FAILURE;
        }
    }
    match commands::run(cli.command) {
        Ok(summary) => {
            eprintln!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
