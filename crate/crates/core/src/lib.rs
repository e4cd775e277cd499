//! Data representations for unreliable memories.
//!
//! Symbols such as quantized LLRs are stored in a memory whose bit cells fail
//! at random. This crate models the memory as a label channel, scores every
//! bijective symbol-to-label mapping against an application cost and finds
//! the best one by exhaustive search. A Monte-Carlo link simulator checks the
//! result on a coded BPSK receiver.
//!
//! ```
//! use relmap::{optimize, CostSpec, CrossoverMatrix, Mapping, SearchOptions,
//!              SymbolAlphabet, SymbolDistribution};
//!
//! let alphabet = SymbolAlphabet::new(3, 0).unwrap();
//! let spec = CostSpec::Mse {
//!     p_d: SymbolDistribution::bimodal_standin(alphabet),
//!     channel: CrossoverMatrix::sac(3, 1e-2).unwrap(),
//! };
//! let best = optimize(&spec, &SearchOptions::default()).unwrap();
//! let tc = spec.evaluate(&Mapping::twos_complement(alphabet)).unwrap();
//! assert!(best.best_cost <= tc);
//! ```

pub mod channel;
pub mod cost;
pub mod error;
pub mod mapping;
pub mod optimizer;
pub mod quantizer;
pub mod rng;
pub mod sim;

pub use channel::{apply_channel, bsc_crossover, sac_crossover, CrossoverMatrix, FaultModel};
pub use cost::{
    branch_metric_model, compound_crossover, cost_mse, cost_msbe, mean_error, msbe,
    mutual_information, rep_error_prob, ser_db, BranchHypothesis, BranchMetricModel,
    CompoundChannel, CostKind, CostSpec, CostTemplate, Ser,
};
pub use error::{Error, Result};
pub use mapping::{hamming, make_alphabet, recode_tables, Label, Mapping, RecodePair, SymbolAlphabet};
pub use optimizer::{
    enumerate_mappings, hill_climb, optimize, sweep, OptimizationResult, Pruning, SearchMethod,
    SearchOptions,
};
pub use quantizer::{
    conditional_pmf, estimate_pdc_mc, llr, marginal_pmf, quantize, AwgnParams, ConditionalPmfs,
    QuantizerParams, SymbolDistribution,
};
pub use sim::{
    ber_curve, conv_encode, simulate, simulate_conv, simulate_rep, viterbi_decode, BerPoint,
    ConvCode, LinkConfig, MappingChoice, MemoryStage, Scheme, StopRule,
};
