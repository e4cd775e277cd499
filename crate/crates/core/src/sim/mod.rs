//! End-to-end link simulation: encoder, BPSK over AWGN, LLR quantizer,
//! unreliable memory and decoder.

pub mod conv;
pub mod link;

pub use conv::{conv_encode, viterbi_decode, ConvCode};
pub use link::{
    ber_curve, simulate, simulate_conv, simulate_rep, BerPoint, LinkConfig, MappingChoice,
    MemoryStage, Scheme, StopRule,
};
