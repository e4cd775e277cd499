//! Monte-Carlo simulation of the coded BPSK link with an unreliable LLR
//! memory between quantizer and decoder.
//!
//! Frame `f` draws its payload and noise from stream `2f` and its memory
//! faults from stream `2f + 1`, so bypassing the memory or changing the
//! mapping never shifts the noise realization. Frames are processed in
//! fixed-size batches; the stop rule is checked between batches.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::channel::CrossoverMatrix;
use crate::cost::{CostKind, CostTemplate};
use crate::error::{Error, Result};
use crate::mapping::Mapping;
use crate::optimizer::{optimize, SearchOptions};
use crate::quantizer::{bpsk, llr, AwgnParams, QuantizerParams};
use crate::rng::{stream_rng, SimRng};
use crate::sim::conv::{conv_encode, viterbi_decode, ConvCode};

/// Frames simulated between two checks of the stop rule.
pub const BATCH_FRAMES: u64 = 64;

/// Information bits per frame when not configured otherwise.
pub const DEFAULT_FRAME_BITS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Two uncoded transmissions combined at the receiver.
    Repetition,
    /// Rate-1/2 terminated convolutional code with Viterbi decoding.
    Convolutional,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Repetition => "rep",
            Scheme::Convolutional => "conv",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rep" | "repetition" => Ok(Scheme::Repetition),
            "conv" | "convolutional" => Ok(Scheme::Convolutional),
            other => Err(Error::InvalidParameter(format!(
                "unknown scheme `{other}` (expected rep or conv)"
            ))),
        }
    }
}

/// Mapping plus unreliable memory between quantizer and decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryStage {
    pub mapping: Mapping,
    pub channel: CrossoverMatrix,
}

impl MemoryStage {
    /// Stores the symbol `index`, reads it back and returns the decoded index.
    fn pass<R: Rng + ?Sized>(&self, index: usize, rng: &mut R) -> usize {
        let read = self.channel.sample(self.mapping.encode(index), rng);
        self.mapping.decode(read)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub target_errors: u64,
    /// Bits simulated at least, even once the error target is met.
    pub min_bits: u64,
    pub max_bits: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            target_errors: 100,
            min_bits: 0,
            max_bits: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub scheme: Scheme,
    pub quantizer: QuantizerParams,
    /// `None` feeds the quantized LLRs straight to the decoder.
    pub memory: Option<MemoryStage>,
    pub awgn: AwgnParams,
    pub n_info_bits: usize,
    pub code: ConvCode,
    pub seed: u64,
    pub stop: StopRule,
}

impl LinkConfig {
    pub fn new(
        scheme: Scheme,
        quantizer: QuantizerParams,
        memory: Option<MemoryStage>,
        awgn: AwgnParams,
    ) -> Self {
        Self {
            scheme,
            quantizer,
            memory,
            awgn,
            n_info_bits: DEFAULT_FRAME_BITS,
            code: ConvCode::umts(),
            seed: 0,
            stop: StopRule::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_info_bits == 0 {
            return Err(Error::InvalidParameter("frames need at least one bit".into()));
        }
        if self.stop.max_bits == 0 {
            return Err(Error::InvalidParameter("max_bits must be positive".into()));
        }
        if let Some(stage) = &self.memory {
            if stage.mapping.alphabet() != self.quantizer.alphabet() {
                return Err(Error::AlphabetMismatch(
                    "mapping and quantizer use different alphabets".into(),
                ));
            }
            if stage.channel.n_bits() != self.quantizer.alphabet().n_bits() {
                return Err(Error::DimensionMismatch {
                    expected: self.quantizer.alphabet().size(),
                    actual: stage.channel.size(),
                });
            }
        }
        Ok(())
    }
}

/// One point of a BER curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub ber: f64,
    pub errors: u64,
    pub bits: u64,
    /// Half-width of the normal-approximation 95% binomial interval.
    pub ci95: f64,
}

impl BerPoint {
    fn from_counts(snr_db: f64, errors: u64, bits: u64) -> Self {
        let ber = errors as f64 / bits as f64;
        Self {
            snr_db,
            ber,
            errors,
            bits,
            ci95: 1.96 * (ber * (1.0 - ber) / bits as f64).sqrt(),
        }
    }
}

struct FrameRngs {
    noise: SimRng,
    memory: SimRng,
}

impl FrameRngs {
    fn new(seed: u64, frame: u64) -> Self {
        Self {
            noise: stream_rng(seed, 2 * frame),
            memory: stream_rng(seed, 2 * frame + 1),
        }
    }
}

fn receive(cfg: &LinkConfig, bit: u8, noise: &mut SimRng) -> usize {
    let w: f64 = StandardNormal.sample(noise);
    let y = bpsk(bit) + cfg.awgn.sigma() * w;
    cfg.quantizer
        .quantize_index(llr(y, cfg.awgn.sigma2()))
        .expect("finite channel output")
}

fn through_memory(cfg: &LinkConfig, index: usize, rng: &mut SimRng) -> usize {
    match &cfg.memory {
        Some(stage) => stage.pass(index, rng),
        None => index,
    }
}

fn rep_frame(cfg: &LinkConfig, frame: u64) -> u64 {
    let mut rngs = FrameRngs::new(cfg.seed, frame);
    let a = cfg.quantizer.alphabet();
    let mut errors = 0;
    for _ in 0..cfg.n_info_bits {
        let bit: u8 = rngs.noise.random_range(0..2);
        let first = receive(cfg, bit, &mut rngs.noise);
        let second = receive(cfg, bit, &mut rngs.noise);
        let stored = through_memory(cfg, first, &mut rngs.memory);
        let decided = u8::from(a.offset(stored) + a.offset(second) < 0);
        errors += u64::from(decided != bit);
    }
    errors
}

fn conv_frame(cfg: &LinkConfig, frame: u64) -> u64 {
    let mut rngs = FrameRngs::new(cfg.seed, frame);
    let a = cfg.quantizer.alphabet();
    let bits: Vec<u8> = (0..cfg.n_info_bits)
        .map(|_| rngs.noise.random_range(0..2))
        .collect();
    let coded = conv_encode(&bits, &cfg.code).expect("non-empty frame");
    let soft: Vec<f64> = coded
        .iter()
        .map(|&c| {
            let q = receive(cfg, c, &mut rngs.noise);
            a.value(through_memory(cfg, q, &mut rngs.memory))
        })
        .collect();
    let decoded = viterbi_decode(&soft, &cfg.code).expect("length matches the code");
    decoded.iter().zip(&bits).filter(|(x, y)| x != y).count() as u64
}

fn run(cfg: &LinkConfig, frame_errors: impl Fn(&LinkConfig, u64) -> u64 + Sync) -> Result<BerPoint> {
    cfg.validate()?;
    let per_frame = cfg.n_info_bits as u64;
    let max_frames = cfg.stop.max_bits.div_ceil(per_frame);
    let (mut errors, mut bits, mut done) = (0u64, 0u64, 0u64);
    while done < max_frames {
        let batch = BATCH_FRAMES.min(max_frames - done);
        errors += (done..done + batch)
            .into_par_iter()
            .map(|f| frame_errors(cfg, f))
            .sum::<u64>();
        done += batch;
        bits = done * per_frame;
        if errors >= cfg.stop.target_errors && bits >= cfg.stop.min_bits {
            break;
        }
    }
    Ok(BerPoint::from_counts(cfg.awgn.snr_db(), errors, bits))
}

/// Bit error rate of two-transmission combining; a zero sum decides 0.
pub fn simulate_rep(config: &LinkConfig) -> Result<BerPoint> {
    if config.scheme != Scheme::Repetition {
        return Err(Error::InvalidParameter("config is not a repetition link".into()));
    }
    run(config, rep_frame)
}

/// Bit error rate of the convolutionally coded link over information bits.
pub fn simulate_conv(config: &LinkConfig) -> Result<BerPoint> {
    if config.scheme != Scheme::Convolutional {
        return Err(Error::InvalidParameter("config is not a convolutional link".into()));
    }
    run(config, conv_frame)
}

pub fn simulate(config: &LinkConfig) -> Result<BerPoint> {
    match config.scheme {
        Scheme::Repetition => simulate_rep(config),
        Scheme::Convolutional => simulate_conv(config),
    }
}

/// Which mapping a BER curve uses.
#[derive(Debug, Clone, PartialEq)]
pub enum MappingChoice {
    TwosComplement,
    SignMagnitude,
    /// Re-optimized for each operating point.
    Optimized(CostKind),
    Fixed(Mapping),
}

impl MappingChoice {
    pub fn name(&self) -> String {
        match self {
            MappingChoice::TwosComplement => "2c".into(),
            MappingChoice::SignMagnitude => "sm".into(),
            MappingChoice::Optimized(kind) => format!("{kind}-optimized"),
            MappingChoice::Fixed(_) => "file".into(),
        }
    }

    /// Concrete mapping at one operating point.
    pub fn resolve(
        &self,
        quantizer: &QuantizerParams,
        channel: &CrossoverMatrix,
        snr_db: f64,
        search: &SearchOptions,
    ) -> Result<Mapping> {
        let alphabet = quantizer.alphabet();
        match self {
            MappingChoice::TwosComplement => Ok(Mapping::twos_complement(alphabet)),
            MappingChoice::SignMagnitude => Ok(Mapping::sign_magnitude(alphabet)),
            MappingChoice::Fixed(m) => Ok(m.clone()),
            MappingChoice::Optimized(kind) => {
                let template = CostTemplate::new(*kind, *quantizer, channel.clone());
                Ok(optimize(&template.at_snr(snr_db)?, search)?.best)
            }
        }
    }
}

/// Simulates one BER point per SNR with the chosen mapping resolved at each
/// point. The SNR in `base.awgn` is ignored.
pub fn ber_curve(
    base: &LinkConfig,
    channel: &CrossoverMatrix,
    choice: &MappingChoice,
    snr_db: &[f64],
    search: &SearchOptions,
) -> Result<Vec<(BerPoint, Mapping)>> {
    snr_db
        .iter()
        .map(|&snr| {
            let mapping = choice.resolve(&base.quantizer, channel, snr, search)?;
            let cfg = LinkConfig {
                awgn: AwgnParams::from_snr_db(snr)?,
                memory: Some(MemoryStage {
                    mapping: mapping.clone(),
                    channel: channel.clone(),
                }),
                ..base.clone()
            };
            Ok((simulate(&cfg)?, mapping))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sac_crossover;
    use crate::mapping::SymbolAlphabet;

    fn quant(delta: f64) -> QuantizerParams {
        QuantizerParams::new(SymbolAlphabet::new(3, 0).unwrap(), delta).unwrap()
    }

    fn stage(m: Mapping, eps: f64) -> Option<MemoryStage> {
        Some(MemoryStage {
            mapping: m,
            channel: sac_crossover(3, eps).unwrap(),
        })
    }

    #[test]
    fn clean_high_snr_repetition_is_error_free() {
        let mut cfg = LinkConfig::new(
            Scheme::Repetition,
            quant(1.0),
            stage(Mapping::twos_complement(SymbolAlphabet::new(3, 0).unwrap()), 0.0),
            AwgnParams::from_sigma2(1e-4).unwrap(),
        );
        cfg.stop.max_bits = 100_000;
        let p = simulate_rep(&cfg).unwrap();
        assert_eq!(p.errors, 0);
        assert_eq!(p.bits, 100_000);
        assert!(simulate_conv(&cfg).is_err());
    }

    #[test]
    fn conv_clean_memory_is_transparent() {
        let a = SymbolAlphabet::new(3, 0).unwrap();
        let mut base = LinkConfig::new(
            Scheme::Convolutional,
            quant(0.6),
            None,
            AwgnParams::from_snr_db(0.0).unwrap(),
        );
        base.n_info_bits = 200;
        base.stop = StopRule {
            target_errors: u64::MAX,
            min_bits: 0,
            max_bits: 20_000,
        };
        let bare = simulate_conv(&base).unwrap();
        assert!(bare.errors > 0);
        for m in [Mapping::twos_complement(a), Mapping::sign_magnitude(a)] {
            let cfg = LinkConfig {
                memory: stage(m, 0.0),
                ..base.clone()
            };
            assert_eq!(simulate_conv(&cfg).unwrap(), bare);
        }
    }

    #[test]
    fn same_seed_same_point_any_thread_count() {
        let a = SymbolAlphabet::new(3, 0).unwrap();
        let mut cfg = LinkConfig::new(
            Scheme::Repetition,
            quant(0.2),
            stage(Mapping::sign_magnitude(a), 0.01),
            AwgnParams::from_snr_db(2.0).unwrap(),
        );
        cfg.stop.max_bits = 300_000;
        cfg.seed = 99;
        let many = simulate_rep(&cfg).unwrap();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| simulate_rep(&cfg).unwrap());
        assert_eq!(many, one);
    }

    #[test]
    fn stop_rule_respects_error_target() {
        let a = SymbolAlphabet::new(3, 0).unwrap();
        let mut cfg = LinkConfig::new(
            Scheme::Repetition,
            quant(1.0),
            stage(Mapping::twos_complement(a), 0.1),
            AwgnParams::from_snr_db(-2.0).unwrap(),
        );
        cfg.stop = StopRule {
            target_errors: 100,
            min_bits: 0,
            max_bits: 10_000_000,
        };
        let p = simulate_rep(&cfg).unwrap();
        assert!(p.errors >= 100);
        assert!(p.bits < 10_000_000);
        assert_eq!(p.bits % 1000, 0);
        assert!((p.ber - p.errors as f64 / p.bits as f64).abs() < 1e-15);
    }

    #[test]
    fn rejects_mismatched_memory() {
        let mut cfg = LinkConfig::new(
            Scheme::Repetition,
            quant(1.0),
            Some(MemoryStage {
                mapping: Mapping::twos_complement(SymbolAlphabet::new(3, 0).unwrap()),
                channel: sac_crossover(4, 0.1).unwrap(),
            }),
            AwgnParams::from_snr_db(0.0).unwrap(),
        );
        assert!(simulate_rep(&cfg).is_err());
        cfg.memory = None;
        cfg.n_info_bits = 0;
        assert!(simulate_rep(&cfg).is_err());
    }
}
