//! BPSK/AWGN soft demodulation, the uniform LLR quantizer and the symbol
//! distributions it induces.
//!
//! Coded bit 0 is sent as `+1` and bit 1 as `-1`, so a positive LLR favors 0.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mapping::SymbolAlphabet;
use crate::rng::stream_rng;

/// Tolerance on the total mass of a [`SymbolDistribution`].
pub const PMF_TOLERANCE: f64 = 1e-12;

/// Probability mass function over the symbols of an alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolDistribution {
    alphabet: SymbolAlphabet,
    pmf: Vec<f64>,
}

impl SymbolDistribution {
    /// Validates and wraps `pmf`. Distributions are never renormalized.
    pub fn new(alphabet: SymbolAlphabet, pmf: Vec<f64>) -> Result<Self> {
        if pmf.len() != alphabet.size() {
            return Err(Error::DimensionMismatch {
                expected: alphabet.size(),
                actual: pmf.len(),
            });
        }
        if let Some(bad) = pmf.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "entry {bad} is not a probability"
            )));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > PMF_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { alphabet, pmf })
    }

    pub fn point_mass(alphabet: SymbolAlphabet, symbol: usize) -> Result<Self> {
        let mut pmf = vec![0.0; alphabet.size()];
        *pmf.get_mut(symbol).ok_or(Error::DimensionMismatch {
            expected: alphabet.size(),
            actual: symbol + 1,
        })? = 1.0;
        Self::new(alphabet, pmf)
    }

    /// Builds a distribution from nonnegative weights, scaled to unit mass.
    pub fn from_weights(alphabet: SymbolAlphabet, weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidDistribution("weights have no mass".into()));
        }
        Self::new(alphabet, weights.iter().map(|w| w / total).collect())
    }

    /// Discretized zero-mean Gaussian-like shape with no mass on the most
    /// negative symbol.
    pub fn gaussian_standin(alphabet: SymbolAlphabet) -> Self {
        let spread = (alphabet.n_int() as f64).exp2() / 3.0;
        let weights: Vec<f64> = (0..alphabet.size())
            .map(|k| {
                if k == 0 {
                    0.0
                } else {
                    let d = alphabet.value(k);
                    (-d * d / (2.0 * spread * spread)).exp()
                }
            })
            .collect();
        Self::from_weights(alphabet, &weights).expect("positive weights")
    }

    /// Symmetric shape concentrated on the two extreme usable symbols, with no
    /// mass on the most negative symbol.
    pub fn bimodal_standin(alphabet: SymbolAlphabet) -> Self {
        let top = alphabet.value(alphabet.size() - 1);
        let spread = (alphabet.n_int() as f64).exp2() / 4.0;
        let weights: Vec<f64> = (0..alphabet.size())
            .map(|k| {
                if k == 0 {
                    0.0
                } else {
                    let e = alphabet.value(k).abs() - top;
                    (-e * e / (2.0 * spread * spread)).exp()
                }
            })
            .collect();
        Self::from_weights(alphabet, &weights).expect("positive weights")
    }

    pub fn alphabet(&self) -> SymbolAlphabet {
        self.alphabet
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.pmf[symbol]
    }

    /// Second moment `E[d^2]`.
    pub fn power(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(k, p)| p * self.alphabet.value(k).powi(2))
            .sum()
    }
}

/// Uniform quantizer resolution and LLR scaling `δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerParams {
    alphabet: SymbolAlphabet,
    delta: f64,
}

impl QuantizerParams {
    pub fn new(alphabet: SymbolAlphabet, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "quantizer scaling must be positive, got {delta}"
            )));
        }
        Ok(Self { alphabet, delta })
    }

    pub fn alphabet(&self) -> SymbolAlphabet {
        self.alphabet
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Largest output magnitude in steps, `2^(N-1) - 1`.
    pub fn max_level(&self) -> i64 {
        (1i64 << (self.alphabet.n_bits() - 1)) - 1
    }

    fn gain(&self) -> f64 {
        self.delta * (self.alphabet.n_frac() as f64).exp2()
    }

    /// Quantized symbol index for an LLR value.
    pub fn quantize_index(&self, llr: f64) -> Result<usize> {
        if llr.is_nan() {
            return Err(Error::NanInput);
        }
        let level = (self.gain() * llr.abs() + 0.5)
            .floor()
            .min(self.max_level() as f64) as i64;
        let m = if llr < 0.0 { -level } else { level };
        Ok(self
            .alphabet
            .index_of_offset(m)
            .expect("quantizer output lies inside the alphabet"))
    }

    /// Quantized symbol value for an LLR value.
    pub fn quantize(&self, llr: f64) -> Result<f64> {
        Ok(self.alphabet.value(self.quantize_index(llr)?))
    }

    /// LLR interval `[lo, hi)` (closed on the side of zero for the zero bin)
    /// that quantizes to the symbol with integer offset `m`.
    fn llr_interval(&self, m: i64) -> (f64, f64) {
        let g = self.gain();
        let q = m.abs();
        let inner = if q == 0 { 0.0 } else { (q as f64 - 0.5) / g };
        let outer = if q == self.max_level() {
            f64::INFINITY
        } else {
            (q as f64 + 0.5) / g
        };
        match m.signum() {
            0 => (-outer, outer),
            1 => (inner, outer),
            _ => (-outer, -inner),
        }
    }
}

pub fn quantize(llr: f64, params: &QuantizerParams) -> Result<f64> {
    params.quantize(llr)
}

/// Noise level of the real AWGN channel for unit-energy BPSK.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwgnParams {
    sigma2: f64,
}

impl AwgnParams {
    pub fn from_sigma2(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be positive, got {sigma2}"
            )));
        }
        Ok(Self { sigma2 })
    }

    /// `SNR[dB] = 10 log10(1 / σ²)`.
    pub fn from_snr_db(snr_db: f64) -> Result<Self> {
        Self::from_sigma2(10f64.powf(-snr_db / 10.0))
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    pub fn snr_db(&self) -> f64 {
        -10.0 * self.sigma2.log10()
    }
}

/// Channel LLR `2y/σ²` of a received BPSK sample.
pub fn llr(y: f64, sigma2: f64) -> f64 {
    2.0 * y / sigma2
}

/// BPSK amplitude of a coded bit.
pub fn bpsk(bit: u8) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

fn upper_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// `Pr(a <= Y < b)` for `Y ~ N(mean, sigma²)`, computed from whichever tail
/// keeps the subtraction well conditioned.
fn gaussian_mass(a: f64, b: f64, mean: f64, sigma: f64) -> f64 {
    let za = (a - mean) / sigma;
    let zb = (b - mean) / sigma;
    let mass = if za >= 0.0 {
        upper_tail(za) - upper_tail(zb)
    } else if zb <= 0.0 {
        upper_tail(-zb) - upper_tail(-za)
    } else {
        1.0 - upper_tail(-za) - upper_tail(zb)
    };
    mass.max(0.0)
}

/// Exact distribution of the quantized LLR given the transmitted coded bit.
pub fn conditional_pmf(
    params: &QuantizerParams,
    awgn: &AwgnParams,
    bit: u8,
) -> SymbolDistribution {
    let alphabet = params.alphabet();
    let mean = bpsk(bit);
    let to_y = awgn.sigma2() / 2.0;
    let pmf = (0..alphabet.size())
        .map(|k| {
            let m = alphabet.offset(k);
            if m.abs() > params.max_level() {
                return 0.0;
            }
            let (lo, hi) = params.llr_interval(m);
            gaussian_mass(lo * to_y, hi * to_y, mean, awgn.sigma())
        })
        .collect();
    SymbolDistribution::new(alphabet, pmf).expect("quantizer bins partition the real line")
}

/// Averages the two conditional distributions (equiprobable coded bits).
pub fn marginal_pmf(p0: &SymbolDistribution, p1: &SymbolDistribution) -> Result<SymbolDistribution> {
    if p0.alphabet() != p1.alphabet() {
        return Err(Error::AlphabetMismatch(
            "conditional distributions use different alphabets".into(),
        ));
    }
    let pmf = p0
        .pmf()
        .iter()
        .zip(p1.pmf())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    SymbolDistribution::new(p0.alphabet(), pmf)
}

/// Quantized-LLR distributions for both coded bits at one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalPmfs {
    pub given_zero: SymbolDistribution,
    pub given_one: SymbolDistribution,
}

impl ConditionalPmfs {
    pub fn exact(params: &QuantizerParams, awgn: &AwgnParams) -> Self {
        Self {
            given_zero: conditional_pmf(params, awgn, 0),
            given_one: conditional_pmf(params, awgn, 1),
        }
    }

    pub fn new(given_zero: SymbolDistribution, given_one: SymbolDistribution) -> Result<Self> {
        if given_zero.alphabet() != given_one.alphabet() {
            return Err(Error::AlphabetMismatch(
                "conditional distributions use different alphabets".into(),
            ));
        }
        Ok(Self {
            given_zero,
            given_one,
        })
    }

    pub fn alphabet(&self) -> SymbolAlphabet {
        self.given_zero.alphabet()
    }

    pub fn given(&self, bit: u8) -> &SymbolDistribution {
        if bit == 0 {
            &self.given_zero
        } else {
            &self.given_one
        }
    }

    pub fn marginal(&self) -> SymbolDistribution {
        marginal_pmf(&self.given_zero, &self.given_one).expect("same alphabet")
    }
}

const MC_BLOCK: u64 = 1 << 16;

/// Monte-Carlo histogram of quantized LLRs over `trials` noise draws.
///
/// Trials are split into fixed-size blocks with one random stream each, so
/// the result depends only on `(trials, seed)`.
pub fn estimate_pdc_mc(
    params: &QuantizerParams,
    awgn: &AwgnParams,
    bit: u8,
    trials: u64,
    seed: u64,
) -> Result<SymbolDistribution> {
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    let alphabet = params.alphabet();
    let blocks = trials.div_ceil(MC_BLOCK);
    let (x, sigma, s2) = (bpsk(bit), awgn.sigma(), awgn.sigma2());
    let counts = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = stream_rng(seed, block);
            let n = MC_BLOCK.min(trials - block * MC_BLOCK);
            let mut hist = vec![0u64; alphabet.size()];
            for _ in 0..n {
                let w: f64 = StandardNormal.sample(&mut rng);
                let k = params
                    .quantize_index(llr(x + sigma * w, s2))
                    .expect("finite sample");
                hist[k] += 1;
            }
            hist
        })
        .reduce(
            || vec![0u64; alphabet.size()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let pmf = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    SymbolDistribution::new(alphabet, pmf)
}
