//! Label cross-over models for an unreliable memory.
//!
//! Each stored word is an i.i.d. use of a `K`-ary channel. Two bit-cell fault
//! models are provided: independent bit flips (BSC) and cells that, when
//! faulty, read as a stuck 0 or a stuck 1 with equal probability (SAC).

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::mapping::{hamming, Label, MAX_BITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultModel {
    /// Independent bit flips with probability ε.
    Bsc,
    /// Cell faulty with probability ε, then stuck at 0 or 1 with equal odds.
    Sac,
}

impl fmt::Display for FaultModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FaultModel::Bsc => "bsc",
            FaultModel::Sac => "sac",
        })
    }
}

impl FromStr for FaultModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bsc" => Ok(FaultModel::Bsc),
            "sac" => Ok(FaultModel::Sac),
            other => Err(Error::InvalidParameter(format!(
                "unknown fault model `{other}` (expected bsc or sac)"
            ))),
        }
    }
}

/// Row-stochastic `K x K` matrix of label cross-over probabilities, indexed
/// by the integer value of the stored and the read label.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverMatrix {
    n_bits: u32,
    model: FaultModel,
    epsilon: f64,
    p: Vec<f64>,
}

fn check_args(n_bits: u32, epsilon: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidProbability(epsilon));
    }
    if n_bits == 0 || n_bits > MAX_BITS {
        return Err(Error::InvalidParameter(format!(
            "n_bits must be in 1..={MAX_BITS}, got {n_bits}"
        )));
    }
    Ok(())
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// BSC cross-over probability for a pair of labels at Hamming distance `d`.
pub fn bsc_entry(n_bits: u32, epsilon: f64, d: u32) -> f64 {
    epsilon.powi(d as i32) * (1.0 - epsilon).powi((n_bits - d) as i32)
}

/// SAC cross-over probability at Hamming distance `d`, evaluated as the
/// binomial sum over the `l` cells that agree with the stored word but are
/// faulty anyway.
pub fn sac_entry(n_bits: u32, epsilon: f64, d: u32) -> f64 {
    let half = epsilon / 2.0;
    let agree = n_bits - d;
    (0..=agree)
        .map(|l| {
            binomial(agree, l) * half.powi((d + l) as i32) * (1.0 - epsilon).powi((agree - l) as i32)
        })
        .sum()
}

impl CrossoverMatrix {
    pub fn new(model: FaultModel, n_bits: u32, epsilon: f64) -> Result<Self> {
        check_args(n_bits, epsilon)?;
        let by_distance: Vec<f64> = (0..=n_bits)
            .map(|d| match model {
                FaultModel::Bsc => bsc_entry(n_bits, epsilon, d),
                FaultModel::Sac => sac_entry(n_bits, epsilon, d),
            })
            .collect();
        let k = 1usize << n_bits;
        let mut p = Vec::with_capacity(k * k);
        for from in 0..k as u32 {
            for to in 0..k as u32 {
                p.push(by_distance[hamming(Label(from), Label(to)) as usize]);
            }
        }
        Ok(Self {
            n_bits,
            model,
            epsilon,
            p,
        })
    }

    pub fn bsc(n_bits: u32, epsilon: f64) -> Result<Self> {
        Self::new(FaultModel::Bsc, n_bits, epsilon)
    }

    pub fn sac(n_bits: u32, epsilon: f64) -> Result<Self> {
        Self::new(FaultModel::Sac, n_bits, epsilon)
    }

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    pub fn size(&self) -> usize {
        1 << self.n_bits
    }

    pub fn model(&self) -> FaultModel {
        self.model
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `P_C(from -> to)`.
    pub fn get(&self, from: Label, to: Label) -> f64 {
        self.p[from.index() * self.size() + to.index()]
    }

    pub fn row(&self, from: Label) -> &[f64] {
        let k = self.size();
        &self.p[from.index() * k..(from.index() + 1) * k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.p.chunks_exact(self.size())
    }

    /// True when every stored word is read back unchanged.
    pub fn is_transparent(&self) -> bool {
        self.epsilon == 0.0
    }

    /// Draws the word read back for a stored `label`, one bit cell at a time.
    pub fn sample<R: Rng + ?Sized>(&self, label: Label, rng: &mut R) -> Label {
        let mut out = label.0;
        for bit in 0..self.n_bits {
            let mask = 1u32 << bit;
            let faulty = rng.random::<f64>() < self.epsilon;
            if !faulty {
                continue;
            }
            match self.model {
                FaultModel::Bsc => out ^= mask,
                FaultModel::Sac => {
                    if rng.random::<bool>() {
                        out |= mask;
                    } else {
                        out &= !mask;
                    }
                }
            }
        }
        Label(out)
    }
}

pub fn bsc_crossover(n_bits: u32, epsilon: f64) -> Result<CrossoverMatrix> {
    CrossoverMatrix::bsc(n_bits, epsilon)
}

pub fn sac_crossover(n_bits: u32, epsilon: f64) -> Result<CrossoverMatrix> {
    CrossoverMatrix::sac(n_bits, epsilon)
}

/// Passes one stored word through the memory.
pub fn apply_channel<R: Rng + ?Sized>(label: Label, channel: &CrossoverMatrix, rng: &mut R) -> Label {
    channel.sample(label, rng)
}
