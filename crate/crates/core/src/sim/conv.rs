//! Rate-1/2 feed-forward convolutional code with a terminated soft-input
//! Viterbi decoder.

use crate::error::{Error, Result};

/// Rate-1/2 convolutional code given by its constraint length and two
/// generator polynomials. The most significant generator bit taps the
/// current input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvCode {
    constraint_length: u32,
    generators: [u32; 2],
}

impl ConvCode {
    /// UMTS/HSPA rate-1/2 code: constraint length 9, generators 561 and 753 (octal).
    pub fn umts() -> Self {
        Self {
            constraint_length: 9,
            generators: [0o561, 0o753],
        }
    }

    pub fn new(constraint_length: u32, generators: [u32; 2]) -> Result<Self> {
        if !(2..=16).contains(&constraint_length) {
            return Err(Error::InvalidParameter(format!(
                "constraint length must be in 2..=16, got {constraint_length}"
            )));
        }
        if generators.iter().any(|&g| g >> constraint_length != 0 || g == 0) {
            return Err(Error::InvalidParameter(
                "generator polynomials must be nonzero and fit the constraint length".into(),
            ));
        }
        Ok(Self {
            constraint_length,
            generators,
        })
    }

    pub fn constraint_length(&self) -> u32 {
        self.constraint_length
    }

    pub fn generators(&self) -> [u32; 2] {
        self.generators
    }

    /// Encoder memory, which is also the number of tail bits.
    pub fn memory(&self) -> usize {
        self.constraint_length as usize - 1
    }

    pub fn states(&self) -> usize {
        1 << self.memory()
    }

    /// Coded length for `n_info` information bits including the tail.
    pub fn coded_len(&self, n_info: usize) -> usize {
        2 * (n_info + self.memory())
    }

    /// The two coded bits produced from register contents `(input << m) | state`.
    fn outputs(&self, register: u32) -> [u8; 2] {
        [
            ((register & self.generators[0]).count_ones() & 1) as u8,
            ((register & self.generators[1]).count_ones() & 1) as u8,
        ]
    }
}

impl Default for ConvCode {
    fn default() -> Self {
        Self::umts()
    }
}

/// Encodes `bits` (0/1) and appends the zero tail. Output bits alternate
/// between the two generators.
pub fn conv_encode(bits: &[u8], code: &ConvCode) -> Result<Vec<u8>> {
    if bits.is_empty() {
        return Err(Error::InvalidParameter("nothing to encode".into()));
    }
    let m = code.memory();
    let mut state = 0u32;
    let mut out = Vec::with_capacity(code.coded_len(bits.len()));
    for &b in bits.iter().chain(std::iter::repeat_n(&0, m)) {
        let reg = (u32::from(b & 1) << m) | state;
        out.extend_from_slice(&code.outputs(reg));
        state = reg >> 1;
    }
    Ok(out)
}

/// Maximum-correlation decoding over the terminated trellis.
///
/// `soft` holds one value per coded bit, positive favoring 0. Ties between
/// the two paths entering a state keep the one from the lower state index.
pub fn viterbi_decode(soft: &[f64], code: &ConvCode) -> Result<Vec<u8>> {
    let m = code.memory();
    if !soft.len().is_multiple_of(2) || soft.len() < 2 * (m + 1) {
        return Err(Error::DimensionMismatch {
            expected: code.coded_len((soft.len() / 2).saturating_sub(m).max(1)),
            actual: soft.len(),
        });
    }
    let steps = soft.len() / 2;
    let n_info = steps - m;
    let states = code.states();
    let mask = (states - 1) as u32;
    let words = states.div_ceil(64);

    // outputs[r] for every register value, as +-1 correlation signs
    let signs: Vec<[f64; 2]> = (0..(states as u32) << 1)
        .map(|r| code.outputs(r).map(|c| if c == 0 { 1.0 } else { -1.0 }))
        .collect();

    let mut metric = vec![f64::NEG_INFINITY; states];
    metric[0] = 0.0;
    let mut next = vec![0.0; states];
    let mut decisions = vec![0u64; steps * words];

    for (t, pair) in soft.chunks_exact(2).enumerate() {
        let row = &mut decisions[t * words..(t + 1) * words];
        for ns in 0..states as u32 {
            let u = ns >> (m - 1);
            let base = (ns << 1) & mask;
            let mut best = f64::NEG_INFINITY;
            let mut choice = 0u32;
            for lsb in 0..2u32 {
                let prev = base | lsb;
                let s = signs[((u << m) | prev) as usize];
                let cand = metric[prev as usize] + s[0] * pair[0] + s[1] * pair[1];
                if lsb == 0 || cand > best {
                    best = cand;
                    choice = lsb;
                }
            }
            next[ns as usize] = best;
            if choice == 1 {
                row[ns as usize / 64] |= 1 << (ns % 64);
            }
        }
        std::mem::swap(&mut metric, &mut next);
    }

    let mut state = 0u32;
    let mut decoded = vec![0u8; steps];
    for t in (0..steps).rev() {
        decoded[t] = (state >> (m - 1)) as u8;
        let bit = (decisions[t * words + state as usize / 64] >> (state % 64)) & 1;
        state = ((state << 1) & mask) | bit as u32;
    }
    decoded.truncate(n_info);
    Ok(decoded)
}
