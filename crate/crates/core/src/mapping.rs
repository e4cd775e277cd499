//! Symbol alphabets, binary labels and the bijective data mappings that place
//! symbols into memory words.
//!
//! Symbols are addressed by their index `0..K` in increasing value order. The
//! value of index `k` is `(k - 2^(N-1)) * 2^(-F)`, so index 0 is the most
//! negative symbol. A [`Mapping`] stores the label of every symbol and the
//! inverse table used when reading labels back out of memory.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest word width accepted for an alphabet.
pub const MAX_BITS: u32 = 16;

/// Uniformly spaced, two's-complement-ranged set of `2^N` fixed-point values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymbolAlphabet {
    n_bits: u32,
    n_frac: u32,
}

impl SymbolAlphabet {
    /// Builds the alphabet of `n_bits`-bit words with `n_frac` fractional bits.
    ///
    /// One bit is always reserved for the sign, so `n_frac <= n_bits - 1`.
    pub fn new(n_bits: u32, n_frac: u32) -> Result<Self> {
        if n_bits == 0 || n_bits > MAX_BITS {
            return Err(Error::InvalidAlphabet(format!(
                "n_bits must be in 1..={MAX_BITS}, got {n_bits}"
            )));
        }
        if n_frac > n_bits - 1 {
            return Err(Error::InvalidAlphabet(format!(
                "n_frac = {n_frac} leaves no room for the sign bit of a {n_bits}-bit word"
            )));
        }
        Ok(Self { n_bits, n_frac })
    }

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    pub fn n_frac(&self) -> u32 {
        self.n_frac
    }

    /// Integer bits `I = N - 1 - F`.
    pub fn n_int(&self) -> u32 {
        self.n_bits - 1 - self.n_frac
    }

    /// Number of symbols `K = 2^N`.
    pub fn size(&self) -> usize {
        1usize << self.n_bits
    }

    /// Spacing between neighbouring symbols, `2^(-F)`.
    pub fn step(&self) -> f64 {
        (-(self.n_frac as f64)).exp2()
    }

    /// Integer offset `m = k - 2^(N-1)` of the symbol with index `k`; the
    /// symbol value is `m * step()`.
    pub fn offset(&self, index: usize) -> i64 {
        index as i64 - (1i64 << (self.n_bits - 1))
    }

    /// Index of the symbol with integer offset `m`, if it is in range.
    pub fn index_of_offset(&self, m: i64) -> Option<usize> {
        let k = m + (1i64 << (self.n_bits - 1));
        (0..self.size() as i64).contains(&k).then_some(k as usize)
    }

    /// Value of the symbol with index `k`.
    pub fn value(&self, index: usize) -> f64 {
        self.offset(index) as f64 * self.step()
    }

    /// All symbol values in increasing order.
    pub fn values(&self) -> Vec<f64> {
        (0..self.size()).map(|k| self.value(k)).collect()
    }

    /// Index of the symbol whose value is exactly `value`.
    pub fn index_of_value(&self, value: f64) -> Option<usize> {
        let scaled = value / self.step();
        if scaled.fract() != 0.0 || !scaled.is_finite() {
            return None;
        }
        self.index_of_offset(scaled as i64)
    }
}

/// Convenience wrapper around [`SymbolAlphabet::new`].
pub fn make_alphabet(n_bits: u32, n_frac: u32) -> Result<SymbolAlphabet> {
    SymbolAlphabet::new(n_bits, n_frac)
}

/// An `N`-bit memory word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub u32);

impl Label {
    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Number of differing bit positions between two labels.
pub fn hamming(a: Label, b: Label) -> u32 {
    (a.0 ^ b.0).count_ones()
}

/// Decode override for a label whose symbol is never produced upstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Redirect {
    pub label: Label,
    pub symbol: usize,
}

/// Bijection between the symbol alphabet and the memory labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mapping {
    alphabet: SymbolAlphabet,
    encode: Vec<Label>,
    decode: Vec<usize>,
    redirect: Option<Redirect>,
}

impl Mapping {
    /// Two's-complement representation of each symbol's integer offset.
    pub fn twos_complement(alphabet: SymbolAlphabet) -> Self {
        let mask = alphabet.size() as i64 - 1;
        let encode = (0..alphabet.size())
            .map(|k| Label((alphabet.offset(k) & mask) as u32))
            .collect();
        Self::assemble(alphabet, encode)
    }

    /// Sign-magnitude representation. The most negative symbol has no
    /// sign-magnitude pattern and takes the otherwise unused "negative zero"
    /// word `10...0`.
    pub fn sign_magnitude(alphabet: SymbolAlphabet) -> Self {
        let sign = 1u32 << (alphabet.n_bits() - 1);
        let encode = (0..alphabet.size())
            .map(|k| {
                let m = alphabet.offset(k);
                if m >= 0 {
                    Label(m as u32)
                } else {
                    // |m| == 2^(N-1) wraps onto the bare sign bit.
                    Label(sign | ((m.unsigned_abs() as u32) & (sign - 1)))
                }
            })
            .collect();
        Self::assemble(alphabet, encode)
    }

    /// Mapping whose symbol `k` is stored as `perm[k]`.
    pub fn from_permutation(alphabet: SymbolAlphabet, perm: &[u32]) -> Result<Self> {
        let size = alphabet.size();
        if perm.len() != size {
            return Err(Error::NotAPermutation {
                size,
                reason: format!("expected {size} labels, got {}", perm.len()),
            });
        }
        let mut seen = vec![false; size];
        for &l in perm {
            let slot = seen.get_mut(l as usize).ok_or_else(|| Error::NotAPermutation {
                size,
                reason: format!("label {l} is out of range"),
            })?;
            if *slot {
                return Err(Error::NotAPermutation {
                    size,
                    reason: format!("label {l} appears more than once"),
                });
            }
            *slot = true;
        }
        Ok(Self::assemble(
            alphabet,
            perm.iter().map(|&l| Label(l)).collect(),
        ))
    }

    /// Builds a mapping from a table already known to be a permutation.
    pub(crate) fn assemble(alphabet: SymbolAlphabet, encode: Vec<Label>) -> Self {
        debug_assert_eq!(encode.len(), alphabet.size());
        let mut decode = vec![0; encode.len()];
        for (k, l) in encode.iter().enumerate() {
            decode[l.index()] = k;
        }
        let redirect = (alphabet.size() >= 2).then(|| Redirect {
            label: encode[0],
            symbol: 1,
        });
        Self {
            alphabet,
            encode,
            decode,
            redirect,
        }
    }

    pub fn alphabet(&self) -> SymbolAlphabet {
        self.alphabet
    }

    pub fn redirect(&self) -> Option<Redirect> {
        self.redirect
    }

    /// Label of the symbol with index `symbol`.
    pub fn encode(&self, symbol: usize) -> Label {
        self.encode[symbol]
    }

    /// Symbol index read back for `label`, honoring the redirect.
    pub fn decode(&self, label: Label) -> usize {
        match self.redirect {
            Some(r) if r.label == label => r.symbol,
            _ => self.decode[label.index()],
        }
    }

    /// Plain table inverse, ignoring the redirect.
    pub fn decode_raw(&self, label: Label) -> usize {
        self.decode[label.index()]
    }

    pub fn labels(&self) -> &[Label] {
        &self.encode
    }

    /// Encode table as plain integers `[Δ(d_1), ..., Δ(d_K)]`.
    pub fn encode_table(&self) -> Vec<u32> {
        self.encode.iter().map(|l| l.0).collect()
    }

    /// Symbol index decoded for every label, in label order.
    pub fn decode_table(&self) -> Vec<usize> {
        (0..self.alphabet.size())
            .map(|l| self.decode(Label(l as u32)))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MappingFile::from(self)).expect("mapping serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MappingFile =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        file.into_mapping()
    }
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for l in &self.encode {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
            first = false;
        }
        Ok(())
    }
}

/// On-disk form of a mapping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingFile {
    pub n_bits: u32,
    pub n_frac: u32,
    pub encode: Vec<u32>,
}

impl From<&Mapping> for MappingFile {
    fn from(m: &Mapping) -> Self {
        Self {
            n_bits: m.alphabet.n_bits(),
            n_frac: m.alphabet.n_frac(),
            encode: m.encode_table(),
        }
    }
}

impl MappingFile {
    pub fn into_mapping(self) -> Result<Mapping> {
        let alphabet = SymbolAlphabet::new(self.n_bits, self.n_frac)?;
        Mapping::from_permutation(alphabet, &self.encode)
    }
}

/// Label-to-label lookup tables that turn a fixed hardware mapping into an
/// optimized one and back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecodePair {
    forward: Vec<Label>,
    inverse: Vec<Label>,
}

impl RecodePair {
    /// Tables with `forward[base(d)] = target(d)` for every symbol `d`.
    pub fn between(base: &Mapping, target: &Mapping) -> Result<Self> {
        if base.alphabet != target.alphabet {
            return Err(Error::AlphabetMismatch(format!(
                "base is {:?}, target is {:?}",
                base.alphabet, target.alphabet
            )));
        }
        let size = base.alphabet.size();
        let mut forward = vec![Label(0); size];
        let mut inverse = vec![Label(0); size];
        for k in 0..size {
            let (from, to) = (base.encode(k), target.encode(k));
            forward[from.index()] = to;
            inverse[to.index()] = from;
        }
        Ok(Self { forward, inverse })
    }

    pub fn forward(&self, label: Label) -> Label {
        self.forward[label.index()]
    }

    pub fn inverse(&self, label: Label) -> Label {
        self.inverse[label.index()]
    }

    pub fn forward_table(&self) -> &[Label] {
        &self.forward
    }

    pub fn inverse_table(&self) -> &[Label] {
        &self.inverse
    }
}

/// See [`RecodePair::between`].
pub fn recode_tables(base: &Mapping, target: &Mapping) -> Result<RecodePair> {
    RecodePair::between(base, target)
}
