//! Application cost functions evaluated for a candidate mapping.
//!
//! All costs are exact sums over the finite symbol and label sets. Stored
//! words are indexed by the symbol they hold, read words are decoded through
//! [`Mapping::decode`], which applies the redirect of the unused label.

use std::fmt;
use std::str::FromStr;

use crate::channel::CrossoverMatrix;
use crate::error::{Error, Result};
use crate::mapping::{Label, Mapping, SymbolAlphabet};
use crate::quantizer::{AwgnParams, ConditionalPmfs, QuantizerParams, SymbolDistribution};

fn check_channel(mapping: &Mapping, channel: &CrossoverMatrix) -> Result<()> {
    if mapping.alphabet().n_bits() != channel.n_bits() {
        return Err(Error::DimensionMismatch {
            expected: mapping.alphabet().size(),
            actual: channel.size(),
        });
    }
    Ok(())
}

fn check_dist(alphabet: SymbolAlphabet, dist: &SymbolDistribution) -> Result<()> {
    if dist.alphabet() != alphabet {
        return Err(Error::DimensionMismatch {
            expected: alphabet.size(),
            actual: dist.alphabet().size(),
        });
    }
    Ok(())
}

/// `K x K` matrix of `Pr(read symbol j | stored symbol i)` after the memory
/// and the inverse mapping.
pub fn symbol_transitions(mapping: &Mapping, channel: &CrossoverMatrix) -> Result<Vec<f64>> {
    check_channel(mapping, channel)?;
    let k = mapping.alphabet().size();
    let decode = mapping.decode_table();
    let mut t = vec![0.0; k * k];
    for i in 0..k {
        let row = channel.row(mapping.encode(i));
        for (l, p) in row.iter().enumerate() {
            t[i * k + decode[l]] += p;
        }
    }
    Ok(t)
}

/// Mean squared error between stored and read-back symbols.
pub fn cost_mse(
    mapping: &Mapping,
    p_d: &SymbolDistribution,
    channel: &CrossoverMatrix,
) -> Result<f64> {
    check_channel(mapping, channel)?;
    let a = mapping.alphabet();
    check_dist(a, p_d)?;
    let mut mse = 0.0;
    for stored in 0..a.size() {
        let w = p_d.prob(stored);
        if w == 0.0 {
            continue;
        }
        let v = a.value(stored);
        let inner: f64 = channel
            .row(mapping.encode(stored))
            .iter()
            .enumerate()
            .map(|(read, p)| (v - a.value(mapping.decode(Label(read as u32)))).powi(2) * p)
            .sum();
        mse += w * inner;
    }
    Ok(mse)
}

/// Mean of `read - stored`.
pub fn mean_error(
    mapping: &Mapping,
    p_d: &SymbolDistribution,
    channel: &CrossoverMatrix,
) -> Result<f64> {
    let a = mapping.alphabet();
    check_dist(a, p_d)?;
    let t = symbol_transitions(mapping, channel)?;
    let k = a.size();
    Ok((0..k)
        .map(|i| {
            p_d.prob(i)
                * (0..k)
                    .map(|j| (a.value(j) - a.value(i)) * t[i * k + j])
                    .sum::<f64>()
        })
        .sum())
}

/// Signal-to-MSE ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ser {
    Db(f64),
    /// The memory introduced no error at all.
    Infinite,
}

impl Ser {
    pub fn db(self) -> f64 {
        match self {
            Ser::Db(v) => v,
            Ser::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Ser {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ser::Db(v) => write!(f, "{v}"),
            Ser::Infinite => f.write_str("inf"),
        }
    }
}

/// `10 log10(E[d^2] / MSE)`.
pub fn ser_db(p_d: &SymbolDistribution, mse: f64) -> Result<Ser> {
    if mse.is_nan() || mse < 0.0 {
        return Err(Error::InvalidParameter(format!("MSE must be nonnegative, got {mse}")));
    }
    if mse == 0.0 {
        return Ok(Ser::Infinite);
    }
    Ok(Ser::Db(10.0 * (p_d.power() / mse).log10()))
}

/// Transition probabilities from a coded bit to the label read from memory.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundChannel {
    rows: [Vec<f64>; 2],
}

impl CompoundChannel {
    pub fn new(given_zero: Vec<f64>, given_one: Vec<f64>) -> Result<Self> {
        if given_zero.len() != given_one.len() {
            return Err(Error::DimensionMismatch {
                expected: given_zero.len(),
                actual: given_one.len(),
            });
        }
        for row in [&given_zero, &given_one] {
            if row.iter().any(|p| p.is_nan() || *p < 0.0) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidDistribution(
                    "compound channel rows must be probability vectors".into(),
                ));
            }
        }
        Ok(Self {
            rows: [given_zero, given_one],
        })
    }

    /// `Pr(read label | coded bit)`.
    pub fn given(&self, bit: u8) -> &[f64] {
        &self.rows[usize::from(bit != 0)]
    }

    pub fn size(&self) -> usize {
        self.rows[0].len()
    }
}

/// Cascade of quantized AWGN channel, mapping and memory.
pub fn compound_crossover(
    mapping: &Mapping,
    pdc: &ConditionalPmfs,
    channel: &CrossoverMatrix,
) -> Result<CompoundChannel> {
    check_channel(mapping, channel)?;
    let a = mapping.alphabet();
    check_dist(a, &pdc.given_zero)?;
    check_dist(a, &pdc.given_one)?;
    let k = a.size();
    let row = |bit: u8| {
        let given = pdc.given(bit);
        let mut out = vec![0.0; k];
        for stored in 0..k {
            let w = given.prob(stored);
            if w == 0.0 {
                continue;
            }
            for (read, p) in channel.row(mapping.encode(stored)).iter().enumerate() {
                out[read] += w * p;
            }
        }
        out
    };
    CompoundChannel::new(row(0), row(1))
}

/// Mutual information (bits per channel use) between an equiprobable coded
/// bit and the read label.
pub fn mutual_information(cc: &CompoundChannel) -> f64 {
    let (p0, p1) = (cc.given(0), cc.given(1));
    let mut info = 0.0;
    for (a, b) in p0.iter().zip(p1) {
        let total = a + b;
        if total == 0.0 {
            continue;
        }
        for p in [a, b] {
            if *p > 0.0 {
                info += p * (2.0 * p / total).log2();
            }
        }
    }
    (0.5 * info).clamp(0.0, 1.0)
}

/// Exact bit error probability of two-transmission LLR combining where only
/// the first transmission passes through the memory.
///
/// A zero combined LLR is decided as bit 0.
pub fn rep_error_prob(
    mapping: &Mapping,
    pdc: &ConditionalPmfs,
    channel: &CrossoverMatrix,
) -> Result<f64> {
    let a = mapping.alphabet();
    check_dist(a, &pdc.given_zero)?;
    check_dist(a, &pdc.given_one)?;
    let t = symbol_transitions(mapping, channel)?;
    let k = a.size();
    let mut pe = 0.0;
    for bit in [0u8, 1] {
        let given = pdc.given(bit);
        // distribution of the symbol read back from memory
        let mut read = vec![0.0; k];
        for stored in 0..k {
            let w = given.prob(stored);
            if w == 0.0 {
                continue;
            }
            for (j, p) in t[stored * k..(stored + 1) * k].iter().enumerate() {
                read[j] += w * p;
            }
        }
        let mut err = 0.0;
        for (j, pr) in read.iter().enumerate() {
            if *pr == 0.0 {
                continue;
            }
            for second in 0..k {
                let sum = a.offset(j) + a.offset(second);
                let wrong = if bit == 0 { sum < 0 } else { sum >= 0 };
                if wrong {
                    err += pr * given.prob(second);
                }
            }
        }
        pe += 0.5 * err;
    }
    Ok(pe)
}

/// Which branch hypotheses the branch-metric cost models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchHypothesis {
    /// Metrics `d0 + d1` of the all-zero branch.
    #[default]
    AllZero,
    /// Average over all four sign patterns `(±d0) + (±d1)`.
    Averaged,
}

/// Distribution of two-LLR branch metrics and their corruption by the memory.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchMetricModel {
    values: Vec<f64>,
    pmf: Vec<f64>,
    crossover: Vec<f64>,
}

impl BranchMetricModel {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Pr(read metric m' | stored metric m)`.
    pub fn crossover(&self, m: usize, m_read: usize) -> f64 {
        self.crossover[m * self.values.len() + m_read]
    }

    pub fn crossover_row(&self, m: usize) -> &[f64] {
        let n = self.values.len();
        &self.crossover[m * n..(m + 1) * n]
    }
}

/// Branch-metric model for the all-zero hypothesis.
pub fn branch_metric_model(
    mapping: &Mapping,
    p_d: &SymbolDistribution,
    channel: &CrossoverMatrix,
) -> Result<BranchMetricModel> {
    branch_metric_model_signed(mapping, p_d, channel, (1, 1))
}

/// Branch-metric model for metrics `s0*d0 + s1*d1` over i.i.d. symbol pairs.
pub fn branch_metric_model_signed(
    mapping: &Mapping,
    p_d: &SymbolDistribution,
    channel: &CrossoverMatrix,
    signs: (i64, i64),
) -> Result<BranchMetricModel> {
    let a = mapping.alphabet();
    check_dist(a, p_d)?;
    let t = symbol_transitions(mapping, channel)?;
    let k = a.size();
    let decode = mapping.decode_table();

    let mut support: Vec<bool> = (0..k).map(|i| p_d.prob(i) > 0.0).collect();
    for &j in &decode {
        support[j] = true;
    }

    // Metric sums live on the integer grid [-K, K] (in units of 2^-F).
    let span = 2 * k + 1;
    let slot = |i: usize, j: usize| (signs.0 * a.offset(i) + signs.1 * a.offset(j) + k as i64) as usize;
    let mut present = vec![false; span];
    for i in (0..k).filter(|&i| support[i]) {
        for j in (0..k).filter(|&j| support[j]) {
            present[slot(i, j)] = true;
        }
    }
    let mut index = vec![usize::MAX; span];
    let mut values = Vec::new();
    for (s, _) in present.iter().enumerate().filter(|(_, p)| **p) {
        index[s] = values.len();
        values.push((s as i64 - k as i64) as f64 * a.step());
    }
    let m = values.len();

    let mut pmf = vec![0.0; m];
    let mut joint = vec![0.0; m * m];
    for i in 0..k {
        for j in 0..k {
            let w = p_d.prob(i) * p_d.prob(j);
            if w == 0.0 {
                continue;
            }
            let from = index[slot(i, j)];
            pmf[from] += w;
            for r0 in 0..k {
                let p0 = t[i * k + r0];
                if p0 == 0.0 {
                    continue;
                }
                for r1 in 0..k {
                    let p1 = t[j * k + r1];
                    if p1 != 0.0 {
                        joint[from * m + index[slot(r0, r1)]] += w * p0 * p1;
                    }
                }
            }
        }
    }
    let mut crossover = joint;
    for (from, row) in crossover.chunks_exact_mut(m).enumerate() {
        if pmf[from] > 0.0 {
            row.iter_mut().for_each(|x| *x /= pmf[from]);
        } else {
            // never produced; keep the row stochastic
            row[from] = 1.0;
        }
    }
    Ok(BranchMetricModel {
        values,
        pmf,
        crossover,
    })
}

/// Mean squared branch-metric error of a model.
pub fn msbe(model: &BranchMetricModel) -> f64 {
    let mut total = 0.0;
    for (m, (bm, p)) in model.values.iter().zip(&model.pmf).enumerate() {
        if *p == 0.0 {
            continue;
        }
        let inner: f64 = model
            .crossover_row(m)
            .iter()
            .zip(&model.values)
            .map(|(x, read)| (bm - read).powi(2) * x)
            .sum();
        total += p * inner;
    }
    total
}

/// MSBE under the chosen branch-hypothesis convention.
pub fn cost_msbe(
    mapping: &Mapping,
    p_d: &SymbolDistribution,
    channel: &CrossoverMatrix,
    hypothesis: BranchHypothesis,
) -> Result<f64> {
    match hypothesis {
        BranchHypothesis::AllZero => Ok(msbe(&branch_metric_model(mapping, p_d, channel)?)),
        BranchHypothesis::Averaged => {
            let mut total = 0.0;
            for signs in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                total += msbe(&branch_metric_model_signed(mapping, p_d, channel, signs)?);
            }
            Ok(total / 4.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CostKind {
    Mse,
    Mi,
    Rep,
    Msbe,
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostKind::Mse => "mse",
            CostKind::Mi => "mi",
            CostKind::Rep => "rep",
            CostKind::Msbe => "msbe",
        })
    }
}

impl FromStr for CostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mse" => Ok(CostKind::Mse),
            "mi" => Ok(CostKind::Mi),
            "rep" => Ok(CostKind::Rep),
            "msbe" => Ok(CostKind::Msbe),
            other => Err(Error::InvalidParameter(format!(
                "unknown cost `{other}` (expected mse, mi, rep or msbe)"
            ))),
        }
    }
}

/// A fully specified cost to minimize over mappings.
#[derive(Debug, Clone, PartialEq)]
pub enum CostSpec {
    Mse {
        p_d: SymbolDistribution,
        channel: CrossoverMatrix,
    },
    /// Minimizes the negated mutual information.
    Mi {
        pdc: ConditionalPmfs,
        channel: CrossoverMatrix,
    },
    Rep {
        pdc: ConditionalPmfs,
        channel: CrossoverMatrix,
    },
    Msbe {
        p_d: SymbolDistribution,
        channel: CrossoverMatrix,
        hypothesis: BranchHypothesis,
    },
}

impl CostSpec {
    pub fn kind(&self) -> CostKind {
        match self {
            CostSpec::Mse { .. } => CostKind::Mse,
            CostSpec::Mi { .. } => CostKind::Mi,
            CostSpec::Rep { .. } => CostKind::Rep,
            CostSpec::Msbe { .. } => CostKind::Msbe,
        }
    }

    pub fn channel(&self) -> &CrossoverMatrix {
        match self {
            CostSpec::Mse { channel, .. }
            | CostSpec::Mi { channel, .. }
            | CostSpec::Rep { channel, .. }
            | CostSpec::Msbe { channel, .. } => channel,
        }
    }

    pub fn alphabet(&self) -> SymbolAlphabet {
        match self {
            CostSpec::Mse { p_d, .. } | CostSpec::Msbe { p_d, .. } => p_d.alphabet(),
            CostSpec::Mi { pdc, .. } | CostSpec::Rep { pdc, .. } => pdc.alphabet(),
        }
    }

    /// Checks that the distribution and channel dimensions agree.
    pub fn validate(&self) -> Result<()> {
        let a = self.alphabet();
        if a.n_bits() != self.channel().n_bits() {
            return Err(Error::DimensionMismatch {
                expected: a.size(),
                actual: self.channel().size(),
            });
        }
        Ok(())
    }

    /// Cost of `mapping`; lower is better.
    pub fn evaluate(&self, mapping: &Mapping) -> Result<f64> {
        match self {
            CostSpec::Mse { p_d, channel } => cost_mse(mapping, p_d, channel),
            CostSpec::Mi { pdc, channel } => {
                Ok(-mutual_information(&compound_crossover(mapping, pdc, channel)?))
            }
            CostSpec::Rep { pdc, channel } => rep_error_prob(mapping, pdc, channel),
            CostSpec::Msbe {
                p_d,
                channel,
                hypothesis,
            } => cost_msbe(mapping, p_d, channel, *hypothesis),
        }
    }
}

/// Cost whose distributions follow from the quantizer at a given SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTemplate {
    pub kind: CostKind,
    pub quantizer: QuantizerParams,
    pub channel: CrossoverMatrix,
    pub hypothesis: BranchHypothesis,
}

impl CostTemplate {
    pub fn new(kind: CostKind, quantizer: QuantizerParams, channel: CrossoverMatrix) -> Self {
        Self {
            kind,
            quantizer,
            channel,
            hypothesis: BranchHypothesis::default(),
        }
    }

    /// Instantiates the cost at one SNR. MSE and MSBE use the marginal
    /// quantized-LLR distribution.
    pub fn at_snr(&self, snr_db: f64) -> Result<CostSpec> {
        let awgn = AwgnParams::from_snr_db(snr_db)?;
        let pdc = ConditionalPmfs::exact(&self.quantizer, &awgn);
        let channel = self.channel.clone();
        let spec = match self.kind {
            CostKind::Mse => CostSpec::Mse {
                p_d: pdc.marginal(),
                channel,
            },
            CostKind::Mi => CostSpec::Mi { pdc, channel },
            CostKind::Rep => CostSpec::Rep { pdc, channel },
            CostKind::Msbe => CostSpec::Msbe {
                p_d: pdc.marginal(),
                channel,
                hypothesis: self.hypothesis,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}
