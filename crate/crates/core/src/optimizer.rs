//! Search for the mapping that minimizes a cost.
//!
//! Candidates are the `K!` permutations of the label set, numbered by their
//! lexicographic rank. The exhaustive search splits the rank range into
//! fixed chunks, evaluates them in parallel and reduces with a deterministic
//! tie-break, so results do not depend on the number of worker threads.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::cost::{CostSpec, CostTemplate};
use crate::error::{Error, Result};
use crate::mapping::{Label, Mapping, SymbolAlphabet};
use crate::rng::stream_rng;

/// Widest word searched exhaustively unless the caller raises the limit.
pub const DEFAULT_MAX_BITS: u32 = 3;
/// Widest word that may ever be searched exhaustively.
pub const HARD_MAX_BITS: u32 = 4;

const CHUNK: u64 = 2048;

/// Largest search for which every candidate may be kept and sorted.
const MAX_RANKING: u64 = 10_000_000;

/// How the candidate set is reduced before evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pruning {
    #[default]
    None,
    /// XOR-ing every label with a constant leaves the BSC and SAC costs
    /// unchanged, so only mappings that store the first symbol as `0...0`
    /// are evaluated.
    LabelXor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub max_bits: u32,
    pub pruning: Pruning,
    pub keep_ranking: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            max_bits: DEFAULT_MAX_BITS,
            pruning: Pruning::None,
            keep_ranking: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    Exhaustive,
    ExhaustivePruned,
    /// Random-restart local search; the result is not guaranteed optimal.
    HillClimb,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best: Mapping,
    pub best_cost: f64,
    /// All evaluated candidates, ascending by cost then encode table.
    pub ranking: Option<Vec<(Mapping, f64)>>,
    pub evaluated: u64,
    pub method: SearchMethod,
}

/// `n!`, saturating at `u64::MAX`.
pub fn factorial(n: u64) -> u64 {
    (1..=n).try_fold(1u64, |acc, i| acc.checked_mul(i)).unwrap_or(u64::MAX)
}

fn check_search_space(alphabet: SymbolAlphabet, max_bits: u32) -> Result<()> {
    let n = alphabet.n_bits();
    let limit = max_bits.min(HARD_MAX_BITS);
    if n <= limit {
        return Ok(());
    }
    let count = factorial(alphabet.size() as u64);
    let shown = if n == 4 {
        "2.09·10^13".to_string()
    } else {
        format!("{count}")
    };
    let hint = if n <= HARD_MAX_BITS {
        "raise the enumeration limit to search it anyway, or use the hill-climb heuristic"
    } else {
        "exhaustive search is not supported; use the hill-climb heuristic"
    };
    Err(Error::SearchSpaceTooLarge(format!(
        "{n}-bit words have {shown} candidates, above the enumeration limit of {limit} bits; {hint}"
    )))
}

/// Permutation of `0..size` with lexicographic rank `rank`.
pub fn unrank_permutation(mut rank: u64, size: usize) -> Vec<u32> {
    let mut pool: Vec<u32> = (0..size as u32).collect();
    let mut out = Vec::with_capacity(size);
    for i in (0..size).rev() {
        let f = factorial(i as u64);
        let pick = (rank / f) as usize;
        rank %= f;
        out.push(pool.remove(pick));
    }
    out
}

/// Lexicographic rank of a permutation of `0..perm.len()`.
pub fn rank_permutation(perm: &[u32]) -> u64 {
    let n = perm.len();
    (0..n)
        .map(|i| {
            let smaller_later = perm[i + 1..].iter().filter(|&&x| x < perm[i]).count() as u64;
            smaller_later * factorial((n - 1 - i) as u64)
        })
        .sum()
}

/// Advances `perm` to its lexicographic successor; false after the last one.
pub fn next_permutation(perm: &mut [u32]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let Some(pivot) = (0..n - 1).rev().find(|&i| perm[i] < perm[i + 1]) else {
        return false;
    };
    let swap = (pivot + 1..n).rev().find(|&j| perm[j] > perm[pivot]).unwrap();
    perm.swap(pivot, swap);
    perm[pivot + 1..].reverse();
    true
}

/// Iterator over all mappings of an alphabet in lexicographic order.
#[derive(Debug, Clone)]
pub struct Mappings {
    alphabet: SymbolAlphabet,
    next: Option<Vec<u32>>,
}

impl Iterator for Mappings {
    type Item = Mapping;

    fn next(&mut self) -> Option<Mapping> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_permutation(&mut succ) {
            self.next = Some(succ);
        }
        Some(Mapping::assemble(
            self.alphabet,
            current.into_iter().map(Label).collect(),
        ))
    }
}

/// All `K!` mappings of `alphabet`, refusing word widths above `max_bits`.
pub fn enumerate_mappings(alphabet: SymbolAlphabet, max_bits: u32) -> Result<Mappings> {
    check_search_space(alphabet, max_bits)?;
    Ok(Mappings {
        alphabet,
        next: Some((0..alphabet.size() as u32).collect()),
    })
}

#[derive(Clone, Copy)]
struct Scored {
    cost: f64,
    rank: u64,
}

impl Scored {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.rank.cmp(&other.rank))
    }
}

struct ChunkResult {
    best: Scored,
    all: Vec<Scored>,
}

fn evaluate_chunk(
    spec: &CostSpec,
    alphabet: SymbolAlphabet,
    start: u64,
    end: u64,
    keep: bool,
) -> Result<ChunkResult> {
    let mut perm = unrank_permutation(start, alphabet.size());
    let mut best = Scored {
        cost: f64::INFINITY,
        rank: u64::MAX,
    };
    let mut all = Vec::new();
    for rank in start..end {
        let mapping = Mapping::assemble(alphabet, perm.iter().copied().map(Label).collect());
        let cost = spec.evaluate(&mapping)?;
        if cost.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "cost evaluated to NaN for mapping [{mapping}]"
            )));
        }
        let s = Scored { cost, rank };
        if s.cmp(&best) == Ordering::Less {
            best = s;
        }
        if keep {
            all.push(s);
        }
        next_permutation(&mut perm);
    }
    Ok(ChunkResult { best, all })
}

fn mapping_at(alphabet: SymbolAlphabet, rank: u64) -> Mapping {
    let perm = unrank_permutation(rank, alphabet.size());
    Mapping::assemble(alphabet, perm.into_iter().map(Label).collect())
}

/// Exhaustive minimization of `spec` over all mappings.
///
/// Ties are broken toward the lexicographically smallest encode table.
pub fn optimize(spec: &CostSpec, options: &SearchOptions) -> Result<OptimizationResult> {
    spec.validate()?;
    let alphabet = spec.alphabet();
    check_search_space(alphabet, options.max_bits)?;
    let size = alphabet.size() as u64;
    // Lexicographic ranks below (K-1)! are exactly the tables starting with 0.
    let (total, method) = match options.pruning {
        Pruning::None => (factorial(size), SearchMethod::Exhaustive),
        Pruning::LabelXor => (factorial(size - 1), SearchMethod::ExhaustivePruned),
    };
    if options.keep_ranking && total > MAX_RANKING {
        return Err(Error::InvalidParameter(format!(
            "a full ranking is limited to {MAX_RANKING} candidates, this search has {total}"
        )));
    }
    let chunk = |c: u64| {
        let end = ((c + 1) * CHUNK).min(total);
        evaluate_chunk(spec, alphabet, c * CHUNK, end, options.keep_ranking)
    };
    let worst = Scored {
        cost: f64::INFINITY,
        rank: u64::MAX,
    };
    let n_chunks = total.div_ceil(CHUNK);
    let (best, ranking) = if options.keep_ranking {
        let results: Vec<ChunkResult> = (0..n_chunks)
            .into_par_iter()
            .map(chunk)
            .collect::<Result<_>>()?;
        let best = results
            .iter()
            .map(|r| r.best)
            .min_by(|a, b| a.cmp(b))
            .unwrap_or(worst);
        let mut all: Vec<Scored> = results.into_iter().flat_map(|r| r.all).collect();
        all.sort_by(|a, b| a.cmp(b));
        let ranking = all
            .into_iter()
            .map(|s| (mapping_at(alphabet, s.rank), s.cost))
            .collect();
        (best, Some(ranking))
    } else {
        let best = (0..n_chunks)
            .into_par_iter()
            .map(|c| chunk(c).map(|r| r.best))
            .try_reduce(|| worst, |a, b| Ok(if b.cmp(&a) == Ordering::Less { b } else { a }))?;
        (best, None)
    };
    Ok(OptimizationResult {
        best: mapping_at(alphabet, best.rank),
        best_cost: best.cost,
        ranking,
        evaluated: total,
        method,
    })
}

/// Independent exhaustive optimization at each SNR point.
pub fn sweep(
    template: &CostTemplate,
    snr_db: &[f64],
    options: &SearchOptions,
) -> Result<Vec<(f64, OptimizationResult)>> {
    snr_db
        .iter()
        .map(|&snr| Ok((snr, optimize(&template.at_snr(snr)?, options)?)))
        .collect()
}

/// Random-restart local search over label transpositions.
///
/// Intended for word widths where exhaustive search is infeasible. Each
/// restart starts from a seeded random permutation and applies the best
/// improving transposition until none is left.
pub fn hill_climb(spec: &CostSpec, restarts: u64, seed: u64) -> Result<OptimizationResult> {
    spec.validate()?;
    if restarts == 0 {
        return Err(Error::InvalidParameter("at least one restart is required".into()));
    }
    let alphabet = spec.alphabet();
    let size = alphabet.size();
    let build = |perm: &[u32]| Mapping::assemble(alphabet, perm.iter().copied().map(Label).collect());

    let runs: Vec<(Vec<u32>, f64, u64)> = (0..restarts)
        .into_par_iter()
        .map(|r| -> Result<_> {
            let mut rng = stream_rng(seed, r);
            let mut perm: Vec<u32> = (0..size as u32).collect();
            perm.shuffle(&mut rng);
            let mut cost = spec.evaluate(&build(&perm))?;
            let mut evaluated = 1u64;
            loop {
                let mut step: Option<(usize, usize, f64)> = None;
                for i in 0..size {
                    for j in i + 1..size {
                        perm.swap(i, j);
                        let c = spec.evaluate(&build(&perm))?;
                        evaluated += 1;
                        perm.swap(i, j);
                        if c < step.map_or(cost, |s| s.2) {
                            step = Some((i, j, c));
                        }
                    }
                }
                match step {
                    Some((i, j, c)) => {
                        perm.swap(i, j);
                        cost = c;
                    }
                    None => break,
                }
            }
            Ok((perm, cost, evaluated))
        })
        .collect::<Result<_>>()?;

    let evaluated = runs.iter().map(|r| r.2).sum();
    let (perm, cost, _) = runs
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)))
        .expect("at least one restart");
    Ok(OptimizationResult {
        best: build(&perm),
        best_cost: cost,
        ranking: None,
        evaluated,
        method: SearchMethod::HillClimb,
    })
}
