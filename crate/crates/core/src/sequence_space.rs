//! The space of one-sided symbol sequences, at finite truncation depth.
//!
//! A point is an infinite word `i_1 i_2 ...` over the state indices with
//! distance `delta(a, b) = sum_k d(a_k, b_k) / 2^k`. Points are represented by
//! truncations of depth `K`; every quantity computed from a truncation comes
//! with the tail bound `diam_d(S) * 2^-K` covering the omitted terms.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state_space::StateSpace;
use crate::transition::checked_pow;

/// Truncation depth used when none is given.
pub const DEFAULT_DEPTH: usize = 32;

/// Deepest truncation accepted; beyond this `2^-K` underflows.
pub const MAX_DEPTH: usize = 1000;

/// Default cap on the number of words any single enumeration may visit.
pub const DEFAULT_ENUMERATION_BUDGET: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SequenceError {
    #[error("sequence depth must be between 1 and {MAX_DEPTH}, got {0}")]
    InvalidDepth(usize),
    #[error("symbol {symbol} at position {position} is out of range for {states} states")]
    SymbolOutOfRange { position: usize, symbol: usize, states: usize },
    #[error("sequences have different depths ({0} vs {1})")]
    DepthMismatch(usize, usize),
    #[error("cannot shift a sequence of depth {0}")]
    SequenceTooShort(usize),
    #[error("truncation depth {depth} must be at least the cylinder depth {cylinder}")]
    DepthBelowCylinder { depth: usize, cylinder: usize },
    #[error("enumeration of {needed} words exceeds the budget of {budget}")]
    EnumerationBudgetExceeded { needed: String, budget: usize },
}

/// Upper bound on how many words an enumeration may visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationBudget(pub usize);

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self(DEFAULT_ENUMERATION_BUDGET)
    }
}

impl EnumerationBudget {
    /// Checks that `base^exp` words fit in the budget and returns the count.
    pub fn words(&self, base: usize, exp: usize) -> Result<usize, SequenceError> {
        match checked_pow(base, exp) {
            Some(n) if n <= self.0 => Ok(n),
            _ => Err(SequenceError::EnumerationBudgetExceeded {
                needed: format!("{base}^{exp}"),
                budget: self.0,
            }),
        }
    }
}

/// A truncated point of the sequence space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolSequence {
    symbols: Vec<usize>,
}

impl SymbolSequence {
    pub fn new(symbols: Vec<usize>, states: usize) -> Result<Self, SequenceError> {
        if symbols.is_empty() || symbols.len() > MAX_DEPTH {
            return Err(SequenceError::InvalidDepth(symbols.len()));
        }
        check_symbols(&symbols, states)?;
        Ok(Self { symbols })
    }

    /// The periodic point `block block block ...` truncated to `depth`.
    pub fn periodic(block: &[usize], depth: usize, states: usize) -> Result<Self, SequenceError> {
        if block.is_empty() {
            return Err(SequenceError::InvalidDepth(0));
        }
        let symbols = block.iter().copied().cycle().take(depth).collect();
        Self::new(symbols, states)
    }

    pub fn depth(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    /// The similarity map: drops the leading symbol.
    pub fn shift(&self) -> Result<Self, SequenceError> {
        self.shift_by(1)
    }

    /// `n`-fold shift; the result keeps at least one symbol.
    pub fn shift_by(&self, n: usize) -> Result<Self, SequenceError> {
        if self.symbols.len() <= n {
            return Err(SequenceError::SequenceTooShort(self.symbols.len()));
        }
        Ok(Self { symbols: self.symbols[n..].to_vec() })
    }
}

fn check_symbols(symbols: &[usize], states: usize) -> Result<(), SequenceError> {
    match symbols.iter().enumerate().find(|(_, &s)| s >= states) {
        Some((position, &symbol)) => {
            Err(SequenceError::SymbolOutOfRange { position, symbol, states })
        }
        None => Ok(()),
    }
}

/// Truncated distance plus a bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub value: f64,
    pub tail_bound: f64,
}

impl Delta {
    /// The interval known to contain the distance between the full sequences.
    pub fn interval(&self) -> (f64, f64) {
        (self.value, self.value + self.tail_bound)
    }
}

/// `2^-k` for `k <= MAX_DEPTH`, exact.
#[inline]
pub(crate) fn weight(k: usize) -> f64 {
    // powi with a negative exponent on 2 is exact while the result is normal
    2f64.powi(-(k as i32))
}

/// `sum_{k=1..K} d(a_k, b_k) / 2^k` for two sequences of equal depth `K`.
pub fn delta_metric(
    a: &SymbolSequence,
    b: &SymbolSequence,
    space: &StateSpace,
) -> Result<Delta, SequenceError> {
    if a.depth() != b.depth() {
        return Err(SequenceError::DepthMismatch(a.depth(), b.depth()));
    }
    Ok(Delta {
        value: weighted_sum(a.symbols(), b.symbols(), space),
        tail_bound: space.diameter() * weight(a.depth()),
    })
}

fn weighted_sum(a: &[usize], b: &[usize], space: &StateSpace) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(k, (&x, &y))| space.distance(x, y) * weight(k + 1))
        .sum()
}

/// The set of all sequences starting with `prefix`. Depth 0 is the whole space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cylinder {
    prefix: Vec<usize>,
}

impl Cylinder {
    pub fn new(prefix: Vec<usize>, states: usize) -> Result<Self, SequenceError> {
        check_symbols(&prefix, states)?;
        Ok(Self { prefix })
    }

    pub fn whole_space() -> Self {
        Self { prefix: Vec::new() }
    }

    pub fn depth(&self) -> usize {
        self.prefix.len()
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    pub fn contains(&self, seq: &SymbolSequence) -> bool {
        seq.symbols().starts_with(&self.prefix)
    }

    /// The sub-cylinder fixing one more symbol.
    pub fn extend(&self, symbol: usize) -> Self {
        let mut prefix = self.prefix.clone();
        prefix.push(symbol);
        Self { prefix }
    }
}

/// Distance between two cylinders, `inf delta(x, y)` over their members.
///
/// Suffixes beyond the shorter prefix can be chosen equal, so the infimum is
/// attained and only the common-length prefix contributes.
pub fn cylinder_distance(a: &Cylinder, b: &Cylinder, space: &StateSpace) -> f64 {
    weighted_sum(a.prefix(), b.prefix(), space)
}

/// Largest truncated distance between two depth-`depth` members of `cyl`:
/// `sum_{k=n+1..K} diam_d(S) / 2^k`, independent of the prefix.
pub fn cylinder_diameter(
    cyl: &Cylinder,
    space: &StateSpace,
    depth: usize,
) -> Result<f64, SequenceError> {
    if depth < cyl.depth() {
        return Err(SequenceError::DepthBelowCylinder { depth, cylinder: cyl.depth() });
    }
    Ok(space.diameter() * (weight(cyl.depth()) - weight(depth)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterLevel {
    pub depth: usize,
    /// Maximum cylinder diameter over depth-`depth` prefixes, at truncation `K`.
    pub truncated: f64,
    /// Diameter of the untruncated cylinders (`truncated` plus the full tail).
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterReport {
    pub truncation: usize,
    pub levels: Vec<DiameterLevel>,
    /// Ratios `limit(n+1) / limit(n)`.
    pub ratios: Vec<f64>,
    pub strictly_decreasing: bool,
    pub geometric_half: bool,
    pub pass: bool,
}

/// Maximal cylinder diameters for depths `1..=n_max` and their decay.
///
/// The untruncated diameters are `diam_d(S) 2^-n`, so consecutive ratios are
/// exactly one half; truncated values fall short of that by `diam_d(S) 2^-K`.
pub fn check_diameter_condition(
    space: &StateSpace,
    n_max: usize,
    truncation: usize,
) -> Result<DiameterReport, SequenceError> {
    if truncation == 0 || truncation > MAX_DEPTH {
        return Err(SequenceError::InvalidDepth(truncation));
    }
    if n_max > truncation {
        return Err(SequenceError::DepthBelowCylinder { depth: truncation, cylinder: n_max });
    }
    let diam = space.diameter();
    let levels: Vec<DiameterLevel> = (1..=n_max)
        .map(|depth| DiameterLevel {
            depth,
            truncated: diam * (weight(depth) - weight(truncation)),
            limit: diam * weight(depth),
        })
        .collect();
    let ratios: Vec<f64> = levels.windows(2).map(|w| w[1].limit / w[0].limit).collect();
    let strictly_decreasing = levels.windows(2).all(|w| w[1].truncated < w[0].truncated);
    let geometric_half = ratios.iter().all(|&r| r == 0.5);
    Ok(DiameterReport {
        truncation,
        pass: strictly_decreasing && geometric_half,
        levels,
        ratios,
        strictly_decreasing,
        geometric_half,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationWitness {
    pub prefix: Vec<usize>,
    pub witness: Vec<usize>,
    pub distance: f64,
}

/// Evidence for the separation condition of a given degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationCertificate {
    pub degree: usize,
    /// Separation that holds for every pair of distinct depth-`degree`
    /// cylinders, so any other prefix is a witness.
    pub epsilon0: f64,
    /// Largest constant for which every prefix has some witness at least that
    /// far away; the witness map below attains it.
    pub max_epsilon0: f64,
    /// For each prefix in lexicographic order, its farthest cylinder
    /// (lexicographically smallest among ties).
    pub witnesses: Vec<SeparationWitness>,
}

/// Separation certificate of degree `n` for the full shift over `space`.
pub fn check_separation_condition(
    space: &StateSpace,
    n: usize,
    budget: EnumerationBudget,
) -> Result<SeparationCertificate, SequenceError> {
    if n == 0 || n > MAX_DEPTH {
        return Err(SequenceError::InvalidDepth(n));
    }
    let m = space.size();
    budget.words(m, n)?;

    // Farthest partner per symbol; positions of a prefix contribute
    // independently, so the farthest prefix is the per-position choice.
    let farthest: Vec<usize> = (0..m)
        .map(|i| {
            (0..m).fold(0, |best, j| {
                if space.distance(i, j) > space.distance(i, best) {
                    j
                } else {
                    best
                }
            })
        })
        .collect();

    let witnesses: Vec<SeparationWitness> = words(m, n)
        .map(|prefix| {
            let witness: Vec<usize> = prefix.iter().map(|&s| farthest[s]).collect();
            let distance = weighted_sum(&prefix, &witness, space);
            SeparationWitness { prefix, witness, distance }
        })
        .collect();
    let max_epsilon0 = witnesses.iter().map(|w| w.distance).fold(f64::INFINITY, f64::min);

    Ok(SeparationCertificate {
        degree: n,
        epsilon0: space.min_pairwise_distance() * weight(n),
        max_epsilon0,
        witnesses,
    })
}

/// Result of checking that `n` shifts map a depth-`n` cylinder onto the whole
/// space, at truncation depth `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityCoverage {
    pub prefix: Vec<usize>,
    pub truncation: usize,
    pub expected_words: usize,
    pub covered_words: usize,
    pub missing: Option<Vec<usize>>,
    pub pass: bool,
}

/// Enumerates every depth-`K` member of `cyl`, shifts it `cyl.depth()` times and
/// checks that every word of length `K - n` is hit.
pub fn similarity_coverage(
    cyl: &Cylinder,
    states: usize,
    truncation: usize,
    budget: EnumerationBudget,
) -> Result<SimilarityCoverage, SequenceError> {
    let n = cyl.depth();
    if truncation <= n || truncation > MAX_DEPTH {
        return Err(SequenceError::DepthBelowCylinder { depth: truncation, cylinder: n + 1 });
    }
    let tail = truncation - n;
    let expected = budget.words(states, tail)?;
    let mut hit = vec![false; expected];
    for suffix in words(states, tail) {
        let mut symbols = cyl.prefix().to_vec();
        symbols.extend(suffix);
        let member = SymbolSequence::new(symbols, states)?;
        debug_assert!(cyl.contains(&member));
        let image = member.shift_by(n)?;
        hit[word_code(image.symbols(), states)] = true;
    }
    let covered = hit.iter().filter(|&&h| h).count();
    let missing = hit.iter().position(|&h| !h).map(|code| word_of_code(code, states, tail));
    Ok(SimilarityCoverage {
        prefix: cyl.prefix().to_vec(),
        truncation,
        expected_words: expected,
        covered_words: covered,
        pass: missing.is_none(),
        missing,
    })
}

/// All words of length `len` over `0..states`, in lexicographic order.
pub fn words(states: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut next = Some(vec![0; len]);
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        for pos in (0..len).rev() {
            if succ[pos] + 1 < states {
                succ[pos] += 1;
                next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(current)
    })
}

/// Big-endian base-`states` code of a word.
pub fn word_code(word: &[usize], states: usize) -> usize {
    word.iter().fold(0, |acc, &s| acc * states + s)
}

pub fn word_of_code(mut code: usize, states: usize, len: usize) -> Vec<usize> {
    let mut word = vec![0; len];
    for slot in word.iter_mut().rev() {
        *slot = code % states;
        code /= states;
    }
    word
}
