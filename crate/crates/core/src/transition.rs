//! Time-homogeneous transition laws with finite memory.
//!
//! An order-`r` model over `m` states stores one row per conditioning word of
//! length `r`. Words are indexed big-endian in base `m`: the word
//! `(a_1, ..., a_r)` sits at row `a_1 m^{r-1} + ... + a_r`. Order 1 is the
//! ordinary memoryless chain.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Absolute tolerance on row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("memory order must be at least 1")]
    ZeroOrder,
    #[error("a chain needs at least two states, got {0}")]
    TooFewStates(usize),
    #[error("expected {expected} rows of {width} entries for order {order}, got {rows} rows")]
    ShapeMismatch { expected: usize, width: usize, order: usize, rows: usize },
    #[error("row {row} has {len} entries, expected {expected}")]
    RaggedRow { row: usize, len: usize, expected: usize },
    #[error("probability ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("probability ({row}, {col}) = {value} is negative")]
    NegativeProbability { row: usize, col: usize, value: f64 },
    #[error("probability ({row}, {col}) is zero but strict positivity was requested")]
    ZeroProbabilityInStrictMode { row: usize, col: usize },
    #[error("row {row} sums to {sum}, not 1")]
    RowSumInvalid { row: usize, sum: f64 },
    #[error("path of length {len} is too short for memory order {order}")]
    PathTooShort { len: usize, order: usize },
    #[error("coordinate {index} is out of range for blocks of width {width}")]
    IndexOutOfRange { index: usize, width: usize },
    #[error("state index {state} is out of range for {states} states")]
    StateOutOfRange { state: usize, states: usize },
}

/// A validated order-`r` stochastic tensor of shape `m^r x m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionModel {
    states: usize,
    order: usize,
    probs: Vec<Vec<f64>>,
}

impl TransitionModel {
    /// Checks shape, nonnegativity and row sums; with `strict` every entry
    /// must also be positive.
    pub fn validate_stochastic(
        probs: Vec<Vec<f64>>,
        order: usize,
        strict: bool,
    ) -> Result<Self, ModelError> {
        if order == 0 {
            return Err(ModelError::ZeroOrder);
        }
        let m = probs.first().map_or(0, Vec::len);
        if m < 2 {
            return Err(ModelError::TooFewStates(m));
        }
        let expected = checked_pow(m, order).unwrap_or(usize::MAX);
        if probs.len() != expected {
            return Err(ModelError::ShapeMismatch { expected, width: m, order, rows: probs.len() });
        }
        for (row, entries) in probs.iter().enumerate() {
            if entries.len() != m {
                return Err(ModelError::RaggedRow { row, len: entries.len(), expected: m });
            }
            for (col, &value) in entries.iter().enumerate() {
                if !value.is_finite() {
                    return Err(ModelError::NonFinite { row, col });
                }
                if value < 0.0 {
                    return Err(ModelError::NegativeProbability { row, col, value });
                }
                if strict && value == 0.0 {
                    return Err(ModelError::ZeroProbabilityInStrictMode { row, col });
                }
            }
            let sum: f64 = entries.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(ModelError::RowSumInvalid { row, sum });
            }
        }
        Ok(Self { states: m, order, probs })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of conditioning words, `m^r`.
    pub fn block_count(&self) -> usize {
        self.probs.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn row(&self, word: usize) -> &[f64] {
        &self.probs[word]
    }

    /// Probability of `next` given that the last `order` states spell `context`.
    pub fn probability(&self, context: &[usize], next: usize) -> f64 {
        self.probs[self.word_index(context)][next]
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.probs.iter().flatten().all(|&p| p > 0.0)
    }

    /// Row index of a word of length `order`.
    pub fn word_index(&self, word: &[usize]) -> usize {
        debug_assert_eq!(word.len(), self.order);
        word.iter().fold(0, |acc, &s| acc * self.states + s)
    }

    /// Inverse of [`word_index`](Self::word_index).
    pub fn word_of(&self, mut index: usize) -> Vec<usize> {
        let mut word = vec![0; self.order];
        for slot in word.iter_mut().rev() {
            *slot = index % self.states;
            index /= self.states;
        }
        word
    }

    /// Probability of `path` conditional on its first `order` states.
    pub fn path_probability(&self, path: &[usize]) -> Result<f64, ModelError> {
        if path.len() < self.order {
            return Err(ModelError::PathTooShort { len: path.len(), order: self.order });
        }
        self.check_states(path)?;
        Ok(path
            .windows(self.order + 1)
            .map(|w| self.probability(&w[..self.order], w[self.order]))
            .product())
    }

    /// Whether every `(order + 1)`-window of `path` has positive probability.
    pub fn admits(&self, path: &[usize]) -> bool {
        path.iter().all(|&s| s < self.states)
            && path
                .windows(self.order + 1)
                .all(|w| self.probability(&w[..self.order], w[self.order]) > 0.0)
    }

    /// Rewrites an order-`r` chain as an order-1 chain over the `m^r` blocks of
    /// its last `r` states. Block `(a_1..a_r)` moves to `(a_2..a_r, b)` with
    /// probability `probs[(a_1..a_r)][b]`; every other transition is zero.
    pub fn lift_to_first_order(&self) -> TransitionModel {
        if self.order == 1 {
            return self.clone();
        }
        let blocks = self.block_count();
        let m = self.states;
        let probs = (0..blocks)
            .map(|from| {
                let mut row = vec![0.0; blocks];
                let shifted = (from * m) % blocks;
                for (next, &p) in self.probs[from].iter().enumerate() {
                    row[shifted + next] = p;
                }
                row
            })
            .collect();
        TransitionModel { states: blocks, order: 1, probs }
    }

    /// Short hex identifier of the model, stable across platforms.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.states as u64).to_le_bytes());
        hasher.update((self.order as u64).to_le_bytes());
        for p in self.probs.iter().flatten() {
            hasher.update(p.to_bits().to_le_bytes());
        }
        hex::encode(&hasher.finalize()[..8])
    }

    fn check_states(&self, path: &[usize]) -> Result<(), ModelError> {
        match path.iter().find(|&&s| s >= self.states) {
            Some(&state) => Err(ModelError::StateOutOfRange { state, states: self.states }),
            None => Ok(()),
        }
    }
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    u32::try_from(exp).ok().and_then(|e| base.checked_pow(e))
}

/// `r + 1` consecutive states of a realization, e.g. the pair event `f_ij`
/// for a memoryless chain or the triple `f_ijk` for memory two.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockEvent {
    pub symbols: Vec<usize>,
}

/// Sliding windows of width `order + 1` with stride 1. Consecutive events
/// overlap in `order` symbols.
pub fn block_encode(path: &[usize], order: usize) -> Result<Vec<BlockEvent>, ModelError> {
    if order == 0 {
        return Err(ModelError::ZeroOrder);
    }
    if path.len() < order + 1 {
        return Err(ModelError::PathTooShort { len: path.len(), order });
    }
    Ok(path
        .windows(order + 1)
        .map(|w| BlockEvent { symbols: w.to_vec() })
        .collect())
}

/// Whether consecutive events overlap in all but one symbol.
pub fn blocks_overlap(blocks: &[BlockEvent]) -> bool {
    blocks.windows(2).all(|pair| {
        let (a, b) = (&pair[0].symbols, &pair[1].symbols);
        a.len() == b.len() && a[1..] == b[..b.len() - 1]
    })
}

/// The `coordinate`-th symbol (0-based) of every block.
pub fn subsequence_projection(
    blocks: &[BlockEvent],
    coordinate: usize,
) -> Result<Vec<usize>, ModelError> {
    let width = blocks.first().map_or(0, |b| b.symbols.len());
    if coordinate >= width {
        return Err(ModelError::IndexOutOfRange { index: coordinate, width });
    }
    Ok(blocks.iter().map(|b| b.symbols[coordinate]).collect())
}
