//! Seeded sample paths.
//!
//! Each step draws `u` uniformly from `[0, 1)` and picks the first state `j`
//! (in declared order) whose cumulative probability exceeds `u`. A draw that
//! lands exactly on a boundary therefore goes to the higher index.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::prng::SplitMix64;
use crate::transition::TransitionModel;

/// XORed into the seed for the stream that draws random initial blocks, so it
/// never coincides with the transition stream.
const INITIAL_STREAM_TWEAK: u64 = 0x696E_6974_6961_6C21;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("initial block {block:?} is invalid for an order-{order} chain over {states} states")]
    InitialBlockInvalid { block: Vec<usize>, order: usize, states: usize },
    #[error("requested length {length} is shorter than the initial block ({order})")]
    LengthTooShort { length: usize, order: usize },
    #[error("row {0} has no positive entry")]
    ZeroRowEncountered(usize),
}

/// A finite sample path together with what produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub path: Vec<usize>,
    pub seed: u64,
    pub model_digest: String,
    pub initial: Vec<usize>,
}

impl Realization {
    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }

    /// Wraps an externally supplied path (e.g. read back from CSV).
    pub fn from_path(path: Vec<usize>, model: &TransitionModel, seed: u64) -> Self {
        let initial = path.iter().take(model.order()).copied().collect();
        Self { path, seed, model_digest: model.digest(), initial }
    }

    /// Short hex identifier of the path contents.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(self.model_digest.as_bytes());
        for &s in &self.path {
            hasher.update((s as u64).to_le_bytes());
        }
        hex::encode(&hasher.finalize()[..8])
    }

    /// Every `(r + 1)`-window has positive probability under `model`.
    pub fn is_supported_by(&self, model: &TransitionModel) -> bool {
        model.admits(&self.path)
    }
}

/// Simulates a path of total length `length` starting with `initial`.
pub fn simulate(
    model: &TransitionModel,
    initial: &[usize],
    length: usize,
    seed: u64,
) -> Result<Realization, SimulationError> {
    let order = model.order();
    if initial.len() != order || initial.iter().any(|&s| s >= model.states()) {
        return Err(SimulationError::InitialBlockInvalid {
            block: initial.to_vec(),
            order,
            states: model.states(),
        });
    }
    if length < order {
        return Err(SimulationError::LengthTooShort { length, order });
    }

    let mut rng = SplitMix64::new(seed);
    let mut path = Vec::with_capacity(length);
    path.extend_from_slice(initial);
    let mut word = model.word_index(initial);
    while path.len() < length {
        let next = sample_row(model.row(word), rng.next_f64())
            .ok_or(SimulationError::ZeroRowEncountered(word))?;
        path.push(next);
        word = (word * model.states()) % model.block_count() + next;
    }

    Ok(Realization { path, seed, model_digest: model.digest(), initial: initial.to_vec() })
}

/// Inverse-transform sampling over `row` for a draw `u` in `[0, 1)`.
fn sample_row(row: &[f64], u: f64) -> Option<usize> {
    let mut cumulative = 0.0;
    for (j, &p) in row.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return Some(j);
        }
    }
    // rounding can leave the total a hair under 1
    row.iter().rposition(|&p| p > 0.0)
}

/// Uniform starting block of length `order`, deterministic in `seed`.
pub fn random_initial(model: &TransitionModel, seed: u64) -> Vec<usize> {
    let mut rng = SplitMix64::new(seed ^ INITIAL_STREAM_TWEAK);
    let blocks = model.block_count();
    let index = ((rng.next_f64() * blocks as f64) as usize).min(blocks - 1);
    model.word_of(index)
}

/// Observed conditional frequencies for one conditioning block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyCheck {
    pub block: Vec<usize>,
    pub visits: usize,
    pub observed: Vec<f64>,
    pub expected: Vec<f64>,
    /// Largest deviation in units of the binomial standard error.
    pub max_standard_errors: f64,
}

/// Compares empirical transition frequencies with the model rows for every
/// block visited at least `min_visits` times.
pub fn transition_frequencies(
    realization: &Realization,
    model: &TransitionModel,
    min_visits: usize,
) -> Vec<FrequencyCheck> {
    let order = model.order();
    let m = model.states();
    let mut counts = vec![vec![0usize; m]; model.block_count()];
    for w in realization.path.windows(order + 1) {
        counts[model.word_index(&w[..order])][w[order]] += 1;
    }
    counts
        .iter()
        .enumerate()
        .filter_map(|(word, row)| {
            let visits: usize = row.iter().sum();
            if visits < min_visits {
                return None;
            }
            let expected = model.row(word).to_vec();
            let observed: Vec<f64> = row.iter().map(|&c| c as f64 / visits as f64).collect();
            let max_standard_errors = observed
                .iter()
                .zip(&expected)
                .filter(|(_, &p)| p > 0.0 && p < 1.0)
                .map(|(&o, &p)| (o - p).abs() / (p * (1.0 - p) / visits as f64).sqrt())
                .fold(0.0, f64::max);
            Some(FrequencyCheck {
                block: model.word_of(word),
                visits,
                observed,
                expected,
                max_standard_errors,
            })
        })
        .collect()
}
