//! Finite-data evidence of chaos in realizations and in the shift.
//!
//! A sequence `s` is unpredictable when there are shifts `zeta_n` under which
//! `s` recurs on ever longer initial intervals, together with times `eta_n`
//! where `s_{zeta_n + eta_n}` and `s_{eta_n}` are at least `epsilon0` apart,
//! both sequences diverging. On a finite path the recurrence is checked on a
//! fixed window `w` and the scan reports every qualifying shift it finds;
//! that is evidence, not a proof.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::sequence_space::{
    check_separation_condition, delta_metric, word_code, word_of_code, Cylinder, Delta,
    EnumerationBudget, SequenceError, SymbolSequence,
};
use crate::state_space::StateSpace;
use crate::transition::TransitionModel;

/// Recurrence window used when none is given.
pub const DEFAULT_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("window must be at least 1")]
    ZeroWindow,
    #[error("window {window} needs a path of length at least {needed}, got {len}")]
    WindowTooLarge { window: usize, needed: usize, len: usize },
    #[error("threshold must be positive, got {0}")]
    NonPositiveThreshold(f64),
    #[error("threshold {threshold} exceeds the state-space diameter {diameter}")]
    ThresholdAboveDiameter { threshold: f64, diameter: f64 },
    #[error("paths have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("state {state} at step {step} is out of range for {states} states")]
    StateOutOfRange { step: usize, state: usize, states: usize },
    #[error("word length must be between 1 and the path length {len}, got {word_length}")]
    InvalidWordLength { word_length: usize, len: usize },
    #[error("resolution must be at least 1")]
    ZeroDepth,
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

/// One recurrence/divergence pair: `path[i + zeta] == path[i]` for
/// `i < window`, and `d(path[zeta + eta], path[eta]) >= epsilon0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub zeta: usize,
    pub eta: usize,
    pub window: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub epsilon0: f64,
    pub window: usize,
    pub path_length: usize,
    pub witnesses: Vec<Witness>,
    pub realization_digest: String,
}

impl WitnessReport {
    /// Independent recheck of every witness against `path`, including the
    /// strict growth of both `zeta` and `eta`.
    pub fn revalidate(&self, path: &[usize], space: &StateSpace) -> bool {
        let each = self.witnesses.iter().all(|w| {
            w.zeta + w.eta < path.len()
                && w.zeta + w.window <= path.len()
                && (0..w.window).all(|i| path[i + w.zeta] == path[i])
                && space.distance(path[w.zeta + w.eta], path[w.eta]) >= self.epsilon0
        });
        let increasing = self
            .witnesses
            .windows(2)
            .all(|p| p[0].zeta < p[1].zeta && p[0].eta < p[1].eta);
        each && increasing
    }
}

/// Short hex identifier of a bare state path.
pub fn path_digest(path: &[usize]) -> String {
    let mut hasher = Sha256::new();
    for &s in path {
        hasher.update((s as u64).to_le_bytes());
    }
    hex::encode(&hasher.finalize()[..8])
}

fn check_path(path: &[usize], space: &StateSpace) -> Result<(), AnalysisError> {
    let states = space.size();
    match path.iter().enumerate().find(|(_, &s)| s >= states) {
        Some((step, &state)) => Err(AnalysisError::StateOutOfRange { step, state, states }),
        None => Ok(()),
    }
}

fn check_threshold(epsilon0: f64, space: &StateSpace) -> Result<(), AnalysisError> {
    if !(epsilon0 > 0.0) {
        return Err(AnalysisError::NonPositiveThreshold(epsilon0));
    }
    if epsilon0 > space.diameter() {
        return Err(AnalysisError::ThresholdAboveDiameter {
            threshold: epsilon0,
            diameter: space.diameter(),
        });
    }
    Ok(())
}

/// The threshold used when none is given: half the smallest distance between
/// states, i.e. the degree-1 separation constant.
pub fn default_epsilon0(space: &StateSpace) -> f64 {
    space.min_pairwise_distance() / 2.0
}

/// Scans shifts `zeta = 1, 2, ...` for witnesses of unpredictability.
///
/// A shift qualifies when the first `window` symbols recur at `zeta` and some
/// `eta` beyond the previous witness's `eta` has `zeta + eta < N` and
/// `d(path[zeta + eta], path[eta]) >= epsilon0`; the smallest such `eta` is
/// recorded. Stops after `max_witnesses` or at the end of the path.
pub fn find_witnesses(
    path: &[usize],
    space: &StateSpace,
    window: usize,
    epsilon0: f64,
    max_witnesses: usize,
) -> Result<WitnessReport, AnalysisError> {
    if window == 0 {
        return Err(AnalysisError::ZeroWindow);
    }
    let n = path.len();
    if 2 * window > n {
        return Err(AnalysisError::WindowTooLarge { window, needed: 2 * window, len: n });
    }
    check_threshold(epsilon0, space)?;
    check_path(path, space)?;

    let head = &path[..window];
    let mut witnesses = Vec::new();
    let mut last_eta = 0;
    for zeta in 1..=(n - window) {
        if witnesses.len() >= max_witnesses {
            break;
        }
        if &path[zeta..zeta + window] != head {
            continue;
        }
        let eta = (last_eta + 1..n - zeta)
            .find(|&eta| space.distance(path[zeta + eta], path[eta]) >= epsilon0);
        if let Some(eta) = eta {
            witnesses.push(Witness { zeta, eta, window });
            last_eta = eta;
        }
    }

    Ok(WitnessReport {
        epsilon0,
        window,
        path_length: n,
        witnesses,
        realization_digest: path_digest(path),
    })
}

/// Distance between the orbit point `shift^zeta(x)` and `x`, where `x` is the
/// point of the sequence space spelled by `path`, both truncated to `depth`.
pub fn orbit_distance(
    path: &[usize],
    space: &StateSpace,
    from: usize,
    to: usize,
    depth: usize,
) -> Result<Delta, AnalysisError> {
    let end = from.max(to) + depth;
    if end > path.len() {
        return Err(AnalysisError::WindowTooLarge { window: depth, needed: end, len: path.len() });
    }
    let states = space.size();
    let a = SymbolSequence::new(path[from..from + depth].to_vec(), states)?;
    let b = SymbolSequence::new(path[to..to + depth].to_vec(), states)?;
    Ok(delta_metric(&a, &b, space)?)
}

/// Witness search on orbit points instead of state symbols.
///
/// A shift qualifies when `delta(shift^zeta x, x)`, truncated at `depth` and
/// padded with its tail bound, is at most `tolerance`; divergence requires the
/// truncated (hence lower-bound) distance `delta(shift^{zeta+eta} x,
/// shift^eta x)` to reach `epsilon0`.
pub fn find_orbit_witnesses(
    path: &[usize],
    space: &StateSpace,
    depth: usize,
    tolerance: f64,
    epsilon0: f64,
    max_witnesses: usize,
) -> Result<WitnessReport, AnalysisError> {
    if depth == 0 {
        return Err(AnalysisError::ZeroWindow);
    }
    let n = path.len();
    if 2 * depth > n {
        return Err(AnalysisError::WindowTooLarge { window: depth, needed: 2 * depth, len: n });
    }
    if !(epsilon0 > 0.0) {
        return Err(AnalysisError::NonPositiveThreshold(epsilon0));
    }
    check_path(path, space)?;

    let mut witnesses = Vec::new();
    let mut last_eta = 0;
    for zeta in 1..=(n - depth) {
        if witnesses.len() >= max_witnesses {
            break;
        }
        let (_, upper) = orbit_distance(path, space, zeta, 0, depth)?.interval();
        if upper > tolerance {
            continue;
        }
        let mut found = None;
        for eta in last_eta + 1.. {
            if zeta + eta + depth > n {
                break;
            }
            if orbit_distance(path, space, zeta + eta, eta, depth)?.value >= epsilon0 {
                found = Some(eta);
                break;
            }
        }
        if let Some(eta) = found {
            witnesses.push(Witness { zeta, eta, window: depth });
            last_eta = eta;
        }
    }
    Ok(WitnessReport {
        epsilon0,
        window: depth,
        path_length: n,
        witnesses,
        realization_digest: path_digest(path),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordCount {
    pub word: Vec<usize>,
    pub positive_probability: bool,
    pub occurrences: usize,
}

/// Which words of a fixed length appear in a path, split by whether the model
/// gives them positive probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcCoverage {
    pub word_length: usize,
    pub path_length: usize,
    pub total_words: usize,
    pub positive_words: usize,
    pub positive_present: usize,
    pub zero_words: usize,
    pub zero_present: usize,
    pub missing_positive: Vec<Vec<usize>>,
    pub observed_zero: Vec<Vec<usize>>,
    pub pass: bool,
    pub words: Vec<WordCount>,
}

/// Counts every length-`word_length` factor of `path`.
///
/// A word has positive probability when each of its `(r + 1)`-windows does;
/// words no longer than the memory order count as positive. Passing means
/// every positive word occurred and no zero-probability word did.
pub fn arc_coverage(
    path: &[usize],
    model: &TransitionModel,
    word_length: usize,
    budget: EnumerationBudget,
) -> Result<ArcCoverage, AnalysisError> {
    if word_length == 0 || word_length > path.len() {
        return Err(AnalysisError::InvalidWordLength { word_length, len: path.len() });
    }
    let m = model.states();
    if let Some((step, &state)) = path.iter().enumerate().find(|(_, &s)| s >= m) {
        return Err(AnalysisError::StateOutOfRange { step, state, states: m });
    }
    let total = budget.words(m, word_length)?;

    let mut occurrences = vec![0usize; total];
    for w in path.windows(word_length) {
        occurrences[word_code(w, m)] += 1;
    }

    let words: Vec<WordCount> = occurrences
        .iter()
        .enumerate()
        .map(|(code, &count)| {
            let word = word_of_code(code, m, word_length);
            WordCount { positive_probability: model.admits(&word), word, occurrences: count }
        })
        .collect();

    let missing_positive: Vec<Vec<usize>> = words
        .iter()
        .filter(|w| w.positive_probability && w.occurrences == 0)
        .map(|w| w.word.clone())
        .collect();
    let observed_zero: Vec<Vec<usize>> = words
        .iter()
        .filter(|w| !w.positive_probability && w.occurrences > 0)
        .map(|w| w.word.clone())
        .collect();
    let positive_words = words.iter().filter(|w| w.positive_probability).count();
    let zero_words = total - positive_words;

    Ok(ArcCoverage {
        word_length,
        path_length: path.len(),
        total_words: total,
        positive_words,
        positive_present: positive_words - missing_positive.len(),
        zero_words,
        zero_present: observed_zero.len(),
        pass: missing_positive.is_empty() && observed_zero.is_empty(),
        missing_positive,
        observed_zero,
        words,
    })
}

/// Linear de Bruijn word of order `n` over `0..m`: every length-`n` word occurs
/// exactly once as a factor. Length `m^n + n - 1`.
pub fn de_bruijn(m: usize, n: usize) -> Vec<usize> {
    fn expand(t: usize, p: usize, m: usize, n: usize, a: &mut [usize], out: &mut Vec<usize>) {
        if t > n {
            if n % p == 0 {
                out.extend_from_slice(&a[1..=p]);
            }
            return;
        }
        a[t] = a[t - p];
        expand(t + 1, p, m, n, a, out);
        for symbol in a[t - p] + 1..m {
            a[t] = symbol;
            expand(t + 1, t, m, n, a, out);
        }
    }

    if n == 0 || m == 0 {
        return Vec::new();
    }
    let mut a = vec![0; n + 1];
    let mut out = Vec::new();
    expand(1, 1, m, n, &mut a, &mut out);
    let wrap: Vec<usize> = out[..n - 1].to_vec();
    out.extend(wrap);
    out
}

/// Number of distinct length-`n` factors of `word`.
pub fn distinct_factors(word: &[usize], n: usize) -> usize {
    if n == 0 || word.len() < n {
        return 0;
    }
    word.windows(n).collect::<HashSet<_>>().len()
}

/// Finite-resolution evidence for the three Devaney ingredients of the shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DevaneyCertificate {
    pub depth: usize,
    pub truncation: usize,
    /// Every depth-`depth` cylinder contains a periodic point.
    pub periodic_density_pass: bool,
    /// A single orbit prefix visits every depth-`depth` cylinder.
    pub transitivity_pass: bool,
    pub transitivity_witness: Vec<usize>,
    pub sensitivity_constant: f64,
}

impl DevaneyCertificate {
    pub fn pass(&self) -> bool {
        self.periodic_density_pass && self.transitivity_pass && self.sensitivity_constant > 0.0
    }
}

/// Builds the certificate at resolution `n`, checking periodic points on
/// truncations of depth `truncation` (which must exceed `n`).
pub fn devaney_certificate(
    space: &StateSpace,
    n: usize,
    truncation: usize,
    budget: EnumerationBudget,
) -> Result<DevaneyCertificate, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::ZeroDepth);
    }
    if truncation <= n {
        return Err(SequenceError::DepthBelowCylinder { depth: truncation, cylinder: n + 1 }.into());
    }
    let m = space.size();
    let cylinders = budget.words(m, n)?;

    let mut periodic_density_pass = true;
    for code in 0..cylinders {
        let block = word_of_code(code, m, n);
        let point = SymbolSequence::periodic(&block, truncation, m)?;
        let cylinder = Cylinder::new(block, m)?;
        let image = point.shift_by(n)?;
        let fixed = image.symbols() == &point.symbols()[..truncation - n];
        periodic_density_pass &= cylinder.contains(&point) && fixed;
    }

    let transitivity_witness = de_bruijn(m, n);
    let transitivity_pass = transitivity_witness.len() == cylinders + n - 1
        && distinct_factors(&transitivity_witness, n) == cylinders;

    let sensitivity_constant = check_separation_condition(space, n, budget)?.epsilon0;

    Ok(DevaneyCertificate {
        depth: n,
        truncation,
        periodic_density_pass,
        transitivity_pass,
        transitivity_witness,
        sensitivity_constant,
    })
}

/// First step at which two equally long paths are at least `epsilon0` apart.
pub fn divergence_locator(
    a: &[usize],
    b: &[usize],
    space: &StateSpace,
    epsilon0: f64,
) -> Result<Option<usize>, AnalysisError> {
    if a.len() != b.len() {
        return Err(AnalysisError::LengthMismatch(a.len(), b.len()));
    }
    check_path(a, space)?;
    check_path(b, space)?;
    Ok(a.iter().zip(b).position(|(&x, &y)| space.distance(x, y) >= epsilon0))
}
