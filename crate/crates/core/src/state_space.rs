//! Finite state spaces equipped with a validated metric.
//!
//! Labels are opaque; everything downstream works with indices `0..m` in
//! declaration order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("metric table is not square: row {row} has {len} entries, expected {expected}")]
    NonSquare { row: usize, len: usize, expected: usize },
    #[error("a state space needs at least two states, got {0}")]
    TooFewStates(usize),
    #[error("{labels} labels given for a {states}-state metric table")]
    LabelCount { labels: usize, states: usize },
    #[error("duplicate state label {0:?}")]
    DuplicateLabel(String),
    #[error("metric entry ({i}, {j}) is not finite")]
    NonFinite { i: usize, j: usize },
    #[error("metric entry ({i}, {j}) = {value} is negative")]
    NegativeEntry { i: usize, j: usize, value: f64 },
    #[error("metric diagonal entry ({i}, {i}) = {value} is not zero")]
    NonZeroDiagonal { i: usize, value: f64 },
    #[error("distinct states {i} and {j} are at distance zero")]
    ZeroOffDiagonal { i: usize, j: usize },
    #[error("metric is not symmetric: d({i},{j}) = {forward} but d({j},{i}) = {backward}")]
    AsymmetricMetric { i: usize, j: usize, forward: f64, backward: f64 },
    #[error("triangle inequality fails on ({i}, {j}, {k}): d({i},{k}) = {direct} > {via}")]
    TriangleViolation { i: usize, j: usize, k: usize, direct: f64, via: f64 },
}

/// A finite set of states together with a metric on it.
///
/// Immutable once constructed; every value of this type satisfies the metric
/// axioms exactly (no tolerance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpace {
    labels: Vec<String>,
    metric: Vec<Vec<f64>>,
}

impl StateSpace {
    /// Validates `table` as a metric on `table.len()` states and attaches
    /// default labels `s1..sm`.
    pub fn validate_metric(table: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        let labels = (1..=table.len()).map(|i| format!("s{i}")).collect();
        Self::with_labels(labels, table)
    }

    /// Validates `table` as a metric and attaches `labels` in declaration order.
    pub fn with_labels(labels: Vec<String>, table: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        let m = table.len();
        for (row, entries) in table.iter().enumerate() {
            if entries.len() != m {
                return Err(MetricError::NonSquare { row, len: entries.len(), expected: m });
            }
        }
        if m < 2 {
            return Err(MetricError::TooFewStates(m));
        }
        if labels.len() != m {
            return Err(MetricError::LabelCount { labels: labels.len(), states: m });
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(MetricError::DuplicateLabel(label.clone()));
            }
        }

        for i in 0..m {
            for j in 0..m {
                let value = table[i][j];
                if !value.is_finite() {
                    return Err(MetricError::NonFinite { i, j });
                }
                if value < 0.0 {
                    return Err(MetricError::NegativeEntry { i, j, value });
                }
            }
        }
        for i in 0..m {
            if table[i][i] != 0.0 {
                return Err(MetricError::NonZeroDiagonal { i, value: table[i][i] });
            }
            for j in (i + 1)..m {
                if table[i][j] != table[j][i] {
                    return Err(MetricError::AsymmetricMetric {
                        i,
                        j,
                        forward: table[i][j],
                        backward: table[j][i],
                    });
                }
                if table[i][j] == 0.0 {
                    return Err(MetricError::ZeroOffDiagonal { i, j });
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let direct = table[i][k];
                    if exceeds_sum(direct, table[i][j], table[j][k]) {
                        let via = table[i][j] + table[j][k];
                        return Err(MetricError::TriangleViolation { i, j, k, direct, via });
                    }
                }
            }
        }

        Ok(Self { labels, metric: table })
    }

    /// The discrete metric on `m` states: 0 on the diagonal, 1 elsewhere.
    pub fn discrete(m: usize) -> Result<Self, MetricError> {
        let labels = (1..=m).map(|i| format!("s{i}")).collect();
        Self::discrete_with_labels(labels)
    }

    pub fn discrete_with_labels(labels: Vec<String>) -> Result<Self, MetricError> {
        let m = labels.len();
        let table = (0..m)
            .map(|i| (0..m).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect();
        Self::with_labels(labels, table)
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn metric(&self) -> &[Vec<f64>] {
        &self.metric
    }

    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.metric[a][b]
    }

    /// Smallest distance between two distinct states. Always positive.
    pub fn min_pairwise_distance(&self) -> f64 {
        self.off_diagonal().fold(f64::INFINITY, f64::min)
    }

    /// Largest distance between two states, `diam_d(S)`.
    pub fn diameter(&self) -> f64 {
        self.off_diagonal().fold(0.0, f64::max)
    }

    fn off_diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        let m = self.size();
        (0..m).flat_map(move |i| (0..m).filter(move |&j| j != i).map(move |j| self.metric[i][j]))
    }
}

/// Whether `c > a + b` for the exact real values of the doubles, using an
/// error-free sum so that rounding of `a + b` cannot flip the answer.
fn exceeds_sum(c: f64, a: f64, b: f64) -> bool {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    c > s || (c == s && err < 0.0)
}
