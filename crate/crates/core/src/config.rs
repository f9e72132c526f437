//! The chain-spec document: a versioned JSON description of a chain.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "states": ["s1", "s2"],
//!   "metric": "discrete",
//!   "order": 1,
//!   "transitions": [[0.5, 0.5], [0.5, 0.5]],
//!   "strict_positivity": true,
//!   "seed": 2024,
//!   "length": 100000,
//!   "initial": ["s1"]
//! }
//! ```
//!
//! `metric` is either `"discrete"` (the default) or an `m x m` table.
//! `transitions` has `m^order` rows, the row for the context word
//! `(a_1..a_r)` at index `a_1 m^{r-1} + ... + a_r`. `initial` is optional; a
//! uniformly random starting block is drawn from `seed` when it is absent.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::state_space::{MetricError, StateSpace};
use crate::transition::{ModelError, TransitionModel};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl ConfigError {
    pub fn path(&self) -> &str {
        match self {
            ConfigError::Parse { path, .. } | ConfigError::Invalid { path, .. } => path,
        }
    }

    fn invalid(path: impl Into<String>, message: impl ToString) -> Self {
        ConfigError::Invalid { path: path.into(), message: message.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricSpec {
    Named(String),
    Table(Vec<Vec<f64>>),
}

impl Default for MetricSpec {
    fn default() -> Self {
        MetricSpec::Named("discrete".into())
    }
}

fn default_order() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub schema_version: u32,
    pub states: Vec<String>,
    #[serde(default)]
    pub metric: MetricSpec,
    #[serde(default = "default_order")]
    pub order: usize,
    pub transitions: Vec<Vec<f64>>,
    #[serde(default)]
    pub strict_positivity: bool,
    #[serde(default)]
    pub seed: u64,
    pub length: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<String>>,
}

/// A chain spec that passed every check.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub spec: ChainSpec,
    pub space: StateSpace,
    pub model: TransitionModel,
    pub initial: Option<Vec<usize>>,
    pub digest: String,
}

impl ChainSpec {
    /// Parses JSON, reporting the path of the first offending field.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|err| ConfigError::Parse {
            path: match err.path().to_string() {
                p if p == "." => "$".into(),
                p => p,
            },
            message: err.into_inner().to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Short hex identifier of the canonical serialization.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(&Sha256::digest(&canonical)[..8])
    }

    /// Runs the state-space and transition validation and resolves labels.
    pub fn build(&self) -> Result<Chain, ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::invalid(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        if self.length == 0 {
            return Err(ConfigError::invalid("length", "must be at least 1"));
        }

        let space = match &self.metric {
            MetricSpec::Named(name) if name == "discrete" => {
                StateSpace::discrete_with_labels(self.states.clone())
            }
            MetricSpec::Named(name) => {
                return Err(ConfigError::invalid(
                    "metric",
                    format!("unknown metric {name:?}; use \"discrete\" or a table"),
                ))
            }
            MetricSpec::Table(table) => StateSpace::with_labels(self.states.clone(), table.clone()),
        }
        .map_err(|e| ConfigError::invalid(metric_error_path(&e), e))?;

        let model = TransitionModel::validate_stochastic(
            self.transitions.clone(),
            self.order,
            self.strict_positivity,
        )
        .map_err(|e| ConfigError::invalid(model_error_path(&e), e))?;
        if model.states() != space.size() {
            return Err(ConfigError::invalid(
                "transitions",
                format!("rows have {} entries but there are {} states", model.states(), space.size()),
            ));
        }

        let initial = match &self.initial {
            None => None,
            Some(labels) => {
                if labels.len() != self.order {
                    return Err(ConfigError::invalid(
                        "initial",
                        format!("expected {} labels, got {}", self.order, labels.len()),
                    ));
                }
                let block = labels
                    .iter()
                    .enumerate()
                    .map(|(i, label)| {
                        space.index_of(label).ok_or_else(|| {
                            ConfigError::invalid(format!("initial[{i}]"), format!("unknown state {label:?}"))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Some(block)
            }
        };
        if self.length < self.order {
            return Err(ConfigError::invalid("length", "shorter than the memory order"));
        }

        Ok(Chain { spec: self.clone(), space, model, initial, digest: self.digest() })
    }
}

fn metric_error_path(err: &MetricError) -> String {
    match err {
        MetricError::TooFewStates(_) | MetricError::LabelCount { .. } => "states".into(),
        MetricError::DuplicateLabel(_) => "states".into(),
        MetricError::NonSquare { row, .. } => format!("metric[{row}]"),
        MetricError::NonFinite { i, j }
        | MetricError::NegativeEntry { i, j, .. }
        | MetricError::ZeroOffDiagonal { i, j }
        | MetricError::AsymmetricMetric { i, j, .. } => format!("metric[{i}][{j}]"),
        MetricError::NonZeroDiagonal { i, .. } => format!("metric[{i}][{i}]"),
        MetricError::TriangleViolation { i, k, .. } => format!("metric[{i}][{k}]"),
    }
}

fn model_error_path(err: &ModelError) -> String {
    match err {
        ModelError::ZeroOrder => "order".into(),
        ModelError::RaggedRow { row, .. } | ModelError::RowSumInvalid { row, .. } => {
            format!("transitions[{row}]")
        }
        ModelError::NonFinite { row, col }
        | ModelError::NegativeProbability { row, col, .. }
        | ModelError::ZeroProbabilityInStrictMode { row, col } => {
            format!("transitions[{row}][{col}]")
        }
        _ => "transitions".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EVENT_SPEC: &str = r#"{
        "schema_version": 1,
        "states": ["s1", "s2"],
        "transitions": [[0.5, 0.5], [0.5, 0.5]],
        "strict_positivity": true,
        "seed": 2024,
        "length": 1000
    }"#;

    #[test]
    fn minimal_spec_builds() {
        let spec = ChainSpec::from_json(EVENT_SPEC).unwrap();
        assert_eq!(spec.metric, MetricSpec::Named("discrete".into()));
        assert_eq!(spec.order, 1);
        let chain = spec.build().unwrap();
        assert_eq!(chain.space, StateSpace::discrete_with_labels(vec!["s1".into(), "s2".into()]).unwrap());
        assert_eq!(chain.initial, None);
        assert_eq!(chain.digest.len(), 16);
        let again = ChainSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(again.digest(), spec.digest());
    }

    #[test]
    fn parse_errors_carry_paths() {
        let err = ChainSpec::from_json(&EVENT_SPEC.replace("[0.5, 0.5], [0.5", "[0.5, \"x\"], [0.5"))
            .unwrap_err();
        assert_eq!(err.path(), "transitions[0][1]");
        let err = ChainSpec::from_json(&EVENT_SPEC.replace("\"seed\"", "\"sead\"")).unwrap_err();
        assert!(matches!(err, ConfigError::Parse { .. }));
        let err = ChainSpec::from_json(&EVENT_SPEC.replace("\"length\": 1000", "\"length\": -1"))
            .unwrap_err();
        assert_eq!(err.path(), "length");
    }

    #[test]
    fn semantic_errors_carry_paths() {
        let bad_row = EVENT_SPEC.replace("[0.5, 0.5], [0.5, 0.5]", "[0.5, 0.5], [0.7, 0.4]");
        let err = ChainSpec::from_json(&bad_row).unwrap().build().unwrap_err();
        assert_eq!(err.path(), "transitions[1]");

        let zero = EVENT_SPEC.replace("[0.5, 0.5], [0.5, 0.5]", "[1.0, 0.0], [0.5, 0.5]");
        let err = ChainSpec::from_json(&zero).unwrap().build().unwrap_err();
        assert_eq!(err.path(), "transitions[0][1]");

        let metric = EVENT_SPEC.replace(
            "\"length\": 1000",
            "\"length\": 1000, \"metric\": [[0, 0.4], [0.5, 0]]",
        );
        let err = ChainSpec::from_json(&metric).unwrap().build().unwrap_err();
        assert_eq!(err.path(), "metric[0][1]");

        let init = EVENT_SPEC.replace("\"length\": 1000", "\"length\": 1000, \"initial\": [\"s9\"]");
        let err = ChainSpec::from_json(&init).unwrap().build().unwrap_err();
        assert_eq!(err.path(), "initial[0]");

        let version = EVENT_SPEC.replace("\"schema_version\": 1", "\"schema_version\": 2");
        let err = ChainSpec::from_json(&version).unwrap().build().unwrap_err();
        assert_eq!(err.path(), "schema_version");

        let empty = EVENT_SPEC.replace("\"length\": 1000", "\"length\": 0");
        assert_eq!(ChainSpec::from_json(&empty).unwrap().build().unwrap_err().path(), "length");
    }

    #[test]
    fn order_two_spec() {
        let text = r#"{
            "schema_version": 1,
            "states": ["a", "b"],
            "order": 2,
            "transitions": [[0.25, 0.75], [0.5, 0.5], [0.75, 0.25], [0.5, 0.5]],
            "length": 50,
            "initial": ["b", "a"]
        }"#;
        let chain = ChainSpec::from_json(text).unwrap().build().unwrap();
        assert_eq!(chain.model.order(), 2);
        assert_eq!(chain.initial, Some(vec![1, 0]));
    }
}
