//! CSV artifacts and the provenance stamped into every output.
//!
//! Paths are written as `step,state_label` and coverage reports as
//! `word,positive_probability,occurrences`. Both start with `#` comment lines
//! naming the spec digest and seed; readers skip comment lines.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chaos::ArcCoverage;
use crate::state_space::StateSpace;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("expected header {expected:?}, found {found:?}")]
    BadHeader { expected: String, found: String },
    #[error("row {row}: expected step {expected}, found {found:?}")]
    StepOutOfOrder { row: usize, expected: usize, found: String },
    #[error("row {row}: unknown state label {label:?}")]
    UnknownLabel { row: usize, label: String },
    #[error("path file contains no rows")]
    Empty,
}

/// Where an artifact came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub spec_digest: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(spec_digest: String, seed: u64) -> Self {
        Self { spec_digest, seed }
    }

    /// `spec_digest=...` and `seed=...` lines, each starting with `prefix`.
    pub fn comment_lines(&self, prefix: &str) -> String {
        let lead = if prefix.is_empty() { String::new() } else { format!("{prefix} ") };
        format!("{lead}spec_digest={}\n{lead}seed={}\n", self.spec_digest, self.seed)
    }

    /// Recovers provenance from the `#` comment lines of a CSV artifact.
    pub fn from_comments(text: &str) -> Option<Self> {
        let mut digest = None;
        let mut seed = None;
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let body = line.trim_start_matches('#').trim();
            if let Some(v) = body.strip_prefix("spec_digest=") {
                digest = Some(v.to_string());
            } else if let Some(v) = body.strip_prefix("seed=") {
                seed = v.parse().ok();
            }
        }
        Some(Self { spec_digest: digest?, seed: seed? })
    }
}

fn finish(writer: csv::Writer<Vec<u8>>) -> String {
    let bytes = writer.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

pub fn write_path_csv(path: &[usize], space: &StateSpace, provenance: &Provenance) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["step", "state_label"]).expect("in-memory write");
    for (step, &state) in path.iter().enumerate() {
        writer
            .write_record([step.to_string().as_str(), space.label(state)])
            .expect("in-memory write");
    }
    let mut out = provenance.comment_lines("#");
    out.push_str(&finish(writer));
    out
}

pub fn read_path_csv(text: &str, space: &StateSpace) -> Result<Vec<usize>, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["step", "state_label"] {
        return Err(IoError::BadHeader {
            expected: "step,state_label".into(),
            found: headers.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut path = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let step = &record[0];
        if step.parse::<usize>().ok() != Some(row) {
            return Err(IoError::StepOutOfOrder { row, expected: row, found: step.to_string() });
        }
        let label = &record[1];
        let state = space
            .index_of(label)
            .ok_or_else(|| IoError::UnknownLabel { row, label: label.to_string() })?;
        path.push(state);
    }
    if path.is_empty() {
        return Err(IoError::Empty);
    }
    Ok(path)
}

pub fn write_coverage_csv(
    report: &ArcCoverage,
    space: &StateSpace,
    provenance: &Provenance,
) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["word", "positive_probability", "occurrences"])
        .expect("in-memory write");
    for entry in &report.words {
        let word: Vec<&str> = entry.word.iter().map(|&s| space.label(s)).collect();
        writer
            .write_record([
                word.join(" ").as_str(),
                if entry.positive_probability { "true" } else { "false" },
                entry.occurrences.to_string().as_str(),
            ])
            .expect("in-memory write");
    }
    let mut out = provenance.comment_lines("#");
    out.push_str(&finish(writer));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn space() -> StateSpace {
        StateSpace::discrete_with_labels(vec!["a".into(), "b, c".into(), "d".into()]).unwrap()
    }

    #[test]
    fn path_csv_layout() {
        let prov = Provenance::new("00ff".into(), 9);
        let text = write_path_csv(&[0, 2, 1], &space(), &prov);
        assert_eq!(
            text,
            "# spec_digest=00ff\n# seed=9\nstep,state_label\n0,a\n1,d\n2,\"b, c\"\n"
        );
        assert_eq!(Provenance::from_comments(&text), Some(prov));
    }

    #[test]
    fn path_csv_errors() {
        let s = space();
        assert!(matches!(read_path_csv("x,y\n0,a\n", &s), Err(IoError::BadHeader { .. })));
        assert!(matches!(
            read_path_csv("step,state_label\n0,a\n2,a\n", &s),
            Err(IoError::StepOutOfOrder { row: 1, .. })
        ));
        assert!(matches!(
            read_path_csv("step,state_label\n0,zz\n", &s),
            Err(IoError::UnknownLabel { row: 0, .. })
        ));
        assert!(matches!(read_path_csv("step,state_label\n", &s), Err(IoError::Empty)));
    }

    proptest! {
        #[test]
        fn path_csv_round_trip(path in prop::collection::vec(0usize..3, 1..200), seed in any::<u64>()) {
            let s = space();
            let text = write_path_csv(&path, &s, &Provenance::new("d".into(), seed));
            prop_assert_eq!(read_path_csv(&text, &s).unwrap(), path);
        }
    }
}
