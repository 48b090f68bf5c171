//! Corpus loading, validation, exception filtering, rare-agent pruning,
//! inter-annotator agreement and stratified folding.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc;

/// Why a task was excluded from training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExceptionReason {
    #[serde(rename = "ambiguous")]
    Ambiguous,
    #[serde(rename = "non-english-or-meaningless")]
    NonEnglishOrMeaningless,
    #[serde(rename = "illegal")]
    Illegal,
    #[serde(rename = "generic-professional")]
    GenericProfessional,
}

impl ExceptionReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExceptionReason::Ambiguous => "ambiguous",
            ExceptionReason::NonEnglishOrMeaningless => "non-english-or-meaningless",
            ExceptionReason::Illegal => "illegal",
            ExceptionReason::GenericProfessional => "generic-professional",
        }
    }
}

/// Typed argument span over token indices, end exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentSpan {
    pub start: usize,
    pub end: usize,
    pub role: String,
}

/// One annotated to-do.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub id: String,
    pub text: String,
    pub agent: Option<String>,
    #[serde(default)]
    pub args: Vec<ArgumentSpan>,
    pub exception: Option<ExceptionReason>,
    pub source: String,
}

impl TaskRecord {
    /// Validate the record invariants: non-empty text, spans inside the
    /// tokenized utterance, no overlaps, no agent label on exceptions.
    pub fn validate(&self) -> Result<()> {
        if self.text.trim().is_empty() {
            return Err(Error::InvalidRecord {
                id: self.id.clone(),
                message: "utterance is empty".into(),
            });
        }
        if self.exception.is_some() && self.agent.is_some() {
            return Err(Error::InvalidRecord {
                id: self.id.clone(),
                message: "record has both an agent label and an exception reason".into(),
            });
        }
        let token_count = textproc::tokenize(&self.text).len();
        let mut sorted: Vec<&ArgumentSpan> = self.args.iter().collect();
        sorted.sort_by_key(|s| (s.start, s.end));
        for span in &sorted {
            if span.role.is_empty() {
                return Err(Error::InvalidRecord {
                    id: self.id.clone(),
                    message: format!("span [{},{}) has an empty role", span.start, span.end),
                });
            }
            if span.start >= span.end || span.end > token_count {
                return Err(Error::InvalidRecord {
                    id: self.id.clone(),
                    message: format!(
                        "span [{},{}) out of range for {token_count} tokens",
                        span.start, span.end
                    ),
                });
            }
        }
        for pair in sorted.windows(2) {
            if pair[1].start < pair[0].end {
                return Err(Error::OverlappingSpans {
                    id: self.id.clone(),
                    a_start: pair[0].start,
                    a_end: pair[0].end,
                    a_role: pair[0].role.clone(),
                    b_start: pair[1].start,
                    b_end: pair[1].end,
                    b_role: pair[1].role.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Load a JSON-lines corpus. Each line must parse under the record schema;
/// the first malformed line aborts the load with its line number.
pub fn load_corpus(path: &Path) -> Result<Vec<TaskRecord>> {
    let file = File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut records = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_record(&line).map_err(|(field, message)| Error::Schema {
            path: path.to_path_buf(),
            line: lineno + 1,
            field,
            message,
        })?;
        record.validate()?;
        records.push(record);
    }
    Ok(records)
}

fn parse_record(line: &str) -> std::result::Result<TaskRecord, (String, String)> {
    let value: serde_json::Value = serde_json::from_str(line)
        .map_err(|e| ("<line>".to_string(), format!("invalid JSON: {e}")))?;
    let obj = value.as_object().ok_or_else(|| {
        (
            "<line>".to_string(),
            "record must be a JSON object".to_string(),
        )
    })?;

    let req_str = |field: &str| -> std::result::Result<String, (String, String)> {
        obj.get(field)
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .ok_or_else(|| (field.to_string(), "expected a string".to_string()))
    };
    let opt_str = |field: &str| -> std::result::Result<Option<String>, (String, String)> {
        match obj.get(field) {
            None | Some(serde_json::Value::Null) => Ok(None),
            Some(serde_json::Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err((field.to_string(), "expected a string or null".to_string())),
        }
    };

    let id = req_str("id")?;
    let text = req_str("text")?;
    let source = req_str("source")?;
    let agent = opt_str("agent")?;
    let exception = match opt_str("exception")? {
        None => None,
        Some(s) => Some(
            serde_json::from_value::<ExceptionReason>(serde_json::Value::String(s.clone()))
                .map_err(|_| {
                    (
                        "exception".to_string(),
                        format!("`{s}` is not a known exception kind"),
                    )
                })?,
        ),
    };
    let args = match obj.get("args") {
        None | Some(serde_json::Value::Null) => Vec::new(),
        Some(v) => serde_json::from_value::<Vec<ArgumentSpan>>(v.clone())
            .map_err(|e| ("args".to_string(), e.to_string()))?,
    };

    Ok(TaskRecord {
        id,
        text,
        agent,
        args,
        exception,
        source,
    })
}

/// Partition records into usable (agent-labeled) tasks and exceptions.
/// A record carrying neither an agent nor an exception reason is invalid.
pub fn filter_exceptions(records: &[TaskRecord]) -> Result<(Vec<TaskRecord>, Vec<TaskRecord>)> {
    let mut usable = Vec::new();
    let mut exceptions = Vec::new();
    for record in records {
        match (&record.agent, &record.exception) {
            (Some(_), None) => usable.push(record.clone()),
            (None, Some(_)) => exceptions.push(record.clone()),
            (Some(_), Some(_)) => {
                return Err(Error::InvalidRecord {
                    id: record.id.clone(),
                    message: "record has both an agent label and an exception reason".into(),
                })
            }
            (None, None) => {
                return Err(Error::InvalidRecord {
                    id: record.id.clone(),
                    message: "record has neither an agent label nor an exception reason".into(),
                })
            }
        }
    }
    Ok((usable, exceptions))
}

/// Drop records whose agent label occurs fewer than `min_count` times.
/// Ordering is preserved; `min_count == 0` is the identity.
pub fn prune_rare_agents(records: &[TaskRecord], min_count: usize) -> Vec<TaskRecord> {
    if min_count == 0 {
        return records.to_vec();
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for record in records {
        if let Some(agent) = &record.agent {
            *counts.entry(agent).or_default() += 1;
        }
    }
    records
        .iter()
        .filter(|r| {
            r.agent
                .as_deref()
                .map(|a| counts[a] >= min_count)
                .unwrap_or(false)
        })
        .cloned()
        .collect()
}

/// Task-by-category assignment counts with a fixed number of raters per task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationMatrix {
    pub categories: Vec<String>,
    pub rows: Vec<Vec<u64>>,
    pub raters_per_task: u64,
}

impl AnnotationMatrix {
    /// Build a matrix, inferring raters-per-task from the first row and
    /// rejecting rows whose sums differ.
    pub fn new(categories: Vec<String>, rows: Vec<Vec<u64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Matrix("matrix has no tasks".into()));
        }
        if categories.is_empty() {
            return Err(Error::Matrix("matrix has no categories".into()));
        }
        let raters: u64 = rows[0].iter().sum();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != categories.len() {
                return Err(Error::Matrix(format!(
                    "row {} has {} cells, expected {}",
                    i + 1,
                    row.len(),
                    categories.len()
                )));
            }
            let sum: u64 = row.iter().sum();
            if sum != raters {
                return Err(Error::Matrix(format!(
                    "row {} sums to {sum}, expected {raters}",
                    i + 1
                )));
            }
        }
        Ok(AnnotationMatrix {
            categories,
            rows,
            raters_per_task: raters,
        })
    }
}

/// Fleiss' kappa over an annotation matrix.
///
/// When expected chance agreement reaches 1 (all mass on one category, which
/// forces perfect agreement) the statistic is 1.0 by convention.
pub fn fleiss_kappa(matrix: &AnnotationMatrix) -> Result<f64> {
    let n = matrix.raters_per_task as f64;
    if matrix.raters_per_task < 2 {
        return Err(Error::Matrix(
            "fleiss_kappa needs at least two raters per task".into(),
        ));
    }
    let tasks = matrix.rows.len() as f64;
    let cats = matrix.categories.len();

    let mut column_totals = vec![0.0_f64; cats];
    let mut p_bar = 0.0;
    for row in &matrix.rows {
        let mut agree = 0.0;
        for (j, &cell) in row.iter().enumerate() {
            let c = cell as f64;
            column_totals[j] += c;
            agree += c * (c - 1.0);
        }
        p_bar += agree / (n * (n - 1.0));
    }
    p_bar /= tasks;

    let total = tasks * n;
    let p_e: f64 = column_totals
        .iter()
        .map(|&t| (t / total) * (t / total))
        .sum();

    if (1.0 - p_e).abs() < 1e-12 {
        return Ok(1.0);
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Stratified k-fold partitions: `(train, test)` index lists, disjoint and
/// covering, with each label spread across folds within one item of evenness.
/// Labels with fewer than `k` members are placed best effort with a warning.
pub fn stratified_kfold(
    records: &[TaskRecord],
    k: usize,
    seed: u64,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 || k > records.len() {
        return Err(Error::BadFold {
            n: records.len(),
            k,
        });
    }
    let mut by_label: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, record) in records.iter().enumerate() {
        by_label
            .entry(record.agent.as_deref().unwrap_or(""))
            .or_default()
            .push(i);
    }

    let mut rng = StdRng::seed_from_u64(seed);
    let mut fold_members: Vec<Vec<usize>> = vec![Vec::new(); k];
    // rotating pointer so the "one extra" items cycle across folds
    let mut next_extra = 0usize;
    for (label, mut members) in by_label {
        if members.len() < k {
            eprintln!(
                "warning: label `{label}` has {} records, fewer than {k} folds; placing best effort",
                members.len()
            );
        }
        members.shuffle(&mut rng);
        let base = members.len() / k;
        let extras = members.len() % k;
        let mut cursor = 0;
        for offset in 0..k {
            let fold = (next_extra + offset) % k;
            let take = base + usize::from(offset < extras);
            fold_members[fold].extend(&members[cursor..cursor + take]);
            cursor += take;
        }
        next_extra = (next_extra + extras) % k;
    }

    let mut folds = Vec::with_capacity(k);
    for test_fold in 0..k {
        let mut test = fold_members[test_fold].clone();
        test.sort_unstable();
        let mut train: Vec<usize> = fold_members
            .iter()
            .enumerate()
            .filter(|&(f, _)| f != test_fold)
            .flat_map(|(_, m)| m.iter().copied())
            .collect();
        train.sort_unstable();
        folds.push((train, test));
    }
    Ok(folds)
}
