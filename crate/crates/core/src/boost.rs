//! Stagewise additive boosting of depth-1 regression stumps under the
//! multinomial logistic loss, over mixed numeric and categorical features.
//!
//! Each round fits one stump per class to the working response, then applies
//! the multiclass centering correction; class scores start at the log priors
//! so an empty ensemble predicts the training distribution. Training is
//! deterministic for a fixed input order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const Z_MAX: f64 = 4.0;
const WEIGHT_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub name: String,
    pub kind: FeatureKind,
}

/// Ordered feature declaration frozen at training time.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub features: Vec<FeatureDef>,
}

impl FeatureSchema {
    pub fn numeric(name: &str) -> FeatureDef {
        FeatureDef {
            name: name.to_string(),
            kind: FeatureKind::Numeric,
        }
    }

    pub fn categorical(name: &str) -> FeatureDef {
        FeatureDef {
            name: name.to_string(),
            kind: FeatureKind::Categorical,
        }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    fn check_row(&self, row: &[FeatureValue]) -> Result<()> {
        if row.len() != self.features.len() {
            return Err(Error::SchemaMismatch(format!(
                "row has {} features, schema has {}",
                row.len(),
                self.features.len()
            )));
        }
        for (value, def) in row.iter().zip(&self.features) {
            let ok = matches!(
                (value, def.kind),
                (FeatureValue::Num(_), FeatureKind::Numeric)
                    | (FeatureValue::Cat(_), FeatureKind::Categorical)
            );
            if !ok {
                return Err(Error::SchemaMismatch(format!(
                    "feature `{}` has the wrong kind",
                    def.name
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureValue {
    Num(f64),
    Cat(String),
}

/// One regression stump. Numeric features route `x <= threshold` to the left
/// leaf; categorical features route `x == category` left. Everything else
/// goes right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub test: SplitTest,
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitTest {
    Threshold(f64),
    Equals(String),
}

impl Stump {
    fn value(&self, row: &[FeatureValue]) -> f64 {
        let left = match (&row[self.feature], &self.test) {
            (FeatureValue::Num(x), SplitTest::Threshold(t)) => x <= t,
            (FeatureValue::Cat(c), SplitTest::Equals(v)) => c == v,
            _ => false,
        };
        if left {
            self.left
        } else {
            self.right
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub rounds: usize,
    pub shrinkage: f64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            rounds: 100,
            shrinkage: 0.1,
        }
    }
}

/// A trained boosted-stump classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    pub version: u32,
    pub schema: FeatureSchema,
    /// Class labels, sorted; argmax ties resolve to the first (smallest) label.
    pub labels: Vec<String>,
    /// Per-class log priors; the score of an empty ensemble.
    pub bias: Vec<f64>,
    /// One stump per class per round, in training order.
    pub rounds: Vec<Vec<Stump>>,
    pub config: BoostConfig,
}

impl BoostModel {
    /// Constant classifier that always emits `label`.
    pub fn constant(schema: FeatureSchema, label: &str) -> Self {
        BoostModel {
            version: 1,
            schema,
            labels: vec![label.to_string()],
            bias: vec![0.0],
            rounds: Vec::new(),
            config: BoostConfig {
                rounds: 0,
                shrinkage: 0.0,
            },
        }
    }

    /// Raw additive class scores for one row.
    pub fn scores(&self, row: &[FeatureValue]) -> Result<Vec<f64>> {
        self.schema.check_row(row)?;
        let j = self.labels.len() as f64;
        let mut scores = self.bias.clone();
        for round in &self.rounds {
            let values: Vec<f64> = round.iter().map(|s| s.value(row)).collect();
            let mean = values.iter().sum::<f64>() / j;
            for (f, v) in scores.iter_mut().zip(&values) {
                *f += self.config.shrinkage * (j - 1.0) / j * (v - mean);
            }
        }
        Ok(scores)
    }

    /// Predicted label and per-class probabilities (softmax of the scores).
    pub fn predict(&self, row: &[FeatureValue]) -> Result<(String, Vec<f64>)> {
        let scores = self.scores(row)?;
        let probs = softmax(&scores);
        let best = argmax_first(&scores);
        Ok((self.labels[best].clone(), probs))
    }
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

enum Column {
    Numeric(Vec<f64>),
    // category id per row plus the per-feature vocabulary, sorted
    Categorical(Vec<u32>, Vec<String>),
}

fn encode_columns(schema: &FeatureSchema, rows: &[Vec<FeatureValue>]) -> Vec<Column> {
    let mut columns = Vec::with_capacity(schema.len());
    for (f, def) in schema.features.iter().enumerate() {
        match def.kind {
            FeatureKind::Numeric => {
                let values = rows
                    .iter()
                    .map(|r| match &r[f] {
                        FeatureValue::Num(x) => *x,
                        FeatureValue::Cat(_) => unreachable!("checked by schema"),
                    })
                    .collect();
                columns.push(Column::Numeric(values));
            }
            FeatureKind::Categorical => {
                let mut vocab: Vec<String> = rows
                    .iter()
                    .map(|r| match &r[f] {
                        FeatureValue::Cat(c) => c.clone(),
                        FeatureValue::Num(_) => unreachable!("checked by schema"),
                    })
                    .collect();
                vocab.sort_unstable();
                vocab.dedup();
                let ids = rows
                    .iter()
                    .map(|r| match &r[f] {
                        FeatureValue::Cat(c) => {
                            vocab.binary_search(c).expect("value in vocab") as u32
                        }
                        FeatureValue::Num(_) => unreachable!(),
                    })
                    .collect();
                columns.push(Column::Categorical(ids, vocab));
            }
        }
    }
    columns
}

struct Fit {
    test: SplitTest,
    left: f64,
    right: f64,
    gain: f64,
}

/// Weighted least-squares stump for one feature; `None` when the feature is
/// constant. Candidate order is deterministic and ties keep the first seen.
fn fit_feature(column: &Column, sorted: Option<&[usize]>, w: &[f64], z: &[f64]) -> Option<Fit> {
    let total_w: f64 = w.iter().sum();
    let total_wz: f64 = w.iter().zip(z).map(|(a, b)| a * b).sum();
    match column {
        Column::Numeric(xs) => {
            let order = sorted.expect("numeric features carry a sort order");
            let mut best: Option<Fit> = None;
            let mut left_w = 0.0;
            let mut left_wz = 0.0;
            for k in 0..order.len() - 1 {
                let i = order[k];
                left_w += w[i];
                left_wz += w[i] * z[i];
                let x_here = xs[i];
                let x_next = xs[order[k + 1]];
                if x_here == x_next {
                    continue;
                }
                let right_w = total_w - left_w;
                let right_wz = total_wz - left_wz;
                if left_w <= 0.0 || right_w <= 0.0 {
                    continue;
                }
                let gain = left_wz * left_wz / left_w + right_wz * right_wz / right_w;
                if best.as_ref().map(|b| gain > b.gain).unwrap_or(true) {
                    best = Some(Fit {
                        test: SplitTest::Threshold(x_here + (x_next - x_here) / 2.0),
                        left: left_wz / left_w,
                        right: right_wz / right_w,
                        gain,
                    });
                }
            }
            best
        }
        Column::Categorical(ids, vocab) => {
            let mut sum_w = vec![0.0; vocab.len()];
            let mut sum_wz = vec![0.0; vocab.len()];
            for (i, &id) in ids.iter().enumerate() {
                sum_w[id as usize] += w[i];
                sum_wz[id as usize] += w[i] * z[i];
            }
            let mut best: Option<Fit> = None;
            for (c, value) in vocab.iter().enumerate() {
                let left_w = sum_w[c];
                let left_wz = sum_wz[c];
                let right_w = total_w - left_w;
                let right_wz = total_wz - left_wz;
                if left_w <= 0.0 || right_w <= 0.0 {
                    continue;
                }
                let gain = left_wz * left_wz / left_w + right_wz * right_wz / right_w;
                if best.as_ref().map(|b| gain > b.gain).unwrap_or(true) {
                    best = Some(Fit {
                        test: SplitTest::Equals(value.clone()),
                        left: left_wz / left_w,
                        right: right_wz / right_w,
                        gain,
                    });
                }
            }
            best
        }
    }
}

/// Train a boosted stump classifier. Requires at least two classes with one
/// example each.
pub fn train(
    schema: FeatureSchema,
    rows: &[Vec<FeatureValue>],
    labels: &[String],
    config: BoostConfig,
) -> Result<BoostModel> {
    if rows.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch {
            a: rows.len(),
            b: labels.len(),
        });
    }
    for row in rows {
        schema.check_row(row)?;
    }

    let mut classes: Vec<String> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::SingleClass(classes.len()));
    }
    let class_ids: BTreeMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let y: Vec<usize> = labels.iter().map(|l| class_ids[l.as_str()]).collect();

    let n = rows.len();
    let j = classes.len();
    let jf = j as f64;
    let mut counts = vec![0usize; j];
    for &c in &y {
        counts[c] += 1;
    }
    let bias: Vec<f64> = counts.iter().map(|&c| (c as f64 / n as f64).ln()).collect();

    let columns = encode_columns(&schema, rows);
    let sort_orders: Vec<Option<Vec<usize>>> = columns
        .iter()
        .map(|col| match col {
            Column::Numeric(xs) => {
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));
                Some(order)
            }
            Column::Categorical(..) => None,
        })
        .collect();

    let mut scores: Vec<Vec<f64>> = (0..n).map(|_| bias.clone()).collect();
    let mut model_rounds = Vec::with_capacity(config.rounds);

    for _ in 0..config.rounds {
        let probs: Vec<Vec<f64>> = scores.iter().map(|s| softmax(s)).collect();
        let mut round_stumps = Vec::with_capacity(j);
        for class in 0..j {
            let mut w = Vec::with_capacity(n);
            let mut z = Vec::with_capacity(n);
            for (row_probs, &label) in probs.iter().zip(&y) {
                let p = row_probs[class];
                let target = if label == class { 1.0 } else { 0.0 };
                let weight = (p * (1.0 - p)).max(WEIGHT_FLOOR);
                w.push(weight);
                z.push(((target - p) / weight).clamp(-Z_MAX, Z_MAX));
            }
            // best stump across features, ties keeping the lowest feature index
            let mut best: Option<(usize, Fit)> = None;
            for (f, column) in columns.iter().enumerate() {
                if let Some(fit) = fit_feature(column, sort_orders[f].as_deref(), &w, &z) {
                    if best
                        .as_ref()
                        .map(|(_, b)| fit.gain > b.gain)
                        .unwrap_or(true)
                    {
                        best = Some((f, fit));
                    }
                }
            }
            let stump = match best {
                Some((f, fit)) => Stump {
                    feature: f,
                    test: fit.test,
                    left: fit.left,
                    right: fit.right,
                },
                None => {
                    // all features constant: emit the weighted mean response
                    let total_w: f64 = w.iter().sum();
                    let mean = w.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() / total_w;
                    Stump {
                        feature: 0,
                        test: SplitTest::Threshold(f64::MAX),
                        left: mean,
                        right: mean,
                    }
                }
            };
            round_stumps.push(stump);
        }

        for i in 0..n {
            let values: Vec<f64> = round_stumps.iter().map(|s| s.value(&rows[i])).collect();
            let mean = values.iter().sum::<f64>() / jf;
            for (class, v) in values.iter().enumerate() {
                scores[i][class] += config.shrinkage * (jf - 1.0) / jf * (v - mean);
            }
        }
        model_rounds.push(round_stumps);
    }

    Ok(BoostModel {
        version: 1,
        schema,
        labels: classes,
        bias,
        rounds: model_rounds,
        config,
    })
}
