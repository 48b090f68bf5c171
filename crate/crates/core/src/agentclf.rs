//! Agent classification: boosted-stump model over the assembled feature
//! vectors, the majority baseline, and pairwise chi-square significance.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::boost::{self, BoostConfig, BoostModel, FeatureDef, FeatureSchema, FeatureValue};
use crate::error::{Error, Result};
use crate::features::AgentFeatureVector;

/// Which feature groups the agent model consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureToggles {
    pub elected_verb: bool,
    pub word_counts: bool,
    pub cosine: bool,
    pub ner: bool,
    pub arg_histogram: bool,
}

impl Default for FeatureToggles {
    fn default() -> Self {
        FeatureToggles {
            elected_verb: true,
            word_counts: true,
            cosine: true,
            ner: true,
            arg_histogram: true,
        }
    }
}

/// Trained agent classifier with its frozen feature schema and label set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentModel {
    pub version: u32,
    pub model: BoostModel,
    pub toggles: FeatureToggles,
}

impl AgentModel {
    pub fn labels(&self) -> &[String] {
        &self.model.labels
    }

    /// Predicted agent and per-class probabilities for one feature vector.
    pub fn predict(&self, features: &AgentFeatureVector) -> Result<(String, Vec<f64>)> {
        let row = vector_to_row(&self.model.schema, features);
        self.model.predict(&row)
    }
}

/// Derive the feature schema from the training vectors: categorical elected
/// verb and cosine label, one numeric word-count and cosine score per agent,
/// one numeric count per observed entity category and argument role.
fn derive_schema(vectors: &[AgentFeatureVector], toggles: FeatureToggles) -> FeatureSchema {
    let mut features: Vec<FeatureDef> = Vec::new();
    if toggles.elected_verb {
        features.push(FeatureSchema::categorical("verb"));
    }
    if toggles.cosine {
        features.push(FeatureSchema::categorical("cs_label"));
    }
    let mut agents: BTreeSet<&str> = BTreeSet::new();
    let mut ner_cats: BTreeSet<&str> = BTreeSet::new();
    let mut roles: BTreeSet<&str> = BTreeSet::new();
    for v in vectors {
        agents.extend(v.wc_scores.keys().map(String::as_str));
        agents.extend(v.cs_scores.keys().map(String::as_str));
        ner_cats.extend(v.ner_category_counts.keys().map(String::as_str));
        if let Some(hist) = &v.arg_label_histogram {
            roles.extend(hist.keys().map(String::as_str));
        }
    }
    if toggles.word_counts {
        for agent in &agents {
            features.push(FeatureSchema::numeric(&format!("wc:{agent}")));
        }
    }
    if toggles.cosine {
        for agent in &agents {
            features.push(FeatureSchema::numeric(&format!("cs:{agent}")));
        }
    }
    if toggles.ner {
        for cat in &ner_cats {
            features.push(FeatureSchema::numeric(&format!("ner:{cat}")));
        }
    }
    if toggles.arg_histogram {
        for role in &roles {
            features.push(FeatureSchema::numeric(&format!("arg:{role}")));
        }
    }
    FeatureSchema { features }
}

/// Project a feature vector onto a schema. Features the vector does not
/// carry contribute 0.
fn vector_to_row(schema: &FeatureSchema, v: &AgentFeatureVector) -> Vec<FeatureValue> {
    schema
        .features
        .iter()
        .map(|def| match def.name.as_str() {
            "verb" => FeatureValue::Cat(v.elected_verb_lemma.clone()),
            "cs_label" => FeatureValue::Cat(v.cs_label.clone()),
            name => {
                let value = if let Some(agent) = name.strip_prefix("wc:") {
                    v.wc_scores.get(agent).copied().unwrap_or(0.0)
                } else if let Some(agent) = name.strip_prefix("cs:") {
                    v.cs_scores.get(agent).copied().unwrap_or(0.0)
                } else if let Some(cat) = name.strip_prefix("ner:") {
                    v.ner_category_counts.get(cat).copied().unwrap_or(0) as f64
                } else if let Some(role) = name.strip_prefix("arg:") {
                    v.arg_label_histogram
                        .as_ref()
                        .and_then(|h| h.get(role))
                        .copied()
                        .unwrap_or(0) as f64
                } else {
                    0.0
                };
                FeatureValue::Num(value)
            }
        })
        .collect()
}

/// Train the boosted agent classifier. Requires at least two agent classes.
pub fn train_agent_model(
    vectors: &[AgentFeatureVector],
    labels: &[String],
    config: BoostConfig,
    toggles: FeatureToggles,
) -> Result<AgentModel> {
    if vectors.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let schema = derive_schema(vectors, toggles);
    let rows: Vec<Vec<FeatureValue>> = vectors.iter().map(|v| vector_to_row(&schema, v)).collect();
    let model = boost::train(schema, &rows, labels, config)?;
    Ok(AgentModel {
        version: 1,
        model,
        toggles,
    })
}

/// Constant classifier predicting the modal training label, ties to the
/// lexicographically first. Implemented as a prior-only boosted model.
pub fn majority_baseline(labels: &[String]) -> Result<AgentModel> {
    if labels.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut classes: Vec<String> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for label in labels {
        *counts.entry(label).or_default() += 1;
    }
    let bias: Vec<f64> = classes
        .iter()
        .map(|c| (counts[c.as_str()] as f64 / labels.len() as f64).ln())
        .collect();
    Ok(AgentModel {
        version: 1,
        model: BoostModel {
            version: 1,
            schema: FeatureSchema::default(),
            labels: classes,
            bias,
            rounds: Vec::new(),
            config: BoostConfig {
                rounds: 0,
                shrinkage: 0.0,
            },
        },
        toggles: FeatureToggles::default(),
    })
}

/// Chi-square test with Yates continuity correction on the 2x2 table of
/// correct/incorrect counts per classifier, with the p-value from the
/// one-degree-of-freedom chi-square distribution. Identical predictions give
/// a statistic of 0 and p = 1.
pub fn significance_test(
    predictions_a: &[String],
    predictions_b: &[String],
    gold: &[String],
) -> Result<(f64, f64)> {
    if predictions_a.len() != predictions_b.len() || predictions_a.len() != gold.len() {
        return Err(Error::LengthMismatch {
            a: predictions_a.len(),
            b: predictions_b.len().min(gold.len()),
        });
    }
    let correct = |preds: &[String]| preds.iter().zip(gold).filter(|(p, g)| p == g).count() as f64;
    let n = gold.len() as f64;
    let a = correct(predictions_a); // A correct
    let b = n - a; // A incorrect
    let c = correct(predictions_b); // B correct
    let d = n - c; // B incorrect

    let total = 2.0 * n;
    let row_a = a + b;
    let row_b = c + d;
    let col_correct = a + c;
    let col_incorrect = b + d;
    let denom = row_a * row_b * col_correct * col_incorrect;
    if denom == 0.0 {
        return Ok((0.0, 1.0));
    }
    let diff = (a * d - b * c).abs() - total / 2.0;
    let diff = diff.max(0.0);
    let statistic = total * diff * diff / denom;
    Ok((statistic, chi_square_p_value(statistic)))
}

/// Upper-tail probability of the chi-square distribution with one degree of
/// freedom: erfc(sqrt(x / 2)).
fn chi_square_p_value(statistic: f64) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    erfc((statistic / 2.0).sqrt()).clamp(0.0, 1.0)
}

// Rational approximation of the complementary error function with absolute
// error below 1.2e-7 (Numerical Recipes, erfcc).
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + z / 2.0);
    let tau = t
        * (-z * z - 1.26551223
            + t * (1.00002368
                + t * (0.37409196
                    + t * (0.09678418
                        + t * (-0.18628806
                            + t * (0.27886807
                                + t * (-1.13520398
                                    + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277)))))))))
            .exp();
    if x >= 0.0 {
        tau
    } else {
        2.0 - tau
    }
}
