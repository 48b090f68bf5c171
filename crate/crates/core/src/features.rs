//! Per-agent word statistics and the agent-classification feature vector:
//! elected verb, word-count scores, cosine-similarity scores, entity
//! category counts and an optional argument-label histogram.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::TaskRecord;
use crate::error::{Error, Result};
use crate::firstverb::ElectedVerb;
use crate::textproc::{self, Token};
use crate::vectors::VectorStore;

/// Per-agent lemma counts truncated to the `n` most frequent lemmas.
///
/// `wc` is the sum of the retained counts. The normalized word weight
/// [`AgentWordStats::q`] divides a lemma's count by the number of tracked
/// lemmas, matching the worked numbers this feature set is pinned to; the
/// weights over one agent therefore sum to `wc / |tracked lemmas|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentWordStats {
    pub version: u32,
    pub n: usize,
    agents: BTreeMap<String, AgentCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentCounts {
    pub lemmas: BTreeMap<String, u64>,
    /// Word-count aggregation over the retained lemmas.
    pub total: u64,
}

impl AgentWordStats {
    pub fn agents(&self) -> impl Iterator<Item = &str> {
        self.agents.keys().map(String::as_str)
    }

    pub fn counts(&self, agent: &str) -> Option<&AgentCounts> {
        self.agents.get(agent)
    }

    /// Word-count aggregation `WC` for an agent.
    pub fn wc(&self, agent: &str) -> Result<u64> {
        self.counts(agent)
            .map(|c| c.total)
            .ok_or_else(|| Error::UnknownAgent(agent.to_string()))
    }

    /// Normalized weight of a lemma for an agent: its count divided by the
    /// number of tracked lemmas, 0.0 for untracked lemmas.
    pub fn q(&self, lemma: &str, agent: &str) -> Result<f64> {
        let counts = self
            .counts(agent)
            .ok_or_else(|| Error::UnknownAgent(agent.to_string()))?;
        Ok(match counts.lemmas.get(lemma) {
            Some(&c) => c as f64 / counts.lemmas.len() as f64,
            None => 0.0,
        })
    }
}

/// Lowercased lemmas of the word tokens of `text` (punctuation dropped).
pub fn word_lemmas(text: &str) -> Vec<String> {
    let mut tokens = textproc::tokenize(text);
    textproc::apply_lemmas(&mut tokens);
    tokens
        .into_iter()
        .filter(Token::is_word)
        .map(|t| t.lemma)
        .collect()
}

/// Count lemmas per agent over the training records and keep the top `n` per
/// agent by count, ties broken lexicographically.
pub fn build_word_stats(records: &[TaskRecord], n: usize) -> Result<AgentWordStats> {
    let mut raw: BTreeMap<&str, BTreeMap<String, u64>> = BTreeMap::new();
    for record in records {
        let Some(agent) = record.agent.as_deref() else {
            continue;
        };
        let counts = raw.entry(agent).or_default();
        for lemma in word_lemmas(&record.text) {
            *counts.entry(lemma).or_default() += 1;
        }
    }
    if raw.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut agents = BTreeMap::new();
    for (agent, counts) in raw {
        let mut sorted: Vec<(String, u64)> = counts.into_iter().collect();
        sorted.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        sorted.truncate(n);
        let total = sorted.iter().map(|(_, c)| c).sum();
        agents.insert(
            agent.to_string(),
            AgentCounts {
                lemmas: sorted.into_iter().collect(),
                total,
            },
        );
    }
    Ok(AgentWordStats {
        version: 1,
        n,
        agents,
    })
}

/// Sum of the normalized word weights of the sentence lemmas for one agent.
pub fn wc_score(lemmas: &[String], agent: &str, stats: &AgentWordStats) -> Result<f64> {
    let mut score = 0.0;
    for lemma in lemmas {
        score += stats.q(lemma, agent)?;
    }
    Ok(score)
}

/// Per-agent cosine-similarity score: the tracked-lemma weights times the
/// cosine of each tracked lemma with each sentence word, summed. Returns the
/// argmax agent (ties to the lexicographically first) and all scores.
pub fn cs_feature(
    lemmas: &[String],
    stats: &AgentWordStats,
    vectors: &VectorStore,
) -> (String, BTreeMap<String, f64>) {
    let mut scores = BTreeMap::new();
    for agent in stats.agents() {
        let counts = stats.counts(agent).expect("agent iterated from stats");
        let mut score = 0.0;
        for tracked in counts.lemmas.keys() {
            let weight = stats.q(tracked, agent).expect("tracked lemma");
            for word in lemmas {
                score += weight * vectors.cosine(tracked, word);
            }
        }
        scores.insert(agent.to_string(), score);
    }
    let label = scores
        .iter()
        .fold(None::<(&String, f64)>, |best, (agent, &score)| match best {
            Some((_, bs)) if score <= bs => best,
            _ if best.is_none() || score > best.unwrap().1 => Some((agent, score)),
            _ => best,
        })
        .map(|(agent, _)| agent.clone())
        .unwrap_or_default();
    (label, scores)
}

/// Count level-1 entity categories per matched span (a multi-token span
/// counts once).
pub fn ner_feature(tokens: &[Token]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    let mut seen_starts = std::collections::BTreeSet::new();
    for token in tokens {
        if let Some(tag) = &token.ner {
            if seen_starts.insert(tag.span_start) {
                *counts.entry(tag.level1().to_string()).or_default() += 1;
            }
        }
    }
    counts
}

/// The assembled agent-classification features for one utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentFeatureVector {
    pub elected_verb_lemma: String,
    pub wc_scores: BTreeMap<String, f64>,
    pub cs_label: String,
    pub cs_scores: BTreeMap<String, f64>,
    pub ner_category_counts: BTreeMap<String, usize>,
    pub arg_label_histogram: Option<BTreeMap<String, usize>>,
}

/// Assemble the full feature vector from a processed utterance. `arg_labels`
/// are per-token argument labels from a generic argument tagger, when one is
/// available.
pub fn assemble_features(
    tokens: &[Token],
    elected: &ElectedVerb,
    stats: &AgentWordStats,
    vectors: &VectorStore,
    arg_labels: Option<&[String]>,
) -> Result<AgentFeatureVector> {
    let lemmas: Vec<String> = tokens
        .iter()
        .filter(|t| t.is_word())
        .map(|t| t.lemma.clone())
        .collect();
    let mut wc_scores = BTreeMap::new();
    for agent in stats.agents() {
        wc_scores.insert(agent.to_string(), wc_score(&lemmas, agent, stats)?);
    }
    let (cs_label, cs_scores) = cs_feature(&lemmas, stats, vectors);
    let arg_label_histogram = arg_labels.map(|labels| {
        let mut hist = BTreeMap::new();
        for label in labels {
            if label != crate::argext::OUTSIDE_LABEL {
                *hist.entry(label.clone()).or_default() += 1;
            }
        }
        hist
    });
    Ok(AgentFeatureVector {
        elected_verb_lemma: elected.lemma.clone(),
        wc_scores,
        cs_label,
        cs_scores,
        ner_category_counts: ner_feature(tokens),
        arg_label_histogram,
    })
}
