//! Bootstrap POS correction and the rule-based first-verb model.
//!
//! Short imperative utterances routinely get their initial verb mistagged as
//! a noun. The bootstrap pass retags the first token as `VB` when it is a
//! known present-tense verb and not a color word; the rule model is a
//! decision list induced over bootstrap features that outputs the corrected
//! first-token tag, from which the operative verb is elected.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::{is_verb_tag, sentence_ranges, PosLexicon, Token};

/// Feature vector for the first-token correction model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FvmFeatures {
    /// First-token tag from the base tagger.
    pub raw_tag: String,
    /// First-token tag after the bootstrap correction rules.
    pub bootstrap_tag: String,
    /// Utterance consists of a single word token.
    pub single_word: bool,
    /// Some entity span in the utterance covers more than one token.
    pub long_ner_span: bool,
}

/// How the operative verb was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElectedVerbSource {
    #[serde(rename = "corrected-verb")]
    CorrectedVerb,
    #[serde(rename = "head-node")]
    HeadNode,
    #[serde(rename = "first-token-pos-fallback")]
    FirstTokenPosFallback,
}

/// The operative verb of an utterance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectedVerb {
    pub index: usize,
    pub lemma: String,
    pub source: ElectedVerbSource,
}

/// Retag the first token as `VB` when it is in the present-tense-verb
/// sublexicon and not in the color list; otherwise leave its tag unchanged.
pub fn bootstrap_correct(tokens: &[Token], lexicon: &PosLexicon) -> Option<String> {
    let first = tokens.first()?;
    if lexicon.is_present_tense_verb(&first.surface) && !lexicon.is_color(&first.surface) {
        Some("VB".to_string())
    } else {
        Some(first.pos.clone())
    }
}

/// Compute the rule-model features for a tagged, entity-matched utterance.
pub fn extract_fvm_features(tokens: &[Token], lexicon: &PosLexicon) -> Result<FvmFeatures> {
    if tokens.is_empty() {
        return Err(Error::EmptyUtterance);
    }
    let bootstrap_tag = bootstrap_correct(tokens, lexicon).unwrap();
    Ok(FvmFeatures {
        raw_tag: tokens[0].pos.clone(),
        bootstrap_tag,
        single_word: tokens.iter().filter(|t| t.is_word()).count() == 1,
        long_ner_span: tokens
            .iter()
            .any(|t| t.ner.as_ref().map(|n| n.span_len() > 1).unwrap_or(false)),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Condition {
    Always,
    RawTag(String),
    BootstrapTag(String),
    SingleWord(bool),
    LongNerSpan(bool),
}

impl Condition {
    fn matches(&self, f: &FvmFeatures) -> bool {
        match self {
            Condition::Always => true,
            Condition::RawTag(t) => f.raw_tag == *t,
            Condition::BootstrapTag(t) => f.bootstrap_tag == *t,
            Condition::SingleWord(b) => f.single_word == *b,
            Condition::LongNerSpan(b) => f.long_ner_span == *b,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Always => write!(out, "always"),
            Condition::RawTag(t) => write!(out, "raw_tag=={t}"),
            Condition::BootstrapTag(t) => write!(out, "bootstrap_tag=={t}"),
            Condition::SingleWord(b) => write!(out, "single_word=={b}"),
            Condition::LongNerSpan(b) => write!(out, "long_ner_span=={b}"),
        }
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "always" {
            return Ok(Condition::Always);
        }
        let (field, value) = s
            .split_once("==")
            .ok_or_else(|| Error::Invalid(format!("bad rule condition `{s}`")))?;
        match field {
            "raw_tag" => Ok(Condition::RawTag(value.to_string())),
            "bootstrap_tag" => Ok(Condition::BootstrapTag(value.to_string())),
            "single_word" => Ok(Condition::SingleWord(value == "true")),
            "long_ner_span" => Ok(Condition::LongNerSpan(value == "true")),
            other => Err(Error::Invalid(format!(
                "bad rule condition field `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Action {
    /// Emit a fixed tag.
    Tag(String),
    /// Emit the bootstrap-corrected tag.
    CopyBootstrap,
    /// Emit the base tagger's tag.
    CopyRaw,
}

impl Action {
    fn apply(&self, f: &FvmFeatures) -> String {
        match self {
            Action::Tag(t) => t.clone(),
            Action::CopyBootstrap => f.bootstrap_tag.clone(),
            Action::CopyRaw => f.raw_tag.clone(),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Tag(t) => write!(out, "tag:{t}"),
            Action::CopyBootstrap => write!(out, "copy:bootstrap"),
            Action::CopyRaw => write!(out, "copy:raw"),
        }
    }
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "copy:bootstrap" => Ok(Action::CopyBootstrap),
            "copy:raw" => Ok(Action::CopyRaw),
            _ => match s.strip_prefix("tag:") {
                Some(tag) if !tag.is_empty() => Ok(Action::Tag(tag.to_string())),
                _ => Err(Error::Invalid(format!("bad rule action `{s}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub condition: Condition,
    pub action: Action,
}

/// Ordered decision list over [`FvmFeatures`] with a trailing default tag, so
/// evaluation is total: the first matching rule fires, else the default.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "RuleModelRepr", try_from = "RuleModelRepr")]
pub struct RuleModel {
    pub rules: Vec<Rule>,
    pub default_tag: String,
}

#[derive(Serialize, Deserialize)]
struct RuleRepr {
    condition: String,
    action: String,
}

#[derive(Serialize, Deserialize)]
struct RuleModelRepr {
    version: u32,
    rules: Vec<RuleRepr>,
    default_tag: String,
}

impl From<RuleModel> for RuleModelRepr {
    fn from(model: RuleModel) -> Self {
        RuleModelRepr {
            version: 1,
            rules: model
                .rules
                .iter()
                .map(|r| RuleRepr {
                    condition: r.condition.to_string(),
                    action: r.action.to_string(),
                })
                .collect(),
            default_tag: model.default_tag,
        }
    }
}

impl TryFrom<RuleModelRepr> for RuleModel {
    type Error = Error;

    fn try_from(repr: RuleModelRepr) -> Result<Self> {
        if repr.version != 1 {
            return Err(Error::Invalid(format!(
                "unsupported rule model version {}",
                repr.version
            )));
        }
        let rules = repr
            .rules
            .iter()
            .map(|r| {
                Ok(Rule {
                    condition: r.condition.parse()?,
                    action: r.action.parse()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RuleModel {
            rules,
            default_tag: repr.default_tag,
        })
    }
}

impl RuleModel {
    /// Corrected first-token tag for a feature vector.
    pub fn predict(&self, features: &FvmFeatures) -> String {
        for rule in &self.rules {
            if rule.condition.matches(features) {
                return rule.action.apply(features);
            }
        }
        self.default_tag.clone()
    }
}

fn majority_tag(tags: &[&str]) -> String {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for tag in tags {
        *counts.entry(tag).or_default() += 1;
    }
    counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(tag, _)| tag.to_string())
        .unwrap_or_default()
}

/// Induce a decision list by greedy sequential covering: each step picks the
/// single-feature condition and action with the most correct predictions on
/// the remaining examples (equivalently the highest precision-times-coverage
/// score), breaking ties by precision, coverage, then condition and action
/// names. The default rule emits the majority tag.
pub fn train_rule_model(features: &[FvmFeatures], gold_tags: &[String]) -> Result<RuleModel> {
    if features.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if features.len() != gold_tags.len() {
        return Err(Error::LengthMismatch {
            a: features.len(),
            b: gold_tags.len(),
        });
    }

    let gold_refs: Vec<&str> = gold_tags.iter().map(String::as_str).collect();
    let default_tag = majority_tag(&gold_refs);
    let distinct: std::collections::BTreeSet<&str> = gold_refs.iter().copied().collect();
    if distinct.len() == 1 {
        return Ok(RuleModel {
            rules: Vec::new(),
            default_tag,
        });
    }

    let mut conditions: Vec<Condition> = vec![Condition::Always];
    let mut raw_tags: Vec<&str> = features.iter().map(|f| f.raw_tag.as_str()).collect();
    raw_tags.sort_unstable();
    raw_tags.dedup();
    conditions.extend(raw_tags.iter().map(|t| Condition::RawTag(t.to_string())));
    let mut boot_tags: Vec<&str> = features.iter().map(|f| f.bootstrap_tag.as_str()).collect();
    boot_tags.sort_unstable();
    boot_tags.dedup();
    conditions.extend(
        boot_tags
            .iter()
            .map(|t| Condition::BootstrapTag(t.to_string())),
    );
    conditions.push(Condition::SingleWord(false));
    conditions.push(Condition::SingleWord(true));
    conditions.push(Condition::LongNerSpan(false));
    conditions.push(Condition::LongNerSpan(true));

    let mut actions: Vec<Action> = vec![Action::CopyBootstrap, Action::CopyRaw];
    actions.extend(distinct.iter().map(|t| Action::Tag(t.to_string())));

    let mut remaining: Vec<usize> = (0..features.len()).collect();
    let mut rules = Vec::new();
    while !remaining.is_empty() {
        // best = (correct, covered, condition, action); higher correct wins,
        // then higher precision, then higher coverage, then names
        let mut best: Option<(usize, usize, &Condition, &Action)> = None;
        for condition in &conditions {
            let covered: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&i| condition.matches(&features[i]))
                .collect();
            if covered.is_empty() {
                continue;
            }
            for action in &actions {
                let correct = covered
                    .iter()
                    .filter(|&&i| action.apply(&features[i]) == gold_tags[i])
                    .count();
                let better = match &best {
                    None => true,
                    Some((bc, bcov, bcond, bact)) => {
                        let by_score = correct.cmp(bc);
                        // precision comparison via cross-multiplication
                        let by_precision = (correct * bcov).cmp(&(bc * covered.len()));
                        let by_coverage = covered.len().cmp(bcov);
                        by_score
                            .then(by_precision)
                            .then(by_coverage)
                            .then_with(|| bcond.to_string().cmp(&condition.to_string()))
                            .then_with(|| bact.to_string().cmp(&action.to_string()))
                            .is_gt()
                    }
                };
                if better {
                    best = Some((correct, covered.len(), condition, action));
                }
            }
        }
        let (_, _, condition, action) = best.expect("at least one condition covers something");
        let condition = condition.clone();
        let action = action.clone();
        remaining.retain(|&i| !condition.matches(&features[i]));
        rules.push(Rule { condition, action });
    }

    Ok(RuleModel { rules, default_tag })
}

/// Replace the first token's tag with the rule-model output and elect the
/// operative verb: the first verb-tagged token of the first sentence, with a
/// first-token fallback when the utterance has no verb. A verb found past
/// the first token stands in for the dependency head.
pub fn apply_first_verb(
    mut tokens: Vec<Token>,
    model: &RuleModel,
    lexicon: &PosLexicon,
) -> Result<(Vec<Token>, ElectedVerb)> {
    let features = extract_fvm_features(&tokens, lexicon)?;
    tokens[0].pos = model.predict(&features);

    let first_sentence = sentence_ranges(&tokens)
        .into_iter()
        .next()
        .unwrap_or(0..tokens.len());
    let elected = tokens[first_sentence]
        .iter()
        .find(|t| is_verb_tag(&t.pos))
        .map(|t| ElectedVerb {
            index: t.index,
            lemma: t.lemma.clone(),
            source: if t.index == 0 {
                ElectedVerbSource::CorrectedVerb
            } else {
                ElectedVerbSource::HeadNode
            },
        })
        .unwrap_or_else(|| ElectedVerb {
            index: 0,
            lemma: tokens[0].lemma.clone(),
            source: ElectedVerbSource::FirstTokenPosFallback,
        });
    Ok((tokens, elected))
}
