//! Per-agent token-level argument classification and span assembly.
//!
//! Tokens inside annotated spans carry their role as the training label and
//! everything else is `O`; prediction runs one boosted-stump classifier per
//! agent (with a generic all-agent fallback) and contiguous same-role labels
//! are concatenated back into spans.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::boost::{self, BoostConfig, BoostModel, FeatureDef, FeatureSchema, FeatureValue};
use crate::corpus::{stratified_kfold, ArgumentSpan, TaskRecord};
use crate::error::{Error, Result};
use crate::eval::{build_report, EvalReport};
use crate::firstverb::{apply_first_verb, ElectedVerb, RuleModel};
use crate::textproc::{is_noun_tag, GazetteerMatcher, PosLexicon, Token};

/// Label for tokens outside every argument span.
pub const OUTSIDE_LABEL: &str = "O";

const BOS: &str = "<s>";
const EOS: &str = "</s>";

/// Features of one token for the argument classifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenFeatureRow {
    pub lemma: String,
    pub pos: String,
    /// Level-1 entity category, when the token is inside a match.
    pub ner_category: Option<String>,
    /// Signed offset from the elected-verb token.
    pub relative_position: i64,
    pub is_elected_verb: bool,
    pub prev_lemma: String,
    pub next_lemma: String,
    /// Relation to the elected verb from the positional head heuristic.
    pub head_dep: String,
    /// Role label from the pluggable semantic-role provider, when available.
    pub srl: Option<String>,
}

/// Pluggable semantic-role labeler. Returns one label per token, or `None`
/// when no labeling is available for the utterance.
pub trait SrlProvider {
    fn label(&self, tokens: &[Token], elected: &ElectedVerb) -> Option<Vec<String>>;
}

/// Positional heuristic provider: roles derived from the head-dep relations.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicSrl;

impl SrlProvider for HeuristicSrl {
    fn label(&self, tokens: &[Token], elected: &ElectedVerb) -> Option<Vec<String>> {
        let labels = head_dep_relations(tokens, elected.index)
            .into_iter()
            .map(|rel| match rel.as_str() {
                "root" => "rel".to_string(),
                "dobj" => "arg1".to_string(),
                "pobj" => "arg2".to_string(),
                "prep" => "argm".to_string(),
                _ => "o".to_string(),
            })
            .collect();
        Some(labels)
    }
}

/// Provider used when semantic-role labeling is unavailable.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoSrl;

impl SrlProvider for NoSrl {
    fn label(&self, _tokens: &[Token], _elected: &ElectedVerb) -> Option<Vec<String>> {
        None
    }
}

/// Heuristic head-dependency relations: the elected token is the root, the
/// first noun run after it is the direct object, `IN` tokens are
/// prepositions, noun runs right after a preposition are its objects, and
/// everything else is a modifier.
fn head_dep_relations(tokens: &[Token], verb_idx: usize) -> Vec<String> {
    let mut rel = vec![String::new(); tokens.len()];
    if tokens.is_empty() {
        return rel;
    }
    rel[verb_idx] = "root".to_string();
    for (i, tok) in tokens.iter().enumerate() {
        if rel[i].is_empty() && tok.pos == "IN" {
            rel[i] = "prep".to_string();
        }
    }
    // noun runs immediately following a preposition
    let mut i = 0;
    while i < tokens.len() {
        if rel[i].is_empty() && is_noun_tag(&tokens[i].pos) && i > 0 && rel[i - 1] == "prep" {
            while i < tokens.len() && rel[i].is_empty() && is_noun_tag(&tokens[i].pos) {
                rel[i] = "pobj".to_string();
                i += 1;
            }
        } else {
            i += 1;
        }
    }
    // first unlabeled noun run after the verb
    let mut i = verb_idx + 1;
    while i < tokens.len() {
        if rel[i].is_empty() && is_noun_tag(&tokens[i].pos) {
            while i < tokens.len() && rel[i].is_empty() && is_noun_tag(&tokens[i].pos) {
                rel[i] = "dobj".to_string();
                i += 1;
            }
            break;
        }
        i += 1;
    }
    for r in rel.iter_mut() {
        if r.is_empty() {
            *r = "mod".to_string();
        }
    }
    rel
}

/// Build one feature row per token for a processed utterance.
pub fn build_token_rows(
    tokens: &[Token],
    elected: &ElectedVerb,
    srl: &dyn SrlProvider,
) -> Vec<TokenFeatureRow> {
    if tokens.is_empty() {
        return Vec::new();
    }
    let relations = head_dep_relations(tokens, elected.index);
    let srl_labels = srl.label(tokens, elected);
    tokens
        .iter()
        .enumerate()
        .map(|(i, tok)| TokenFeatureRow {
            lemma: tok.lemma.clone(),
            pos: tok.pos.clone(),
            ner_category: tok.ner.as_ref().map(|n| n.level1().to_string()),
            relative_position: i as i64 - elected.index as i64,
            is_elected_verb: i == elected.index,
            prev_lemma: if i == 0 {
                BOS.to_string()
            } else {
                tokens[i - 1].lemma.clone()
            },
            next_lemma: if i + 1 == tokens.len() {
                EOS.to_string()
            } else {
                tokens[i + 1].lemma.clone()
            },
            head_dep: relations[i].clone(),
            srl: srl_labels.as_ref().map(|l| l[i].clone()),
        })
        .collect()
}

/// Which token features the argument classifier consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgFeatureToggles {
    pub lemma: bool,
    pub pos: bool,
    pub ner: bool,
    pub position: bool,
    pub context: bool,
    pub head_dep: bool,
    pub srl: bool,
}

impl Default for ArgFeatureToggles {
    fn default() -> Self {
        ArgFeatureToggles {
            lemma: true,
            pos: true,
            ner: true,
            position: true,
            context: true,
            head_dep: true,
            srl: true,
        }
    }
}

fn arg_schema(toggles: ArgFeatureToggles) -> FeatureSchema {
    let mut features: Vec<FeatureDef> = Vec::new();
    if toggles.lemma {
        features.push(FeatureSchema::categorical("lemma"));
    }
    if toggles.pos {
        features.push(FeatureSchema::categorical("pos"));
    }
    if toggles.ner {
        features.push(FeatureSchema::categorical("ner"));
    }
    if toggles.position {
        features.push(FeatureSchema::numeric("rel_pos"));
        features.push(FeatureSchema::numeric("is_verb"));
    }
    if toggles.context {
        features.push(FeatureSchema::categorical("prev"));
        features.push(FeatureSchema::categorical("next"));
    }
    if toggles.head_dep {
        features.push(FeatureSchema::categorical("head_dep"));
    }
    if toggles.srl {
        features.push(FeatureSchema::categorical("srl"));
    }
    FeatureSchema { features }
}

/// Encode a token row under the toggled feature schema.
pub fn row_values(row: &TokenFeatureRow, toggles: ArgFeatureToggles) -> Vec<FeatureValue> {
    let mut values = Vec::new();
    if toggles.lemma {
        values.push(FeatureValue::Cat(row.lemma.clone()));
    }
    if toggles.pos {
        values.push(FeatureValue::Cat(row.pos.clone()));
    }
    if toggles.ner {
        values.push(FeatureValue::Cat(
            row.ner_category.clone().unwrap_or_else(|| "<none>".into()),
        ));
    }
    if toggles.position {
        values.push(FeatureValue::Num(row.relative_position as f64));
        values.push(FeatureValue::Num(f64::from(row.is_elected_verb)));
    }
    if toggles.context {
        values.push(FeatureValue::Cat(row.prev_lemma.clone()));
        values.push(FeatureValue::Cat(row.next_lemma.clone()));
    }
    if toggles.head_dep {
        values.push(FeatureValue::Cat(row.head_dep.clone()));
    }
    if toggles.srl {
        values.push(FeatureValue::Cat(
            row.srl.clone().unwrap_or_else(|| "<none>".into()),
        ));
    }
    values
}

/// Per-token role labels derived from argument spans: inside-span tokens get
/// the span role, everything else `O`.
pub fn token_labels_from_spans(token_count: usize, args: &[ArgumentSpan]) -> Vec<String> {
    let mut labels = vec![OUTSIDE_LABEL.to_string(); token_count];
    for span in args {
        for label in labels.iter_mut().take(span.end).skip(span.start) {
            *label = span.role.clone();
        }
    }
    labels
}

/// Merge maximal runs of identical non-`O` labels into spans; `O` breaks
/// runs, and adjacent same-role spans merge.
pub fn concat_spans(labels: &[String]) -> Vec<ArgumentSpan> {
    let mut spans = Vec::new();
    let mut i = 0;
    while i < labels.len() {
        if labels[i] == OUTSIDE_LABEL {
            i += 1;
            continue;
        }
        let start = i;
        let role = &labels[i];
        while i < labels.len() && &labels[i] == role {
            i += 1;
        }
        spans.push(ArgumentSpan {
            start,
            end: i,
            role: role.clone(),
        });
    }
    spans
}

/// Per-agent argument classifiers plus the generic all-agent model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArgModel {
    pub version: u32,
    pub per_agent: BTreeMap<String, BoostModel>,
    pub generic: BoostModel,
    pub toggles: ArgFeatureToggles,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

/// Immutable context shared by argument training and evaluation.
pub struct ArgContext<'a> {
    pub lexicon: &'a PosLexicon,
    pub matcher: &'a GazetteerMatcher,
    pub rule_model: &'a RuleModel,
    pub srl: &'a dyn SrlProvider,
}

impl ArgContext<'_> {
    /// Token rows and gold labels for one record.
    fn prepare(&self, record: &TaskRecord) -> Result<(Vec<TokenFeatureRow>, Vec<String>)> {
        let tokens = crate::textproc::process(&record.text, self.lexicon, self.matcher);
        let (tokens, elected) = apply_first_verb(tokens, self.rule_model, self.lexicon)?;
        let rows = build_token_rows(&tokens, &elected, self.srl);
        let labels = token_labels_from_spans(tokens.len(), &record.args);
        Ok((rows, labels))
    }
}

fn train_token_model(
    rows: &[TokenFeatureRow],
    labels: &[String],
    config: BoostConfig,
    toggles: ArgFeatureToggles,
) -> Result<BoostModel> {
    let schema = arg_schema(toggles);
    let mut distinct: Vec<&str> = labels.iter().map(String::as_str).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() == 1 {
        return Ok(BoostModel::constant(schema, distinct[0]));
    }
    let values: Vec<Vec<FeatureValue>> = rows.iter().map(|r| row_values(r, toggles)).collect();
    boost::train(schema, &values, labels, config)
}

/// Train one classifier per agent that carries argument annotations, plus a
/// generic model over the union. Agents without annotations are skipped with
/// a warning; a corpus without any annotation is an error naming them.
pub fn train_arg_models(
    records: &[TaskRecord],
    ctx: &ArgContext,
    config: BoostConfig,
    toggles: ArgFeatureToggles,
) -> Result<ArgModel> {
    let mut by_agent: BTreeMap<&str, Vec<&TaskRecord>> = BTreeMap::new();
    for record in records {
        if let Some(agent) = record.agent.as_deref() {
            by_agent.entry(agent).or_default().push(record);
        }
    }
    let mut warnings = Vec::new();
    let mut annotated: BTreeMap<&str, Vec<&TaskRecord>> = BTreeMap::new();
    let mut skipped = Vec::new();
    for (agent, agent_records) in by_agent {
        if agent_records.iter().any(|r| !r.args.is_empty()) {
            annotated.insert(agent, agent_records);
        } else {
            warnings.push(format!(
                "agent `{agent}` has no argument annotations; skipped"
            ));
            skipped.push(agent.to_string());
        }
    }
    if annotated.is_empty() {
        return Err(Error::NoArgumentAnnotations(skipped.join(", ")));
    }

    let mut per_agent = BTreeMap::new();
    let mut all_rows: Vec<TokenFeatureRow> = Vec::new();
    let mut all_labels: Vec<String> = Vec::new();
    for (agent, agent_records) in annotated {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for record in agent_records {
            let (r, l) = ctx.prepare(record)?;
            rows.extend(r);
            labels.extend(l);
        }
        all_rows.extend(rows.iter().cloned());
        all_labels.extend(labels.iter().cloned());
        per_agent.insert(
            agent.to_string(),
            train_token_model(&rows, &labels, config, toggles)?,
        );
    }
    let generic = train_token_model(&all_rows, &all_labels, config, toggles)?;
    Ok(ArgModel {
        version: 1,
        per_agent,
        generic,
        toggles,
        warnings,
    })
}

/// Per-token labels for an utterance plus whether the generic model filled
/// in for an agent without its own classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedArguments {
    pub labels: Vec<String>,
    pub used_generic: bool,
}

/// Label every token with a role from the agent's classifier, falling back
/// to the generic model for unseen agents.
pub fn tag_arguments(
    model: &ArgModel,
    agent: &str,
    rows: &[TokenFeatureRow],
) -> Result<TaggedArguments> {
    let (classifier, used_generic) = match model.per_agent.get(agent) {
        Some(m) => (m, false),
        None => (&model.generic, true),
    };
    let labels = rows
        .iter()
        .map(|row| {
            classifier
                .predict(&row_values(row, model.toggles))
                .map(|(label, _)| label)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TaggedArguments {
        labels,
        used_generic,
    })
}

/// Token-level report plus exact-span precision/recall/F for one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentArgReport {
    pub token_report: EvalReport,
    pub span_gold: u64,
    pub span_predicted: u64,
    pub span_matched: u64,
    pub span_precision: f64,
    pub span_recall: f64,
    pub span_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ArgEvalReport {
    pub per_agent: BTreeMap<String, AgentArgReport>,
}

/// Aligned (gold, predicted) label sequences, one pair per utterance.
pub type LabelPairs = Vec<(Vec<String>, Vec<String>)>;

/// Score aligned per-utterance gold/predicted token labels for one agent:
/// token-level metrics plus exact-match span counts.
pub fn score_arg_predictions(items: &[(Vec<String>, Vec<String>)]) -> AgentArgReport {
    let mut gold_flat = Vec::new();
    let mut pred_flat = Vec::new();
    let mut span_gold = 0u64;
    let mut span_predicted = 0u64;
    let mut span_matched = 0u64;
    for (gold, pred) in items {
        gold_flat.extend(gold.iter().cloned());
        pred_flat.extend(pred.iter().cloned());
        let gold_spans = concat_spans(gold);
        let pred_spans = concat_spans(pred);
        span_gold += gold_spans.len() as u64;
        span_predicted += pred_spans.len() as u64;
        span_matched += pred_spans.iter().filter(|p| gold_spans.contains(p)).count() as u64;
    }
    let precision = if span_predicted == 0 {
        0.0
    } else {
        span_matched as f64 / span_predicted as f64
    };
    let recall = if span_gold == 0 {
        0.0
    } else {
        span_matched as f64 / span_gold as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    AgentArgReport {
        token_report: build_report(&gold_flat, &pred_flat, None),
        span_gold,
        span_predicted,
        span_matched,
        span_precision: precision,
        span_recall: recall,
        span_f1: f1,
    }
}

/// Cross-validated argument evaluation: stratified folds over the records of
/// annotated agents, argument models retrained per fold, token- and
/// span-level scores aggregated per agent.
pub fn evaluate_args(
    records: &[TaskRecord],
    ctx: &ArgContext,
    k: usize,
    seed: u64,
    config: BoostConfig,
    toggles: ArgFeatureToggles,
) -> Result<ArgEvalReport> {
    let annotated_agents: std::collections::BTreeSet<&str> = records
        .iter()
        .filter(|r| !r.args.is_empty())
        .filter_map(|r| r.agent.as_deref())
        .collect();
    if annotated_agents.is_empty() {
        return Err(Error::NoArgumentAnnotations(String::new()));
    }
    let eligible: Vec<&TaskRecord> = records
        .iter()
        .filter(|r| {
            r.agent
                .as_deref()
                .map(|a| annotated_agents.contains(a))
                .unwrap_or(false)
        })
        .collect();
    let owned: Vec<TaskRecord> = eligible.iter().map(|r| (*r).clone()).collect();
    let folds = stratified_kfold(&owned, k, seed)?;

    let mut per_agent: BTreeMap<String, LabelPairs> = BTreeMap::new();
    for (train_idx, test_idx) in folds {
        let train: Vec<TaskRecord> = train_idx.iter().map(|&i| owned[i].clone()).collect();
        let model = train_arg_models(&train, ctx, config, toggles)?;
        for &i in &test_idx {
            let record = &owned[i];
            let agent = record
                .agent
                .as_deref()
                .expect("eligible records are labeled");
            let (rows, gold) = ctx.prepare(record)?;
            let tagged = tag_arguments(&model, agent, &rows)?;
            per_agent
                .entry(agent.to_string())
                .or_default()
                .push((gold, tagged.labels));
        }
    }

    let mut report = ArgEvalReport::default();
    for (agent, items) in per_agent {
        report
            .per_agent
            .insert(agent, score_arg_predictions(&items));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::firstverb::ElectedVerbSource;
    use crate::textproc::{apply_lemmas, pos_tag, tokenize};

    fn lexicon() -> PosLexicon {
        let mut lex = PosLexicon::new();
        lex.insert("call", "VB", vec![], true);
        lex.insert("mom", "NN", vec![], false);
        lex.insert("for", "IN", vec![], false);
        lex.insert("sweater", "NN", vec![], false);
        lex.insert("john", "NN", vec![], false);
        lex
    }

    fn prepared(text: &str) -> Vec<Token> {
        let mut toks = tokenize(text);
        apply_lemmas(&mut toks);
        pos_tag(&mut toks, &lexicon());
        toks
    }

    fn elected_at(index: usize, lemma: &str) -> ElectedVerb {
        ElectedVerb {
            index,
            lemma: lemma.into(),
            source: ElectedVerbSource::CorrectedVerb,
        }
    }

    #[test]
    fn call_mom_rows() {
        let toks = prepared("call mom");
        let rows = build_token_rows(&toks, &elected_at(0, "call"), &HeuristicSrl);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].head_dep, "root");
        assert!(rows[0].is_elected_verb);
        assert_eq!(rows[0].relative_position, 0);
        assert_eq!(rows[1].head_dep, "dobj");
        assert_eq!(rows[1].relative_position, 1);
        assert_eq!(rows[1].prev_lemma, "call");
        assert_eq!(rows[1].next_lemma, "</s>");
        assert_eq!(rows[1].srl.as_deref(), Some("arg1"));
    }

    #[test]
    fn prepositional_objects_get_pobj() {
        let toks = prepared("call sweater for john");
        let rows = build_token_rows(&toks, &elected_at(0, "call"), &HeuristicSrl);
        assert_eq!(rows[1].head_dep, "dobj");
        assert_eq!(rows[2].head_dep, "prep");
        assert_eq!(rows[3].head_dep, "pobj");
    }

    #[test]
    fn fallback_verbless_positions_measure_from_token_zero() {
        let toks = prepared("sweater for john");
        let elected = ElectedVerb {
            index: 0,
            lemma: "sweater".into(),
            source: ElectedVerbSource::FirstTokenPosFallback,
        };
        let rows = build_token_rows(&toks, &elected, &HeuristicSrl);
        assert_eq!(rows[0].relative_position, 0);
        assert!(rows[0].is_elected_verb);
        assert_eq!(rows[2].relative_position, 2);
    }

    #[test]
    fn exactly_one_row_per_token() {
        let toks = prepared("call sweater for john");
        let rows = build_token_rows(&toks, &elected_at(0, "call"), &NoSrl);
        assert_eq!(rows.len(), toks.len());
        assert!(rows.iter().all(|r| r.srl.is_none()));
        assert_eq!(rows.iter().filter(|r| r.relative_position == 0).count(), 1);
    }

    fn labels(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn concat_spans_runs() {
        let spans = concat_spans(&labels(&["O", "item", "item", "O", "person"]));
        assert_eq!(
            spans,
            vec![
                ArgumentSpan {
                    start: 1,
                    end: 3,
                    role: "item".into()
                },
                ArgumentSpan {
                    start: 4,
                    end: 5,
                    role: "person".into()
                },
            ]
        );
    }

    #[test]
    fn concat_spans_merges_adjacent_same_role() {
        let spans = concat_spans(&labels(&["item", "item"]));
        assert_eq!(spans.len(), 1);
        assert_eq!((spans[0].start, spans[0].end), (0, 2));
    }

    #[test]
    fn concat_spans_all_outside() {
        assert!(concat_spans(&labels(&["O", "O", "O"])).is_empty());
    }

    #[test]
    fn span_label_round_trip() {
        // labels -> spans -> labels is the identity for non-adjacent spans
        let original = labels(&["O", "item", "item", "O", "person", "O"]);
        let spans = concat_spans(&original);
        assert_eq!(token_labels_from_spans(original.len(), &spans), original);
    }

    proptest::proptest! {
        #[test]
        fn concat_spans_never_overlap_and_cover_non_outside(
            raw in proptest::collection::vec(0u8..3, 0..20)
        ) {
            let names = ["O", "item", "person"];
            let labels: Vec<String> = raw.iter().map(|&i| names[i as usize].to_string()).collect();
            let spans = concat_spans(&labels);
            let mut last_end = 0;
            for span in &spans {
                proptest::prop_assert!(span.start >= last_end);
                proptest::prop_assert!(span.end > span.start);
                last_end = span.end;
            }
            let covered: usize = spans.iter().map(|s| s.end - s.start).sum();
            let non_outside = labels.iter().filter(|l| *l != OUTSIDE_LABEL).count();
            proptest::prop_assert_eq!(covered, non_outside);
        }
    }

    fn record(id: &str, text: &str, agent: &str, args: Vec<ArgumentSpan>) -> TaskRecord {
        TaskRecord {
            id: id.into(),
            text: text.into(),
            agent: Some(agent.into()),
            args,
            exception: None,
            source: "test".into(),
        }
    }

    fn span(start: usize, end: usize, role: &str) -> ArgumentSpan {
        ArgumentSpan {
            start,
            end,
            role: role.into(),
        }
    }

    fn copy_model() -> RuleModel {
        RuleModel {
            rules: vec![crate::firstverb::Rule {
                condition: crate::firstverb::Condition::Always,
                action: crate::firstverb::Action::CopyBootstrap,
            }],
            default_tag: "NN".into(),
        }
    }

    #[test]
    fn train_and_tag_single_agent() {
        let lex = lexicon();
        let matcher = GazetteerMatcher::default();
        let rule_model = copy_model();
        let ctx = ArgContext {
            lexicon: &lex,
            matcher: &matcher,
            rule_model: &rule_model,
            srl: &HeuristicSrl,
        };
        let records = vec![
            record("c1", "call mom", "call", vec![span(1, 2, "person")]),
            record("c2", "call john", "call", vec![span(1, 2, "person")]),
            record("c3", "call mom", "call", vec![span(1, 2, "person")]),
        ];
        let model = train_arg_models(
            &records,
            &ctx,
            BoostConfig::default(),
            ArgFeatureToggles::default(),
        )
        .unwrap();
        let (rows, gold) = ctx.prepare(&records[0]).unwrap();
        let tagged = tag_arguments(&model, "call", &rows).unwrap();
        assert!(!tagged.used_generic);
        assert_eq!(tagged.labels, gold);
        // unseen agent falls back to the generic model
        let fallback = tag_arguments(&model, "unknown", &rows).unwrap();
        assert!(fallback.used_generic);
        assert_eq!(fallback.labels.len(), rows.len());
    }

    #[test]
    fn agent_without_annotations_is_skipped_with_warning() {
        let lex = lexicon();
        let matcher = GazetteerMatcher::default();
        let rule_model = copy_model();
        let ctx = ArgContext {
            lexicon: &lex,
            matcher: &matcher,
            rule_model: &rule_model,
            srl: &HeuristicSrl,
        };
        let records = vec![
            record("c1", "call mom", "call", vec![span(1, 2, "person")]),
            record("c2", "call john", "call", vec![span(1, 2, "person")]),
            record("b1", "sweater", "buy", vec![]),
        ];
        let model = train_arg_models(
            &records,
            &ctx,
            BoostConfig::default(),
            ArgFeatureToggles::default(),
        )
        .unwrap();
        assert!(model.per_agent.contains_key("call"));
        assert!(!model.per_agent.contains_key("buy"));
        assert_eq!(model.warnings.len(), 1);
    }

    #[test]
    fn corpus_without_annotations_is_an_error() {
        let lex = lexicon();
        let matcher = GazetteerMatcher::default();
        let rule_model = copy_model();
        let ctx = ArgContext {
            lexicon: &lex,
            matcher: &matcher,
            rule_model: &rule_model,
            srl: &HeuristicSrl,
        };
        let records = vec![record("b1", "sweater", "buy", vec![])];
        assert!(matches!(
            train_arg_models(
                &records,
                &ctx,
                BoostConfig::default(),
                ArgFeatureToggles::default()
            ),
            Err(Error::NoArgumentAnnotations(_))
        ));
    }

    #[test]
    fn per_agent_models_only_emit_training_roles() {
        let lex = lexicon();
        let matcher = GazetteerMatcher::default();
        let rule_model = copy_model();
        let ctx = ArgContext {
            lexicon: &lex,
            matcher: &matcher,
            rule_model: &rule_model,
            srl: &HeuristicSrl,
        };
        let records = vec![
            record("c1", "call mom", "call", vec![span(1, 2, "person")]),
            record(
                "c2",
                "call john for mom",
                "call",
                vec![span(1, 2, "person")],
            ),
        ];
        let model = train_arg_models(
            &records,
            &ctx,
            BoostConfig::default(),
            ArgFeatureToggles::default(),
        )
        .unwrap();
        let allowed: std::collections::BTreeSet<&str> =
            [OUTSIDE_LABEL, "person"].into_iter().collect();
        for label in &model.per_agent["call"].labels {
            assert!(allowed.contains(label.as_str()));
        }
    }

    #[test]
    fn perfect_predictor_scores_one() {
        let items = vec![
            (labels(&["O", "item"]), labels(&["O", "item"])),
            (labels(&["person", "O"]), labels(&["person", "O"])),
        ];
        let report = score_arg_predictions(&items);
        assert_eq!(report.span_f1, 1.0);
        assert_eq!(report.token_report.accuracy, 1.0);
    }

    #[test]
    fn all_outside_predictor_has_zero_recall() {
        let items = vec![(labels(&["O", "item", "person"]), labels(&["O", "O", "O"]))];
        let report = score_arg_predictions(&items);
        assert_eq!(report.span_recall, 0.0);
        assert_eq!(report.token_report.per_class["item"].recall, 0.0);
        assert_eq!(report.token_report.per_class["person"].recall, 0.0);
    }

    #[test]
    fn hand_scored_confusion() {
        // tokens: gold O,item,item,person / predicted O,item,O,item
        // confusion rows (gold O,item,person): O:{O:1}, item:{item:1,O:1},
        // person:{item:1}; matched spans: none exact
        let items = vec![(
            labels(&["O", "item", "item", "person"]),
            labels(&["O", "item", "O", "item"]),
        )];
        let report = score_arg_predictions(&items);
        let t = &report.token_report;
        let idx = |l: &str| t.labels.iter().position(|x| x == l).unwrap();
        assert_eq!(t.confusion[idx("O")][idx("O")], 1);
        assert_eq!(t.confusion[idx("item")][idx("item")], 1);
        assert_eq!(t.confusion[idx("item")][idx("O")], 1);
        assert_eq!(t.confusion[idx("person")][idx("item")], 1);
        assert_eq!(report.span_gold, 2);
        assert_eq!(report.span_predicted, 2);
        assert_eq!(report.span_matched, 0);
    }
}
