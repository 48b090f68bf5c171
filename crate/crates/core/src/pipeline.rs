//! End-to-end pipeline: train the model bundle, classify utterances, and
//! cross-validate the agent classifier without test leakage.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agentclf::{majority_baseline, train_agent_model, AgentModel, FeatureToggles};
use crate::argext::{
    build_token_rows, concat_spans, tag_arguments, train_arg_models, ArgContext, ArgFeatureToggles,
    ArgModel, HeuristicSrl, TokenFeatureRow,
};
use crate::boost::BoostConfig;
use crate::corpus::{stratified_kfold, TaskRecord};
use crate::error::{Error, Result};
use crate::eval::{build_report, EvalReport};
use crate::features::{assemble_features, build_word_stats, AgentFeatureVector, AgentWordStats};
use crate::firstverb::{
    apply_first_verb, extract_fvm_features, train_rule_model, ElectedVerb, RuleModel,
};
use crate::textproc::{self, GazetteerMatcher, PosLexicon, Token};
use crate::vectors::VectorStore;

/// Immutable lexical resources shared by training and inference.
pub struct Resources {
    pub lexicon: PosLexicon,
    pub matcher: GazetteerMatcher,
    pub vectors: VectorStore,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Tracked lemmas per agent in the word statistics.
    pub n: usize,
    pub boost: BoostConfig,
    pub toggles: FeatureToggles,
    pub arg_toggles: ArgFeatureToggles,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n: 15,
            boost: BoostConfig::default(),
            toggles: FeatureToggles::default(),
            arg_toggles: ArgFeatureToggles::default(),
        }
    }
}

/// The trained model bundle: first-verb rule model, word statistics, agent
/// classifier and (when the corpus carries annotations) argument models.
pub struct Bundle {
    pub rule_model: RuleModel,
    pub stats: AgentWordStats,
    pub agent_model: AgentModel,
    pub arg_models: Option<ArgModel>,
}

/// Train the full bundle from usable records. Gold first-token tags, when
/// provided by id, supervise the rule model; records without one fall back
/// to the bootstrap tag as its own training target.
pub fn train_bundle(
    records: &[TaskRecord],
    res: &Resources,
    cfg: &TrainConfig,
    gold_first_tags: Option<&BTreeMap<String, String>>,
) -> Result<(Bundle, Vec<String>)> {
    if records.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut warnings = Vec::new();

    let mut fvm_features = Vec::with_capacity(records.len());
    let mut fvm_gold = Vec::with_capacity(records.len());
    for record in records {
        let tokens = textproc::process(&record.text, &res.lexicon, &res.matcher);
        let features = extract_fvm_features(&tokens, &res.lexicon)?;
        let gold = gold_first_tags
            .and_then(|m| m.get(&record.id).cloned())
            .unwrap_or_else(|| features.bootstrap_tag.clone());
        fvm_features.push(features);
        fvm_gold.push(gold);
    }
    let rule_model = train_rule_model(&fvm_features, &fvm_gold)?;

    let stats = build_word_stats(records, cfg.n)?;

    let arg_models = if records.iter().any(|r| !r.args.is_empty()) {
        let ctx = ArgContext {
            lexicon: &res.lexicon,
            matcher: &res.matcher,
            rule_model: &rule_model,
            srl: &HeuristicSrl,
        };
        let model = train_arg_models(records, &ctx, cfg.boost, cfg.arg_toggles)?;
        warnings.extend(model.warnings.iter().cloned());
        Some(model)
    } else {
        warnings.push("corpus has no argument annotations; argument models skipped".to_string());
        None
    };

    let mut vectors = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for record in records {
        let agent = record.agent.clone().ok_or_else(|| Error::InvalidRecord {
            id: record.id.clone(),
            message: "training record has no agent label".into(),
        })?;
        let (_, _, _, features) = analyze(
            &record.text,
            res,
            &rule_model,
            &stats,
            arg_models.as_ref(),
            cfg.toggles.arg_histogram,
        )?;
        vectors.push(features);
        labels.push(agent);
    }
    let agent_model = train_agent_model(&vectors, &labels, cfg.boost, cfg.toggles)?;

    Ok((
        Bundle {
            rule_model,
            stats,
            agent_model,
            arg_models,
        },
        warnings,
    ))
}

/// Process one utterance through tagging, correction, argument labeling (via
/// the generic model, for the histogram feature) and feature assembly.
fn analyze(
    text: &str,
    res: &Resources,
    rule_model: &RuleModel,
    stats: &AgentWordStats,
    arg_models: Option<&ArgModel>,
    use_arg_histogram: bool,
) -> Result<(
    Vec<Token>,
    ElectedVerb,
    Vec<TokenFeatureRow>,
    AgentFeatureVector,
)> {
    let tokens = textproc::process(text, &res.lexicon, &res.matcher);
    let (tokens, elected) = apply_first_verb(tokens, rule_model, &res.lexicon)?;
    let rows = build_token_rows(&tokens, &elected, &HeuristicSrl);
    let arg_labels = match (arg_models, use_arg_histogram) {
        (Some(models), true) => {
            let mut labels = Vec::with_capacity(rows.len());
            for row in &rows {
                let (label, _) = models
                    .generic
                    .predict(&crate::argext::row_values(row, models.toggles))?;
                labels.push(label);
            }
            Some(labels)
        }
        _ => None,
    };
    let features = assemble_features(
        &tokens,
        &elected,
        stats,
        &res.vectors,
        arg_labels.as_deref(),
    )?;
    Ok((tokens, elected, rows, features))
}

/// One classified argument span with its surface text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedArg {
    pub text: String,
    pub role: String,
    pub start: usize,
    pub end: usize,
}

/// Classification result for one utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub agent: String,
    pub args: Vec<ClassifiedArg>,
    pub elected_verb: ElectedVerb,
    /// True when the generic argument model substituted for a missing
    /// per-agent model. Not part of the output document.
    #[serde(skip)]
    pub used_generic_arg_model: bool,
}

/// Run the full pipeline on one utterance: correct the first tag, elect the
/// verb, classify the agent, tag and concatenate argument spans.
pub fn classify(bundle: &Bundle, res: &Resources, text: &str) -> Result<Classification> {
    if text.trim().is_empty() {
        return Err(Error::EmptyUtterance);
    }
    let (tokens, elected, rows, features) = analyze(
        text,
        res,
        &bundle.rule_model,
        &bundle.stats,
        bundle.arg_models.as_ref(),
        bundle.agent_model.toggles.arg_histogram,
    )?;
    let (agent, _scores) = bundle.agent_model.predict(&features)?;

    let mut args = Vec::new();
    let mut used_generic = false;
    if let Some(models) = &bundle.arg_models {
        let tagged = tag_arguments(models, &agent, &rows)?;
        used_generic = tagged.used_generic;
        for span in concat_spans(&tagged.labels) {
            let first = &tokens[span.start];
            let last = &tokens[span.end - 1];
            args.push(ClassifiedArg {
                text: text[first.char_start..last.char_end].to_string(),
                role: span.role,
                start: span.start,
                end: span.end,
            });
        }
    }

    Ok(Classification {
        agent,
        args,
        elected_verb: elected,
        used_generic_arg_model: used_generic,
    })
}

/// Agent prediction only, for evaluation loops.
pub fn predict_agent(bundle: &Bundle, res: &Resources, text: &str) -> Result<String> {
    let (_, _, _, features) = analyze(
        text,
        res,
        &bundle.rule_model,
        &bundle.stats,
        bundle.arg_models.as_ref(),
        bundle.agent_model.toggles.arg_histogram,
    )?;
    Ok(bundle.agent_model.predict(&features)?.0)
}

const RULE_MODEL_FILE: &str = "rule_model.json";
const WORD_STATS_FILE: &str = "word_stats.json";
const AGENT_MODEL_FILE: &str = "agent_model.json";
const ARG_MODELS_FILE: &str = "arg_models.json";

fn write_artifact<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let path = dir.join(name);
    let json = serde_json::to_string_pretty(value).map_err(|e| Error::Artifact {
        path: path.clone(),
        message: e.to_string(),
    })?;
    std::fs::write(&path, json).map_err(|e| Error::Io { path, source: e })
}

fn read_artifact<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let data = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    serde_json::from_str(&data).map_err(|e| Error::Artifact {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Write the bundle artifacts into a directory.
pub fn save_bundle(bundle: &Bundle, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    write_artifact(dir, RULE_MODEL_FILE, &bundle.rule_model)?;
    write_artifact(dir, WORD_STATS_FILE, &bundle.stats)?;
    write_artifact(dir, AGENT_MODEL_FILE, &bundle.agent_model)?;
    if let Some(arg_models) = &bundle.arg_models {
        write_artifact(dir, ARG_MODELS_FILE, arg_models)?;
    }
    Ok(())
}

/// Load a bundle previously written by [`save_bundle`]. The argument models
/// file may be absent.
pub fn load_bundle(dir: &Path) -> Result<Bundle> {
    let arg_path = dir.join(ARG_MODELS_FILE);
    let arg_models = if arg_path.exists() {
        Some(read_artifact::<ArgModel>(&arg_path)?)
    } else {
        None
    };
    Ok(Bundle {
        rule_model: read_artifact(&dir.join(RULE_MODEL_FILE))?,
        stats: read_artifact(&dir.join(WORD_STATS_FILE))?,
        agent_model: read_artifact(&dir.join(AGENT_MODEL_FILE))?,
        arg_models,
    })
}

fn bundle_paths(dir: &Path) -> Vec<PathBuf> {
    [
        RULE_MODEL_FILE,
        WORD_STATS_FILE,
        AGENT_MODEL_FILE,
        ARG_MODELS_FILE,
    ]
    .iter()
    .map(|f| dir.join(f))
    .filter(|p| p.exists())
    .collect()
}

/// Artifact files present in a bundle directory.
pub fn bundle_artifacts(dir: &Path) -> Vec<PathBuf> {
    bundle_paths(dir)
}

/// Outcome of one cross-validation run: the aggregated report plus the
/// per-record held-out predictions aligned with the input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub report: EvalReport,
    pub gold: Vec<String>,
    pub predictions: Vec<String>,
    pub fold_of: Vec<usize>,
}

/// Stratified cross-validation of the agent classifier. Word statistics,
/// rule model, argument models and the classifier are rebuilt per fold from
/// the train split only; lexical resources are fixed.
pub fn cross_validate(
    records: &[TaskRecord],
    res: &Resources,
    cfg: &TrainConfig,
    k: usize,
    seed: u64,
    gold_first_tags: Option<&BTreeMap<String, String>>,
) -> Result<CvOutcome> {
    run_cv(records, res, cfg, k, seed, |train| {
        train_bundle(train, res, cfg, gold_first_tags).map(|(bundle, _)| bundle)
    })
}

/// Cross-validation of the majority baseline on the same folds as
/// [`cross_validate`] for a given seed.
pub fn cross_validate_baseline(
    records: &[TaskRecord],
    res: &Resources,
    cfg: &TrainConfig,
    k: usize,
    seed: u64,
) -> Result<CvOutcome> {
    run_cv(records, res, cfg, k, seed, |train| {
        let labels: Vec<String> = train.iter().filter_map(|r| r.agent.clone()).collect();
        let baseline = majority_baseline(&labels)?;
        Ok(Bundle {
            rule_model: RuleModel {
                rules: vec![],
                default_tag: textproc::DEFAULT_TAG.to_string(),
            },
            stats: build_word_stats(train, cfg.n)?,
            agent_model: baseline,
            arg_models: None,
        })
    })
}

fn run_cv(
    records: &[TaskRecord],
    res: &Resources,
    _cfg: &TrainConfig,
    k: usize,
    seed: u64,
    trainer: impl Fn(&[TaskRecord]) -> Result<Bundle>,
) -> Result<CvOutcome> {
    let folds = stratified_kfold(records, k, seed)?;
    let mut predictions = vec![String::new(); records.len()];
    let mut fold_of = vec![0usize; records.len()];
    for (fold, (train_idx, test_idx)) in folds.iter().enumerate() {
        let train: Vec<TaskRecord> = train_idx.iter().map(|&i| records[i].clone()).collect();
        let bundle = trainer(&train)?;
        for &i in test_idx {
            predictions[i] = predict_agent(&bundle, res, &records[i].text)?;
            fold_of[i] = fold;
        }
    }
    let gold: Vec<String> = records
        .iter()
        .map(|r| r.agent.clone().unwrap_or_default())
        .collect();
    let report = build_report(&gold, &predictions, Some(&fold_of));
    Ok(CvOutcome {
        report,
        gold,
        predictions,
        fold_of,
    })
}

/// Corpus diagnostics for the stats command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total: usize,
    pub usable: usize,
    pub exception_counts: BTreeMap<String, usize>,
    pub agent_counts: BTreeMap<String, usize>,
    /// Usable records where bootstrap-corrected tagging finds a verb, i.e.
    /// the elected verb does not come from the first-token fallback.
    pub elected_verb_count: usize,
    pub elected_verb_fraction: f64,
}

/// Agent distribution, exception breakdown and elected-verb proportion.
pub fn corpus_stats(
    records: &[TaskRecord],
    lexicon: &PosLexicon,
    matcher: &GazetteerMatcher,
) -> Result<CorpusStats> {
    let bootstrap_model = RuleModel {
        rules: vec![crate::firstverb::Rule {
            condition: crate::firstverb::Condition::Always,
            action: crate::firstverb::Action::CopyBootstrap,
        }],
        default_tag: textproc::DEFAULT_TAG.to_string(),
    };
    let mut stats = CorpusStats {
        total: records.len(),
        usable: 0,
        exception_counts: BTreeMap::new(),
        agent_counts: BTreeMap::new(),
        elected_verb_count: 0,
        elected_verb_fraction: 0.0,
    };
    for record in records {
        if let Some(reason) = &record.exception {
            *stats
                .exception_counts
                .entry(reason.as_str().to_string())
                .or_default() += 1;
            continue;
        }
        stats.usable += 1;
        if let Some(agent) = &record.agent {
            *stats.agent_counts.entry(agent.clone()).or_default() += 1;
        }
        let tokens = textproc::process(&record.text, lexicon, matcher);
        let (_, elected) = apply_first_verb(tokens, &bootstrap_model, lexicon)?;
        if elected.source != crate::firstverb::ElectedVerbSource::FirstTokenPosFallback {
            stats.elected_verb_count += 1;
        }
    }
    if stats.usable > 0 {
        stats.elected_verb_fraction = stats.elected_verb_count as f64 / stats.usable as f64;
    }
    Ok(stats)
}
