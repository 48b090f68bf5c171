use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use tasknlp::argext::{evaluate_args, ArgContext, ArgEvalReport, HeuristicSrl};
use tasknlp::boost::BoostConfig;
use tasknlp::corpus::{self, AnnotationMatrix, TaskRecord};
use tasknlp::pipeline::{self, Resources, TrainConfig};
use tasknlp::textproc::{compile_gazetteer, GazetteerMatcher, PosLexicon};
use tasknlp::vectors::VectorStore;
use tasknlp::Error;

use crate::config::{pick, require_path, FileConfig};
use crate::{ResourceArgs, TrainArgs};

/// Error carrying the process exit code: 2 input, 3 training/model.
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn model(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err {
            Error::EmptyTrainingSet | Error::SingleClass(_) | Error::NoArgumentAnnotations(_) => {
                CliError::model(err.to_string())
            }
            other => CliError::input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::input(err.to_string())
    }
}

fn gazetteer_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().map(|e| e == "tsv").unwrap_or(false))
        .collect();
    files.sort();
    Ok(files)
}

/// A directory of TSV lists is compiled; a file is loaded as a compiled
/// matcher artifact.
fn load_matcher(path: &Path) -> Result<GazetteerMatcher, CliError> {
    if path.is_dir() {
        let files = gazetteer_files(path)?;
        if files.is_empty() {
            eprintln!("warning: no .tsv files under {}", path.display());
        }
        let matcher = compile_gazetteer(&files)?;
        for warning in matcher.warnings() {
            eprintln!("warning: {warning}");
        }
        Ok(matcher)
    } else {
        Ok(GazetteerMatcher::load(path)?)
    }
}

fn load_resources(args: &ResourceArgs, file: &FileConfig) -> Result<Resources, CliError> {
    let gazetteers = require_path("gazetteers", &args.gazetteers, &file.gazetteers)?;
    let lexicon = require_path("lexicon", &args.lexicon, &file.lexicon)?;
    let colors = require_path("colors", &args.colors, &file.colors)?;
    let vectors = require_path("vectors", &args.vectors, &file.vectors)?;
    Ok(Resources {
        lexicon: PosLexicon::load(&lexicon, &colors)?,
        matcher: load_matcher(&gazetteers)?,
        vectors: VectorStore::load(&vectors)?,
    })
}

fn train_config(args: &TrainArgs, file: &FileConfig) -> Result<TrainConfig, CliError> {
    let n = pick(&args.n, &file.n, 15);
    if n < 1 {
        return Err(CliError::input("--n must be at least 1"));
    }
    Ok(TrainConfig {
        n,
        boost: BoostConfig {
            rounds: pick(&args.rounds, &file.rounds, 100),
            shrinkage: pick(&args.shrinkage, &file.shrinkage, 0.1),
        },
        toggles: file.toggles(),
        arg_toggles: file.arg_toggles(),
    })
}

fn load_training_records(
    args: &TrainArgs,
    file: &FileConfig,
) -> Result<(Vec<TaskRecord>, usize), CliError> {
    let corpus_path = require_path("corpus", &args.corpus, &file.corpus)?;
    let records = corpus::load_corpus(&corpus_path)?;
    let (usable, exceptions) = corpus::filter_exceptions(&records)?;
    let min_count = pick(&args.min_agent_count, &file.min_agent_count, 15);
    let kept = corpus::prune_rare_agents(&usable, min_count);
    let pruned = usable.len() - kept.len();
    if pruned > 0 {
        eprintln!(
            "warning: pruned {pruned} records of agents with fewer than {min_count} utterances"
        );
    }
    Ok((kept, exceptions.len()))
}

fn load_first_tags(
    args: &TrainArgs,
    file: &FileConfig,
) -> Result<Option<BTreeMap<String, String>>, CliError> {
    let path = match args.first_tags.clone().or_else(|| file.first_tags.clone()) {
        Some(p) => p,
        None => return Ok(None),
    };
    let text = std::fs::read_to_string(&path)?;
    let mut tags = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, tag) = line.split_once('\t').ok_or_else(|| {
            CliError::input(format!(
                "{}:{}: expected `id \\t tag`",
                path.display(),
                lineno + 1
            ))
        })?;
        tags.insert(id.trim().to_string(), tag.trim().to_string());
    }
    Ok(Some(tags))
}

pub fn compile_ner(args: &ResourceArgs, out: &Path) -> Result<(), CliError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let dir = require_path("gazetteers", &args.gazetteers, &file.gazetteers)?;
    let matcher = load_matcher(&dir)?;
    matcher.save(out)?;
    println!(
        "compiled {} entities -> {}",
        matcher.entry_count(),
        out.display()
    );
    Ok(())
}

pub fn train(args: &ResourceArgs, train_args: &TrainArgs, out: &Path) -> Result<(), CliError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let res = load_resources(args, &file)?;
    let cfg = train_config(train_args, &file)?;
    let (records, exception_count) = load_training_records(train_args, &file)?;
    let gold_tags = load_first_tags(train_args, &file)?;

    let (bundle, warnings) = pipeline::train_bundle(&records, &res, &cfg, gold_tags.as_ref())?;
    for warning in &warnings {
        eprintln!("warning: {warning}");
    }
    pipeline::save_bundle(&bundle, out)?;

    let artifacts = pipeline::bundle_artifacts(out);
    println!(
        "trained on {} records ({exception_count} exceptions excluded), agents: {}",
        records.len(),
        bundle.agent_model.labels().join(", ")
    );
    println!(
        "bundle ({} artifacts) -> {}",
        artifacts.len(),
        out.display()
    );
    for path in artifacts {
        println!("  {}", path.display());
    }
    Ok(())
}

pub fn classify(args: &ResourceArgs, bundle_dir: &Path, text: &str) -> Result<(), CliError> {
    if text.trim().is_empty() {
        return Err(CliError::input("utterance is empty"));
    }
    let file = FileConfig::load(args.config.as_deref())?;
    let res = load_resources(args, &file)?;
    if !bundle_dir.is_dir() {
        return Err(CliError::input(format!(
            "bundle {} is not a directory",
            bundle_dir.display()
        )));
    }
    let bundle = pipeline::load_bundle(bundle_dir)?;
    let result = pipeline::classify(&bundle, &res, text)?;
    if result.used_generic_arg_model {
        eprintln!(
            "note: no per-agent argument model for `{}`; used the generic model",
            result.agent
        );
    }
    let json = serde_json::to_string(&result)
        .map_err(|e| CliError::input(format!("cannot encode result: {e}")))?;
    println!("{json}");
    Ok(())
}

fn write_report(dir: &Path, name: &str, json: &str, text: &str) -> Result<(), CliError> {
    std::fs::write(dir.join(format!("{name}.json")), json)?;
    std::fs::write(dir.join(format!("{name}.txt")), text)?;
    Ok(())
}

fn arg_report_text(report: &ArgEvalReport) -> String {
    let mut out = String::new();
    for (agent, r) in &report.per_agent {
        out.push_str(&format!("== agent {agent} ==\n"));
        out.push_str(&r.token_report.to_text_table());
        out.push_str(&format!(
            "spans: precision {:.4} recall {:.4} f1 {:.4} ({} predicted, {} gold, {} matched)\n\n",
            r.span_precision,
            r.span_recall,
            r.span_f1,
            r.span_predicted,
            r.span_gold,
            r.span_matched
        ));
    }
    out
}

pub fn eval(
    args: &ResourceArgs,
    train_args: &TrainArgs,
    bundle_dir: Option<&Path>,
    folds: Option<usize>,
    out: &Path,
) -> Result<(), CliError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let res = load_resources(args, &file)?;
    let cfg = train_config(train_args, &file)?;
    let (records, _) = load_training_records(train_args, &file)?;
    let gold_tags = load_first_tags(train_args, &file)?;
    let k = pick(&folds, &file.folds, 10);
    let seed = pick(&train_args.seed, &file.seed, 0);
    std::fs::create_dir_all(out)?;

    let (model_outcome, baseline_outcome) = match bundle_dir {
        Some(dir) => {
            let bundle = pipeline::load_bundle(dir)?;
            let gold: Vec<String> = records
                .iter()
                .map(|r| r.agent.clone().unwrap_or_default())
                .collect();
            let mut predictions = Vec::with_capacity(records.len());
            for record in &records {
                predictions.push(pipeline::predict_agent(&bundle, &res, &record.text)?);
            }
            let report = tasknlp::build_report(&gold, &predictions, None);
            let baseline_model = tasknlp::majority_baseline(&gold)?;
            let mut baseline_preds = Vec::with_capacity(records.len());
            for record in &records {
                let bundle = pipeline::Bundle {
                    rule_model: bundle.rule_model.clone(),
                    stats: bundle.stats.clone(),
                    agent_model: baseline_model.clone(),
                    arg_models: None,
                };
                baseline_preds.push(pipeline::predict_agent(&bundle, &res, &record.text)?);
            }
            let baseline_report = tasknlp::build_report(&gold, &baseline_preds, None);
            (
                pipeline::CvOutcome {
                    report,
                    gold: gold.clone(),
                    predictions,
                    fold_of: vec![0; records.len()],
                },
                pipeline::CvOutcome {
                    report: baseline_report,
                    gold,
                    predictions: baseline_preds,
                    fold_of: vec![0; records.len()],
                },
            )
        }
        None => (
            pipeline::cross_validate(&records, &res, &cfg, k, seed, gold_tags.as_ref())?,
            pipeline::cross_validate_baseline(&records, &res, &cfg, k, seed)?,
        ),
    };

    let (statistic, p_value) = tasknlp::significance_test(
        &model_outcome.predictions,
        &baseline_outcome.predictions,
        &model_outcome.gold,
    )?;

    write_report(
        out,
        "eval_agent",
        &serde_json::to_string_pretty(&model_outcome.report).unwrap(),
        &model_outcome.report.to_text_table(),
    )?;
    write_report(
        out,
        "eval_baseline",
        &serde_json::to_string_pretty(&baseline_outcome.report).unwrap(),
        &baseline_outcome.report.to_text_table(),
    )?;
    let significance = serde_json::json!({
        "pair": ["model", "majority-baseline"],
        "chi_square": statistic,
        "p_value": p_value,
    });
    std::fs::write(
        out.join("eval_significance.json"),
        serde_json::to_string_pretty(&significance).unwrap(),
    )?;

    if records.iter().any(|r| !r.args.is_empty()) {
        let mut fvm_features = Vec::new();
        let mut fvm_gold = Vec::new();
        for record in &records {
            let tokens = tasknlp::textproc::process(&record.text, &res.lexicon, &res.matcher);
            let features = tasknlp::extract_fvm_features(&tokens, &res.lexicon)?;
            let gold = gold_tags
                .as_ref()
                .and_then(|m| m.get(&record.id).cloned())
                .unwrap_or_else(|| features.bootstrap_tag.clone());
            fvm_features.push(features);
            fvm_gold.push(gold);
        }
        let rule_model = tasknlp::train_rule_model(&fvm_features, &fvm_gold)?;
        let ctx = ArgContext {
            lexicon: &res.lexicon,
            matcher: &res.matcher,
            rule_model: &rule_model,
            srl: &HeuristicSrl,
        };
        let arg_report = evaluate_args(&records, &ctx, k, seed, cfg.boost, cfg.arg_toggles)?;
        write_report(
            out,
            "eval_args",
            &serde_json::to_string_pretty(&arg_report).unwrap(),
            &arg_report_text(&arg_report),
        )?;
    } else {
        eprintln!("warning: corpus has no argument annotations; agent evaluation only");
    }

    println!(
        "model accuracy {:.4} macro-f1 {:.4} | baseline accuracy {:.4} macro-f1 {:.4}",
        model_outcome.report.accuracy,
        model_outcome.report.macro_f1,
        baseline_outcome.report.accuracy,
        baseline_outcome.report.macro_f1
    );
    println!("chi-square {statistic:.4}, p = {p_value:.6}");
    println!("reports -> {}", out.display());
    Ok(())
}

pub fn kappa(path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| CliError::input(format!("{} is empty", path.display())))?;
    let categories: Vec<String> = header.split('\t').map(|s| s.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let row = line
            .split('\t')
            .map(|cell| {
                cell.trim().parse::<u64>().map_err(|_| {
                    CliError::input(format!(
                        "{}:{}: `{cell}` is not a count",
                        path.display(),
                        lineno + 2
                    ))
                })
            })
            .collect::<Result<Vec<u64>, CliError>>()?;
        rows.push(row);
    }
    let matrix = AnnotationMatrix::new(categories, rows)?;
    let kappa = corpus::fleiss_kappa(&matrix)?;
    println!(
        "kappa = {kappa:.6} ({} tasks, {} categories, {} raters per task)",
        matrix.rows.len(),
        matrix.categories.len(),
        matrix.raters_per_task
    );
    Ok(())
}

pub fn stats(args: &ResourceArgs, corpus_path: Option<&Path>) -> Result<(), CliError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let corpus_path = require_path("corpus", &corpus_path.map(Path::to_path_buf), &file.corpus)?;
    let lexicon_path = require_path("lexicon", &args.lexicon, &file.lexicon)?;
    let colors_path = require_path("colors", &args.colors, &file.colors)?;
    let lexicon = PosLexicon::load(&lexicon_path, &colors_path)?;
    let matcher = match args.gazetteers.clone().or_else(|| file.gazetteers.clone()) {
        Some(path) => load_matcher(&path)?,
        None => GazetteerMatcher::default(),
    };
    let records = corpus::load_corpus(&corpus_path)?;
    let stats = pipeline::corpus_stats(&records, &lexicon, &matcher)?;

    println!("records: {}", stats.total);
    println!(
        "usable: {} | exceptions: {}",
        stats.usable,
        stats.total - stats.usable
    );
    for (kind, count) in &stats.exception_counts {
        println!("  exception {kind}: {count}");
    }
    println!("agents:");
    for (agent, count) in &stats.agent_counts {
        let share = if stats.usable > 0 {
            *count as f64 / stats.usable as f64 * 100.0
        } else {
            0.0
        };
        println!("  {agent}: {count} ({share:.1}%)");
    }
    println!(
        "elected verb found: {} ({:.1}%)",
        stats.elected_verb_count,
        stats.elected_verb_fraction * 100.0
    );
    Ok(())
}
