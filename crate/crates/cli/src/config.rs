//! Merged command configuration: flags win over the optional TOML config
//! file, which wins over built-in defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::commands::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub corpus: Option<PathBuf>,
    pub gazetteers: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub colors: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    pub n: Option<usize>,
    pub rounds: Option<usize>,
    pub shrinkage: Option<f64>,
    pub folds: Option<usize>,
    pub seed: Option<u64>,
    pub min_agent_count: Option<usize>,
    pub first_tags: Option<PathBuf>,
    #[serde(default)]
    pub features: FeatureFlags,
    #[serde(default)]
    pub arg_features: ArgFeatureFlags,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureFlags {
    pub elected_verb: Option<bool>,
    pub word_counts: Option<bool>,
    pub cosine: Option<bool>,
    pub ner: Option<bool>,
    pub arg_histogram: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArgFeatureFlags {
    pub lemma: Option<bool>,
    pub pos: Option<bool>,
    pub ner: Option<bool>,
    pub position: Option<bool>,
    pub context: Option<bool>,
    pub head_dep: Option<bool>,
    pub srl: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::input(format!("bad config {}: {e}", path.display())))
    }

    pub fn toggles(&self) -> tasknlp::agentclf::FeatureToggles {
        let defaults = tasknlp::agentclf::FeatureToggles::default();
        tasknlp::agentclf::FeatureToggles {
            elected_verb: self.features.elected_verb.unwrap_or(defaults.elected_verb),
            word_counts: self.features.word_counts.unwrap_or(defaults.word_counts),
            cosine: self.features.cosine.unwrap_or(defaults.cosine),
            ner: self.features.ner.unwrap_or(defaults.ner),
            arg_histogram: self
                .features
                .arg_histogram
                .unwrap_or(defaults.arg_histogram),
        }
    }

    pub fn arg_toggles(&self) -> tasknlp::argext::ArgFeatureToggles {
        let defaults = tasknlp::argext::ArgFeatureToggles::default();
        tasknlp::argext::ArgFeatureToggles {
            lemma: self.arg_features.lemma.unwrap_or(defaults.lemma),
            pos: self.arg_features.pos.unwrap_or(defaults.pos),
            ner: self.arg_features.ner.unwrap_or(defaults.ner),
            position: self.arg_features.position.unwrap_or(defaults.position),
            context: self.arg_features.context.unwrap_or(defaults.context),
            head_dep: self.arg_features.head_dep.unwrap_or(defaults.head_dep),
            srl: self.arg_features.srl.unwrap_or(defaults.srl),
        }
    }
}

/// First Some wins: flag, then config file, then default.
pub fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>, default: T) -> T {
    flag.clone().or_else(|| file.clone()).unwrap_or(default)
}

/// Required path: flag or config file, validated to exist.
pub fn require_path(
    name: &str,
    flag: &Option<PathBuf>,
    file: &Option<PathBuf>,
) -> Result<PathBuf, CliError> {
    let path = flag
        .clone()
        .or_else(|| file.clone())
        .ok_or_else(|| CliError::input(format!("--{name} is required")))?;
    if !path.exists() {
        return Err(CliError::input(format!(
            "--{name} path {} does not exist",
            path.display()
        )));
    }
    Ok(path)
}
