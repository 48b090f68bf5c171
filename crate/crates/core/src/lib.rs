//! Interpret short to-do utterances.
//!
//! The pipeline corrects the POS tag of utterance-initial tokens, recognizes
//! named entities from compiled gazetteers, classifies each utterance to an
//! executing agent and extracts typed argument spans, together with the
//! training and evaluation harness (stratified cross-validation, majority
//! baseline, pairwise chi-square significance, Fleiss' kappa agreement).
//!
//! Modules:
//! - [`corpus`]: record model, JSON-lines loading, exception filtering,
//!   rare-agent pruning, Fleiss' kappa, stratified k-fold splits.
//! - [`textproc`]: tokenizer, lexicon POS tagger, suffix lemmatizer and
//!   longest-match gazetteer NER.
//! - [`firstverb`]: bootstrap first-token correction and the rule-based
//!   first-verb model that elects the operative verb.
//! - [`vectors`]: text-format word embeddings and cosine similarity.
//! - [`features`]: per-agent word statistics and the agent feature vector.
//! - [`boost`]: boosted decision stumps under multinomial logistic loss.
//! - [`agentclf`]: agent classifier, majority baseline, significance test.
//! - [`argext`]: per-agent token argument classifiers and span assembly.
//! - [`pipeline`]: bundle training, classification and cross-validation.

pub mod agentclf;
pub mod argext;
pub mod boost;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod firstverb;
pub mod pipeline;
pub mod textproc;
pub mod vectors;

pub use agentclf::{majority_baseline, significance_test, train_agent_model, AgentModel};
pub use argext::{
    build_token_rows, concat_spans, evaluate_args, tag_arguments, train_arg_models, ArgModel,
};
pub use boost::{BoostConfig, BoostModel};
pub use corpus::{
    filter_exceptions, fleiss_kappa, load_corpus, prune_rare_agents, stratified_kfold,
    AnnotationMatrix, ArgumentSpan, ExceptionReason, TaskRecord,
};
pub use error::{Error, Result};
pub use eval::{build_report, EvalReport};
pub use features::{
    assemble_features, build_word_stats, cs_feature, ner_feature, wc_score, AgentFeatureVector,
    AgentWordStats,
};
pub use firstverb::{
    apply_first_verb, bootstrap_correct, extract_fvm_features, train_rule_model, ElectedVerb,
    FvmFeatures, RuleModel,
};
pub use pipeline::{
    classify, corpus_stats, cross_validate, cross_validate_baseline, load_bundle, save_bundle,
    train_bundle, Bundle, Classification, CvOutcome, Resources, TrainConfig,
};
pub use textproc::{
    compile_gazetteer, lemmatize, ner_match, pos_tag, tokenize, GazetteerMatcher, PosLexicon, Token,
};
pub use vectors::VectorStore;
