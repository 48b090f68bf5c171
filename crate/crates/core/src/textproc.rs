//! Tokenization, POS tagging, lemmatization and gazetteer NER.
//!
//! The tagger is a deterministic lexicon lookup with an `NN` default, which
//! reproduces the kind of first-token noun/verb mistakes the first-verb model
//! corrects downstream. Entity recognition is leftmost-longest matching over
//! phrase lists compiled from TSV files.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tag assigned to words absent from the lexicon.
pub const DEFAULT_TAG: &str = "NN";

const VERB_TAGS: [&str; 5] = ["VB", "VBP", "VBZ", "VBG", "VBD"];
const NOUN_TAGS: [&str; 4] = ["NN", "NNS", "NNP", "NNPS"];

pub fn is_verb_tag(tag: &str) -> bool {
    VERB_TAGS.contains(&tag)
}

pub fn is_noun_tag(tag: &str) -> bool {
    NOUN_TAGS.contains(&tag)
}

/// Entity annotation shared by every token of one gazetteer match.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NerTag {
    /// Hierarchical category path, one to three levels.
    pub categories: Vec<String>,
    pub list_type: Option<String>,
    /// Token index where the matched span starts.
    pub span_start: usize,
    /// Token index one past the end of the matched span.
    pub span_end: usize,
}

impl NerTag {
    pub fn level1(&self) -> &str {
        &self.categories[0]
    }

    pub fn span_len(&self) -> usize {
        self.span_end - self.span_start
    }
}

/// One token of an utterance. Offsets are byte offsets into the original
/// text, so `text[char_start..char_end] == surface`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub pos: String,
    pub ner: Option<NerTag>,
    pub index: usize,
    pub char_start: usize,
    pub char_end: usize,
}

impl Token {
    /// Word tokens carry at least one alphanumeric character; everything else
    /// is punctuation and excluded from counts and features.
    pub fn is_word(&self) -> bool {
        self.surface.chars().any(|c| c.is_alphanumeric())
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\''
}

/// Split text into tokens with byte offsets. Words are maximal runs of
/// alphanumeric characters (apostrophes allowed inside contractions); every
/// other non-whitespace character becomes a single-character token. The
/// lemma field starts as the lowercased surface.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let end = if is_word_char(c) {
            let mut end = start + c.len_utf8();
            chars.next();
            while let Some(&(i, d)) = chars.peek() {
                if is_word_char(d) {
                    end = i + d.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            end
        } else {
            chars.next();
            start + c.len_utf8()
        };
        let surface = &text[start..end];
        tokens.push(Token {
            surface: surface.to_string(),
            lemma: surface.to_lowercase(),
            pos: String::new(),
            ner: None,
            index: tokens.len(),
            char_start: start,
            char_end: end,
        });
    }
    tokens
}

/// Sentence ranges over a token slice, split after terminal punctuation.
pub fn sentence_ranges(tokens: &[Token]) -> Vec<std::ops::Range<usize>> {
    let mut ranges = Vec::new();
    let mut start = 0;
    for (i, tok) in tokens.iter().enumerate() {
        if matches!(tok.surface.as_str(), "." | "!" | "?") {
            ranges.push(start..i + 1);
            start = i + 1;
        }
    }
    if start < tokens.len() {
        ranges.push(start..tokens.len());
    }
    ranges
}

/// Suffix-rule lemmatizer: lowercases and strips plural and inflection
/// suffixes until a fixed point, so it is idempotent by construction.
pub fn lemmatize(word: &str) -> String {
    let mut lemma = word.to_lowercase();
    loop {
        let next = strip_suffix_once(&lemma);
        if next == lemma {
            return lemma;
        }
        lemma = next;
    }
}

fn strip_suffix_once(w: &str) -> String {
    let n = w.chars().count();
    // -ies -> -y (parties -> party)
    if n >= 5 {
        if let Some(stem) = w.strip_suffix("ies") {
            return format!("{stem}y");
        }
        if let Some(stem) = w.strip_suffix("ied") {
            return format!("{stem}y");
        }
    }
    // -ing with at least a three-character stem; undouble a repeated final
    // consonant (running -> run)
    if n >= 6 {
        if let Some(stem) = w.strip_suffix("ing") {
            return undouble(stem).to_string();
        }
    }
    // -ed with at least a three-character stem (called -> call)
    if n >= 5 && !w.ends_with("eed") {
        if let Some(stem) = w.strip_suffix("ed") {
            return undouble(stem).to_string();
        }
    }
    // -es after a sibilant (boxes -> box, glasses -> glass)
    if n >= 5 {
        for sib in ["ss", "sh", "ch", "x", "z"] {
            let suffix = format!("{sib}es");
            if let Some(stem) = w.strip_suffix(&suffix) {
                return format!("{stem}{sib}");
            }
        }
    }
    // plain plural -s, leaving -ss/-us/-is/-as words alone
    if n >= 3
        && w.ends_with('s')
        && !w.ends_with("ss")
        && !w.ends_with("us")
        && !w.ends_with("is")
        && !w.ends_with("as")
    {
        return w[..w.len() - 1].to_string();
    }
    w.to_string()
}

fn undouble(stem: &str) -> &str {
    let chars: Vec<char> = stem.chars().collect();
    let n = chars.len();
    // inflection doubles the final consonant (stopped, running); l/s/z
    // doubles are usually part of the base form (call, press, buzz)
    if n >= 3 && chars[n - 1] == chars[n - 2] && !"aeioulsz".contains(chars[n - 1]) {
        &stem[..stem.len() - chars[n - 1].len_utf8()]
    } else {
        stem
    }
}

/// Apply [`lemmatize`] to every token in place.
pub fn apply_lemmas(tokens: &mut [Token]) {
    for tok in tokens {
        tok.lemma = lemmatize(&tok.surface);
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LexEntry {
    preferred: String,
    alternatives: Vec<String>,
    present_tense_verb: bool,
}

/// Word -> admissible POS tags with a preferred tag, plus the
/// present-tense-verb sublexicon and the color word list used by the
/// bootstrap correction rules.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PosLexicon {
    entries: BTreeMap<String, LexEntry>,
    colors: BTreeSet<String>,
}

impl PosLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Load the word lexicon from a TSV file
    /// (`word \t preferred_tag \t alt_tags \t is_present_tense_verb`)
    /// and the color list from a one-word-per-line file.
    pub fn load(lexicon_path: &Path, colors_path: &Path) -> Result<Self> {
        let mut lex = PosLexicon::new();
        for (lineno, line) in read_lines(lexicon_path)?.iter().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 2 || fields[0].is_empty() || fields[1].is_empty() {
                return Err(Error::Malformed {
                    path: lexicon_path.to_path_buf(),
                    line: lineno + 1,
                    message: "expected `word \\t preferred_tag [\\t alts \\t ptv]`".into(),
                });
            }
            let alts: Vec<String> = fields
                .get(2)
                .map(|s| {
                    s.split(',')
                        .filter(|t| !t.is_empty())
                        .map(str::to_string)
                        .collect()
                })
                .unwrap_or_default();
            let ptv = fields.get(3).map(|s| s.trim() == "1").unwrap_or(false);
            lex.insert(fields[0], fields[1], alts, ptv);
        }
        for line in read_lines(colors_path)? {
            let word = line.trim();
            if !word.is_empty() && !word.starts_with('#') {
                lex.add_color(word);
            }
        }
        Ok(lex)
    }

    pub fn insert(&mut self, word: &str, preferred: &str, alternatives: Vec<String>, ptv: bool) {
        self.entries.insert(
            word.to_lowercase(),
            LexEntry {
                preferred: preferred.to_string(),
                alternatives,
                present_tense_verb: ptv,
            },
        );
    }

    pub fn add_color(&mut self, word: &str) {
        self.colors.insert(word.to_lowercase());
    }

    pub fn preferred_tag(&self, word: &str) -> Option<&str> {
        self.entries
            .get(&word.to_lowercase())
            .map(|e| e.preferred.as_str())
    }

    pub fn admissible_tags(&self, word: &str) -> Vec<&str> {
        match self.entries.get(&word.to_lowercase()) {
            Some(e) => {
                let mut tags = vec![e.preferred.as_str()];
                tags.extend(e.alternatives.iter().map(String::as_str));
                tags
            }
            None => Vec::new(),
        }
    }

    pub fn is_present_tense_verb(&self, word: &str) -> bool {
        self.entries
            .get(&word.to_lowercase())
            .map(|e| e.present_tense_verb)
            .unwrap_or(false)
    }

    pub fn is_color(&self, word: &str) -> bool {
        self.colors.contains(&word.to_lowercase())
    }

    pub fn colors(&self) -> impl Iterator<Item = &str> {
        self.colors.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Tag every token with the lexicon-preferred tag; unknown words default to
/// `NN` and punctuation tokens get the conventional punctuation tags.
pub fn pos_tag(tokens: &mut [Token], lexicon: &PosLexicon) {
    for tok in tokens {
        tok.pos = if !tok.is_word() {
            punct_tag(&tok.surface).to_string()
        } else {
            lexicon
                .preferred_tag(&tok.surface)
                .unwrap_or(DEFAULT_TAG)
                .to_string()
        };
    }
}

fn punct_tag(surface: &str) -> &'static str {
    match surface {
        "." | "!" | "?" => ".",
        "," => ",",
        ":" | ";" => ":",
        _ => "SYM",
    }
}

/// One phrase list entry: phrase tokens plus category metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GazetteerEntry {
    pub phrase: Vec<String>,
    pub categories: Vec<String>,
    pub gender: Option<String>,
    pub list_type: Option<String>,
}

/// Longest-match phrase index compiled from gazetteer TSV files.
///
/// Phrases are indexed by their first token; candidates at a position are
/// tried longest first, so matching is leftmost-longest and match spans never
/// overlap.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GazetteerMatcher {
    version: u32,
    entries: Vec<GazetteerEntry>,
    by_first: BTreeMap<String, Vec<usize>>,
    #[serde(skip)]
    warnings: Vec<String>,
}

impl GazetteerMatcher {
    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    /// Longest entry matching `tokens[start..]`, by lowercased surface.
    pub fn lookup(&self, tokens: &[Token], start: usize) -> Option<&GazetteerEntry> {
        let first = tokens.get(start)?.surface.to_lowercase();
        let candidates = self.by_first.get(&first)?;
        for &idx in candidates {
            let entry = &self.entries[idx];
            if start + entry.phrase.len() > tokens.len() {
                continue;
            }
            let matched = entry
                .phrase
                .iter()
                .enumerate()
                .all(|(k, w)| tokens[start + k].surface.to_lowercase() == *w);
            if matched {
                return Some(entry);
            }
        }
        None
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Artifact {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        std::fs::write(path, json).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let data = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        serde_json::from_str(&data).map_err(|e| Error::Artifact {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// Compile gazetteer TSV files
/// (`phrase \t cat1 \t cat2 \t cat3 \t gender \t list_type`) into a matcher.
/// Duplicate phrases keep the first entry seen and add a warning.
pub fn compile_gazetteer(list_files: &[PathBuf]) -> Result<GazetteerMatcher> {
    let mut matcher = GazetteerMatcher {
        version: 1,
        ..Default::default()
    };
    let mut seen: BTreeMap<Vec<String>, PathBuf> = BTreeMap::new();
    for path in list_files {
        for (lineno, raw) in read_lines(path)?.iter().enumerate() {
            let line = raw.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields[0].trim().is_empty() {
                return Err(Error::Malformed {
                    path: path.clone(),
                    line: lineno + 1,
                    message: "empty phrase".into(),
                });
            }
            let phrase: Vec<String> = fields[0]
                .split_whitespace()
                .map(|w| w.to_lowercase())
                .collect();
            let categories: Vec<String> = (1..=3)
                .filter_map(|i| fields.get(i))
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect();
            if categories.is_empty() {
                return Err(Error::Malformed {
                    path: path.clone(),
                    line: lineno + 1,
                    message: "missing level-1 category".into(),
                });
            }
            let gender = nonempty(fields.get(4));
            let list_type = nonempty(fields.get(5));
            if let Some(first) = seen.get(&phrase) {
                matcher.warnings.push(format!(
                    "duplicate phrase `{}` in {} ignored (first seen in {})",
                    fields[0],
                    path.display(),
                    first.display()
                ));
                continue;
            }
            seen.insert(phrase.clone(), path.clone());
            let idx = matcher.entries.len();
            matcher.entries.push(GazetteerEntry {
                phrase: phrase.clone(),
                categories,
                gender,
                list_type,
            });
            matcher
                .by_first
                .entry(phrase[0].clone())
                .or_default()
                .push(idx);
        }
    }
    // longest phrase first per first token, so lookup returns the longest match
    let entries = &matcher.entries;
    for bucket in matcher.by_first.values_mut() {
        bucket.sort_by(|&a, &b| {
            entries[b]
                .phrase
                .len()
                .cmp(&entries[a].phrase.len())
                .then(a.cmp(&b))
        });
    }
    Ok(matcher)
}

fn nonempty(field: Option<&&str>) -> Option<String> {
    field
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(str::to_string)
}

/// Fill the `ner` field by scanning left to right; at each position the
/// longest matching phrase wins and the scan resumes past it.
pub fn ner_match(tokens: &mut [Token], matcher: &GazetteerMatcher) {
    let mut i = 0;
    while i < tokens.len() {
        let hit = matcher
            .lookup(tokens, i)
            .map(|e| (e.phrase.len(), e.categories.clone(), e.list_type.clone()));
        match hit {
            Some((len, categories, list_type)) => {
                for k in 0..len {
                    tokens[i + k].ner = Some(NerTag {
                        categories: categories.clone(),
                        list_type: list_type.clone(),
                        span_start: i,
                        span_end: i + len,
                    });
                }
                i += len;
            }
            None => i += 1,
        }
    }
}

/// Run the whole lexical pipeline: tokenize, lemmatize, tag, match entities.
pub fn process(text: &str, lexicon: &PosLexicon, matcher: &GazetteerMatcher) -> Vec<Token> {
    let mut tokens = tokenize(text);
    apply_lemmas(&mut tokens);
    pos_tag(&mut tokens, lexicon);
    ner_match(&mut tokens, matcher);
    tokens
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    BufReader::new(file)
        .lines()
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
}
