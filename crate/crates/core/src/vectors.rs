//! Pretrained word embeddings in text format, with cosine similarity.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// Word -> dense vector store with a fixed dimensionality.
///
/// Words are stored lowercase. Out-of-vocabulary similarity is 0.0 so that
/// feature sums over sentences stay well defined.
#[derive(Debug, Clone, Default)]
pub struct VectorStore {
    vectors: BTreeMap<String, Vec<f64>>,
    norms: BTreeMap<String, f64>,
    dim: usize,
}

impl VectorStore {
    /// Load a text-format vector file: one `word v1 v2 ... vd` entry per
    /// line. The dimension is inferred from the first row; rows with a
    /// different arity are rejected with their line number.
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut store = VectorStore::default();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap().to_lowercase();
            let values: Vec<f64> = parts
                .map(|p| {
                    p.parse::<f64>().map_err(|_| Error::Malformed {
                        path: path.to_path_buf(),
                        line: lineno + 1,
                        message: format!("`{p}` is not a number"),
                    })
                })
                .collect::<Result<_>>()?;
            if values.is_empty() {
                return Err(Error::Malformed {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: "row has no vector components".into(),
                });
            }
            if store.dim == 0 {
                store.dim = values.len();
            } else if values.len() != store.dim {
                return Err(Error::Malformed {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: format!(
                        "dimension mismatch: row has {} components, expected {}",
                        values.len(),
                        store.dim
                    ),
                });
            }
            if store.vectors.contains_key(&word) {
                continue;
            }
            store.insert(&word, values);
        }
        if store.vectors.is_empty() {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                line: 0,
                message: "vector file is empty".into(),
            });
        }
        Ok(store)
    }

    pub fn insert(&mut self, word: &str, values: Vec<f64>) {
        if self.dim == 0 {
            self.dim = values.len();
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        let word = word.to_lowercase();
        if norm == 0.0 {
            eprintln!("warning: vector for `{word}` has zero norm");
        }
        self.norms.insert(word.clone(), norm);
        self.vectors.insert(word, values);
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(&word.to_lowercase()).map(Vec::as_slice)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab_size(&self) -> usize {
        self.vectors.len()
    }

    /// Cosine similarity of two stored words. Returns 0.0 when either word
    /// is out of vocabulary or has a zero-norm vector.
    pub fn cosine(&self, w1: &str, w2: &str) -> f64 {
        let w1 = w1.to_lowercase();
        let w2 = w2.to_lowercase();
        let (Some(a), Some(b)) = (self.vectors.get(&w1), self.vectors.get(&w2)) else {
            return 0.0;
        };
        let (na, nb) = (self.norms[&w1], self.norms[&w2]);
        if na == 0.0 || nb == 0.0 {
            return 0.0;
        }
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn store_from(text: &str) -> Result<VectorStore> {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(text.as_bytes()).unwrap();
        VectorStore::load(file.path())
    }

    #[test]
    fn load_two_rows() {
        let store = store_from("a 1 0\nb 0 1\n").unwrap();
        assert_eq!(store.dim(), 2);
        assert_eq!(store.vocab_size(), 2);
        assert_eq!(store.get("a"), Some(&[1.0, 0.0][..]));
    }

    #[test]
    fn dimension_mismatch_reports_line() {
        let err = store_from("a 1 0\nb 0 1 2\n").unwrap_err();
        match err {
            Error::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(store_from("").is_err());
    }

    #[test]
    fn fixture_file_loads() {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/vectors.txt");
        let store = VectorStore::load(&path).unwrap();
        assert_eq!(store.vocab_size(), 100);
        assert_eq!(store.dim(), 4);
        // spot checks against the literal file contents
        assert_eq!(store.get("sweater"), Some(&[2.0, 0.0, 0.0, 0.6][..]));
        assert_eq!(store.get("call"), Some(&[0.0, 2.0, 0.0, 0.4][..]));
        assert_eq!(store.get("john"), Some(&[0.0, 0.0, 0.0, 2.0][..]));
    }

    #[test]
    fn cosine_identity_and_orthogonal() {
        let store = store_from("a 1 0\nb 0 1\nc 3 4\n").unwrap();
        assert_eq!(store.cosine("a", "a"), 1.0);
        assert_eq!(store.cosine("c", "c"), 1.0);
        assert_eq!(store.cosine("a", "b"), 0.0);
    }

    #[test]
    fn cosine_oov_is_zero() {
        let store = store_from("a 1 0\n").unwrap();
        assert_eq!(store.cosine("a", "missing"), 0.0);
        assert_eq!(store.cosine("missing", "missing"), 0.0);
    }

    #[test]
    fn cosine_zero_norm_is_zero() {
        let store = store_from("a 1 0\nz 0 0\n").unwrap();
        assert_eq!(store.cosine("a", "z"), 0.0);
    }

    proptest! {
        #[test]
        fn cosine_matches_direct_arithmetic(
            a in proptest::collection::vec(-10.0f64..10.0, 3),
            b in proptest::collection::vec(-10.0f64..10.0, 3),
        ) {
            let mut store = VectorStore::default();
            store.insert("a", a.clone());
            store.insert("b", b.clone());
            let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            let expected = if na == 0.0 || nb == 0.0 { 0.0 } else { dot / (na * nb) };
            prop_assert!((store.cosine("a", "b") - expected.clamp(-1.0, 1.0)).abs() < 1e-12);
        }

        #[test]
        fn cosine_symmetric_and_bounded(
            a in proptest::collection::vec(-5.0f64..5.0, 4),
            b in proptest::collection::vec(-5.0f64..5.0, 4),
        ) {
            let mut store = VectorStore::default();
            store.insert("a", a);
            store.insert("b", b);
            prop_assert_eq!(store.cosine("a", "b"), store.cosine("b", "a"));
            prop_assert!(store.cosine("a", "b").abs() <= 1.0 + 1e-12);
        }

        #[test]
        fn cosine_scale_invariant(
            a in proptest::collection::vec(0.1f64..5.0, 3),
            b in proptest::collection::vec(0.1f64..5.0, 3),
            lambda in 0.01f64..100.0,
        ) {
            let mut s1 = VectorStore::default();
            s1.insert("a", a.clone());
            s1.insert("b", b.clone());
            let mut s2 = VectorStore::default();
            s2.insert("a", a.iter().map(|x| x * lambda).collect());
            s2.insert("b", b);
            prop_assert!((s1.cosine("a", "b") - s2.cosine("a", "b")).abs() < 1e-9);
        }
    }
}
