//! Classification reports: confusion matrix, per-class precision/recall/F1,
//! micro accuracy and macro F, with an optional per-fold breakdown.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldStats {
    pub fold: usize,
    pub size: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
}

/// Aggregated evaluation over gold/predicted label pairs. Confusion rows are
/// gold labels, columns are predictions; row sums equal class support and
/// accuracy is trace over total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub labels: Vec<String>,
    pub confusion: Vec<Vec<u64>>,
    pub per_class: BTreeMap<String, ClassMetrics>,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub total: u64,
    pub folds: Vec<FoldStats>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Build a report from aligned gold and predicted labels. `fold_of`, when
/// given, assigns each pair to a fold for the per-fold breakdown.
pub fn build_report(
    gold: &[String],
    predicted: &[String],
    fold_of: Option<&[usize]>,
) -> EvalReport {
    assert_eq!(gold.len(), predicted.len());
    let mut labels: Vec<String> = gold.iter().chain(predicted.iter()).cloned().collect();
    labels.sort_unstable();
    labels.dedup();
    let index: BTreeMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();

    let k = labels.len();
    let mut confusion = vec![vec![0u64; k]; k];
    for (g, p) in gold.iter().zip(predicted) {
        confusion[index[g.as_str()]][index[p.as_str()]] += 1;
    }

    let mut per_class = BTreeMap::new();
    let mut macro_f1 = 0.0;
    for (i, label) in labels.iter().enumerate() {
        let tp = confusion[i][i];
        let support: u64 = confusion[i].iter().sum();
        let predicted_count: u64 = confusion.iter().map(|row| row[i]).sum();
        let precision = ratio(tp, predicted_count);
        let recall = ratio(tp, support);
        let f = f1(precision, recall);
        macro_f1 += f;
        per_class.insert(
            label.clone(),
            ClassMetrics {
                precision,
                recall,
                f1: f,
                support,
            },
        );
    }
    if k > 0 {
        macro_f1 /= k as f64;
    }

    let total = gold.len() as u64;
    let correct = gold.iter().zip(predicted).filter(|(g, p)| g == p).count() as u64;

    let folds = match fold_of {
        None => Vec::new(),
        Some(assignment) => {
            assert_eq!(assignment.len(), gold.len());
            let fold_count = assignment.iter().copied().max().map(|m| m + 1).unwrap_or(0);
            (0..fold_count)
                .map(|f| {
                    let idx: Vec<usize> = (0..gold.len()).filter(|&i| assignment[i] == f).collect();
                    let sub_gold: Vec<String> = idx.iter().map(|&i| gold[i].clone()).collect();
                    let sub_pred: Vec<String> = idx.iter().map(|&i| predicted[i].clone()).collect();
                    let sub = build_report(&sub_gold, &sub_pred, None);
                    FoldStats {
                        fold: f,
                        size: idx.len(),
                        accuracy: sub.accuracy,
                        macro_f1: sub.macro_f1,
                    }
                })
                .collect()
        }
    };

    EvalReport {
        labels,
        confusion,
        per_class,
        accuracy: ratio(correct, total),
        macro_f1,
        total,
        folds,
    }
}

impl EvalReport {
    /// Aligned plain-text table of the per-class metrics and totals.
    pub fn to_text_table(&self) -> String {
        let mut out = String::new();
        let width = self
            .labels
            .iter()
            .map(|l| l.len())
            .chain(std::iter::once("class".len()))
            .max()
            .unwrap_or(5);
        out.push_str(&format!(
            "{:<width$}  {:>9}  {:>9}  {:>9}  {:>8}\n",
            "class", "precision", "recall", "f1", "support"
        ));
        for label in &self.labels {
            let m = &self.per_class[label];
            out.push_str(&format!(
                "{label:<width$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>8}\n",
                m.precision, m.recall, m.f1, m.support
            ));
        }
        out.push_str(&format!(
            "\naccuracy {:.4}  macro-f1 {:.4}  total {}\n",
            self.accuracy, self.macro_f1, self.total
        ));
        if !self.folds.is_empty() {
            out.push_str("\nfold  size  accuracy  macro-f1\n");
            for f in &self.folds {
                out.push_str(&format!(
                    "{:>4}  {:>4}  {:>8.4}  {:>8.4}\n",
                    f.fold, f.size, f.accuracy, f.macro_f1
                ));
            }
        }
        out
    }
}
