//! Closed-form evaluation metrics: layout balance, ROUGE-L, MAE, defect
//! category F1 and pairwise comparison accuracy.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::slide::{check_label_set, DefectCategory, InvalidLabelSet, LabelSet, SlideDoc};

/// Largest possible distance from the canvas center in the unit square.
pub const D_MAX: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("slide has no non-background elements")]
    NoElements,
    #[error("empty token sequence")]
    EmptyInput,
    #[error("length mismatch: {left} predictions vs {right} truths")]
    LengthMismatch { left: usize, right: usize },
    #[error("no samples")]
    Empty,
    #[error(transparent)]
    InvalidLabelSet(#[from] InvalidLabelSet),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceBreakdown {
    pub com_x: f64,
    pub com_y: f64,
    /// Distance from the center of mass to (0.5, 0.5).
    pub d: f64,
    pub balance: f64,
}

/// Balance of a set of `(area, center_x, center_y)` masses.
pub fn balance_from_masses<I>(masses: I) -> Result<BalanceBreakdown, MetricsError>
where
    I: IntoIterator<Item = (f64, f64, f64)>,
{
    let (mut total, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for (a, cx, cy) in masses {
        total += a;
        sx += a * cx;
        sy += a * cy;
    }
    if total <= 0.0 {
        return Err(MetricsError::NoElements);
    }
    let com_x = sx / total;
    let com_y = sy / total;
    let d = (com_x - 0.5).hypot(com_y - 0.5);
    Ok(BalanceBreakdown {
        com_x,
        com_y,
        d,
        balance: (1.0 - d / D_MAX).max(0.0),
    })
}

/// Area-weighted center of mass of the content elements and its balance
/// score `max(0, 1 - d / d_max)`.
pub fn layout_balance(slide: &SlideDoc) -> Result<BalanceBreakdown, MetricsError> {
    balance_from_masses(slide.content().map(|e| {
        let (cx, cy) = e.bbox.center();
        (e.bbox.area(), cx, cy)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeResult {
    pub lcs_len: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

/// Lowercases, strips punctuation and splits on whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| {
            w.chars()
                .filter(|c| !c.is_ascii_punctuation() && !c.is_ascii_control())
                .flat_map(char::to_lowercase)
                .collect::<String>()
        })
        .filter(|w| !w.is_empty())
        .collect()
}

/// Length of the longest common subsequence, two-row dynamic program.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L of a candidate `X` against a reference `Y`:
/// `R = LCS/|Y|`, `P = LCS/|X|`, `F = (1+β²)RP / (β²R + P)`.
pub fn rouge_l<T: PartialEq>(candidate: &[T], reference: &[T], beta: f64) -> Result<RougeResult, MetricsError> {
    if candidate.is_empty() || reference.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let lcs = lcs_len(candidate, reference);
    let precision = lcs as f64 / candidate.len() as f64;
    let recall = lcs as f64 / reference.len() as f64;
    let b2 = beta * beta;
    let f_score = if precision == 0.0 && recall == 0.0 {
        0.0
    } else {
        (1.0 + b2) * recall * precision / (b2 * recall + precision)
    };
    Ok(RougeResult {
        lcs_len: lcs,
        precision,
        recall,
        f_score,
    })
}

pub fn rouge_l_text(candidate: &str, reference: &str, beta: f64) -> Result<RougeResult, MetricsError> {
    rouge_l(&tokenize(candidate), &tokenize(reference), beta)
}

pub fn mae(predictions: &[f64], truths: &[f64]) -> Result<f64, MetricsError> {
    if predictions.len() != truths.len() {
        return Err(MetricsError::LengthMismatch {
            left: predictions.len(),
            right: truths.len(),
        });
    }
    if predictions.is_empty() {
        return Err(MetricsError::Empty);
    }
    let sum: f64 = predictions.iter().zip(truths).map(|(p, t)| (p - t).abs()).sum();
    Ok(sum / predictions.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Set-overlap precision/recall/F1 between predicted and true labels.
///
/// F1 is computed as `2|P∩T| / (|P| + |T|)`, which equals the harmonic mean
/// of precision and recall and is 0 when both are 0. The truth set must be
/// nonempty; an empty prediction scores zero.
pub fn defect_f1(predicted: &LabelSet, truth: &LabelSet) -> Result<PairScores, MetricsError> {
    check_label_set(predicted)?;
    check_label_set(truth)?;
    if truth.is_empty() {
        return Err(InvalidLabelSet("empty truth label set").into());
    }
    let hits = predicted.intersection(truth).count() as f64;
    let precision = if predicted.is_empty() { 0.0 } else { hits / predicted.len() as f64 };
    let recall = hits / truth.len() as f64;
    let f1 = 2.0 * hits / (predicted.len() + truth.len()) as f64;
    Ok(PairScores { precision, recall, f1 })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of records whose truth contains the category.
    pub support: usize,
    pub predicted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectF1Report {
    pub per_category: BTreeMap<String, CategoryScores>,
    /// Unweighted mean F1 over the three defect categories.
    pub macro_f1: f64,
    /// Mean of the per-record set F1.
    pub mean_pair_f1: f64,
    pub samples: usize,
}

/// Per-category one-vs-rest scores over a labeled dataset.
pub fn defect_f1_report(pairs: &[(LabelSet, LabelSet)]) -> Result<DefectF1Report, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut pair_f1_sum = 0.0;
    for (pred, truth) in pairs {
        pair_f1_sum += defect_f1(pred, truth)?.f1;
    }

    let mut per_category = BTreeMap::new();
    for cat in DefectCategory::ALL {
        let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
        for (pred, truth) in pairs {
            match (pred.contains(&cat), truth.contains(&cat)) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fneg += 1,
                (false, false) => {}
            }
        }
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        per_category.insert(
            cat.key().to_owned(),
            CategoryScores {
                precision: ratio(tp, tp + fp),
                recall: ratio(tp, tp + fneg),
                f1: ratio(2 * tp, 2 * tp + fp + fneg),
                support: tp + fneg,
                predicted: tp + fp,
            },
        );
    }
    let macro_f1 = DefectCategory::DEFECTS
        .iter()
        .map(|c| per_category[c.key()].f1)
        .sum::<f64>()
        / DefectCategory::DEFECTS.len() as f64;

    Ok(DefectF1Report {
        per_category,
        macro_f1,
        mean_pair_f1: pair_f1_sum / pairs.len() as f64,
        samples: pairs.len(),
    })
}

/// Which of two slides is preferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Choice {
    A,
    B,
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Choice::A => "Slide A",
            Choice::B => "Slide B",
        })
    }
}

pub fn comparison_accuracy(predictions: &[Choice], truths: &[Choice]) -> Result<f64, MetricsError> {
    if predictions.len() != truths.len() {
        return Err(MetricsError::LengthMismatch {
            left: predictions.len(),
            right: truths.len(),
        });
    }
    if predictions.is_empty() {
        return Err(MetricsError::Empty);
    }
    let hits = predictions.iter().zip(truths).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / predictions.len() as f64)
}
