//! Binary classification metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbdt::{GbdtModel, LabeledExample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub auc: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl EvalMetrics {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Metrics for `(score, label)` pairs; a score counts as positive when it
/// is strictly above `threshold`.
pub fn metrics_from_scores(scored: &[(f64, u8)], threshold: f64) -> Result<EvalMetrics> {
    if scored.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for &(score, label) in scored {
        match (score > threshold, label == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    Ok(EvalMetrics {
        accuracy: ratio(tp + tn, scored.len()),
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        auc: auc(scored),
        tp,
        fp,
        tn,
        fn_,
    })
}

/// ROC AUC as the Mann-Whitney rank statistic; tied scores share their
/// average rank, so each tied positive/negative pair contributes ½.
/// Returns 0.5 when either class is absent.
pub fn auc(scored: &[(f64, u8)]) -> f64 {
    let n_pos = scored.iter().filter(|(_, y)| *y == 1).count();
    let n_neg = scored.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return 0.5;
    }
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[a].0.total_cmp(&scored[b].0));

    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scored[order[j + 1]].0 == scored[order[i]].0 {
            j += 1;
        }
        // ranks are 1-based
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        let positives = order[i..=j].iter().filter(|&&k| scored[k].1 == 1).count();
        pos_rank_sum += avg_rank * positives as f64;
        i = j + 1;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n)
}

pub fn evaluate(model: &GbdtModel, examples: &[LabeledExample], threshold: f64) -> Result<EvalMetrics> {
    if examples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let scored = examples
        .iter()
        .map(|e| model.predict_proba(&e.vector).map(|s| (s, e.label)))
        .collect::<Result<Vec<_>>>()?;
    metrics_from_scores(&scored, threshold)
}
