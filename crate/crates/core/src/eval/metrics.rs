use crate::error::{Error, Result};

/// Micro-averaged F1 over pooled (node, label) decisions:
/// `2 TP / (2 TP + FP + FN)`. Returns 0 when there is nothing to count.
pub fn micro_f1<P: AsRef<[u32]>, T: AsRef<[u32]>>(predicted: &[P], truth: &[T]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::invalid("prediction and truth lengths differ"));
    }
    if predicted.is_empty() {
        return Err(Error::Insufficient("no instances".into()));
    }
    let (mut tp, mut fp, mut fneg) = (0u64, 0u64, 0u64);
    for (p, t) in predicted.iter().zip(truth) {
        let mut p = p.as_ref().to_vec();
        let mut t = t.as_ref().to_vec();
        p.sort_unstable();
        p.dedup();
        t.sort_unstable();
        t.dedup();
        let hit = p.iter().filter(|x| t.binary_search(x).is_ok()).count() as u64;
        tp += hit;
        fp += p.len() as u64 - hit;
        fneg += t.len() as u64 - hit;
    }
    let denom = 2 * tp + fp + fneg;
    Ok(if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl Confusion {
    pub fn from_predictions(predicted: &[bool], truth: &[bool]) -> Self {
        let mut c = Confusion::default();
        for (&p, &t) in predicted.iter().zip(truth) {
            match (p, t) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// F1 of the positive class.
pub fn binary_f1(predicted: &[bool], truth: &[bool]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::invalid("prediction and truth lengths differ"));
    }
    if predicted.is_empty() {
        return Err(Error::Insufficient("no instances".into()));
    }
    let c = Confusion::from_predictions(predicted, truth);
    let denom = 2 * c.tp + c.fp + c.fn_;
    Ok(ratio(2 * c.tp, denom))
}

/// Area under the ROC curve from average ranks; tied scores count one half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::invalid("scores and labels lengths differ"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("auc scores"));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Insufficient("auc needs both classes".into()));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Ranks are 1-based; a tie block spanning ranks i+1..=j shares their mean.
    // Doubled ranks keep the sum integral.
    let mut doubled_rank_sum: u128 = 0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && scores[idx[j]] == scores[idx[i]] {
            j += 1;
        }
        let doubled = (i + 1 + j) as u128;
        for &k in &idx[i..j] {
            if labels[k] {
                doubled_rank_sum += doubled;
            }
        }
        i = j;
    }
    let pos128 = pos as u128;
    let doubled_u = doubled_rank_sum - pos128 * (pos128 + 1);
    Ok(doubled_u as f64 / (2.0 * pos as f64 * neg as f64))
}
