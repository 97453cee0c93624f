//! L2-regularized logistic and softmax regression fit by accelerated full-batch
//! gradient descent on standardized features.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::sgns::{sigmoid, softplus};

/// Dense row-major feature matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid("feature buffer does not match rows × cols"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("features"));
        }
        Ok(FeatureMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged feature rows"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn select(&self, idx: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Labels {
    Binary(Vec<bool>),
    Multiclass { labels: Vec<usize>, classes: usize },
    Multilabel { sets: Vec<Vec<u32>>, classes: usize },
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Binary(v) => v.len(),
            Labels::Multiclass { labels, .. } => labels.len(),
            Labels::Multilabel { sets, .. } => sets.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub l2: f64,
    pub max_epochs: usize,
    /// Stop once the gradient norm falls below this.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            l2: 1e-4,
            max_epochs: 300,
            tolerance: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Binary,
    Softmax,
    OneVsRest,
}

/// Fitted linear model. Binary models have one weight row; softmax and
/// one-vs-rest models have one per class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: ModelKind,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    mean: Vec<f64>,
    inv_std: Vec<f64>,
}

impl LinearModel {
    fn standardized(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.inv_std)
            .map(|((v, m), s)| (v - m) * s)
            .collect()
    }

    /// Raw linear scores, one per weight row.
    pub fn decision(&self, x: &[f64]) -> Vec<f64> {
        let z = self.standardized(x);
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| dot(w, &z) + b)
            .collect()
    }

    /// Positive-class probability of a binary model.
    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x)[0])
    }

    pub fn predict_binary(&self, x: &[f64]) -> bool {
        self.decision(x)[0] > 0.0
    }

    /// Highest-scoring class (lowest index on ties).
    pub fn predict_class(&self, x: &[f64]) -> usize {
        argsort_desc(&self.decision(x))[0]
    }

    /// The `r` highest-scoring classes.
    pub fn predict_top(&self, x: &[f64], r: usize) -> Vec<u32> {
        let mut top: Vec<u32> = argsort_desc(&self.decision(x))
            .into_iter()
            .take(r)
            .map(|c| c as u32)
            .collect();
        top.sort_unstable();
        top
    }
}

fn argsort_desc(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
    idx
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean logistic loss with L2 on the weights (not the bias).
///
/// Returns `(loss, grad_w, grad_b)`; `targets` are 0 or 1.
pub fn logistic_objective(
    w: &[f64],
    b: f64,
    x: &FeatureMatrix,
    targets: &[f64],
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let n = x.rows() as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; x.cols()];
    let mut gb = 0.0;
    for i in 0..x.rows() {
        let row = x.row(i);
        let z = dot(w, row) + b;
        let y = targets[i];
        loss += softplus(z) - y * z;
        let r = sigmoid(z) - y;
        gb += r;
        for (g, v) in gw.iter_mut().zip(row) {
            *g += r * v;
        }
    }
    loss /= n;
    gb /= n;
    for (g, wj) in gw.iter_mut().zip(w) {
        *g = *g / n + l2 * wj;
    }
    loss += 0.5 * l2 * dot(w, w);
    (loss, gw, gb)
}

/// Mean softmax cross-entropy with L2 on the weights.
///
/// `w` is row-major `classes × cols`. Returns `(loss, grad_w, grad_b)`.
pub fn softmax_objective(
    w: &[f64],
    b: &[f64],
    x: &FeatureMatrix,
    labels: &[usize],
    l2: f64,
) -> (f64, Vec<f64>, Vec<f64>) {
    let k = b.len();
    let d = x.cols();
    let n = x.rows() as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; k * d];
    let mut gb = vec![0.0; k];
    let mut z = vec![0.0; k];
    for i in 0..x.rows() {
        let row = x.row(i);
        for c in 0..k {
            z[c] = dot(&w[c * d..(c + 1) * d], row) + b[c];
        }
        let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = zmax + z.iter().map(|v| (v - zmax).exp()).sum::<f64>().ln();
        loss += lse - z[labels[i]];
        for c in 0..k {
            let p = (z[c] - lse).exp() - if c == labels[i] { 1.0 } else { 0.0 };
            gb[c] += p;
            for (g, v) in gw[c * d..(c + 1) * d].iter_mut().zip(row) {
                *g += p * v;
            }
        }
    }
    loss /= n;
    for g in gb.iter_mut() {
        *g /= n;
    }
    for (g, wj) in gw.iter_mut().zip(w) {
        *g = *g / n + l2 * wj;
    }
    loss += 0.5 * l2 * dot(w, w);
    (loss, gw, gb)
}

/// Largest eigenvalue of `[X 1]ᵀ[X 1] / n` by power iteration.
fn spectral_bound(x: &FeatureMatrix) -> f64 {
    let d = x.cols() + 1;
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut lambda = 1.0;
    for _ in 0..50 {
        let mut out = vec![0.0; d];
        for i in 0..x.rows() {
            let row = x.row(i);
            let s = dot(&v[..d - 1], row) + v[d - 1];
            for (o, r) in out.iter_mut().zip(row) {
                *o += s * r;
            }
            out[d - 1] += s;
        }
        let norm = dot(&out, &out).sqrt() / x.rows() as f64;
        if norm == 0.0 {
            return 1.0;
        }
        lambda = norm;
        v = out.iter().map(|o| o / (norm * x.rows() as f64)).collect();
    }
    lambda
}

/// Nesterov-accelerated gradient descent with adaptive restart.
fn minimize(
    mut params: Vec<f64>,
    step: f64,
    max_iter: usize,
    tol: f64,
    objective: impl Fn(&[f64]) -> (f64, Vec<f64>),
) -> Vec<f64> {
    let mut prev = params.clone();
    let mut momentum_t = 1.0f64;
    let mut last_loss = f64::INFINITY;
    for _ in 0..max_iter {
        let t_next = (1.0 + (1.0 + 4.0 * momentum_t * momentum_t).sqrt()) / 2.0;
        let beta = (momentum_t - 1.0) / t_next;
        let look: Vec<f64> = params
            .iter()
            .zip(&prev)
            .map(|(p, q)| p + beta * (p - q))
            .collect();
        let (loss, grad) = objective(&look);
        let gnorm = dot(&grad, &grad).sqrt();
        if gnorm < tol {
            return look;
        }
        let next: Vec<f64> = look.iter().zip(&grad).map(|(p, g)| p - step * g).collect();
        if loss > last_loss {
            // restart momentum
            momentum_t = 1.0;
        } else {
            momentum_t = t_next;
        }
        last_loss = loss;
        prev = std::mem::replace(&mut params, next);
    }
    params
}

fn standardize(x: &FeatureMatrix) -> (FeatureMatrix, Vec<f64>, Vec<f64>) {
    let (n, d) = (x.rows(), x.cols());
    let mut mean = vec![0.0; d];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; d];
    for i in 0..n {
        for ((s, v), m) in var.iter_mut().zip(x.row(i)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let inv_std: Vec<f64> = var
        .iter()
        .map(|s| {
            let sd = (s / n as f64).sqrt();
            if sd > 1e-12 {
                1.0 / sd
            } else {
                1.0
            }
        })
        .collect();
    let mut data = Vec::with_capacity(n * d);
    for i in 0..n {
        for ((v, m), s) in x.row(i).iter().zip(&mean).zip(&inv_std) {
            data.push((v - m) * s);
        }
    }
    (FeatureMatrix { rows: n, cols: d, data }, mean, inv_std)
}

fn fit_logistic(
    z: &FeatureMatrix,
    targets: &[f64],
    cfg: &ClassifierConfig,
    step: f64,
    stream: u64,
) -> (Vec<f64>, f64) {
    let d = z.cols();
    let mut rng = seed::rng_for(cfg.seed, &[stream]);
    let init: Vec<f64> = (0..=d).map(|_| rng.gen_range(-0.01..0.01)).collect();
    let params = minimize(init, step, cfg.max_epochs, cfg.tolerance, |p| {
        let (loss, mut gw, gb) = logistic_objective(&p[..d], p[d], z, targets, cfg.l2);
        gw.push(gb);
        (loss, gw)
    });
    (params[..d].to_vec(), params[d])
}

/// Fit a classifier. Binary and multiclass inputs need at least two classes
/// present.
pub fn train_classifier(
    features: &FeatureMatrix,
    labels: &Labels,
    config: &ClassifierConfig,
) -> Result<LinearModel> {
    if features.rows() != labels.len() {
        return Err(Error::invalid("features and labels lengths differ"));
    }
    if features.rows() == 0 {
        return Err(Error::Insufficient("no training rows".into()));
    }
    let (z, mean, inv_std) = standardize(features);
    let lambda = spectral_bound(&z);
    let d = z.cols();
    match labels {
        Labels::Binary(y) => {
            let pos = y.iter().filter(|&&v| v).count();
            if pos == 0 || pos == y.len() {
                return Err(Error::Insufficient("binary labels contain one class".into()));
            }
            let targets: Vec<f64> = y.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect();
            let step = 1.0 / (0.25 * lambda + config.l2);
            let (w, b) = fit_logistic(&z, &targets, config, step, 0);
            Ok(LinearModel {
                kind: ModelKind::Binary,
                weights: vec![w],
                bias: vec![b],
                mean,
                inv_std,
            })
        }
        Labels::Multiclass { labels: y, classes } => {
            let k = *classes;
            if y.iter().any(|&c| c >= k) {
                return Err(Error::invalid("class label out of range"));
            }
            let mut present = vec![false; k];
            y.iter().for_each(|&c| present[c] = true);
            if present.iter().filter(|&&p| p).count() < 2 {
                return Err(Error::Insufficient("multiclass labels contain one class".into()));
            }
            let mut rng = seed::rng_for(config.seed, &[0]);
            let init: Vec<f64> = (0..k * (d + 1)).map(|_| rng.gen_range(-0.01..0.01)).collect();
            let step = 1.0 / (0.5 * lambda + config.l2);
            let params = minimize(init, step, config.max_epochs, config.tolerance, |p| {
                let (loss, mut gw, gb) = softmax_objective(&p[..k * d], &p[k * d..], &z, y, config.l2);
                gw.extend(gb);
                (loss, gw)
            });
            Ok(LinearModel {
                kind: ModelKind::Softmax,
                weights: params[..k * d].chunks(d.max(1)).map(<[f64]>::to_vec).take(k).collect(),
                bias: params[k * d..].to_vec(),
                mean,
                inv_std,
            })
        }
        Labels::Multilabel { sets, classes } => {
            let step = 1.0 / (0.25 * lambda + config.l2);
            let mut weights = Vec::with_capacity(*classes);
            let mut bias = Vec::with_capacity(*classes);
            for c in 0..*classes {
                let targets: Vec<f64> = sets
                    .iter()
                    .map(|s| if s.contains(&(c as u32)) { 1.0 } else { 0.0 })
                    .collect();
                let pos = targets.iter().filter(|&&t| t > 0.5).count();
                if pos == 0 || pos == targets.len() {
                    weights.push(vec![0.0; d]);
                    bias.push(if pos == 0 { -30.0 } else { 30.0 });
                    continue;
                }
                let (w, b) = fit_logistic(&z, &targets, config, step, c as u64);
                weights.push(w);
                bias.push(b);
            }
            Ok(LinearModel {
                kind: ModelKind::OneVsRest,
                weights,
                bias,
                mean,
                inv_std,
            })
        }
    }
}

/// Stratified split into (train, test) index lists. Each stratum sends
/// `round(test_fraction · size)` members to test, keeping at least one in
/// train.
pub fn stratified_split(strata: &[usize], test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid("test fraction must lie in (0, 1)"));
    }
    use rand::seq::SliceRandom;
    let k = strata.iter().map(|&s| s + 1).max().unwrap_or(0);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &s) in strata.iter().enumerate() {
        buckets[s].push(i);
    }
    let mut rng = seed::rng(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for bucket in &mut buckets {
        bucket.shuffle(&mut rng);
        let mut t = (bucket.len() as f64 * test_fraction).round() as usize;
        if t >= bucket.len() {
            t = bucket.len().saturating_sub(1);
        }
        test.extend_from_slice(&bucket[..t]);
        train.extend_from_slice(&bucket[t..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
