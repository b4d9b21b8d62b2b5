//! Evaluation harness: link-prediction splits and mean average precision
//! with fixed or learned decoders, and one-vs-rest logistic-regression node
//! classification with micro/macro F1.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::embedding::{sigmoid, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeLabels};
use crate::rng::{stream_rng, Stream};

/// Held-out positives with per-query negative candidates, plus the graph
/// with those positives removed.
#[derive(Debug, Clone)]
pub struct LinkSplit {
    pub train_graph: Graph,
    pub val_positives: Vec<(u32, u32)>,
    pub test_positives: Vec<(u32, u32)>,
    pub val_negatives: Vec<Vec<(u32, u32)>>,
    pub test_negatives: Vec<Vec<(u32, u32)>>,
    pub negatives_per_positive: usize,
}

fn sample_negatives(
    g: &Graph,
    count: usize,
    rng: &mut impl Rng,
) -> Vec<(u32, u32)> {
    let n = g.num_nodes() as u32;
    let mut negs = Vec::with_capacity(count);
    while negs.len() < count {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b || g.has_edge(a as usize, b as usize) {
            continue;
        }
        let pair = (a.min(b), a.max(b));
        if !negs.contains(&pair) {
            negs.push(pair);
        }
    }
    negs
}

/// Hold out `val_frac`/`test_frac` of the edges as positives, rejecting any
/// removal that would strand an endpoint at degree 0, and draw `negatives`
/// distinct uniform non-edges per positive (collisions allowed across
/// queries).
pub fn make_link_split(
    g: &Graph,
    val_frac: f64,
    test_frac: f64,
    negatives: usize,
    seed: u64,
) -> Result<LinkSplit> {
    let mut edges: Vec<(u32, u32)> = g
        .edges()
        .filter(|&(u, v, _)| u != v)
        .map(|(u, v, _)| (u, v))
        .collect();
    let m = edges.len();
    let want_val = (val_frac * m as f64).round() as usize;
    let want_test = (test_frac * m as f64).round() as usize;
    let mut rng = stream_rng(seed, Stream::LinkSplit, 0);
    edges.shuffle(&mut rng);

    let mut degree: Vec<usize> = vec![0; g.num_nodes()];
    for &(u, v) in &edges {
        degree[u as usize] += 1;
        degree[v as usize] += 1;
    }
    let mut held = Vec::with_capacity(want_val + want_test);
    let mut kept = Vec::with_capacity(m);
    for (u, v) in edges {
        if held.len() < want_val + want_test && degree[u as usize] > 1 && degree[v as usize] > 1 {
            degree[u as usize] -= 1;
            degree[v as usize] -= 1;
            held.push((u, v));
        } else {
            kept.push((u, v, 1.0));
        }
    }
    if held.len() < want_val + want_test {
        return Err(Error::Infeasible(format!(
            "only {} of {} requested positives removable without stranding a node",
            held.len(),
            want_val + want_test
        )));
    }
    let train_graph = Graph::from_edges(g.num_nodes(), &kept)?;
    let val_positives: Vec<_> = held[..want_val].to_vec();
    let test_positives: Vec<_> = held[want_val..].to_vec();
    let val_negatives = val_positives
        .iter()
        .map(|_| sample_negatives(g, negatives, &mut rng))
        .collect();
    let test_negatives = test_positives
        .iter()
        .map(|_| sample_negatives(g, negatives, &mut rng))
        .collect();
    Ok(LinkSplit {
        train_graph,
        val_positives,
        test_positives,
        val_negatives,
        test_negatives,
        negatives_per_positive: negatives,
    })
}

/// Edge scorer over the element-wise product of endpoint embeddings.
#[derive(Debug, Clone)]
pub enum DecoderModel {
    /// Parameter-free inner product.
    SigmoidDot,
    /// Learned diagonal bilinear form.
    DistMult { relation: Vec<f64> },
    /// One rectified hidden layer, then a scalar output.
    Mlp2 {
        w1: Vec<Vec<f64>>,
        b1: Vec<f64>,
        w2: Vec<f64>,
        b2: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    SigmoidDot,
    DistMult,
    Mlp2,
}

impl DecoderModel {
    pub fn score(&self, x: &EmbeddingMatrix, u: u32, v: u32) -> f64 {
        let p: Vec<f64> = x
            .row(u as usize)
            .iter()
            .zip(x.row(v as usize))
            .map(|(a, b)| a * b)
            .collect();
        self.score_product(&p)
    }

    fn score_product(&self, p: &[f64]) -> f64 {
        match self {
            DecoderModel::SigmoidDot => p.iter().sum(),
            DecoderModel::DistMult { relation } => {
                relation.iter().zip(p).map(|(r, q)| r * q).sum()
            }
            DecoderModel::Mlp2 { w1, b1, w2, b2 } => {
                let mut out = *b2;
                for ((row, b), wo) in w1.iter().zip(b1).zip(w2) {
                    let h = row.iter().zip(p).map(|(w, q)| w * q).sum::<f64>() + b;
                    if h > 0.0 {
                        out += wo * h;
                    }
                }
                out
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            DecoderModel::SigmoidDot => true,
            DecoderModel::DistMult { relation } => relation.iter().all(|v| v.is_finite()),
            DecoderModel::Mlp2 { w1, b1, w2, b2 } => {
                w1.iter().flatten().all(|v| v.is_finite())
                    && b1.iter().all(|v| v.is_finite())
                    && w2.iter().all(|v| v.is_finite())
                    && b2.is_finite()
            }
        }
    }
}

fn average_precision(
    x: &EmbeddingMatrix,
    decoder: &DecoderModel,
    positive: (u32, u32),
    negatives: &[(u32, u32)],
) -> f64 {
    let pos = decoder.score(x, positive.0, positive.1);
    // Pessimistic ties: every negative scoring >= the positive outranks it.
    let rank = 1 + negatives
        .iter()
        .filter(|&&(a, b)| decoder.score(x, a, b) >= pos)
        .count();
    1.0 / rank as f64
}

fn mean_ap(
    x: &EmbeddingMatrix,
    decoder: &DecoderModel,
    positives: &[(u32, u32)],
    negatives: &[Vec<(u32, u32)>],
) -> f64 {
    if positives.is_empty() {
        return 0.0;
    }
    let total: f64 = positives
        .par_iter()
        .zip(negatives)
        .map(|(p, negs)| average_precision(x, decoder, *p, negs))
        .sum();
    total / positives.len() as f64
}

/// MAP over the split's test queries: each query's average precision is
/// 1/rank of the positive among its negatives.
pub fn map_score(x: &EmbeddingMatrix, split: &LinkSplit, decoder: &DecoderModel) -> f64 {
    mean_ap(x, decoder, &split.test_positives, &split.test_negatives)
}

/// One supervised decoder example: an element-wise embedding product with a
/// 0/1 edge label.
#[derive(Debug, Clone)]
pub struct DecoderSample {
    pub product: Vec<f64>,
    pub label: f64,
}

/// Mean binary cross-entropy over `samples` and its exact gradient, packed
/// into a model-shaped container.
pub fn decoder_loss_and_grad(
    model: &DecoderModel,
    samples: &[DecoderSample],
) -> (f64, DecoderModel) {
    let n = samples.len() as f64;
    match model {
        DecoderModel::SigmoidDot => (
            samples
                .iter()
                .map(|s| bce(model.score_product(&s.product), s.label))
                .sum::<f64>()
                / n,
            DecoderModel::SigmoidDot,
        ),
        DecoderModel::DistMult { relation } => {
            let mut loss = 0.0;
            let mut grad = vec![0.0; relation.len()];
            for s in samples {
                let z = model.score_product(&s.product);
                loss += bce(z, s.label);
                let coeff = (sigmoid(z) - s.label) / n;
                for (g, p) in grad.iter_mut().zip(&s.product) {
                    *g += coeff * p;
                }
            }
            (loss / n, DecoderModel::DistMult { relation: grad })
        }
        DecoderModel::Mlp2 { w1, b1, w2, .. } => {
            let hidden = w1.len();
            let dim = w1[0].len();
            let mut loss = 0.0;
            let mut gw1 = vec![vec![0.0; dim]; hidden];
            let mut gb1 = vec![0.0; hidden];
            let mut gw2 = vec![0.0; hidden];
            let mut gb2 = 0.0;
            for s in samples {
                let pre: Vec<f64> = w1
                    .iter()
                    .zip(b1)
                    .map(|(row, b)| row.iter().zip(&s.product).map(|(w, p)| w * p).sum::<f64>() + b)
                    .collect();
                let z = pre
                    .iter()
                    .zip(w2)
                    .map(|(h, wo)| if *h > 0.0 { h * wo } else { 0.0 })
                    .sum::<f64>()
                    + match model {
                        DecoderModel::Mlp2 { b2, .. } => *b2,
                        _ => unreachable!(),
                    };
                loss += bce(z, s.label);
                let dz = (sigmoid(z) - s.label) / n;
                gb2 += dz;
                for i in 0..hidden {
                    if pre[i] > 0.0 {
                        gw2[i] += dz * pre[i];
                        let dh = dz * w2[i];
                        gb1[i] += dh;
                        for (g, p) in gw1[i].iter_mut().zip(&s.product) {
                            *g += dh * p;
                        }
                    }
                }
            }
            (
                loss / n,
                DecoderModel::Mlp2 {
                    w1: gw1,
                    b1: gb1,
                    w2: gw2,
                    b2: gb2,
                },
            )
        }
    }
}

fn bce(z: f64, label: f64) -> f64 {
    // -label*log sigma(z) - (1-label)*log sigma(-z), numerically stable.
    let log_s = crate::embedding::log_sigmoid(z);
    let log_1ms = crate::embedding::log_sigmoid(-z);
    -label * log_s - (1.0 - label) * log_1ms
}

fn apply_decoder_step(model: &mut DecoderModel, grad: &DecoderModel, lr: f64) {
    match (model, grad) {
        (DecoderModel::SigmoidDot, _) => {}
        (DecoderModel::DistMult { relation }, DecoderModel::DistMult { relation: g }) => {
            for (r, gv) in relation.iter_mut().zip(g) {
                *r -= lr * gv;
            }
        }
        (
            DecoderModel::Mlp2 { w1, b1, w2, b2 },
            DecoderModel::Mlp2 {
                w1: gw1,
                b1: gb1,
                w2: gw2,
                b2: gb2,
            },
        ) => {
            for (row, grow) in w1.iter_mut().zip(gw1) {
                for (w, g) in row.iter_mut().zip(grow) {
                    *w -= lr * g;
                }
            }
            for (b, g) in b1.iter_mut().zip(gb1) {
                *b -= lr * g;
            }
            for (w, g) in w2.iter_mut().zip(gw2) {
                *w -= lr * g;
            }
            *b2 -= lr * gb2;
        }
        _ => unreachable!("gradient kind matches model kind"),
    }
}

#[derive(Debug, Clone)]
pub struct DecoderFitParams {
    pub negatives_per_positive: usize,
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
    pub hidden: usize,
    pub learning_rate: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for DecoderFitParams {
    fn default() -> Self {
        DecoderFitParams {
            negatives_per_positive: 20,
            train_frac: 0.02,
            val_frac: 0.01,
            test_frac: 0.01,
            hidden: 128,
            learning_rate: 0.5,
            iterations: 300,
            seed: 0,
        }
    }
}

/// Train a decoder on its own edge split of `g` (positives labeled 1, drawn
/// non-edges labeled 0) by full-batch gradient descent on binary
/// cross-entropy; the snapshot with the best validation AP is scored on the
/// held-out test queries.
pub fn fit_decoder(
    x: &EmbeddingMatrix,
    g: &Graph,
    kind: DecoderKind,
    params: &DecoderFitParams,
) -> Result<(DecoderModel, f64)> {
    let mut edges: Vec<(u32, u32)> = g
        .edges()
        .filter(|&(u, v, _)| u != v)
        .map(|(u, v, _)| (u, v))
        .collect();
    let m = edges.len();
    let mut rng = stream_rng(params.seed, Stream::DecoderSplit, 0);
    edges.shuffle(&mut rng);
    let n_train = ((params.train_frac * m as f64).round() as usize).max(1);
    let n_val = ((params.val_frac * m as f64).round() as usize).max(1);
    let n_test = ((params.test_frac * m as f64).round() as usize).max(1);
    if n_train + n_val + n_test > m {
        return Err(Error::Infeasible("graph too small for decoder split".into()));
    }
    let train_pos = &edges[..n_train];
    let val_pos = &edges[n_train..n_train + n_val];
    let test_pos = &edges[n_train + n_val..n_train + n_val + n_test];

    let mut samples = Vec::with_capacity(n_train * (1 + params.negatives_per_positive));
    let product = |(u, v): (u32, u32)| -> Vec<f64> {
        x.row(u as usize)
            .iter()
            .zip(x.row(v as usize))
            .map(|(a, b)| a * b)
            .collect()
    };
    for &pos in train_pos {
        samples.push(DecoderSample {
            product: product(pos),
            label: 1.0,
        });
        for neg in sample_negatives(g, params.negatives_per_positive, &mut rng) {
            samples.push(DecoderSample {
                product: product(neg),
                label: 0.0,
            });
        }
    }
    let val_negs: Vec<Vec<(u32, u32)>> = val_pos
        .iter()
        .map(|_| sample_negatives(g, params.negatives_per_positive, &mut rng))
        .collect();
    let test_negs: Vec<Vec<(u32, u32)>> = test_pos
        .iter()
        .map(|_| sample_negatives(g, params.negatives_per_positive, &mut rng))
        .collect();

    let dim = x.dim();
    let mut init_rng = stream_rng(params.seed, Stream::DecoderInit, 0);
    let mut model = match kind {
        DecoderKind::SigmoidDot => DecoderModel::SigmoidDot,
        DecoderKind::DistMult => DecoderModel::DistMult {
            relation: (0..dim).map(|_| init_rng.gen::<f64>() - 0.5).collect(),
        },
        DecoderKind::Mlp2 => {
            let scale = (1.0 / dim as f64).sqrt();
            DecoderModel::Mlp2 {
                w1: (0..params.hidden)
                    .map(|_| (0..dim).map(|_| (init_rng.gen::<f64>() - 0.5) * scale).collect())
                    .collect(),
                b1: vec![0.0; params.hidden],
                w2: (0..params.hidden)
                    .map(|_| (init_rng.gen::<f64>() - 0.5) * scale)
                    .collect(),
                b2: 0.0,
            }
        }
    };

    let mut best = model.clone();
    let mut best_ap = mean_ap(x, &model, val_pos, &val_negs);
    for it in 0..params.iterations {
        let (loss, grad) = decoder_loss_and_grad(&model, &samples);
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("decoder training at step {it}")));
        }
        apply_decoder_step(&mut model, &grad, params.learning_rate);
        if (it + 1) % 10 == 0 {
            let ap = mean_ap(x, &model, val_pos, &val_negs);
            if ap > best_ap {
                best_ap = ap;
                best = model.clone();
            }
        }
    }
    let test_ap = mean_ap(x, &best, test_pos, &test_negs);
    Ok((best, test_ap))
}

/// One-vs-rest logistic regression over embedding rows.
#[derive(Debug, Clone)]
pub struct ClassifierModel {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub c: f64,
    pub multi_label: bool,
    /// L2-normalize inputs before scoring, matching how the model was fit.
    pub normalize: bool,
}

fn l2_normalized(row: &[f64]) -> Vec<f64> {
    let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    row.iter().map(|v| v / norm).collect()
}

impl ClassifierModel {
    /// Predicted label set for one node: top-1 in the single-label regime,
    /// probability >= 0.5 per label otherwise.
    pub fn predict(&self, features: &[f64]) -> Vec<u32> {
        let normalized;
        let features = if self.normalize {
            normalized = l2_normalized(features);
            &normalized[..]
        } else {
            features
        };
        let scores: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.iter().zip(features).map(|(wi, f)| wi * f).sum::<f64>() + b)
            .collect();
        if self.multi_label {
            scores
                .iter()
                .enumerate()
                .filter(|(_, &z)| z >= 0.0)
                .map(|(c, _)| c as u32)
                .collect()
        } else {
            let best = scores
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(c, _)| c as u32)
                .unwrap();
            vec![best]
        }
    }
}

/// Micro and macro F1 between per-node predicted and true label sets.
pub fn f1_scores(predicted: &[Vec<u32>], truth: &[Vec<u32>], num_labels: usize) -> (f64, f64) {
    let mut tp = vec![0usize; num_labels];
    let mut fp = vec![0usize; num_labels];
    let mut fnn = vec![0usize; num_labels];
    for (pred, gold) in predicted.iter().zip(truth) {
        for &p in pred {
            if gold.contains(&p) {
                tp[p as usize] += 1;
            } else {
                fp[p as usize] += 1;
            }
        }
        for &g in gold {
            if !pred.contains(&g) {
                fnn[g as usize] += 1;
            }
        }
    }
    let f1 = |tp: usize, fp: usize, fnn: usize| {
        let denom = 2 * tp + fp + fnn;
        if denom == 0 {
            0.0
        } else {
            2.0 * tp as f64 / denom as f64
        }
    };
    let micro = f1(tp.iter().sum(), fp.iter().sum(), fnn.iter().sum());
    let macro_f1 = (0..num_labels)
        .map(|c| f1(tp[c], fp[c], fnn[c]))
        .sum::<f64>()
        / num_labels as f64;
    (micro, macro_f1)
}

/// Minimize sum_i log(1 + exp(-y_i (w.x_i + b))) + (1/2C) ||w||^2 by
/// full-batch gradient descent with Armijo backtracking. Returns the weight
/// vector, bias, and the objective trace.
fn fit_binary_logistic(
    features: &[&[f64]],
    targets: &[f64], // +1 / -1
    c: f64,
    max_iters: usize,
    tol: f64,
) -> (Vec<f64>, f64, Vec<f64>) {
    let dim = features.first().map_or(0, |f| f.len());
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let objective = |w: &[f64], b: f64| -> f64 {
        let nll: f64 = features
            .iter()
            .zip(targets)
            .map(|(f, &y)| {
                let z = w.iter().zip(*f).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
                -crate::embedding::log_sigmoid(y * z)
            })
            .sum();
        nll + w.iter().map(|wi| wi * wi).sum::<f64>() / (2.0 * c)
    };
    let mut trace = vec![objective(&w, b)];
    for _ in 0..max_iters {
        let mut gw = vec![0.0; dim];
        let mut gb = 0.0;
        for (f, &y) in features.iter().zip(targets) {
            let z = w.iter().zip(*f).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
            let coeff = -y * sigmoid(-y * z);
            for (g, xi) in gw.iter_mut().zip(*f) {
                *g += coeff * xi;
            }
            gb += coeff;
        }
        for (g, wi) in gw.iter_mut().zip(&w) {
            *g += wi / c;
        }
        let norm2: f64 = gw.iter().map(|g| g * g).sum::<f64>() + gb * gb;
        if norm2.sqrt() < tol {
            break;
        }
        let current = *trace.last().unwrap();
        let mut step = 1.0;
        loop {
            let cand_w: Vec<f64> = w.iter().zip(&gw).map(|(wi, g)| wi - step * g).collect();
            let cand_b = b - step * gb;
            let cand_obj = objective(&cand_w, cand_b);
            if cand_obj <= current - 0.5 * step * norm2 || step < 1e-12 {
                w = cand_w;
                b = cand_b;
                trace.push(cand_obj.min(current));
                break;
            }
            step *= 0.5;
        }
    }
    (w, b, trace)
}

#[derive(Debug, Clone)]
pub struct ClassifierFitParams {
    /// Train instances sampled per class.
    pub per_class: usize,
    pub c_grid: Vec<f64>,
    /// Cap the per-class draw at 75% of the class size.
    pub imbalance_min_rule: bool,
    pub multi_label: bool,
    /// L2-normalize embedding rows before fitting; embedding norms track
    /// node degree, which is noise for community-driven labels.
    pub normalize: bool,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for ClassifierFitParams {
    fn default() -> Self {
        ClassifierFitParams {
            per_class: 20,
            c_grid: vec![0.1, 1.0, 10.0],
            imbalance_min_rule: false,
            multi_label: false,
            normalize: true,
            max_iters: 5000,
            tol: 1e-6,
            seed: 0,
        }
    }
}

/// Sample a per-class train set, split the remaining nodes ~50/50 into
/// validation and test, fit one-vs-rest logistic regression for each C in
/// the grid (per-class fits run in parallel), keep the C with the best
/// validation macro F1, and report test micro/macro F1.
pub fn fit_classifier(
    x: &EmbeddingMatrix,
    labels: &NodeLabels,
    params: &ClassifierFitParams,
) -> Result<(ClassifierModel, f64, f64)> {
    let num_labels = labels.num_labels;
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); num_labels];
    for (v, ls) in labels.labels.iter().enumerate() {
        for &l in ls {
            members[l as usize].push(v as u32);
        }
    }
    let mut rng = stream_rng(params.seed, Stream::ClassifierSplit, 0);
    let mut in_train = vec![false; x.rows()];
    for (c, class) in members.iter_mut().enumerate() {
        if class.is_empty() {
            return Err(Error::Infeasible(format!("label {c} has no instances")));
        }
        class.shuffle(&mut rng);
        let take = if params.imbalance_min_rule {
            params.per_class.min((class.len() * 3).div_ceil(4))
        } else {
            params.per_class.min(class.len())
        };
        for &v in class.iter().take(take.max(1)) {
            in_train[v as usize] = true;
        }
    }
    let train: Vec<u32> = (0..x.rows() as u32).filter(|&v| in_train[v as usize]).collect();
    let mut rest: Vec<u32> = (0..x.rows() as u32)
        .filter(|&v| !in_train[v as usize] && !labels.labels[v as usize].is_empty())
        .collect();
    rest.shuffle(&mut rng);
    let (val, test) = rest.split_at(rest.len() / 2);

    let train_rows: Vec<Vec<f64>> = train
        .iter()
        .map(|&v| {
            if params.normalize {
                l2_normalized(x.row(v as usize))
            } else {
                x.row(v as usize).to_vec()
            }
        })
        .collect();
    let features: Vec<&[f64]> = train_rows.iter().map(|r| r.as_slice()).collect();
    let eval_f1 = |model: &ClassifierModel, nodes: &[u32]| -> (f64, f64) {
        let predicted: Vec<Vec<u32>> = nodes
            .par_iter()
            .map(|&v| model.predict(x.row(v as usize)))
            .collect();
        let truth: Vec<Vec<u32>> = nodes
            .iter()
            .map(|&v| labels.labels[v as usize].clone())
            .collect();
        f1_scores(&predicted, &truth, num_labels)
    };

    let mut best: Option<(ClassifierModel, f64)> = None;
    for &c in &params.c_grid {
        let fits: Vec<(Vec<f64>, f64)> = (0..num_labels)
            .into_par_iter()
            .map(|label| {
                let targets: Vec<f64> = train
                    .iter()
                    .map(|&v| {
                        if labels.labels[v as usize].contains(&(label as u32)) {
                            1.0
                        } else {
                            -1.0
                        }
                    })
                    .collect();
                let (w, b, _) =
                    fit_binary_logistic(&features, &targets, c, params.max_iters, params.tol);
                (w, b)
            })
            .collect();
        let model = ClassifierModel {
            weights: fits.iter().map(|(w, _)| w.clone()).collect(),
            biases: fits.iter().map(|(_, b)| *b).collect(),
            c,
            multi_label: params.multi_label,
            normalize: params.normalize,
        };
        let (_, val_macro) = eval_f1(&model, val);
        if best.as_ref().is_none_or(|(_, b)| val_macro > *b) {
            best = Some((model, val_macro));
        }
    }
    let (model, _) = best.expect("nonempty C grid");
    let (micro, macro_f1) = eval_f1(&model, test);
    Ok((model, micro, macro_f1))
}

/// One metric observation for external tabulation.
#[derive(Debug, Clone)]
pub struct MetricRow {
    pub method: String,
    pub dataset: String,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
}

pub fn save_metrics(rows: &[MetricRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "method,dataset,seed,metric,value").map_err(|e| Error::io(path, e))?;
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.method, r.dataset, r.seed, r.metric, r.value)
            .map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}
