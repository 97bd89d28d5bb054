//! Contrastive training of the affine layer with Adam and early stopping.
//!
//! Token vectors and beta are frozen, so each entity contributes a fixed input
//! `z = [h; r + beta g]` and only `W` and `b` move.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::{retrieve, EvalError, Metrics};
use crate::kg::Link;
use crate::tae::{EncoderOptions, EntityFeatures, TaeParams};
use crate::vecmath::norm;

pub const GRID_MARGINS: [f64; 6] = [0.5, 1.5, 3.0, 3.5, 4.5, 5.0];
pub const GRID_BETAS: [f64; 4] = [0.01, 0.02, 0.05, 0.1];

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const MAX_RESAMPLE: usize = 10_000;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("config line {line}: {msg}")]
    ConfigSyntax { line: usize, msg: String },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("cannot corrupt positive ({0}, {1}): every replacement is a gold link")]
    CannotCorrupt(usize, usize),
    #[error("no training links")]
    NoPositives,
    #[error("no validation links")]
    NoValidation,
    #[error("no features for entity `{0}`")]
    MissingFeatures(String),
    #[error("training diverged at epoch {epoch}: non-finite {what}")]
    Diverged { epoch: usize, what: &'static str },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dim: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub margin: f64,
    pub beta: f64,
    pub negatives_per_positive: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub time_attention: bool,
    pub other_attributes: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 768,
            batch_size: 256,
            learning_rate: 1e-4,
            margin: 3.0,
            beta: 0.02,
            negatives_per_positive: 5,
            max_epochs: 200,
            patience: 10,
            seed: 0,
            time_attention: true,
            other_attributes: true,
        }
    }
}

impl TrainConfig {
    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, TrainError> {
        let mut c = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| TrainError::ConfigSyntax { line: i + 1, msg };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            fn num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
                v.parse().map_err(|_| format!("bad value `{v}`"))
            }
            let r: Result<(), String> = (|| {
                match key {
                    "dim" => c.dim = num(value)?,
                    "batch_size" => c.batch_size = num(value)?,
                    "learning_rate" => c.learning_rate = num(value)?,
                    "margin" => c.margin = num(value)?,
                    "beta" => c.beta = num(value)?,
                    "negatives_per_positive" => c.negatives_per_positive = num(value)?,
                    "max_epochs" => c.max_epochs = num(value)?,
                    "patience" => c.patience = num(value)?,
                    "seed" => c.seed = num(value)?,
                    "time_attention" => c.time_attention = num(value)?,
                    "other_attributes" => c.other_attributes = num(value)?,
                    _ => return Err(format!("unknown key `{key}`")),
                }
                Ok(())
            })();
            r.map_err(err)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dim = {}", self.dim);
        let _ = writeln!(s, "batch_size = {}", self.batch_size);
        let _ = writeln!(s, "learning_rate = {}", self.learning_rate);
        let _ = writeln!(s, "margin = {}", self.margin);
        let _ = writeln!(s, "beta = {}", self.beta);
        let _ = writeln!(s, "negatives_per_positive = {}", self.negatives_per_positive);
        let _ = writeln!(s, "max_epochs = {}", self.max_epochs);
        let _ = writeln!(s, "patience = {}", self.patience);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "time_attention = {}", self.time_attention);
        let _ = writeln!(s, "other_attributes = {}", self.other_attributes);
        s
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.into()));
        if self.dim == 0 || self.batch_size == 0 || self.negatives_per_positive == 0 || self.max_epochs == 0 {
            return bad("dim, batch_size, negatives_per_positive and max_epochs must be positive");
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return bad("margin must be positive");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be non-negative");
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad("beta must be non-negative");
        }
        Ok(())
    }

    pub fn encoder_options(&self) -> EncoderOptions {
        EncoderOptions {
            time_attention: self.time_attention,
            other_attributes: self.other_attributes,
        }
    }
}

/// Positive and corrupted pairs as `(source index, target index)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PairBatch {
    pub positives: Vec<(usize, usize)>,
    pub negatives: Vec<(usize, usize)>,
}

/// `n` corruptions of each positive: a fair coin picks the side to replace
/// with a uniform draw from that side's pool, redrawn while the pair is gold.
/// A side whose pool has one entity is never replaced.
pub fn sample_negatives<R: Rng>(
    positives: &[(usize, usize)],
    pool_sizes: (usize, usize),
    gold: &HashSet<(usize, usize)>,
    n: usize,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>, TrainError> {
    let (ns, nt) = pool_sizes;
    let mut out = Vec::with_capacity(positives.len() * n);
    for &(s, t) in positives {
        if ns <= 1 && nt <= 1 {
            return Err(TrainError::CannotCorrupt(s, t));
        }
        for _ in 0..n {
            let mut attempts = 0;
            let pair = loop {
                let replace_source = if ns <= 1 {
                    false
                } else if nt <= 1 {
                    true
                } else {
                    rng.random_bool(0.5)
                };
                let cand = if replace_source { (rng.random_range(0..ns), t) } else { (s, rng.random_range(0..nt)) };
                if !gold.contains(&cand) {
                    break cand;
                }
                attempts += 1;
                if attempts >= MAX_RESAMPLE {
                    return Err(TrainError::CannotCorrupt(s, t));
                }
            };
            out.push(pair);
        }
    }
    Ok(out)
}

/// Sum of positive distances plus hinged negative distances.
pub fn contrastive_loss<V: AsRef<[f64]>>(source: &[V], target: &[V], batch: &PairBatch, margin: f64) -> f64 {
    let dist = |(s, t): &(usize, usize)| distance(source[*s].as_ref(), target[*t].as_ref());
    let pos: f64 = batch.positives.iter().map(dist).sum();
    let neg: f64 = batch.negatives.iter().map(|p| (margin - dist(p)).max(0.0)).sum();
    pos + neg
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub loss: f64,
    /// Same layout as the parameter matrix.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

/// Loss and analytic gradients with respect to `W` and `b`.
///
/// For an active term with `u = (e_a - e_b) / |e_a - e_b|` the matrix
/// gradient is `+-u (z_a - z_b)^T`; `b` cancels in every difference. Terms at
/// zero distance or exactly on the hinge contribute nothing.
pub fn loss_gradients<V: AsRef<[f64]> + Sync>(
    params: &TaeParams,
    source_z: &[V],
    target_z: &[V],
    batch: &PairBatch,
    margin: f64,
) -> Result<Gradients, TrainError> {
    let d = params.dim();
    let cols = 2 * d;
    let terms: Vec<(bool, &(usize, usize))> = batch
        .positives
        .iter()
        .map(|p| (true, p))
        .chain(batch.negatives.iter().map(|p| (false, p)))
        .collect();
    // (loss contribution, signed u, dz) per term.
    let parts: Vec<(f64, Option<(Vec<f64>, Vec<f64>)>)> = terms
        .par_iter()
        .map(|&(positive, &(s, t))| {
            let dz: Vec<f64> = source_z[s].as_ref().iter().zip(target_z[t].as_ref()).map(|(a, b)| a - b).collect();
            let diff: Vec<f64> = params
                .w()
                .chunks_exact(cols)
                .map(|row| row.iter().zip(&dz).map(|(w, x)| w * x).sum())
                .collect();
            let dist = norm(&diff);
            if positive {
                if dist > 0.0 {
                    let u = diff.iter().map(|x| x / dist).collect();
                    (dist, Some((u, dz)))
                } else {
                    (0.0, None)
                }
            } else if dist < margin && dist > 0.0 {
                let u = diff.iter().map(|x| -x / dist).collect();
                (margin - dist, Some((u, dz)))
            } else {
                ((margin - dist).max(0.0), None)
            }
        })
        .collect();
    let loss: f64 = parts.iter().map(|(l, _)| l).sum();
    if !loss.is_finite() {
        return Err(TrainError::Diverged { epoch: 0, what: "loss" });
    }
    let active: Vec<&(Vec<f64>, Vec<f64>)> = parts.iter().filter_map(|(_, g)| g.as_ref()).collect();
    let mut w = vec![0.0; d * cols];
    w.par_chunks_mut(cols).enumerate().for_each(|(i, row)| {
        for (u, dz) in &active {
            let ui = u[i];
            if ui != 0.0 {
                for (g, x) in row.iter_mut().zip(dz) {
                    *g += ui * x;
                }
            }
        }
    });
    if w.iter().any(|x| !x.is_finite()) {
        return Err(TrainError::Diverged { epoch: 0, what: "gradient" });
    }
    Ok(Gradients {
        loss,
        w,
        b: vec![0.0; d],
    })
}

/// Adam moments for `W` and `b`.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    step: i32,
    m_w: Vec<f64>,
    v_w: Vec<f64>,
    m_b: Vec<f64>,
    v_b: Vec<f64>,
}

impl Adam {
    pub fn new(params: &TaeParams, lr: f64) -> Self {
        Self {
            lr,
            step: 0,
            m_w: vec![0.0; params.w().len()],
            v_w: vec![0.0; params.w().len()],
            m_b: vec![0.0; params.b().len()],
            v_b: vec![0.0; params.b().len()],
        }
    }

    pub fn update(&mut self, params: &mut TaeParams, grads: &Gradients) {
        self.step += 1;
        let c1 = 1.0 - ADAM_BETA1.powi(self.step);
        let c2 = 1.0 - ADAM_BETA2.powi(self.step);
        let lr = self.lr;
        let apply = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for i in 0..p.len() {
                m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
                v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
                p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + ADAM_EPS);
            }
        };
        apply(params.w_mut(), &grads.w, &mut self.m_w, &mut self.v_w);
        apply(params.b_mut(), &grads.b, &mut self.m_b, &mut self.v_b);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Training objective summed in positive order; `null` for the
    /// pre-training evaluation.
    pub loss: Option<f64>,
    pub active_negatives: usize,
    pub valid_hits_at_1: f64,
    pub valid_hits_at_10: f64,
    pub valid_mrr: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters of the best validation epoch.
    pub params: TaeParams,
    pub best_epoch: usize,
    pub best_valid_hits_at_1: f64,
    pub log: Vec<EpochLog>,
}

/// Features of both graphs plus the split links used for training.
pub struct TrainInput<'a> {
    pub source: &'a BTreeMap<String, EntityFeatures>,
    pub target: &'a BTreeMap<String, EntityFeatures>,
    pub train: &'a [Link],
    pub valid: &'a [Link],
}

struct Pools {
    source_ids: Vec<String>,
    target_ids: Vec<String>,
    source_z: Vec<Vec<f64>>,
    target_z: Vec<Vec<f64>>,
    pairs: Vec<(usize, usize)>,
}

fn pools(links: &[Link], source: &BTreeMap<String, EntityFeatures>, target: &BTreeMap<String, EntityFeatures>, beta: f64) -> Result<Pools, TrainError> {
    let mut source_ids: Vec<String> = links.iter().map(|l| l.0.clone()).collect();
    let mut target_ids: Vec<String> = links.iter().map(|l| l.1.clone()).collect();
    source_ids.sort();
    source_ids.dedup();
    target_ids.sort();
    target_ids.dedup();
    let lookup = |ids: &[String], feats: &BTreeMap<String, EntityFeatures>| -> Result<Vec<Vec<f64>>, TrainError> {
        ids.iter()
            .map(|id| feats.get(id).map(|f| f.z(beta)).ok_or_else(|| TrainError::MissingFeatures(id.clone())))
            .collect()
    };
    let source_z = lookup(&source_ids, source)?;
    let target_z = lookup(&target_ids, target)?;
    let si: HashMap<&str, usize> = source_ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let ti: HashMap<&str, usize> = target_ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let pairs = links.iter().map(|(s, t)| (si[s.as_str()], ti[t.as_str()])).collect();
    Ok(Pools {
        source_ids,
        target_ids,
        source_z,
        target_z,
        pairs,
    })
}

fn validation_metrics(params: &TaeParams, valid: &Pools) -> Result<Metrics, TrainError> {
    let embed = |ids: &[String], zs: &[Vec<f64>]| -> Vec<(String, Vec<f64>)> {
        ids.iter().cloned().zip(zs.par_iter().map(|z| params.apply(z)).collect::<Vec<_>>()).collect()
    };
    let src = embed(&valid.source_ids, &valid.source_z);
    let tgt = embed(&valid.target_ids, &valid.target_z);
    let gold: HashMap<String, String> = valid
        .pairs
        .iter()
        .map(|&(s, t)| (valid.source_ids[s].clone(), valid.target_ids[t].clone()))
        .collect();
    let ranking = retrieve(&src, &tgt, 1, &gold)?;
    Ok(Metrics::from_ranks(&ranking.gold_ranks())?)
}

/// Trains from the `[I | I] / 2` initialization and returns the parameters
/// of the best validation epoch.
///
/// Negatives are drawn once per positive before the first epoch, so the
/// objective is a fixed function of the parameters; the positive order is
/// reshuffled every epoch. Training stops after `patience` epochs without a
/// strict validation Hits@1 improvement.
pub fn train(input: &TrainInput<'_>, config: &TrainConfig) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    if input.train.is_empty() {
        return Err(TrainError::NoPositives);
    }
    if input.valid.is_empty() {
        return Err(TrainError::NoValidation);
    }
    let train_pools = pools(input.train, input.source, input.target, config.beta)?;
    let valid_pools = pools(input.valid, input.source, input.target, config.beta)?;
    if let Some(z) = train_pools.source_z.first() {
        if z.len() != 2 * config.dim {
            return Err(TrainError::InvalidConfig(format!(
                "config dim {} does not match feature dimension {}",
                config.dim,
                z.len() / 2
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let gold: HashSet<(usize, usize)> = train_pools.pairs.iter().copied().collect();
    let sizes = (train_pools.source_ids.len(), train_pools.target_ids.len());
    let n = config.negatives_per_positive;
    let negatives = sample_negatives(&train_pools.pairs, sizes, &gold, n, &mut rng)?;

    let mut params = TaeParams::new(config.dim, config.beta);
    let mut adam = Adam::new(&params, config.learning_rate);
    let m0 = validation_metrics(&params, &valid_pools)?;
    let mut log = vec![EpochLog {
        epoch: 0,
        loss: None,
        active_negatives: 0,
        valid_hits_at_1: m0.hits_at_1,
        valid_hits_at_10: m0.hits_at_10,
        valid_mrr: m0.mrr,
    }];
    let mut best = (params.clone(), 0, m0.hits_at_1);
    let mut stale = 0;
    let mut order: Vec<usize> = (0..train_pools.pairs.len()).collect();

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut per_positive = vec![0.0; order.len()];
        let mut active = 0;
        for chunk in order.chunks(config.batch_size) {
            let batch = PairBatch {
                positives: chunk.iter().map(|&i| train_pools.pairs[i]).collect(),
                negatives: chunk.iter().flat_map(|&i| negatives[i * n..(i + 1) * n].iter().copied()).collect(),
            };
            for &i in chunk {
                let (s, t) = train_pools.pairs[i];
                let single = PairBatch {
                    positives: vec![(s, t)],
                    negatives: negatives[i * n..(i + 1) * n].to_vec(),
                };
                let e = |z: &Vec<f64>| params.apply(z);
                let src: Vec<Vec<f64>> = std::iter::once(&train_pools.source_z[s])
                    .chain(single.negatives.iter().map(|p| &train_pools.source_z[p.0]))
                    .map(e)
                    .collect();
                let tgt: Vec<Vec<f64>> = std::iter::once(&train_pools.target_z[t])
                    .chain(single.negatives.iter().map(|p| &train_pools.target_z[p.1]))
                    .map(e)
                    .collect();
                let local = PairBatch {
                    positives: vec![(0, 0)],
                    negatives: (1..=n).map(|k| (k, k)).collect(),
                };
                per_positive[i] = contrastive_loss(&src, &tgt, &local, config.margin);
                active += (1..=n).filter(|&k| distance(&src[k], &tgt[k]) < config.margin).count();
            }
            let grads = loss_gradients(&params, &train_pools.source_z, &train_pools.target_z, &batch, config.margin)
                .map_err(|e| match e {
                    TrainError::Diverged { what, .. } => TrainError::Diverged { epoch, what },
                    other => other,
                })?;
            adam.update(&mut params, &grads);
            if params.w().iter().chain(params.b()).any(|x| !x.is_finite()) {
                return Err(TrainError::Diverged { epoch, what: "parameter" });
            }
        }
        let loss: f64 = per_positive.iter().sum();
        if !loss.is_finite() {
            return Err(TrainError::Diverged { epoch, what: "loss" });
        }
        let m = validation_metrics(&params, &valid_pools)?;
        log.push(EpochLog {
            epoch,
            loss: Some(loss),
            active_negatives: active,
            valid_hits_at_1: m.hits_at_1,
            valid_hits_at_10: m.hits_at_10,
            valid_mrr: m.mrr,
        });
        if m.hits_at_1 > best.2 {
            best = (params.clone(), epoch, m.hits_at_1);
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }
    Ok(TrainOutcome {
        params: best.0,
        best_epoch: best.1,
        best_valid_hits_at_1: best.2,
        log,
    })
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub margin: f64,
    pub beta: f64,
    pub outcome: TrainOutcome,
}

/// Trains every (margin, beta) combination; the winner is the first with the
/// highest validation Hits@1.
pub fn grid_search(
    input: &TrainInput<'_>,
    base: &TrainConfig,
    margins: &[f64],
    betas: &[f64],
) -> Result<(usize, Vec<GridResult>), TrainError> {
    let mut results = Vec::with_capacity(margins.len() * betas.len());
    for &margin in margins {
        for &beta in betas {
            let config = TrainConfig {
                margin,
                beta,
                ..base.clone()
            };
            let outcome = train(input, &config)?;
            results.push(GridResult { margin, beta, outcome });
        }
    }
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.outcome.best_valid_hits_at_1 > results[best].outcome.best_valid_hits_at_1 {
            best = i;
        }
    }
    Ok((best, results))
}
