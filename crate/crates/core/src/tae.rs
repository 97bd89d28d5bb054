//! Time-aware literal encoder.
//!
//! For an entity name the recognized time tokens `t_i` attend over the name
//! tokens `n_j`; the attended vectors are averaged into `h`. The remaining
//! name text gives `r`, the other attribute values give `g`, and the entity
//! embedding is `W [h; r + beta g] + b`.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::{
    concat_attribute_values, mean_pool, read_vector_file, write_vector_file, EmbeddingTable, ProviderChain, StoreError,
    TokenSequence,
};
use crate::kg::{entity_name, KnowledgeGraph, NamePolicy};
use crate::timesplit::split_time;
use crate::vecmath::{cosine, mean};

#[derive(Debug, Error)]
pub enum TaeError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("time tokens present but the name has no tokens")]
    EmptyName,
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("entity `{0}` is not in the graph")]
    UnknownEntity(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

fn check_dim(expected: usize, found: usize) -> Result<(), TaeError> {
    if expected == found {
        Ok(())
    } else {
        Err(TaeError::Dimension { expected, found })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionResult {
    /// One row per time token, one column per name token.
    pub weights: Vec<Vec<f64>>,
    pub attended: Vec<Vec<f64>>,
}

/// Numerically stable softmax.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Cosine attention of each time token over the name tokens.
pub fn time_attention(time: &TokenSequence, name: &TokenSequence) -> Result<AttentionResult, TaeError> {
    check_dim(name.dim, time.dim)?;
    for v in time.vectors.iter().chain(&name.vectors) {
        check_dim(name.dim, v.len())?;
    }
    if time.is_empty() {
        return Ok(AttentionResult {
            weights: Vec::new(),
            attended: Vec::new(),
        });
    }
    if name.is_empty() {
        return Err(TaeError::EmptyName);
    }
    let mut weights = Vec::with_capacity(time.len());
    let mut attended = Vec::with_capacity(time.len());
    for t in &time.vectors {
        let scores: Vec<f64> = name.vectors.iter().map(|n| cosine(n, t)).collect();
        let w = softmax(&scores);
        let mut a = vec![0.0; name.dim];
        for (wj, n) in w.iter().zip(&name.vectors) {
            for (x, y) in a.iter_mut().zip(n) {
                *x += wj * y;
            }
        }
        weights.push(w);
        attended.push(a);
    }
    Ok(AttentionResult { weights, attended })
}

/// Mean of the attended vectors; zero when there are none.
pub fn time_embedding(attended: &[Vec<f64>], dim: usize) -> Vec<f64> {
    mean(attended, dim)
}

/// `r + beta g`.
pub fn fuse(r: &[f64], g: &[f64], beta: f64) -> Result<Vec<f64>, TaeError> {
    check_dim(r.len(), g.len())?;
    Ok(r.iter().zip(g).map(|(a, b)| a + beta * b).collect())
}

/// Trainable affine layer plus the fusion weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaeParams {
    dim: usize,
    /// `dim x 2 dim`, row-major.
    w: Vec<f64>,
    b: Vec<f64>,
    beta: f64,
}

impl TaeParams {
    /// `W = [I | I] / 2`, `b = 0`.
    pub fn new(dim: usize, beta: f64) -> Self {
        let mut w = vec![0.0; dim * 2 * dim];
        for i in 0..dim {
            w[i * 2 * dim + i] = 0.5;
            w[i * 2 * dim + dim + i] = 0.5;
        }
        Self {
            dim,
            w,
            b: vec![0.0; dim],
            beta,
        }
    }

    pub fn from_parts(dim: usize, w: Vec<f64>, b: Vec<f64>, beta: f64) -> Result<Self, TaeError> {
        if dim == 0 {
            return Err(TaeError::Params("dimension must be positive".into()));
        }
        check_dim(dim * 2 * dim, w.len())?;
        check_dim(dim, b.len())?;
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(TaeError::Params(format!("beta must be finite and non-negative, got {beta}")));
        }
        if w.iter().chain(&b).any(|x| !x.is_finite()) {
            return Err(TaeError::Params("non-finite entry".into()));
        }
        Ok(Self { dim, w, b, beta })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn w_mut(&mut self) -> &mut [f64] {
        &mut self.w
    }

    pub fn b_mut(&mut self) -> &mut [f64] {
        &mut self.b
    }

    /// `W z + b` for a concatenated input `z = [h; f]`.
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        let cols = 2 * self.dim;
        debug_assert_eq!(z.len(), cols);
        self.w
            .chunks_exact(cols)
            .zip(&self.b)
            .map(|(row, b)| row.iter().zip(z).map(|(w, x)| w * x).sum::<f64>() + b)
            .collect()
    }

    /// Writes `wh#i` / `wf#i` (the two halves of row `i`), then `b` and a
    /// `beta` record holding the scalar in every slot.
    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        let d = self.dim;
        let mut records: Vec<(String, Vec<f64>)> = Vec::with_capacity(2 * d + 2);
        for (i, row) in self.w.chunks_exact(2 * d).enumerate() {
            records.push((format!("wh#{i}"), row[..d].to_vec()));
            records.push((format!("wf#{i}"), row[d..].to_vec()));
        }
        records.push(("b".into(), self.b.clone()));
        records.push(("beta".into(), vec![self.beta; d]));
        write_vector_file(path, d, records.iter().map(|(k, v)| (k.as_str(), v)))
    }

    pub fn load(path: &Path) -> Result<Self, TaeError> {
        let mut rows: BTreeMap<(usize, bool), Vec<f64>> = BTreeMap::new();
        let mut b = None;
        let mut beta = None;
        let bad = |key: &str| TaeError::Params(format!("{}: unexpected record `{key}`", path.display()));
        let mut unknown = None;
        let dim = read_vector_file(path, |key, v| {
            let slot = match key {
                "b" => b.replace(v).is_none(),
                "beta" => beta.replace(v).is_none(),
                _ => match key.split_once('#') {
                    Some((half @ ("wh" | "wf"), i)) => match i.parse::<usize>() {
                        Ok(i) => rows.insert((i, half == "wf"), v).is_none(),
                        Err(_) => false,
                    },
                    _ => false,
                },
            };
            if !slot && unknown.is_none() {
                unknown = Some(key.to_string());
            }
            Ok(())
        })?;
        if let Some(key) = unknown {
            return Err(bad(&key));
        }
        let b = b.ok_or_else(|| TaeError::Params("missing `b` record".into()))?;
        let beta = beta.ok_or_else(|| TaeError::Params("missing `beta` record".into()))?;
        if beta.iter().any(|x| *x != beta[0]) {
            return Err(TaeError::Params("`beta` record is not constant".into()));
        }
        let mut w = Vec::with_capacity(dim * 2 * dim);
        for i in 0..dim {
            for right in [false, true] {
                let row = rows
                    .remove(&(i, right))
                    .ok_or_else(|| TaeError::Params(format!("missing row {i} of W")))?;
                w.extend(row);
            }
        }
        if let Some(((i, _), _)) = rows.into_iter().next() {
            return Err(TaeError::Params(format!("row {i} exceeds dimension {dim}")));
        }
        Self::from_parts(dim, w, b, beta[0])
    }
}

/// `W [h; f] + b`.
pub fn combine(h: &[f64], f: &[f64], params: &TaeParams) -> Result<Vec<f64>, TaeError> {
    check_dim(params.dim, h.len())?;
    check_dim(params.dim, f.len())?;
    Ok(params.apply(&concat(h, f)))
}

pub fn concat(h: &[f64], f: &[f64]) -> Vec<f64> {
    let mut z = Vec::with_capacity(h.len() + f.len());
    z.extend_from_slice(h);
    z.extend_from_slice(f);
    z
}

/// Ablation switches; both on by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderOptions {
    pub time_attention: bool,
    pub other_attributes: bool,
}

impl Default for EncoderOptions {
    fn default() -> Self {
        Self {
            time_attention: true,
            other_attributes: true,
        }
    }
}

/// Texts fed to the encoder for one entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityTexts {
    pub name: String,
    pub attributes: String,
}

impl EntityTexts {
    /// Display name plus every other attribute value of `entity`.
    pub fn of(graph: &KnowledgeGraph, entity: &str, policy: &NamePolicy) -> Self {
        let name = entity_name(graph, entity, policy);
        let attributes = concat_attribute_values(graph, entity, name.attribute.as_deref());
        Self {
            name: name.name,
            attributes,
        }
    }
}

/// The frozen inputs of the affine layer: `h`, `r` and `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityFeatures {
    pub h: Vec<f64>,
    pub r: Vec<f64>,
    pub g: Vec<f64>,
}

impl EntityFeatures {
    /// `[h; r + beta g]`.
    pub fn z(&self, beta: f64) -> Vec<f64> {
        let f: Vec<f64> = self.r.iter().zip(&self.g).map(|(r, g)| r + beta * g).collect();
        concat(&self.h, &f)
    }
}

pub fn features(texts: &EntityTexts, provider: &ProviderChain, options: EncoderOptions) -> Result<EntityFeatures, TaeError> {
    let dim = provider.dim();
    let (h, r) = if options.time_attention {
        let split = split_time(&texts.name);
        let time = provider.encode_sequence(&split.time);
        let name = provider.encode_sequence(&texts.name);
        let att = time_attention(&time, &name)?;
        (time_embedding(&att.attended, dim), mean_pool(&provider.encode_sequence(&split.remainder)))
    } else {
        (vec![0.0; dim], mean_pool(&provider.encode_sequence(&texts.name)))
    };
    let g = if options.other_attributes {
        mean_pool(&provider.encode_sequence(&texts.attributes))
    } else {
        vec![0.0; dim]
    };
    Ok(EntityFeatures { h, r, g })
}

pub fn encode_entity(
    graph: &KnowledgeGraph,
    entity: &str,
    provider: &ProviderChain,
    policy: &NamePolicy,
    params: &TaeParams,
    options: EncoderOptions,
) -> Result<Vec<f64>, TaeError> {
    if !graph.contains_entity(entity) {
        return Err(TaeError::UnknownEntity(entity.to_string()));
    }
    check_dim(params.dim, provider.dim())?;
    let f = features(&EntityTexts::of(graph, entity, policy), provider, options)?;
    Ok(params.apply(&f.z(params.beta)))
}

/// Features of many entities, computed in parallel.
pub fn feature_table(
    graph: &KnowledgeGraph,
    entities: &[String],
    provider: &ProviderChain,
    policy: &NamePolicy,
    options: EncoderOptions,
) -> Result<BTreeMap<String, EntityFeatures>, TaeError> {
    if let Some(e) = entities.iter().find(|e| !graph.contains_entity(e)) {
        return Err(TaeError::UnknownEntity(e.clone()));
    }
    let feats: Vec<EntityFeatures> = entities
        .par_iter()
        .map(|e| features(&EntityTexts::of(graph, e, policy), provider, options))
        .collect::<Result<_, _>>()?;
    Ok(entities.iter().cloned().zip(feats).collect())
}

/// Embeds every listed entity with `params`.
pub fn encode_graph(
    graph: &KnowledgeGraph,
    entities: &[String],
    provider: &ProviderChain,
    policy: &NamePolicy,
    params: &TaeParams,
    options: EncoderOptions,
) -> Result<EmbeddingTable, TaeError> {
    check_dim(params.dim, provider.dim())?;
    let feats = feature_table(graph, entities, provider, policy, options)?;
    embed_features(&feats, params)
}

pub fn embed_features(features: &BTreeMap<String, EntityFeatures>, params: &TaeParams) -> Result<EmbeddingTable, TaeError> {
    let mut table = EmbeddingTable::new(params.dim);
    for (id, f) in features {
        table.insert(id, params.apply(&f.z(params.beta)))?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::name_vector_baseline;
    use crate::kg::GraphBuilder;
    use proptest::prelude::*;

    fn seq(vectors: Vec<Vec<f64>>) -> TokenSequence {
        let dim = vectors.first().map_or(2, Vec::len);
        TokenSequence {
            tokens: (0..vectors.len()).map(|i| i.to_string()).collect(),
            vectors,
            dim,
        }
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn attention_examples() {
        let n1 = vec![0.3, -0.7];
        let r = time_attention(&seq(vec![vec![1.0, 2.0]]), &seq(vec![n1.clone()])).unwrap();
        assert_eq!(r.weights, vec![vec![1.0]]);
        assert_eq!(r.attended, vec![n1]);

        let r = time_attention(&seq(vec![vec![1.0, 0.0]]), &seq(vec![vec![0.0, 1.0], vec![0.0, -1.0]])).unwrap();
        assert!(close(&r.weights[0], &[0.5, 0.5], 1e-15));

        let r = time_attention(&seq(vec![vec![1.0, 0.0]]), &seq(vec![vec![2.0, 0.0], vec![0.0, 3.0]])).unwrap();
        let e = std::f64::consts::E;
        assert!(close(&r.weights[0], &[e / (e + 1.0), 1.0 / (e + 1.0)], 1e-12));
        assert!((r.weights[0][0] - 0.7311).abs() < 1e-4);
    }

    #[test]
    fn attention_edge_cases() {
        let r = time_attention(&TokenSequence::empty(2), &seq(vec![vec![1.0, 0.0]])).unwrap();
        assert!(r.weights.is_empty() && r.attended.is_empty());
        assert!(matches!(
            time_attention(&seq(vec![vec![1.0, 0.0]]), &TokenSequence::empty(2)),
            Err(TaeError::EmptyName)
        ));
        assert!(matches!(
            time_attention(&seq(vec![vec![1.0, 0.0, 0.0]]), &seq(vec![vec![1.0, 0.0]])),
            Err(TaeError::Dimension { .. })
        ));
        let r = time_attention(&seq(vec![vec![0.0, 0.0]]), &seq(vec![vec![1.0, 0.0], vec![0.0, 1.0]])).unwrap();
        assert_eq!(r.weights[0], vec![0.5, 0.5]);
    }

    #[test]
    fn time_embedding_examples() {
        let a = vec![0.2, -0.4];
        assert_eq!(time_embedding(std::slice::from_ref(&a), 2), a);
        assert_eq!(time_embedding(&[a.clone(), vec![-0.2, 0.4]], 2), vec![0.0, 0.0]);
        assert_eq!(time_embedding(&[], 3), vec![0.0; 3]);
    }

    #[test]
    fn fuse_examples() {
        assert_eq!(fuse(&[1.0, 2.0], &[5.0, 6.0], 0.0).unwrap(), vec![1.0, 2.0]);
        assert_eq!(fuse(&[0.0, 0.0], &[5.0, 6.0], 1.0).unwrap(), vec![5.0, 6.0]);
        assert_eq!(fuse(&[1.0, 0.0], &[0.0, 1.0], 0.02).unwrap(), vec![1.0, 0.02]);
        assert!(fuse(&[1.0], &[1.0, 2.0], 0.1).is_err());
    }

    fn block(dim: usize, left: bool) -> TaeParams {
        let mut w = vec![0.0; dim * 2 * dim];
        for i in 0..dim {
            w[i * 2 * dim + if left { i } else { dim + i }] = 1.0;
        }
        TaeParams::from_parts(dim, w, vec![0.0; dim], 0.0).unwrap()
    }

    #[test]
    fn combine_examples() {
        let (h, f) = (vec![1.5, -2.0], vec![0.25, 4.0]);
        assert_eq!(combine(&h, &f, &block(2, true)).unwrap(), h);
        assert_eq!(combine(&h, &f, &block(2, false)).unwrap(), f);
        // Rows (1, 2, 3, 4) and (-1, 0, 0.5, 2), b = (0.5, -1).
        let p = TaeParams::from_parts(2, vec![1.0, 2.0, 3.0, 4.0, -1.0, 0.0, 0.5, 2.0], vec![0.5, -1.0], 0.0).unwrap();
        // 1.5 - 4 + 0.75 + 16 + 0.5 = 14.75 ; -1.5 + 0 + 0.125 + 8 - 1 = 5.625
        assert_eq!(combine(&h, &f, &p).unwrap(), vec![14.75, 5.625]);
        assert!(combine(&h, &[1.0], &p).is_err());
    }

    #[test]
    fn initial_params_average_halves() {
        let p = TaeParams::new(3, 0.02);
        assert_eq!(combine(&[2.0, 4.0, 6.0], &[0.0, 2.0, -6.0], &p).unwrap(), vec![1.0, 3.0, 0.0]);
    }

    #[test]
    fn params_reject_bad_values() {
        assert!(TaeParams::from_parts(1, vec![0.0, f64::NAN], vec![0.0], 0.1).is_err());
        assert!(TaeParams::from_parts(1, vec![0.0, 0.0], vec![0.0], -0.1).is_err());
        assert!(TaeParams::from_parts(1, vec![0.0], vec![0.0], 0.1).is_err());
    }

    #[test]
    fn params_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("params.txt");
        let mut p = TaeParams::new(3, 0.05);
        p.w_mut()[4] = -1.0 / 3.0;
        p.b_mut()[2] = 1e-17;
        p.save(&path).unwrap();
        assert_eq!(TaeParams::load(&path).unwrap(), p);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("8 3\nwh#0\t"));
        std::fs::write(&path, text.replace("wf#2", "xx#2")).unwrap();
        assert!(TaeParams::load(&path).is_err());
    }

    fn graph() -> KnowledgeGraph {
        let mut b = GraphBuilder::new();
        b.add_attribute_triple("e1", "label", "2010 GCC U-23 Championship");
        b.add_attribute_triple("e1", "country", "Qatar");
        b.add_attribute_triple("e2", "label", "Doha");
        b.add_attribute_triple("e3", "label", "2010-05-14");
        b.add_attribute_triple("e3", "note", "spring");
        b.build()
    }

    #[test]
    fn pipeline_cases() {
        let g = graph();
        let p = ProviderChain::fallback(6, 3);
        let policy = NamePolicy::default();
        let f = features(&EntityTexts::of(&g, "e2", &policy), &p, EncoderOptions::default()).unwrap();
        assert_eq!(f.h, vec![0.0; 6]);
        assert_eq!(f.g, vec![0.0; 6]);
        assert_eq!(f.r, p.token_vector("doha"));

        let f = features(&EntityTexts::of(&g, "e3", &policy), &p, EncoderOptions::default()).unwrap();
        assert_eq!(f.r, vec![0.0; 6]);
        assert_eq!(f.g, p.token_vector("spring"));
        assert_eq!(f.h, p.token_vector("2010-05-14"));

        let params = TaeParams::new(6, 0.5);
        let e = encode_entity(&g, "e3", &p, &policy, &params, EncoderOptions::default()).unwrap();
        let expect = combine(&f.h, &fuse(&f.r, &f.g, 0.5).unwrap(), &params).unwrap();
        assert_eq!(e, expect);
        assert!(matches!(
            encode_entity(&g, "zz", &p, &policy, &params, EncoderOptions::default()),
            Err(TaeError::UnknownEntity(_))
        ));
    }

    #[test]
    fn three_token_fixture() {
        // "2010 Doha Games": h attends from "2010" over all three name tokens.
        let g = {
            let mut b = GraphBuilder::new();
            b.add_attribute_triple("e", "label", "2010 Doha Games");
            b.build()
        };
        let p = ProviderChain::fallback(5, 11);
        let t = p.token_vector("2010");
        let n = [t.clone(), p.token_vector("doha"), p.token_vector("games")];
        let w = softmax(&n.iter().map(|v| cosine(v, &t)).collect::<Vec<_>>());
        let h: Vec<f64> = (0..5).map(|k| (0..3).map(|j| w[j] * n[j][k]).sum()).collect();
        let r: Vec<f64> = (0..5).map(|k| (n[1][k] + n[2][k]) / 2.0).collect();
        let e = encode_entity(&g, "e", &p, &NamePolicy::default(), &block(5, true), EncoderOptions::default()).unwrap();
        assert!(close(&e, &h, 1e-15));
        let e = encode_entity(&g, "e", &p, &NamePolicy::default(), &block(5, false), EncoderOptions::default()).unwrap();
        assert!(close(&e, &r, 1e-15));
    }

    #[test]
    fn ablations_reduce_to_name_baseline() {
        let g = graph();
        let p = ProviderChain::fallback(8, 5);
        let policy = NamePolicy::default();
        let off = EncoderOptions {
            time_attention: false,
            other_attributes: false,
        };
        let names: Vec<(String, String)> = ["e1", "e2", "e3"]
            .iter()
            .map(|e| (e.to_string(), entity_name(&g, e, &policy).name))
            .collect();
        let base = name_vector_baseline(&p, &names);
        let ids: Vec<String> = names.iter().map(|(e, _)| e.clone()).collect();
        let table = encode_graph(&g, &ids, &p, &policy, &block(8, false), off).unwrap();
        assert_eq!(table, base);
    }

    proptest! {
        #[test]
        fn attention_rows_are_distributions(
            k in 1usize..4, m in 1usize..6, dim in 1usize..6, seed in any::<u64>(), scale in 0.01f64..100.0
        ) {
            let p = ProviderChain::fallback(dim, seed);
            let vecs = |prefix: &str, n: usize| seq((0..n).map(|i| p.token_vector(&format!("{prefix}{i}"))).collect());
            let (t, n) = (vecs("t", k), vecs("n", m));
            let r = time_attention(&t, &n).unwrap();
            for (row, a) in r.weights.iter().zip(&r.attended) {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-6);
                prop_assert!(row.iter().all(|w| *w >= 0.0));
                for c in 0..dim {
                    let lo = n.vectors.iter().map(|v| v[c]).fold(f64::INFINITY, f64::min);
                    let hi = n.vectors.iter().map(|v| v[c]).fold(f64::NEG_INFINITY, f64::max);
                    prop_assert!(a[c] >= lo - 1e-12 && a[c] <= hi + 1e-12);
                }
            }
            let mut scaled = n.clone();
            scaled.vectors[0].iter_mut().for_each(|x| *x *= scale);
            let r2 = time_attention(&t, &scaled).unwrap();
            for (a, b) in r.weights.iter().zip(&r2.weights) {
                prop_assert!(close(a, b, 1e-6));
            }
        }

        #[test]
        fn combine_is_affine(dim in 1usize..5, seed in any::<u64>()) {
            let p = ProviderChain::fallback(2 * dim * dim + 3 * dim, seed);
            let v = p.token_vector("x");
            let (w, rest) = v.split_at(2 * dim * dim);
            let params = TaeParams::from_parts(dim, w.to_vec(), vec![0.0; dim], 0.0).unwrap();
            let (h, rest) = rest.split_at(dim);
            let (f1, f2) = rest.split_at(dim);
            let sum: Vec<f64> = f1.iter().zip(f2).map(|(a, b)| a + b).collect();
            let lhs = combine(h, &sum, &params).unwrap();
            let a = combine(h, f1, &params).unwrap();
            let b = combine(&vec![0.0; dim], f2, &params).unwrap();
            let rhs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            prop_assert!(close(&lhs, &rhs, 1e-12));
        }
    }
}
