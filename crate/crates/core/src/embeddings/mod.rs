//! Token-vector provisioning: file-backed static and contextual stores, a
//! seeded hash fallback, and the averaged name-vector baseline.

mod store;
mod tokenize;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::kg::KnowledgeGraph;
use crate::vecmath;

pub use store::{read_vector_file, write_vector_file, ContextualStore, StaticStore};
pub use tokenize::{is_connector, tokenize};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{path}:{line}: expected {expected} values, found {found}")]
    Dimension {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}: header declares {declared} records, found {found}")]
    Count { path: PathBuf, declared: usize, found: usize },
    #[error("{path}: bad or repeated contextual key `{key}`")]
    Key { path: PathBuf, key: String },
    #[error("{path}: token positions of `{key}` are not contiguous from 0")]
    Gap { path: PathBuf, key: String },
    #[error("contextual sequence for `{0}` is empty")]
    EmptySequence(String),
    #[error("vector dimension {found} does not match {expected}")]
    Mismatch { expected: usize, found: usize },
    #[error("duplicate key `{0}`")]
    DuplicateKey(String),
}

impl StoreError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        StoreError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Ordered token vectors for one input string.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    pub vectors: Vec<Vec<f64>>,
    pub dim: usize,
}

impl TokenSequence {
    pub fn empty(dim: usize) -> Self {
        Self {
            tokens: Vec::new(),
            vectors: Vec::new(),
            dim,
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Arithmetic mean of a sequence's vectors; the zero vector when empty.
pub fn mean_pool(seq: &TokenSequence) -> Vec<f64> {
    vecmath::mean(&seq.vectors, seq.dim)
}

/// FNV-1a, 64-bit.
pub fn stable_hash(token: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    token.bytes().fold(OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

/// Deterministic unit vectors for tokens no store knows.
///
/// The generator is ChaCha8 seeded with `stable_hash(token) ^ seed`; `dim`
/// standard-normal draws are L2-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashFallback {
    pub dim: usize,
    pub seed: u64,
}

impl HashFallback {
    pub fn vector(&self, token: &str) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(stable_hash(token) ^ self.seed);
        let mut v: Vec<f64> = (0..self.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = vecmath::norm(&v);
        if n > 0.0 {
            v.iter_mut().for_each(|x| *x /= n);
        } else if let Some(first) = v.first_mut() {
            *first = 1.0;
        }
        v
    }
}

pub const DEFAULT_FALLBACK_SEED: u64 = 0x5EED_0F_EA;

/// Contextual store, then static store, then hash fallback.
#[derive(Debug, Clone)]
pub struct ProviderChain {
    contextual: Option<ContextualStore>,
    static_store: Option<StaticStore>,
    fallback: HashFallback,
}

impl ProviderChain {
    /// Fallback-only chain.
    pub fn fallback(dim: usize, seed: u64) -> Self {
        Self {
            contextual: None,
            static_store: None,
            fallback: HashFallback { dim, seed },
        }
    }

    /// Builds a chain; the fallback takes the stores' dimension, and all
    /// stores must agree on it.
    pub fn new(
        contextual: Option<ContextualStore>,
        static_store: Option<StaticStore>,
        fallback_dim: usize,
        seed: u64,
    ) -> Result<Self, StoreError> {
        let dims: Vec<usize> = contextual
            .iter()
            .map(|c| c.dim())
            .chain(static_store.iter().map(|s| s.dim()))
            .collect();
        let dim = dims.first().copied().unwrap_or(fallback_dim);
        if let Some(&bad) = dims.iter().find(|&&d| d != dim) {
            return Err(StoreError::Mismatch { expected: dim, found: bad });
        }
        Ok(Self {
            contextual,
            static_store,
            fallback: HashFallback { dim, seed },
        })
    }

    pub fn dim(&self) -> usize {
        self.fallback.dim
    }

    pub fn token_vector(&self, token: &str) -> Vec<f64> {
        self.static_store
            .as_ref()
            .and_then(|s| s.get(token))
            .unwrap_or_else(|| self.fallback.vector(token))
    }

    /// Token vectors for `text`.
    ///
    /// A contextual-store hit returns the stored vectors; otherwise the text
    /// is tokenized and each token resolved static-then-fallback.
    pub fn encode_sequence(&self, text: &str) -> TokenSequence {
        if text.is_empty() {
            return TokenSequence::empty(self.dim());
        }
        if let Some(vectors) = self.contextual.as_ref().and_then(|c| c.get(text)) {
            return TokenSequence {
                tokens: (0..vectors.len()).map(|i| format!("#{i}")).collect(),
                vectors,
                dim: self.dim(),
            };
        }
        let tokens = tokenize(text);
        let vectors = tokens.iter().map(|t| self.token_vector(t)).collect();
        TokenSequence {
            tokens,
            vectors,
            dim: self.dim(),
        }
    }
}

/// Entity vectors keyed by entity identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            vectors: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, entity: &str, vector: Vec<f64>) -> Result<(), StoreError> {
        if vector.len() != self.dim {
            return Err(StoreError::Mismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        self.vectors.insert(entity.to_string(), vector);
        Ok(())
    }

    pub fn get(&self, entity: &str) -> Option<&[f64]> {
        self.vectors.get(entity).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.vectors.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// `(entity, vector)` pairs in identifier order.
    pub fn entries(&self) -> Vec<(&str, &[f64])> {
        self.iter().collect()
    }

    /// Entries for the listed entities, skipping unknown ones.
    pub fn select<'a, I: IntoIterator<Item = &'a str>>(&self, ids: I) -> Vec<(&str, &[f64])> {
        ids.into_iter()
            .filter_map(|id| self.vectors.get_key_value(id).map(|(k, v)| (k.as_str(), v.as_slice())))
            .collect()
    }

    pub fn load(path: &Path) -> Result<Self, StoreError> {
        let mut vectors = BTreeMap::new();
        let dim = read_vector_file(path, |key, v| {
            if vectors.insert(key.to_string(), v).is_some() {
                return Err(StoreError::DuplicateKey(key.to_string()));
            }
            Ok(())
        })?;
        Ok(Self { dim, vectors })
    }

    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        write_vector_file(path, self.dim, self.iter())
    }
}

/// Averaged token vectors of each entity's name.
pub fn name_vector_baseline(provider: &ProviderChain, names: &[(String, String)]) -> EmbeddingTable {
    let vectors: Vec<Vec<f64>> = names
        .par_iter()
        .map(|(_, name)| mean_pool(&provider.encode_sequence(name)))
        .collect();
    let mut table = EmbeddingTable::new(provider.dim());
    for ((id, _), v) in names.iter().zip(vectors) {
        table.insert(id, v).expect("provider dimension");
    }
    table
}

/// All attribute values of `entity` except those of `exclude`, ordered by
/// (attribute, value) and joined with single spaces.
pub fn concat_attribute_values(graph: &KnowledgeGraph, entity: &str, exclude: Option<&str>) -> String {
    let mut pairs: Vec<(&str, &str)> = graph
        .attributes_of(entity)
        .filter(|t| Some(t.attribute.as_str()) != exclude)
        .map(|t| (t.attribute.as_str(), t.value.as_str()))
        .collect();
    pairs.sort_unstable();
    pairs.iter().map(|(_, v)| *v).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::GraphBuilder;

    #[test]
    fn empty_text_is_empty_sequence() {
        let p = ProviderChain::fallback(8, 1);
        assert!(p.encode_sequence("").is_empty());
    }

    #[test]
    fn fallback_is_deterministic_and_unit_norm() {
        let p = ProviderChain::fallback(16, 42);
        let a = p.encode_sequence("2010 GCC U-23 Championship");
        let b = p.encode_sequence("2010 GCC U-23 Championship");
        assert_eq!(a.len(), 4);
        assert_eq!(a, b);
        for v in &a.vectors {
            assert!((vecmath::norm(v) - 1.0).abs() < 1e-12);
        }
        let other_seed = ProviderChain::fallback(16, 43).encode_sequence("2010");
        assert_ne!(other_seed.vectors[0], a.vectors[0]);
    }

    #[test]
    fn contextual_hit_returns_stored_vectors() {
        let stored: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64, 1.0]).collect();
        let mut ctx = ContextualStore::new(2);
        ctx.insert("Battle of Aden 2019", &stored).unwrap();
        let p = ProviderChain::new(Some(ctx), None, 2, 0).unwrap();
        let seq = p.encode_sequence("Battle of Aden 2019");
        assert_eq!(seq.vectors, stored);
        // Exact-key lookup: a different casing tokenizes instead.
        assert_eq!(p.encode_sequence("battle of aden 2019").len(), 4);
    }

    #[test]
    fn static_store_precedes_fallback() {
        let mut st = StaticStore::new(2);
        st.insert("doha", &[0.5, 0.25]).unwrap();
        let p = ProviderChain::new(None, Some(st), 99, 0).unwrap();
        assert_eq!(p.dim(), 2);
        let seq = p.encode_sequence("Doha Qatar");
        assert_eq!(seq.vectors[0], vec![0.5, 0.25]);
        assert!((vecmath::norm(&seq.vectors[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_store_dimensions_rejected() {
        let p = ProviderChain::new(Some(ContextualStore::new(3)), Some(StaticStore::new(2)), 3, 0);
        assert!(matches!(p, Err(StoreError::Mismatch { expected: 3, found: 2 })));
    }

    #[test]
    fn mean_pool_cases() {
        let seq = |vs: Vec<Vec<f64>>| TokenSequence {
            tokens: vec![String::new(); vs.len()],
            dim: 2,
            vectors: vs,
        };
        assert_eq!(mean_pool(&seq(vec![vec![1.5, -2.0]])), vec![1.5, -2.0]);
        assert_eq!(mean_pool(&seq(vec![vec![1.0, -3.0], vec![-1.0, 3.0]])), vec![0.0, 0.0]);
        let m = mean_pool(&seq(vec![vec![1.0, 2.0], vec![3.0, -4.0], vec![2.0, 5.0]]));
        assert!((m[0] - 2.0).abs() < 1e-15 && (m[1] - 1.0).abs() < 1e-15);
        assert_eq!(mean_pool(&TokenSequence::empty(3)), vec![0.0; 3]);
    }

    #[test]
    fn baseline_single_token_and_duplicates() {
        let p = ProviderChain::fallback(8, 5);
        let names = vec![
            ("e1".to_string(), "Doha".to_string()),
            ("e2".to_string(), "Black May".to_string()),
            ("e3".to_string(), "Black May".to_string()),
        ];
        let t = name_vector_baseline(&p, &names);
        assert_eq!(t.get("e1").unwrap(), p.token_vector("doha").as_slice());
        assert_eq!(t.get("e2"), t.get("e3"));
    }

    #[test]
    fn attribute_concatenation_order() {
        let mut b = GraphBuilder::new();
        b.add_attribute_triple("e", "location", "Doha");
        b.add_attribute_triple("e", "date", "2010-05-14");
        b.add_attribute_triple("e", "label", "2010 GCC U-23 Championship");
        b.add_attribute_triple("f", "count", "12");
        b.add_entity("g");
        let g = b.build();
        assert_eq!(concat_attribute_values(&g, "e", Some("label")), "2010-05-14 Doha");
        assert_eq!(concat_attribute_values(&g, "g", None), "");
        assert_eq!(concat_attribute_values(&g, "f", Some("label")), "12");
    }

    #[test]
    fn table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.vec");
        let mut t = EmbeddingTable::new(3);
        t.insert("http://x/a", vec![0.1, 1.0 / 3.0, -2e-9]).unwrap();
        t.insert("http://x/b", vec![0.0, 0.0, 0.0]).unwrap();
        t.save(&path).unwrap();
        assert_eq!(EmbeddingTable::load(&path).unwrap(), t);
    }
}
