//! Weisfeiler-Lehman subtree kernel between two graphs whose aligned
//! entities share labels.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::kg::{KnowledgeGraph, Link};

pub const DEFAULT_WL_ITERATIONS: usize = 3;

/// Undirected simple graph with one integer label per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    labels: Vec<u32>,
    adjacency: Vec<Vec<usize>>,
}

impl LabeledGraph {
    /// Self-loops are dropped and parallel edges collapsed.
    pub fn new(labels: Vec<u32>, edges: &[(usize, usize)]) -> Self {
        let n = labels.len();
        let mut sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for &(a, b) in edges {
            assert!(a < n && b < n, "edge ({a}, {b}) out of range for {n} nodes");
            if a != b {
                sets[a].insert(b);
                sets[b].insert(a);
            }
        }
        Self {
            labels,
            adjacency: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

fn to_labeled(g: &KnowledgeGraph, label_of: &HashMap<&str, u32>) -> LabeledGraph {
    let index: HashMap<&str, usize> = g.entities().iter().enumerate().map(|(i, e)| (e.as_str(), i)).collect();
    let labels = g.entities().iter().map(|e| label_of[e.as_str()]).collect();
    let edges: Vec<(usize, usize)> = g
        .relation_triples()
        .iter()
        .map(|t| (index[t.head.as_str()], index[t.tail.as_str()]))
        .collect();
    LabeledGraph::new(labels, &edges)
}

/// Label graphs of two knowledge graphs after removing isolated entities.
///
/// Each link whose two entities both survive gets one shared label; every
/// other entity gets a label of its own.
pub fn build_label_graphs(kg1: &KnowledgeGraph, kg2: &KnowledgeGraph, links: &[Link]) -> (LabeledGraph, LabeledGraph) {
    let g1 = kg1.strip_isolated();
    let g2 = kg2.strip_isolated();
    let mut next = 0u32;
    let mut l1: HashMap<&str, u32> = HashMap::new();
    let mut l2: HashMap<&str, u32> = HashMap::new();
    for (s, t) in links {
        if g1.contains_entity(s) && g2.contains_entity(t) && !l1.contains_key(s.as_str()) && !l2.contains_key(t.as_str()) {
            l1.insert(s, next);
            l2.insert(t, next);
            next += 1;
        }
    }
    for (g, l) in [(&g1, &mut l1), (&g2, &mut l2)] {
        for e in g.entities() {
            if !l.contains_key(e.as_str()) {
                l.insert(e, next);
                next += 1;
            }
        }
    }
    (to_labeled(&g1, &l1), to_labeled(&g2, &l2))
}

/// Sparse WL features keyed by `(iteration, compressed label)`.
pub type WlFeatures = BTreeMap<(usize, u32), u64>;

/// WL feature vectors of several graphs with one label compression shared
/// by all of them, so features are comparable across the returned maps.
///
/// Iteration 0 counts the input labels. At iteration `i` a node's signature
/// is its previous label plus the sorted multiset of its neighbors' previous
/// labels; signatures are numbered in sorted order.
pub fn wl_feature_vectors(graphs: &[&LabeledGraph], iterations: usize) -> Vec<WlFeatures> {
    let mut current: Vec<Vec<u32>> = graphs.iter().map(|g| g.labels.clone()).collect();
    let mut features: Vec<WlFeatures> = vec![WlFeatures::new(); graphs.len()];
    let count = |features: &mut [WlFeatures], current: &[Vec<u32>], it: usize| {
        for (f, labels) in features.iter_mut().zip(current) {
            for &l in labels {
                *f.entry((it, l)).or_default() += 1;
            }
        }
    };
    count(&mut features, &current, 0);
    for it in 1..=iterations {
        let signatures: Vec<Vec<(u32, Vec<u32>)>> = graphs
            .par_iter()
            .zip(&current)
            .map(|(g, labels)| {
                (0..g.len())
                    .map(|v| {
                        let mut ns: Vec<u32> = g.adjacency[v].iter().map(|&u| labels[u]).collect();
                        ns.sort_unstable();
                        (labels[v], ns)
                    })
                    .collect()
            })
            .collect();
        let mut dictionary: BTreeMap<&(u32, Vec<u32>), u32> = signatures.iter().flatten().map(|s| (s, 0)).collect();
        for (i, id) in dictionary.values_mut().enumerate() {
            *id = i as u32;
        }
        current = signatures.iter().map(|sigs| sigs.iter().map(|s| dictionary[s]).collect()).collect();
        count(&mut features, &current, it);
    }
    features
}

pub fn wl_feature_vector(g: &LabeledGraph, iterations: usize) -> WlFeatures {
    wl_feature_vectors(&[g], iterations).pop().expect("one graph")
}

pub fn kernel(a: &WlFeatures, b: &WlFeatures) -> u128 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small
        .iter()
        .filter_map(|(k, x)| large.get(k).map(|y| u128::from(*x) * u128::from(*y)))
        .sum()
}

/// `k12 / sqrt(k11 k22)`, or 0 when either self-kernel is 0.
pub fn normalized_kernel(g1: &LabeledGraph, g2: &LabeledGraph, iterations: usize) -> f64 {
    let f = wl_feature_vectors(&[g1, g2], iterations);
    let (k11, k22, k12) = (kernel(&f[0], &f[0]), kernel(&f[1], &f[1]), kernel(&f[0], &f[1]));
    if k11 == 0 || k22 == 0 {
        return 0.0;
    }
    let v = k12 as f64 / ((k11 as f64).sqrt() * (k22 as f64).sqrt());
    v.min(1.0)
}

/// Structural similarity of two knowledge graphs under their gold links.
pub fn wl_similarity(kg1: &KnowledgeGraph, kg2: &KnowledgeGraph, links: &[Link], iterations: usize) -> f64 {
    let (g1, g2) = build_label_graphs(kg1, kg2, links);
    normalized_kernel(&g1, &g2, iterations)
}
