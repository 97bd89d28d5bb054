//! In-memory knowledge graphs and the gold alignment between two of them.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error, PartialEq)]
pub enum KgError {
    #[error("source entity `{0}` appears in more than one gold link")]
    DuplicateSource(String),
    #[error("target entity `{0}` appears in more than one gold link")]
    DuplicateTarget(String),
    #[error("link index {index} out of range for {len} links")]
    LinkIndexOutOfRange { index: usize, len: usize },
    #[error("link index {0} assigned to more than one split")]
    OverlappingSplits(usize),
    #[error("{missing} links are not assigned to any split")]
    IncompleteSplits { missing: usize },
    #[error("split ratios must be non-negative and sum to 1, got {0:?}")]
    BadRatios([f64; 3]),
}

/// Normalizes an identifier to NFC so textually equivalent IRIs compare equal.
pub fn normalize_id(id: &str) -> String {
    id.nfc().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationTriple {
    pub head: String,
    pub relation: String,
    pub tail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AttributeTriple {
    pub entity: String,
    pub attribute: String,
    pub value: String,
}

/// A knowledge graph: entities, relations, attributes and the two kinds of
/// triples over them. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KnowledgeGraph {
    entities: BTreeSet<String>,
    relations: BTreeSet<String>,
    attributes: BTreeSet<String>,
    relation_triples: Vec<RelationTriple>,
    attribute_triples: Vec<AttributeTriple>,
    attr_index: HashMap<String, Vec<usize>>,
}

impl KnowledgeGraph {
    pub fn entities(&self) -> &BTreeSet<String> {
        &self.entities
    }

    pub fn relations(&self) -> &BTreeSet<String> {
        &self.relations
    }

    pub fn attributes(&self) -> &BTreeSet<String> {
        &self.attributes
    }

    pub fn relation_triples(&self) -> &[RelationTriple] {
        &self.relation_triples
    }

    pub fn attribute_triples(&self) -> &[AttributeTriple] {
        &self.attribute_triples
    }

    pub fn contains_entity(&self, id: &str) -> bool {
        self.entities.contains(id)
    }

    /// Attribute triples whose subject is `entity`, in load order.
    pub fn attributes_of<'a>(&'a self, entity: &str) -> impl Iterator<Item = &'a AttributeTriple> + 'a {
        self.attr_index
            .get(entity)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(move |&i| &self.attribute_triples[i])
    }

    /// Returns a copy keeping only entities with at least one relation triple.
    pub fn strip_isolated(&self) -> KnowledgeGraph {
        let mut connected = HashSet::new();
        for t in &self.relation_triples {
            connected.insert(t.head.as_str());
            connected.insert(t.tail.as_str());
        }
        let mut b = GraphBuilder::new();
        for e in self.entities.iter().filter(|e| connected.contains(e.as_str())) {
            b.add_entity(e);
        }
        for t in &self.relation_triples {
            b.add_relation_triple(&t.head, &t.relation, &t.tail);
        }
        for t in &self.attribute_triples {
            if connected.contains(t.entity.as_str()) {
                b.add_attribute_triple(&t.entity, &t.attribute, &t.value);
            }
        }
        b.build()
    }

    /// Degree summary over the relation multigraph, treated as undirected.
    pub fn degree_stats(&self) -> DegreeStats {
        if self.entities.is_empty() {
            return DegreeStats::default();
        }
        let mut degree: HashMap<&str, usize> = self.entities.iter().map(|e| (e.as_str(), 0)).collect();
        for t in &self.relation_triples {
            *degree.get_mut(t.head.as_str()).expect("head in entity set") += 1;
            *degree.get_mut(t.tail.as_str()).expect("tail in entity set") += 1;
        }
        let total: usize = degree.values().sum();
        DegreeStats {
            entities: self.entities.len(),
            min: degree.values().copied().min().unwrap_or(0),
            max: degree.values().copied().max().unwrap_or(0),
            mean: total as f64 / self.entities.len() as f64,
            isolated: degree.values().filter(|&&d| d == 0).count(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DegreeStats {
    pub entities: usize,
    pub min: usize,
    pub mean: f64,
    pub max: usize,
    pub isolated: usize,
}

/// Accumulates triples, interning identifiers and dropping duplicates.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    entities: BTreeSet<String>,
    relations: BTreeSet<String>,
    attributes: BTreeSet<String>,
    relation_triples: Vec<RelationTriple>,
    attribute_triples: Vec<AttributeTriple>,
    seen_rel: HashSet<RelationTriple>,
    seen_attr: HashSet<AttributeTriple>,
    duplicates: usize,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_entity(&mut self, id: &str) {
        let id = normalize_id(id);
        if !self.entities.contains(&id) {
            self.entities.insert(id);
        }
    }

    /// Returns `false` when the triple was already present.
    pub fn add_relation_triple(&mut self, head: &str, relation: &str, tail: &str) -> bool {
        let t = RelationTriple {
            head: normalize_id(head),
            relation: normalize_id(relation),
            tail: normalize_id(tail),
        };
        if self.seen_rel.contains(&t) {
            self.duplicates += 1;
            return false;
        }
        self.entities.insert(t.head.clone());
        self.entities.insert(t.tail.clone());
        self.relations.insert(t.relation.clone());
        self.seen_rel.insert(t.clone());
        self.relation_triples.push(t);
        true
    }

    /// Literal values are kept verbatim; only identifiers are normalized.
    pub fn add_attribute_triple(&mut self, entity: &str, attribute: &str, value: &str) -> bool {
        let t = AttributeTriple {
            entity: normalize_id(entity),
            attribute: normalize_id(attribute),
            value: value.to_string(),
        };
        if self.seen_attr.contains(&t) {
            self.duplicates += 1;
            return false;
        }
        self.entities.insert(t.entity.clone());
        self.attributes.insert(t.attribute.clone());
        self.seen_attr.insert(t.clone());
        self.attribute_triples.push(t);
        true
    }

    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn build(self) -> KnowledgeGraph {
        let mut attr_index: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, t) in self.attribute_triples.iter().enumerate() {
            attr_index.entry(t.entity.clone()).or_default().push(i);
        }
        KnowledgeGraph {
            entities: self.entities,
            relations: self.relations,
            attributes: self.attributes,
            relation_triples: self.relation_triples,
            attribute_triples: self.attribute_triples,
            attr_index,
        }
    }
}

pub type Link = (String, String);

/// Gold links between a source and a target graph, partitioned into
/// train/valid/test index sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentSet {
    links: Vec<Link>,
    train: Vec<usize>,
    valid: Vec<usize>,
    test: Vec<usize>,
}

impl AlignmentSet {
    /// Validates the 1-to-1 property and that the three index sets partition the links.
    pub fn new(links: Vec<Link>, train: Vec<usize>, valid: Vec<usize>, test: Vec<usize>) -> Result<Self, KgError> {
        check_one_to_one(&links)?;
        let mut assigned = vec![false; links.len()];
        for &i in train.iter().chain(&valid).chain(&test) {
            let slot = assigned
                .get_mut(i)
                .ok_or(KgError::LinkIndexOutOfRange { index: i, len: links.len() })?;
            if *slot {
                return Err(KgError::OverlappingSplits(i));
            }
            *slot = true;
        }
        let missing = assigned.iter().filter(|a| !**a).count();
        if missing > 0 {
            return Err(KgError::IncompleteSplits { missing });
        }
        Ok(Self { links, train, valid, test })
    }

    /// Randomly partitions `links` by the given (train, valid, test) ratios.
    pub fn split_by_ratio(links: Vec<Link>, ratios: [f64; 3], seed: u64) -> Result<Self, KgError> {
        let sum: f64 = ratios.iter().sum();
        if ratios.iter().any(|r| *r < 0.0 || !r.is_finite()) || (sum - 1.0).abs() > 1e-9 {
            return Err(KgError::BadRatios(ratios));
        }
        let mut order: Vec<usize> = (0..links.len()).collect();
        crate::dataset::shuffle_in_place(&mut order, seed);
        let n = links.len();
        let n_train = (ratios[0] * n as f64).round() as usize;
        let n_valid = ((ratios[1] * n as f64).round() as usize).min(n - n_train.min(n));
        let n_train = n_train.min(n);
        let train = order[..n_train].to_vec();
        let valid = order[n_train..n_train + n_valid].to_vec();
        let test = order[n_train + n_valid..].to_vec();
        Self::new(links, train, valid, test)
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn train(&self) -> impl Iterator<Item = &Link> {
        self.train.iter().map(|&i| &self.links[i])
    }

    pub fn valid(&self) -> impl Iterator<Item = &Link> {
        self.valid.iter().map(|&i| &self.links[i])
    }

    pub fn test(&self) -> impl Iterator<Item = &Link> {
        self.test.iter().map(|&i| &self.links[i])
    }

    pub fn split_sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.valid.len(), self.test.len())
    }

    pub fn train_indices(&self) -> &[usize] {
        &self.train
    }

    pub fn valid_indices(&self) -> &[usize] {
        &self.valid
    }

    pub fn test_indices(&self) -> &[usize] {
        &self.test
    }
}

fn check_one_to_one(links: &[Link]) -> Result<(), KgError> {
    let mut sources = HashSet::new();
    let mut targets = HashSet::new();
    for (s, t) in links {
        if !sources.insert(s.as_str()) {
            return Err(KgError::DuplicateSource(s.clone()));
        }
        if !targets.insert(t.as_str()) {
            return Err(KgError::DuplicateTarget(t.clone()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityCategory {
    Event,
    Other,
}

impl EntityCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityCategory::Event => "event",
            EntityCategory::Other => "other",
        }
    }

    pub fn parse(tag: &str) -> Option<Self> {
        match tag.trim().to_ascii_lowercase().as_str() {
            "event" => Some(EntityCategory::Event),
            "other" => Some(EntityCategory::Other),
            _ => None,
        }
    }
}

/// Category tag per entity; untagged entities count as [`EntityCategory::Other`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntityTypeMap {
    tags: BTreeMap<String, EntityCategory>,
}

impl EntityTypeMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, entity: &str, category: EntityCategory) {
        self.tags.insert(normalize_id(entity), category);
    }

    pub fn category(&self, entity: &str) -> EntityCategory {
        self.tags.get(entity).copied().unwrap_or(EntityCategory::Other)
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, EntityCategory)> {
        self.tags.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Ordered list of attributes consulted for an entity's display name.
///
/// An entry matches an attribute when it equals the full attribute identifier
/// or its local name (the part after the last `#` or `/`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamePolicy {
    pub attributes: Vec<String>,
}

impl Default for NamePolicy {
    fn default() -> Self {
        Self {
            attributes: vec!["label".into(), "prefLabel".into(), "name".into()],
        }
    }
}

impl NamePolicy {
    fn rank(&self, attribute: &str) -> Option<usize> {
        let local = local_name(attribute);
        self.attributes.iter().position(|p| p == attribute || p == local)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityName {
    pub name: String,
    /// Attribute the name was read from; `None` for the IRI fallback.
    pub attribute: Option<String>,
}

/// Resolves one display name per entity.
///
/// The first policy attribute with a non-empty value wins; among several
/// values of that attribute the lexicographically smallest is used. Entities
/// without such a value fall back to their IRI local name with underscores
/// replaced by spaces.
pub fn entity_names(graph: &KnowledgeGraph, policy: &NamePolicy) -> BTreeMap<String, EntityName> {
    graph
        .entities()
        .iter()
        .map(|e| (e.clone(), entity_name(graph, e, policy)))
        .collect()
}

pub fn entity_name(graph: &KnowledgeGraph, entity: &str, policy: &NamePolicy) -> EntityName {
    let mut best: Option<(usize, &AttributeTriple)> = None;
    for t in graph.attributes_of(entity) {
        if t.value.trim().is_empty() {
            continue;
        }
        let Some(rank) = policy.rank(&t.attribute) else { continue };
        let better = match best {
            None => true,
            Some((r, b)) => rank < r || (rank == r && (t.value.as_str(), t.attribute.as_str()) < (b.value.as_str(), b.attribute.as_str())),
        };
        if better {
            best = Some((rank, t));
        }
    }
    match best {
        Some((_, t)) => EntityName {
            name: t.value.trim().to_string(),
            attribute: Some(t.attribute.clone()),
        },
        None => EntityName {
            name: iri_display_name(entity),
            attribute: None,
        },
    }
}

/// Part of an IRI after the last `#` or `/`, ignoring angle brackets.
pub fn local_name(iri: &str) -> &str {
    let iri = iri.trim().trim_start_matches('<').trim_end_matches('>');
    match iri.rfind(['#', '/']) {
        Some(pos) if pos + 1 < iri.len() => &iri[pos + 1..],
        _ => iri,
    }
}

/// Human-readable name derived from an IRI's local fragment.
pub fn iri_display_name(iri: &str) -> String {
    let local = percent_decode(local_name(iri));
    let name = local.replace('_', " ");
    let name = name.split_whitespace().collect::<Vec<_>>().join(" ");
    if name.is_empty() {
        iri.trim().to_string()
    } else {
        name
    }
}

fn percent_decode(s: &str) -> String {
    if !s.contains('%') {
        return s.to_string();
    }
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' && i + 2 < bytes.len() {
            let hi = (bytes[i + 1] as char).to_digit(16);
            let lo = (bytes[i + 2] as char).to_digit(16);
            if let (Some(hi), Some(lo)) = (hi, lo) {
                out.push((hi * 16 + lo) as u8);
                i += 3;
                continue;
            }
        }
        out.push(bytes[i]);
        i += 1;
    }
    String::from_utf8(out).unwrap_or_else(|_| s.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_with_isolated() -> KnowledgeGraph {
        let mut b = GraphBuilder::new();
        b.add_relation_triple("a", "r", "b");
        for i in 0..5 {
            b.add_attribute_triple("c", &format!("p{i}"), "v");
        }
        b.add_attribute_triple("a", "p", "x");
        b.build()
    }

    #[test]
    fn name_from_label_attribute() {
        let mut b = GraphBuilder::new();
        b.add_attribute_triple("http://x/e1", "http://www.w3.org/2000/01/rdf-schema#label", "Battle of Aden 2019");
        let g = b.build();
        let names = entity_names(&g, &NamePolicy::default());
        assert_eq!(names["http://x/e1"].name, "Battle of Aden 2019");
    }

    #[test]
    fn name_falls_back_to_fragment() {
        let mut b = GraphBuilder::new();
        b.add_entity("http://dbpedia.org/resource/2010_GCC_U-23_Championship");
        let g = b.build();
        let n = entity_name(&g, "http://dbpedia.org/resource/2010_GCC_U-23_Championship", &NamePolicy::default());
        assert_eq!(n.name, "2010 GCC U-23 Championship");
        assert_eq!(n.attribute, None);
    }

    #[test]
    fn two_labels_pick_lexicographic_first() {
        let mut b = GraphBuilder::new();
        b.add_attribute_triple("e", "label", "Zeta");
        b.add_attribute_triple("e", "label", "Alpha");
        let g = b.build();
        assert_eq!(entity_name(&g, "e", &NamePolicy::default()).name, "Alpha");
        // Insertion order must not matter.
        let mut b = GraphBuilder::new();
        b.add_attribute_triple("e", "label", "Alpha");
        b.add_attribute_triple("e", "label", "Zeta");
        assert_eq!(entity_name(&b.build(), "e", &NamePolicy::default()).name, "Alpha");
    }

    #[test]
    fn policy_order_beats_value_order() {
        let mut b = GraphBuilder::new();
        b.add_attribute_triple("e", "http://xmlns.com/foaf/0.1/name", "Aaa");
        b.add_attribute_triple("e", "http://www.w3.org/2000/01/rdf-schema#label", "Zzz");
        let g = b.build();
        assert_eq!(entity_name(&g, "e", &NamePolicy::default()).name, "Zzz");
    }

    #[test]
    fn percent_encoded_fragment_is_decoded() {
        assert_eq!(iri_display_name("http://pl.dbpedia.org/resource/M%C3%A4ster_2019"), "Mäster 2019");
        assert_eq!(iri_display_name("http://x/"), "http://x/");
    }

    #[test]
    fn strip_removes_unconnected_entities() {
        let mut b = GraphBuilder::new();
        b.add_relation_triple("a", "r", "b");
        b.add_entity("c");
        let g = b.build();
        assert_eq!(g.entities().len(), 3);
        assert_eq!(g.strip_isolated().entities().len(), 2);
    }

    #[test]
    fn strip_connected_graph_is_identity() {
        let mut b = GraphBuilder::new();
        b.add_relation_triple("a", "r", "b");
        b.add_relation_triple("b", "r", "c");
        b.add_attribute_triple("a", "p", "v");
        let g = b.build();
        assert_eq!(g.strip_isolated(), g);
    }

    #[test]
    fn strip_drops_attributes_of_removed_entities() {
        let g = chain_with_isolated();
        let s = g.strip_isolated();
        assert_eq!(s.entities().iter().cloned().collect::<Vec<_>>(), vec!["a", "b"]);
        assert_eq!(s.attribute_triples().len(), 1);
        assert!(s.attribute_triples().iter().all(|t| t.entity != "c"));
        assert_eq!(g.entities().len(), 3, "input unchanged");
        assert_eq!(s.strip_isolated(), s);
    }

    #[test]
    fn degree_stats_cases() {
        assert_eq!(GraphBuilder::new().build().degree_stats(), DegreeStats::default());

        let mut b = GraphBuilder::new();
        b.add_relation_triple("a", "r", "b");
        let d = b.build().degree_stats();
        assert_eq!((d.min, d.max, d.isolated), (1, 1, 0));
        assert_eq!(d.mean, 1.0);

        let mut b = GraphBuilder::new();
        for leaf in ["l1", "l2", "l3", "l4"] {
            b.add_relation_triple("hub", "r", leaf);
        }
        let d = b.build().degree_stats();
        assert_eq!(d.max, 4);
        assert_eq!(d.min, 1);
        assert!((d.mean - 1.6).abs() < 1e-12);
    }

    #[test]
    fn duplicates_counted_and_dropped() {
        let mut b = GraphBuilder::new();
        assert!(b.add_relation_triple("a", "r", "b"));
        assert!(!b.add_relation_triple("a", "r", "b"));
        assert!(b.add_attribute_triple("a", "p", "v"));
        assert!(!b.add_attribute_triple("a", "p", "v"));
        assert_eq!(b.duplicates(), 2);
        let g = b.build();
        assert_eq!(g.relation_triples().len(), 1);
        assert_eq!(g.attribute_triples().len(), 1);
    }

    #[test]
    fn identifiers_are_nfc_normalized() {
        let mut b = GraphBuilder::new();
        // "ä" decomposed vs composed
        b.add_relation_triple("ma\u{0308}ster", "r", "x");
        b.add_relation_triple("m\u{00e4}ster", "r", "x");
        let g = b.build();
        assert_eq!(g.relation_triples().len(), 1);
        assert!(g.contains_entity("m\u{00e4}ster"));
    }

    #[test]
    fn alignment_rejects_non_injective_links() {
        let links = vec![("a".into(), "x".into()), ("a".into(), "y".into())];
        assert_eq!(
            AlignmentSet::new(links, vec![0, 1], vec![], vec![]).unwrap_err(),
            KgError::DuplicateSource("a".into())
        );
        let links = vec![("a".into(), "x".into()), ("b".into(), "x".into())];
        assert_eq!(
            AlignmentSet::new(links, vec![0, 1], vec![], vec![]).unwrap_err(),
            KgError::DuplicateTarget("x".into())
        );
    }

    #[test]
    fn alignment_requires_partition() {
        let links: Vec<Link> = (0..3).map(|i| (format!("s{i}"), format!("t{i}"))).collect();
        assert_eq!(
            AlignmentSet::new(links.clone(), vec![0], vec![0], vec![1, 2]).unwrap_err(),
            KgError::OverlappingSplits(0)
        );
        assert_eq!(
            AlignmentSet::new(links.clone(), vec![0], vec![], vec![1]).unwrap_err(),
            KgError::IncompleteSplits { missing: 1 }
        );
        let a = AlignmentSet::new(links, vec![0], vec![1], vec![2]).unwrap();
        assert_eq!(a.split_sizes(), (1, 1, 1));
    }

    #[test]
    fn ratio_split_sizes_sum_to_links() {
        for n in [0usize, 1, 7, 20, 101] {
            let links: Vec<Link> = (0..n).map(|i| (format!("s{i}"), format!("t{i}"))).collect();
            let a = AlignmentSet::split_by_ratio(links, [0.2, 0.1, 0.7], 3).unwrap();
            let (tr, va, te) = a.split_sizes();
            assert_eq!(tr + va + te, n);
        }
    }

    #[test]
    fn type_map_defaults_to_other() {
        let mut m = EntityTypeMap::new();
        m.insert("e", EntityCategory::Event);
        assert_eq!(m.category("e"), EntityCategory::Event);
        assert_eq!(m.category("f"), EntityCategory::Other);
    }
}
