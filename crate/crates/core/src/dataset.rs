//! Benchmark directory layout and the dataset-construction filters.
//!
//! ```text
//! <dir>/rel_triples_1   head<TAB>relation<TAB>tail
//! <dir>/rel_triples_2
//! <dir>/attr_triples_1  entity<TAB>attribute<TAB>value (value may contain tabs)
//! <dir>/attr_triples_2
//! <dir>/ent_links       source<TAB>target
//! <dir>/entity_types    entity<TAB>event|other   (optional)
//! <dir>/<fold>/train_links, valid_links, test_links
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::kg::{
    entity_names, normalize_id, AlignmentSet, EntityCategory, EntityTypeMap, GraphBuilder, KgError, KnowledgeGraph, Link,
    NamePolicy, RelationTriple,
};
use crate::strsim::{levenshtein_ratio_chars, NameNormalization};

pub const REL_TRIPLES: [&str; 2] = ["rel_triples_1", "rel_triples_2"];
pub const ATTR_TRIPLES: [&str; 2] = ["attr_triples_1", "attr_triples_2"];
pub const ENT_LINKS: &str = "ent_links";
pub const ENTITY_TYPES: &str = "entity_types";
pub const SPLIT_FILES: [&str; 3] = ["train_links", "valid_links", "test_links"];

pub const DEFAULT_DIFFICULTY_THRESHOLD: f64 = 0.9;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: expected {expected} tab-separated fields, found {found}")]
    Malformed {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}:{line}: empty identifier")]
    EmptyField { path: PathBuf, line: usize },
    #[error("{path}:{line}: unknown entity `{entity}`")]
    UnknownEntity { path: PathBuf, line: usize, entity: String },
    #[error("{path}:{line}: link ({source_entity}, {target_entity}) is not in ent_links")]
    UnknownLink {
        path: PathBuf,
        line: usize,
        source_entity: String,
        target_entity: String,
    },
    #[error("{path}:{line}: unknown entity category `{tag}`")]
    BadTag { path: PathBuf, line: usize, tag: String },
    #[error("no split folder with train/valid/test links under {0}")]
    MissingSplit(PathBuf),
    #[error("no name for entity `{0}`")]
    MissingName(String),
    #[error("shared triple lists differ in length ({0} vs {1})")]
    SharedLength(usize, usize),
    #[error(transparent)]
    Alignment(#[from] KgError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Counts reported after loading one graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct GraphStats {
    pub entities: usize,
    pub relations: usize,
    pub relation_triples: usize,
    pub attributes: usize,
    pub attribute_triples: usize,
    pub duplicates_dropped: usize,
}

impl GraphStats {
    fn of(g: &KnowledgeGraph, duplicates_dropped: usize) -> Self {
        Self {
            entities: g.entities().len(),
            relations: g.relations().len(),
            relation_triples: g.relation_triples().len(),
            attributes: g.attributes().len(),
            attribute_triples: g.attribute_triples().len(),
            duplicates_dropped,
        }
    }
}

/// Two graphs and their gold links, before any split is attached.
#[derive(Debug, Clone)]
pub struct GraphPair {
    pub kg1: KnowledgeGraph,
    pub kg2: KnowledgeGraph,
    pub links: Vec<Link>,
    pub stats: [GraphStats; 2],
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub kg1: KnowledgeGraph,
    pub kg2: KnowledgeGraph,
    pub alignment: AlignmentSet,
    pub types: Option<EntityTypeMap>,
    pub stats: [GraphStats; 2],
    /// Folder the split files were read from.
    pub split_dir: PathBuf,
}

impl Dataset {
    /// `(source, target)` gold map over all links.
    pub fn gold_map(&self) -> HashMap<String, String> {
        self.alignment.links().iter().cloned().collect()
    }
}

/// Non-empty lines with their 1-based numbers, CR stripped.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.is_empty())
}

fn read(path: &Path) -> Result<String, DatasetError> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// Splits a line into exactly `n` fields; the last field keeps any tabs when
/// `rest_in_last` is set.
fn fields<'a>(path: &Path, line_no: usize, line: &'a str, n: usize, rest_in_last: bool) -> Result<Vec<&'a str>, DatasetError> {
    let parts: Vec<&str> = if rest_in_last { line.splitn(n, '\t').collect() } else { line.split('\t').collect() };
    if parts.len() != n {
        return Err(DatasetError::Malformed {
            path: path.to_path_buf(),
            line: line_no,
            expected: n,
            found: parts.len(),
        });
    }
    let ids = if rest_in_last { &parts[..n - 1] } else { &parts[..] };
    if ids.iter().any(|f| f.trim().is_empty()) {
        return Err(DatasetError::EmptyField {
            path: path.to_path_buf(),
            line: line_no,
        });
    }
    Ok(parts)
}

fn load_graph(dir: &Path, side: usize) -> Result<(KnowledgeGraph, GraphStats), DatasetError> {
    let rel_path = dir.join(REL_TRIPLES[side]);
    let attr_path = dir.join(ATTR_TRIPLES[side]);
    let (rel_text, attr_text) = rayon::join(|| read(&rel_path), || read(&attr_path));
    let (rel_text, attr_text) = (rel_text?, attr_text?);
    let mut b = GraphBuilder::new();
    for (n, line) in lines(&rel_text) {
        let f = fields(&rel_path, n, line, 3, false)?;
        b.add_relation_triple(f[0], f[1], f[2]);
    }
    for (n, line) in lines(&attr_text) {
        let f = fields(&attr_path, n, line, 3, true)?;
        b.add_attribute_triple(f[0], f[1], f[2]);
    }
    let duplicates = b.duplicates();
    let g = b.build();
    let stats = GraphStats::of(&g, duplicates);
    Ok((g, stats))
}

fn read_links(path: &Path) -> Result<Vec<(usize, Link)>, DatasetError> {
    let text = read(path)?;
    lines(&text)
        .map(|(n, line)| {
            let f = fields(path, n, line, 2, false)?;
            Ok((n, (normalize_id(f[0]), normalize_id(f[1]))))
        })
        .collect()
}

/// Loads both graphs and `ent_links`; every linked entity must occur in its graph.
pub fn load_graphs(dir: &Path) -> Result<GraphPair, DatasetError> {
    let links_path = dir.join(ENT_LINKS);
    let ((g1, g2), links) = rayon::join(|| rayon::join(|| load_graph(dir, 0), || load_graph(dir, 1)), || read_links(&links_path));
    let ((kg1, s1), (kg2, s2), links) = (g1?, g2?, links?);
    for (n, (s, t)) in &links {
        for (entity, g) in [(s, &kg1), (t, &kg2)] {
            if !g.contains_entity(entity) {
                return Err(DatasetError::UnknownEntity {
                    path: links_path.clone(),
                    line: *n,
                    entity: entity.clone(),
                });
            }
        }
    }
    let links: Vec<Link> = links.into_iter().map(|(_, l)| l).collect();
    // Validates the 1-to-1 property up front.
    AlignmentSet::new(links.clone(), (0..links.len()).collect(), vec![], vec![])?;
    Ok(GraphPair {
        kg1,
        kg2,
        links,
        stats: [s1, s2],
    })
}

/// Finds the folder holding the split files.
///
/// With an explicit fold it is `<dir>/<fold>`; otherwise `<dir>` itself if it
/// has `train_links`, else the lexicographically first descendant (up to two
/// levels deep) that does.
pub fn resolve_split_dir(dir: &Path, fold: Option<&str>) -> Result<PathBuf, DatasetError> {
    let has_split = |p: &Path| p.join(SPLIT_FILES[0]).is_file();
    if let Some(fold) = fold {
        let p = dir.join(fold);
        return if has_split(&p) { Ok(p) } else { Err(DatasetError::MissingSplit(p)) };
    }
    if has_split(dir) {
        return Ok(dir.to_path_buf());
    }
    let subdirs = |p: &Path| -> Vec<PathBuf> {
        let mut v: Vec<PathBuf> = fs::read_dir(p)
            .into_iter()
            .flatten()
            .flatten()
            .map(|e| e.path())
            .filter(|p| p.is_dir())
            .collect();
        v.sort();
        v
    };
    for first in subdirs(dir) {
        if has_split(&first) {
            return Ok(first);
        }
        if let Some(second) = subdirs(&first).into_iter().find(|p| has_split(p)) {
            return Ok(second);
        }
    }
    Err(DatasetError::MissingSplit(dir.to_path_buf()))
}

/// Loads graphs, links, one split fold and the optional type map.
pub fn load_dataset(dir: &Path, fold: Option<&str>) -> Result<Dataset, DatasetError> {
    let pair = load_graphs(dir)?;
    let split_dir = resolve_split_dir(dir, fold)?;
    let index: HashMap<&Link, usize> = pair.links.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let mut splits: Vec<Vec<usize>> = Vec::with_capacity(3);
    for name in SPLIT_FILES {
        let path = split_dir.join(name);
        let mut idx = Vec::new();
        for (n, link) in read_links(&path)? {
            let i = *index.get(&link).ok_or_else(|| DatasetError::UnknownLink {
                path: path.clone(),
                line: n,
                source_entity: link.0.clone(),
                target_entity: link.1.clone(),
            })?;
            idx.push(i);
        }
        splits.push(idx);
    }
    let test = splits.pop().expect("three splits");
    let valid = splits.pop().expect("three splits");
    let train = splits.pop().expect("three splits");
    let alignment = AlignmentSet::new(pair.links, train, valid, test)?;

    let types_path = dir.join(ENTITY_TYPES);
    let types = if types_path.is_file() {
        Some(load_entity_types(&types_path, &pair.kg1, &pair.kg2)?)
    } else {
        None
    };
    Ok(Dataset {
        kg1: pair.kg1,
        kg2: pair.kg2,
        alignment,
        types,
        stats: pair.stats,
        split_dir,
    })
}

/// Reads an `entity<TAB>tag` file; each entity must belong to one of the graphs.
pub fn load_entity_types(path: &Path, kg1: &KnowledgeGraph, kg2: &KnowledgeGraph) -> Result<EntityTypeMap, DatasetError> {
    let text = read(path)?;
    let mut map = EntityTypeMap::new();
    for (n, line) in lines(&text) {
        let f = fields(path, n, line, 2, false)?;
        let entity = normalize_id(f[0]);
        if !kg1.contains_entity(&entity) && !kg2.contains_entity(&entity) {
            return Err(DatasetError::UnknownEntity {
                path: path.to_path_buf(),
                line: n,
                entity,
            });
        }
        let category = EntityCategory::parse(f[1]).ok_or_else(|| DatasetError::BadTag {
            path: path.to_path_buf(),
            line: n,
            tag: f[1].to_string(),
        })?;
        map.insert(&entity, category);
    }
    Ok(map)
}

fn write_lines<I, S>(path: &Path, rows: I) -> Result<(), DatasetError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = Vec::new();
    for r in rows {
        out.extend_from_slice(r.as_ref().as_bytes());
        out.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(&out).map_err(io_err(path))
}

fn write_graph(dir: &Path, side: usize, g: &KnowledgeGraph) -> Result<(), DatasetError> {
    write_lines(
        &dir.join(REL_TRIPLES[side]),
        g.relation_triples().iter().map(|t| format!("{}\t{}\t{}", t.head, t.relation, t.tail)),
    )?;
    write_lines(
        &dir.join(ATTR_TRIPLES[side]),
        g.attribute_triples().iter().map(|t| format!("{}\t{}\t{}", t.entity, t.attribute, t.value)),
    )
}

/// Writes graphs, links and the type map to `dir`, and the split into
/// `dir/<fold>`.
pub fn write_dataset(
    dir: &Path,
    kg1: &KnowledgeGraph,
    kg2: &KnowledgeGraph,
    alignment: &AlignmentSet,
    types: Option<&EntityTypeMap>,
    fold: &str,
) -> Result<(), DatasetError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_graph(dir, 0, kg1)?;
    write_graph(dir, 1, kg2)?;
    let link_line = |l: &Link| format!("{}\t{}", l.0, l.1);
    write_lines(&dir.join(ENT_LINKS), alignment.links().iter().map(link_line))?;
    if let Some(types) = types {
        write_lines(&dir.join(ENTITY_TYPES), types.iter().map(|(e, c)| format!("{e}\t{}", c.as_str())))?;
    }
    let split_dir = dir.join(fold);
    fs::create_dir_all(&split_dir).map_err(io_err(&split_dir))?;
    write_lines(&split_dir.join(SPLIT_FILES[0]), alignment.train().map(link_line))?;
    write_lines(&split_dir.join(SPLIT_FILES[1]), alignment.valid().map(link_line))?;
    write_lines(&split_dir.join(SPLIT_FILES[2]), alignment.test().map(link_line))?;
    Ok(())
}

/// Links whose name similarity (Levenshtein ratio) is at most `threshold`.
pub fn filter_difficult_pairs(
    links: &[Link],
    source_names: &BTreeMap<String, String>,
    target_names: &BTreeMap<String, String>,
    threshold: f64,
    normalization: NameNormalization,
) -> Result<Vec<Link>, DatasetError> {
    let mut kept = Vec::new();
    for (s, t) in links {
        let a = source_names.get(s).ok_or_else(|| DatasetError::MissingName(s.clone()))?;
        let b = target_names.get(t).ok_or_else(|| DatasetError::MissingName(t.clone()))?;
        let sim = levenshtein_ratio_chars(&normalization.apply(a), &normalization.apply(b));
        if sim <= threshold {
            kept.push((s.clone(), t.clone()));
        }
    }
    Ok(kept)
}

/// SplitMix64: `state += 0x9E3779B97F4A7C15`, then two xor-shift-multiply
/// rounds. Seeded directly with the user seed.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Fisher-Yates from the last position down, drawing `j = next_u64() % (i + 1)`.
pub fn shuffle_in_place<T>(items: &mut [T], seed: u64) {
    let mut rng = SplitMix64::new(seed);
    for i in (1..items.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}

/// Shuffles and halves; the first half gets the extra item when the count is odd.
pub fn shuffle_split<T: Clone>(items: &[T], seed: u64) -> (Vec<T>, Vec<T>) {
    let mut order: Vec<usize> = (0..items.len()).collect();
    shuffle_in_place(&mut order, seed);
    let cut = items.len().div_ceil(2);
    let pick = |idx: &[usize]| idx.iter().map(|&i| items[i].clone()).collect::<Vec<_>>();
    (pick(&order[..cut]), pick(&order[cut..]))
}

/// Settings for building a benchmark from raw graphs.
#[derive(Debug, Clone)]
pub struct ConstructionConfig {
    pub threshold: f64,
    pub seed: u64,
    pub split_ratios: [f64; 3],
    pub name_policy: NamePolicy,
    pub normalization: NameNormalization,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_DIFFICULTY_THRESHOLD,
            seed: 0,
            split_ratios: [0.2, 0.1, 0.7],
            name_policy: NamePolicy::default(),
            normalization: NameNormalization::default(),
        }
    }
}

/// Keeps only difficult links and distributes shared triples.
///
/// `shared` holds the same source triples expressed in each graph's
/// identifiers, position by position; a shuffled half goes to each graph.
/// Graphs keep all entities; removed links just leave the gold set.
pub fn construct_dataset(
    pair: &GraphPair,
    shared: Option<(&[RelationTriple], &[RelationTriple])>,
    config: &ConstructionConfig,
) -> Result<(KnowledgeGraph, KnowledgeGraph, AlignmentSet), DatasetError> {
    let flatten = |g: &KnowledgeGraph| -> BTreeMap<String, String> {
        entity_names(g, &config.name_policy).into_iter().map(|(k, v)| (k, v.name)).collect()
    };
    let kept = filter_difficult_pairs(&pair.links, &flatten(&pair.kg1), &flatten(&pair.kg2), config.threshold, config.normalization)?;

    let (extra1, extra2) = match shared {
        Some((s1, s2)) => {
            if s1.len() != s2.len() {
                return Err(DatasetError::SharedLength(s1.len(), s2.len()));
            }
            let idx: Vec<usize> = (0..s1.len()).collect();
            let (h1, h2) = shuffle_split(&idx, config.seed);
            (h1.iter().map(|&i| s1[i].clone()).collect(), h2.iter().map(|&i| s2[i].clone()).collect())
        }
        None => (Vec::new(), Vec::new()),
    };
    let extend = |g: &KnowledgeGraph, extra: &[RelationTriple]| {
        let mut b = GraphBuilder::new();
        for e in g.entities() {
            b.add_entity(e);
        }
        for t in g.relation_triples().iter().chain(extra) {
            b.add_relation_triple(&t.head, &t.relation, &t.tail);
        }
        for t in g.attribute_triples() {
            b.add_attribute_triple(&t.entity, &t.attribute, &t.value);
        }
        b.build()
    };
    let kg1 = extend(&pair.kg1, &extra1);
    let kg2 = extend(&pair.kg2, &extra2);
    let alignment = AlignmentSet::split_by_ratio(kept, config.split_ratios, config.seed)?;
    Ok((kg1, kg2, alignment))
}

/// Reads a plain relation-triple file (used for shared triples).
pub fn read_relation_triples(path: &Path) -> Result<Vec<RelationTriple>, DatasetError> {
    let text = read(path)?;
    lines(&text)
        .map(|(n, line)| {
            let f = fields(path, n, line, 3, false)?;
            Ok(RelationTriple {
                head: normalize_id(f[0]),
                relation: normalize_id(f[1]),
                tail: normalize_id(f[2]),
            })
        })
        .collect()
}

/// Synthetic pairs `"<year> Gulf Cup of Nations Under 23"` /
/// `"<year> GCC U-23 Championship"` for `pairs` consecutive years from 1990,
/// split 50/25/25. Names within a graph differ only in the year.
pub fn toy_fixture(pairs: usize, seed: u64) -> (KnowledgeGraph, KnowledgeGraph, AlignmentSet) {
    let mut b1 = GraphBuilder::new();
    let mut b2 = GraphBuilder::new();
    let mut links = Vec::with_capacity(pairs);
    for year in (1990..).take(pairs) {
        let (s, t) = (format!("kg1:e{year}"), format!("kg2:e{year}"));
        b1.add_attribute_triple(&s, "label", &format!("{year} Gulf Cup of Nations Under 23"));
        b2.add_attribute_triple(&t, "label", &format!("{year} GCC U-23 Championship"));
        links.push((s, t));
    }
    let alignment = AlignmentSet::split_by_ratio(links, [0.5, 0.25, 0.25], seed).expect("valid ratios");
    (b1.build(), b2.build(), alignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(dir: &Path) {
        fs::write(dir.join("rel_triples_1"), "a1\tr\tb1\n").unwrap();
        fs::write(dir.join("rel_triples_2"), "a2\tr\tb2\n").unwrap();
        fs::write(dir.join("attr_triples_1"), "a1\tlabel\tAlpha\tbeta\n").unwrap();
        fs::write(dir.join("attr_triples_2"), "a2\tlabel\tAlpha\n").unwrap();
        fs::write(dir.join("ent_links"), "a1\ta2\n").unwrap();
        let split = dir.join("721_5fold").join("1");
        fs::create_dir_all(&split).unwrap();
        fs::write(split.join("train_links"), "a1\ta2\n").unwrap();
        fs::write(split.join("valid_links"), "").unwrap();
        fs::write(split.join("test_links"), "").unwrap();
    }

    #[test]
    fn loads_toy_fixture() {
        let dir = tempfile::tempdir().unwrap();
        toy(dir.path());
        let d = load_dataset(dir.path(), None).unwrap();
        assert_eq!(d.kg1.relation_triples().len() + d.kg2.relation_triples().len(), 2);
        assert_eq!(d.alignment.links().len(), 1);
        assert_eq!(d.kg1.attribute_triples()[0].value, "Alpha\tbeta");
        assert!(d.split_dir.ends_with("721_5fold/1"));
        assert!(d.types.is_none());
        assert_eq!(d.stats[0].entities, 2);
    }

    #[test]
    fn malformed_line_reports_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        toy(dir.path());
        fs::write(dir.path().join("rel_triples_2"), "a2\tr\tb2\nbroken line\n").unwrap();
        match load_graphs(dir.path()) {
            Err(DatasetError::Malformed { path, line, expected, found }) => {
                assert!(path.ends_with("rel_triples_2"));
                assert_eq!((line, expected, found), (2, 3, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn link_to_unknown_entity_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        toy(dir.path());
        fs::write(dir.path().join("ent_links"), "a1\ta2\nghost\tb2\n").unwrap();
        assert!(matches!(
            load_graphs(dir.path()),
            Err(DatasetError::UnknownEntity { line: 2, ref entity, .. }) if entity == "ghost"
        ));
    }

    #[test]
    fn split_link_must_be_gold() {
        let dir = tempfile::tempdir().unwrap();
        toy(dir.path());
        fs::write(dir.path().join("721_5fold/1/test_links"), "a1\tb2\n").unwrap();
        assert!(matches!(load_dataset(dir.path(), None), Err(DatasetError::UnknownLink { .. })));
        assert!(matches!(load_dataset(dir.path(), Some("nope")), Err(DatasetError::MissingSplit(_))));
    }

    #[test]
    fn entity_types_are_validated() {
        let dir = tempfile::tempdir().unwrap();
        toy(dir.path());
        fs::write(dir.path().join("entity_types"), "a1\tevent\n").unwrap();
        let d = load_dataset(dir.path(), None).unwrap();
        assert_eq!(d.types.unwrap().category("a1"), EntityCategory::Event);
        fs::write(dir.path().join("entity_types"), "a1\tperson\n").unwrap();
        assert!(matches!(load_dataset(dir.path(), None), Err(DatasetError::BadTag { .. })));
        fs::write(dir.path().join("entity_types"), "zz\tevent\n").unwrap();
        assert!(matches!(load_dataset(dir.path(), None), Err(DatasetError::UnknownEntity { .. })));
    }

    #[test]
    fn filter_examples() {
        let names1: BTreeMap<String, String> = [("s1", "2010 GCC U-23 Championship"), ("s2", "2010 GCC U-23 Championship")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let names2: BTreeMap<String, String> = [("t1", "2010 GCC U-23 Championship"), ("t2", "2010 Gulf Cup of Nations Under 23")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let links: Vec<Link> = vec![("s1".into(), "t1".into()), ("s2".into(), "t2".into())];
        let kept = filter_difficult_pairs(&links, &names1, &names2, 0.9, NameNormalization::default()).unwrap();
        assert_eq!(kept, vec![("s2".to_string(), "t2".to_string())]);
        assert!(filter_difficult_pairs(&[], &names1, &names2, 0.9, NameNormalization::default()).unwrap().is_empty());
        let missing = vec![("s9".to_string(), "t1".to_string())];
        assert!(matches!(
            filter_difficult_pairs(&missing, &names1, &names2, 0.9, NameNormalization::default()),
            Err(DatasetError::MissingName(e)) if e == "s9"
        ));
    }

    #[test]
    fn shuffle_split_contract() {
        let items: Vec<u32> = (0..10).collect();
        let (a, b) = shuffle_split(&items, 7);
        assert_eq!((a.len(), b.len()), (5, 5));
        let mut all: Vec<u32> = a.iter().chain(&b).copied().collect();
        all.sort();
        assert_eq!(all, items);
        assert_eq!(shuffle_split(&items, 7), (a, b));
        let empty: Vec<u32> = vec![];
        assert_eq!(shuffle_split(&empty, 7), (vec![], vec![]));
        let (a, b) = shuffle_split(&items[..7], 1);
        assert_eq!((a.len(), b.len()), (4, 3));
    }

    #[test]
    fn splitmix_reference_values() {
        // Published reference outputs for seed 1234567.
        let mut r = SplitMix64::new(1234567);
        assert_eq!(r.next_u64(), 6457827717110365317);
        assert_eq!(r.next_u64(), 3203168211198807973);
        assert_eq!(r.next_u64(), 9817491932198370423);
    }
}
