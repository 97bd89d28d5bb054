use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::Serialize;
use serde_json::{json, Value};

use eventea_core::dataset::{
    construct_dataset, load_dataset, load_entity_types, load_graphs, read_relation_triples, resolve_split_dir,
    write_dataset, ConstructionConfig, Dataset, ENTITY_TYPES,
};
use eventea_core::embeddings::{
    concat_attribute_values, name_vector_baseline, ContextualStore, EmbeddingTable, ProviderChain, StaticStore,
    DEFAULT_FALLBACK_SEED,
};
use eventea_core::eval::{
    case_report, recall_by_type, retrieve, CosineScorer, Metrics, NameScorer, PairScorer, RankingResult,
};
use eventea_core::graph_iso::wl_similarity;
use eventea_core::kg::{entity_name, entity_names, KnowledgeGraph, Link, NamePolicy};
use eventea_core::strsim::{name_match_align, NameNormalization, SimilarityKind};
use eventea_core::tae::{encode_graph, feature_table, EncoderOptions, TaeParams};
use eventea_core::timesplit::split_time;
use eventea_core::train::{grid_search, train, TrainConfig, TrainError, TrainInput, TrainOutcome, GRID_BETAS, GRID_MARGINS};

use crate::manifest::Recorder;
use crate::{
    AnalyzeArgs, BaselineArgs, Candidates, CasesArgs, Cli, Command, DatasetArgs, EncodeArgs, EncodeMode, EvalArgs, Failure,
    MakeDatasetArgs, NameArgs, ProviderArgs, SplitArgs, TrainArgs,
};

const DEFAULT_DIM: usize = 768;

type CmdResult = Result<(), Failure>;

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow!("{msg}"))
}

pub fn run(cli: Cli) -> CmdResult {
    let seed = cli.seed;
    match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Baseline(a) => baseline(a),
        Command::Split(a) => split(a),
        Command::Encode(a) => encode(a, seed),
        Command::Train(a) => train_cmd(a, seed),
        Command::Eval(a) => eval(a),
        Command::Cases(a) => cases(a),
        Command::MakeDataset(a) => make_dataset(a, seed),
    }
}

impl NameArgs {
    fn policy(&self) -> NamePolicy {
        if self.name_attr.is_empty() {
            NamePolicy::default()
        } else {
            NamePolicy {
                attributes: self.name_attr.clone(),
            }
        }
    }

    fn normalization(&self) -> NameNormalization {
        NameNormalization {
            lowercase: !self.no_lowercase,
        }
    }

    fn to_json(&self) -> Value {
        json!({ "name_attributes": self.policy().attributes, "lowercase": !self.no_lowercase })
    }
}

impl DatasetArgs {
    fn load(&self) -> anyhow::Result<Dataset> {
        load_dataset(&self.dataset, self.fold.as_deref()).with_context(|| format!("loading {}", self.dataset.display()))
    }

    fn fold_label(&self, d: &Dataset) -> String {
        d.split_dir
            .strip_prefix(&self.dataset)
            .map(|p| p.display().to_string())
            .unwrap_or_else(|_| d.split_dir.display().to_string())
    }
}

impl ProviderArgs {
    /// The chain and the fallback seed it uses.
    fn build(&self, global_seed: Option<u64>, default_dim: usize) -> anyhow::Result<(ProviderChain, u64)> {
        let seed = self.fallback_seed.or(global_seed).unwrap_or(DEFAULT_FALLBACK_SEED);
        let contextual = self
            .contextual_store
            .as_deref()
            .map(ContextualStore::load)
            .transpose()
            .context("loading contextual store")?;
        let static_store = self
            .static_store
            .as_deref()
            .map(StaticStore::load)
            .transpose()
            .context("loading static store")?;
        let chain = ProviderChain::new(contextual, static_store, self.dim.unwrap_or(default_dim), seed)?;
        Ok((chain, seed))
    }

    fn to_json(&self) -> Value {
        json!({
            "static_store": self.static_store,
            "contextual_store": self.contextual_store,
            "dim": self.dim,
        })
    }
}

fn name_map(graph: &KnowledgeGraph, policy: &NamePolicy) -> HashMap<String, String> {
    entity_names(graph, policy).into_iter().map(|(k, v)| (k, v.name)).collect()
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> anyhow::Result<()> {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

#[derive(Debug, Serialize)]
struct MetricLine<'a> {
    metric: String,
    value: Option<f64>,
    count: usize,
    split: &'a str,
    candidates: &'a str,
    fold: &'a str,
}

fn candidates_label(c: Candidates) -> &'static str {
    match c {
        Candidates::Test => "test",
        Candidates::All => "all",
    }
}

/// Standard metric lines plus `hits@k` when `k` is not 1 or 10.
fn metric_lines<'a>(ranks: &[usize], k: usize, candidates: &'a str, fold: &'a str) -> anyhow::Result<Vec<MetricLine<'a>>> {
    let m = Metrics::from_ranks(ranks)?;
    let line = |metric: String, value: f64| MetricLine {
        metric,
        value: Some(value),
        count: m.count,
        split: "test",
        candidates,
        fold,
    };
    let mut lines = vec![
        line("hits@1".into(), m.hits_at_1),
        line("hits@10".into(), m.hits_at_10),
        line("mrr".into(), m.mrr),
    ];
    if k != 1 && k != 10 {
        lines.push(line(format!("hits@{k}"), eventea_core::eval::hits_at(ranks, k)?));
    }
    Ok(lines)
}

fn print_table(title: &str, lines: &[MetricLine<'_>]) {
    let mut s = String::new();
    let _ = writeln!(s, "{title}");
    for l in lines {
        match l.value {
            Some(v) => {
                let _ = writeln!(s, "  {:<14} {:.4}", l.metric, v);
            }
            None => {
                let _ = writeln!(s, "  {:<14} n/a", l.metric);
            }
        }
    }
    if let Some(l) = lines.first() {
        let _ = writeln!(s, "  ({} sources, candidates: {}, fold: {})", l.count, l.candidates, l.fold);
    }
    print!("{s}");
}

fn test_links(d: &Dataset) -> Vec<Link> {
    d.alignment.test().cloned().collect()
}

fn analyze(a: AnalyzeArgs) -> CmdResult {
    let rec = Recorder::new("analyze");
    let pair = load_graphs(&a.data.dataset).with_context(|| format!("loading {}", a.data.dataset.display()))?;
    let split = resolve_split_dir(&a.data.dataset, a.data.fold.as_deref())
        .ok()
        .map(|_| load_dataset(&a.data.dataset, a.data.fold.as_deref()))
        .transpose()?;
    let sim = wl_similarity(&pair.kg1, &pair.kg2, &pair.links, a.wl_iterations);
    let mut report = json!({ "links": pair.links.len(), "wl_iterations": a.wl_iterations, "wl_similarity": sim });
    println!("{:<6} {:>9} {:>9} {:>10} {:>10} {:>10} {:>10} {:>9} {:>8}", "graph", "entities", "relations", "attributes", "rel_trip", "attr_trip", "dups", "deg_mean", "isolated");
    for (i, (g, s)) in [(&pair.kg1, pair.stats[0]), (&pair.kg2, pair.stats[1])].into_iter().enumerate() {
        let d = g.degree_stats();
        println!(
            "{:<6} {:>9} {:>9} {:>10} {:>10} {:>10} {:>10} {:>9.3} {:>8}",
            format!("KG{}", i + 1),
            s.entities,
            s.relations,
            s.attributes,
            s.relation_triples,
            s.attribute_triples,
            s.duplicates_dropped,
            d.mean,
            d.isolated
        );
        report[format!("kg{}", i + 1)] = json!({
            "stats": s,
            "degree": { "min": d.min, "mean": d.mean, "max": d.max, "isolated": d.isolated },
        });
    }
    println!("links: {}", pair.links.len());
    if let Some(d) = &split {
        let (tr, va, te) = d.alignment.split_sizes();
        println!("split {}: train {tr} / valid {va} / test {te}", a.data.fold_label(d));
        report["split"] = json!({ "fold": a.data.fold_label(d), "train": tr, "valid": va, "test": te });
    }
    println!("WL similarity (h={}): {sim:.6}", a.wl_iterations);
    if let Some(out) = &a.out {
        fs::write(out, serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)? + "\n")
            .with_context(|| format!("writing {}", out.display()))?;
        let mut rec = rec;
        rec.config = json!({ "dataset": a.data.dataset, "wl_iterations": a.wl_iterations });
        rec.fold = split.as_ref().map(|d| a.data.fold_label(d));
        rec.write(&[out])?;
    }
    Ok(())
}

fn candidate_ids(d: &Dataset, c: Candidates) -> Vec<String> {
    match c {
        Candidates::Test => d.alignment.test().map(|l| l.1.clone()).collect(),
        Candidates::All => d.kg2.entities().iter().cloned().collect(),
    }
}

fn baseline(a: BaselineArgs) -> CmdResult {
    if a.topk == 0 {
        return Err(usage("--topk must be at least 1"));
    }
    let mut rec = Recorder::new("baseline");
    let d = a.data.load()?;
    let fold = a.data.fold_label(&d);
    let policy = a.names.policy();
    let (n1, n2) = (name_map(&d.kg1, &policy), name_map(&d.kg2, &policy));
    let links = test_links(&d);
    let sources: Vec<(String, String)> = links.iter().map(|(s, _)| (s.clone(), n1[s].clone())).collect();
    let targets: Vec<(String, String)> = candidate_ids(&d, a.candidates).into_iter().map(|t| (t.clone(), n2[&t].clone())).collect();
    let gold: HashMap<String, String> = links.into_iter().collect();
    let ranking = name_match_align(&sources, &targets, a.kind, a.topk, a.names.normalization(), &gold)
        .map_err(|e| anyhow!("{e}"))?;
    let cand = candidates_label(a.candidates);
    let lines = metric_lines(&ranking.gold_ranks(), a.topk, cand, &fold)?;
    print_table(&format!("baseline {}", a.kind), &lines);

    rec.config = json!({
        "dataset": a.data.dataset, "kind": a.kind.as_str(), "topk": a.topk,
        "candidates": cand, "names": a.names.to_json(),
    });
    rec.fold = Some(fold.clone());
    let mut outputs: Vec<&Path> = Vec::new();
    if let Some(out) = &a.out {
        fs::write(out, ranking_tsv(&ranking)).with_context(|| format!("writing {}", out.display()))?;
        outputs.push(out);
    }
    if let Some(m) = &a.metrics {
        write_jsonl(m, &lines)?;
        outputs.push(m);
    }
    rec.write(&outputs)?;
    Ok(())
}

fn ranking_tsv(r: &RankingResult) -> String {
    let mut s = String::from("source\trank\ttarget\tscore\n");
    for row in &r.rows {
        for (i, c) in row.candidates.iter().enumerate() {
            let _ = writeln!(s, "{}\t{}\t{}\t{}", row.source, i + 1, c.target, c.score);
        }
    }
    s
}

fn split(a: SplitArgs) -> CmdResult {
    if let Some(name) = &a.name {
        let t = split_time(name);
        println!("time\t{}", t.time);
        println!("remainder\t{}", t.remainder);
        return Ok(());
    }
    let (Some(dir), Some(out)) = (&a.dataset, &a.out) else {
        return Err(usage("either --name or --dataset with --out is required"));
    };
    let mut rec = Recorder::new("split");
    let pair = load_graphs(dir).with_context(|| format!("loading {}", dir.display()))?;
    let policy = a.names.policy();
    let mut strings = BTreeSet::new();
    for g in [&pair.kg1, &pair.kg2] {
        for e in g.entities() {
            let name = entity_name(g, e, &policy);
            let t = split_time(&name.name);
            strings.insert(concat_attribute_values(g, e, name.attribute.as_deref()));
            strings.insert(name.name);
            strings.insert(t.time);
            strings.insert(t.remainder);
        }
    }
    let kept: Vec<&String> = strings.iter().filter(|s| !s.is_empty() && !s.contains(['\n', '\r'])).collect();
    let mut text = String::new();
    for s in &kept {
        text.push_str(s);
        text.push('\n');
    }
    fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
    eprintln!("wrote {} strings to {}", kept.len(), out.display());
    rec.config = json!({ "dataset": dir, "names": a.names.to_json() });
    rec.write(&[out])?;
    Ok(())
}

fn encode(a: EncodeArgs, global_seed: Option<u64>) -> CmdResult {
    let mut rec = Recorder::new("encode");
    let d = a.data.load()?;
    let graph = if a.kg == 1 { &d.kg1 } else { &d.kg2 };
    let policy = a.names.policy();
    let entities: Vec<String> = graph.entities().iter().cloned().collect();
    let options = EncoderOptions {
        time_attention: !a.no_time_attention,
        other_attributes: !a.no_other_attributes,
    };
    let (table, fallback_seed) = match a.mode {
        EncodeMode::Tae => {
            let path = a.params.as_deref().ok_or_else(|| usage("--params is required in tae mode"))?;
            let params = TaeParams::load(path).with_context(|| format!("loading {}", path.display()))?;
            let (provider, seed) = a.provider.build(global_seed, params.dim())?;
            if provider.dim() != params.dim() {
                return Err(anyhow!("store dimension {} does not match parameter dimension {}", provider.dim(), params.dim()).into());
            }
            (encode_graph(graph, &entities, &provider, &policy, &params, options).map_err(anyhow::Error::from)?, seed)
        }
        EncodeMode::NameVector => {
            let (provider, seed) = a.provider.build(global_seed, DEFAULT_DIM)?;
            let names: Vec<(String, String)> = entities.iter().map(|e| (e.clone(), entity_name(graph, e, &policy).name)).collect();
            (name_vector_baseline(&provider, &names), seed)
        }
    };
    table.save(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    eprintln!("wrote {} vectors of dimension {} to {}", table.len(), table.dim(), a.out.display());
    rec.config = json!({
        "dataset": a.data.dataset, "kg": a.kg,
        "mode": match a.mode { EncodeMode::Tae => "tae", EncodeMode::NameVector => "name-vector" },
        "params": a.params, "time_attention": options.time_attention, "other_attributes": options.other_attributes,
        "provider": a.provider.to_json(), "names": a.names.to_json(),
    });
    rec.fold = Some(a.data.fold_label(&d));
    rec.seeds = json!({ "fallback": fallback_seed });
    rec.write(&[&a.out])?;
    Ok(())
}

fn train_failure(e: TrainError) -> Failure {
    match e {
        TrainError::Diverged { .. } => Failure::Diverged(e.into()),
        TrainError::ConfigSyntax { .. } | TrainError::InvalidConfig(_) => Failure::Usage(e.into()),
        other => Failure::Data(other.into()),
    }
}

fn train_cmd(a: TrainArgs, global_seed: Option<u64>) -> CmdResult {
    let mut rec = Recorder::new("train");
    let mut config = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            TrainConfig::parse(&text).map_err(train_failure)?
        }
        None => TrainConfig::default(),
    };
    if let Some(s) = global_seed {
        config.seed = s;
    }
    let d = a.data.load()?;
    let (provider, fallback_seed) = a.provider.build(global_seed, config.dim)?;
    if provider.dim() != config.dim {
        return Err(usage(format!("config dim {} does not match vector dimension {}", config.dim, provider.dim())));
    }
    let policy = a.names.policy();
    let train_links: Vec<Link> = d.alignment.train().cloned().collect();
    let valid_links: Vec<Link> = d.alignment.valid().cloned().collect();
    let ids = |side: usize| -> Vec<String> {
        let set: BTreeSet<String> = train_links
            .iter()
            .chain(&valid_links)
            .map(|l| if side == 0 { l.0.clone() } else { l.1.clone() })
            .collect();
        set.into_iter().collect()
    };
    let options = config.encoder_options();
    let src = feature_table(&d.kg1, &ids(0), &provider, &policy, options).map_err(anyhow::Error::from)?;
    let tgt = feature_table(&d.kg2, &ids(1), &provider, &policy, options).map_err(anyhow::Error::from)?;
    let input = TrainInput {
        source: &src,
        target: &tgt,
        train: &train_links,
        valid: &valid_links,
    };

    let log_path = with_suffix(&a.out, ".log.jsonl");
    let mut outputs: Vec<PathBuf> = vec![a.out.clone(), log_path.clone()];
    let (outcome, chosen): (TrainOutcome, TrainConfig) = if a.grid {
        let (best, results) = grid_search(&input, &config, &GRID_MARGINS, &GRID_BETAS).map_err(train_failure)?;
        let grid_path = with_suffix(&a.out, ".grid.jsonl");
        let rows: Vec<Value> = results
            .iter()
            .map(|r| {
                json!({
                    "margin": r.margin, "beta": r.beta,
                    "best_epoch": r.outcome.best_epoch,
                    "valid_hits_at_1": r.outcome.best_valid_hits_at_1,
                })
            })
            .collect();
        write_jsonl(&grid_path, &rows)?;
        outputs.push(grid_path);
        let r = &results[best];
        let chosen = TrainConfig {
            margin: r.margin,
            beta: r.beta,
            ..config.clone()
        };
        (r.outcome.clone(), chosen)
    } else {
        (train(&input, &config).map_err(train_failure)?, config.clone())
    };
    outcome.params.save(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    write_jsonl(&log_path, &outcome.log)?;
    println!(
        "best epoch {} (valid Hits@1 {:.4}, margin {}, beta {})",
        outcome.best_epoch, outcome.best_valid_hits_at_1, chosen.margin, chosen.beta
    );
    rec.config = json!({
        "dataset": a.data.dataset, "train": chosen, "grid": a.grid,
        "provider": a.provider.to_json(), "names": a.names.to_json(),
    });
    rec.fold = Some(a.data.fold_label(&d));
    rec.seeds = json!({ "train": config.seed, "fallback": fallback_seed });
    let refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    rec.write(&refs)?;
    Ok(())
}

fn load_table(path: &Path) -> anyhow::Result<EmbeddingTable> {
    EmbeddingTable::load(path).with_context(|| format!("loading {}", path.display()))
}

/// Retrieval over test sources against the chosen candidate pool.
fn rank_test(
    d: &Dataset,
    src: &EmbeddingTable,
    tgt: &EmbeddingTable,
    sources: &[String],
    candidates: Candidates,
    k: usize,
) -> anyhow::Result<RankingResult> {
    let pick = |table: &EmbeddingTable, ids: &[String]| -> anyhow::Result<Vec<(String, Vec<f64>)>> {
        ids.iter()
            .map(|id| {
                table
                    .get(id)
                    .map(|v| (id.clone(), v.to_vec()))
                    .ok_or_else(|| anyhow!("no embedding for entity `{id}`"))
            })
            .collect()
    };
    let s = pick(src, sources)?;
    let t = pick(tgt, &candidate_ids(d, candidates))?;
    let gold = d.gold_map();
    Ok(retrieve(&s, &t, k, &gold)?)
}

fn eval(a: EvalArgs) -> CmdResult {
    if a.topk == 0 {
        return Err(usage("--topk must be at least 1"));
    }
    let mut rec = Recorder::new("eval");
    let d = a.data.load()?;
    let fold = a.data.fold_label(&d);
    let (src, tgt) = (load_table(&a.embeddings_src)?, load_table(&a.embeddings_tgt)?);
    let sources: Vec<String> = d.alignment.test().map(|l| l.0.clone()).collect();
    let ranking = rank_test(&d, &src, &tgt, &sources, a.candidates, a.topk.max(10))?;
    let cand = candidates_label(a.candidates);
    let mut lines = metric_lines(&ranking.gold_ranks(), a.topk, cand, &fold)?;
    let types = match &a.types {
        Some(p) => Some(load_entity_types(p, &d.kg1, &d.kg2)?),
        None => d.types.clone(),
    };
    if let Some(types) = &types {
        let r = recall_by_type(&ranking, types, 1)?;
        let count = |event: bool| {
            sources
                .iter()
                .filter(|s| (types.category(s) == eventea_core::kg::EntityCategory::Event) == event)
                .count()
        };
        for (metric, value, n) in [
            ("recall@1:event", r.event, count(true)),
            ("recall@1:other", r.other, count(false)),
            ("recall@1:all", Some(r.all), sources.len()),
        ] {
            lines.push(MetricLine {
                metric: metric.into(),
                value,
                count: n,
                split: "test",
                candidates: cand,
                fold: &fold,
            });
        }
    }
    print_table("eval", &lines);
    rec.config = json!({
        "dataset": a.data.dataset, "embeddings_src": a.embeddings_src, "embeddings_tgt": a.embeddings_tgt,
        "types": a.types, "topk": a.topk, "candidates": cand,
    });
    rec.fold = Some(fold.clone());
    if let Some(out) = &a.out {
        write_jsonl(out, &lines)?;
        rec.write(&[out])?;
    }
    Ok(())
}

fn cases(a: CasesArgs) -> CmdResult {
    let mut rec = Recorder::new("cases");
    let d = a.data.load()?;
    let text = fs::read_to_string(&a.entities).with_context(|| format!("reading {}", a.entities.display()))?;
    let entities: Vec<String> = text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect();
    if entities.is_empty() {
        return Err(usage("entity list is empty"));
    }
    let (src, tgt) = (load_table(&a.embeddings_src)?, load_table(&a.embeddings_tgt)?);
    let ranking = rank_test(&d, &src, &tgt, &entities, a.candidates, eventea_core::eval::CASE_TOP)?;
    let policy = a.names.policy();
    let (n1, n2) = (name_map(&d.kg1, &policy), name_map(&d.kg2, &policy));
    let cosine = CosineScorer {
        label: "embedding".into(),
        sources: &src,
        targets: &tgt,
    };
    let name_scorers: Vec<NameScorer<'_>> = SimilarityKind::ALL
        .iter()
        .map(|&kind| NameScorer {
            label: kind.as_str().into(),
            kind,
            normalization: a.names.normalization(),
            source_names: &n1,
            target_names: &n2,
        })
        .collect();
    let mut scorers: Vec<&dyn PairScorer> = vec![&cosine];
    scorers.extend(name_scorers.iter().map(|s| s as &dyn PairScorer));
    let report = case_report(&entities, &ranking, &scorers, &n1, &n2)?;
    let tsv = report.to_tsv();
    match &a.out {
        Some(out) => {
            fs::write(out, &tsv).with_context(|| format!("writing {}", out.display()))?;
            rec.config = json!({
                "dataset": a.data.dataset, "entities": a.entities, "embeddings_src": a.embeddings_src,
                "embeddings_tgt": a.embeddings_tgt, "candidates": candidates_label(a.candidates), "names": a.names.to_json(),
            });
            rec.fold = Some(a.data.fold_label(&d));
            rec.write(&[out])?;
        }
        None => print!("{tsv}"),
    }
    Ok(())
}

fn make_dataset(a: MakeDatasetArgs, global_seed: Option<u64>) -> CmdResult {
    let mut rec = Recorder::new("make-dataset");
    let ratios: [f64; 3] = a.ratios.as_slice().try_into().map_err(|_| usage("--ratios needs three values"))?;
    if !(0.0..=1.0).contains(&a.threshold) {
        return Err(usage("--threshold must lie in [0, 1]"));
    }
    let pair = load_graphs(&a.source).with_context(|| format!("loading {}", a.source.display()))?;
    let shared = match (&a.shared_triples_1, &a.shared_triples_2) {
        (Some(p1), Some(p2)) => Some((read_relation_triples(p1)?, read_relation_triples(p2)?)),
        _ => None,
    };
    let config = ConstructionConfig {
        threshold: a.threshold,
        seed: global_seed.unwrap_or(0),
        split_ratios: ratios,
        name_policy: a.names.policy(),
        normalization: a.names.normalization(),
    };
    let (kg1, kg2, alignment) =
        construct_dataset(&pair, shared.as_ref().map(|(x, y)| (x.as_slice(), y.as_slice())), &config).map_err(|e| match e {
            eventea_core::dataset::DatasetError::Alignment(_) => usage(e),
            other => Failure::Data(other.into()),
        })?;
    let types_path = a.source.join(ENTITY_TYPES);
    let types = if types_path.is_file() {
        Some(load_entity_types(&types_path, &kg1, &kg2)?)
    } else {
        None
    };
    if a.out.exists() && fs::read_dir(&a.out).map(|mut d| d.next().is_some()).unwrap_or(true) {
        return Err(usage(format!("output directory {} is not empty", a.out.display())));
    }
    write_dataset(&a.out, &kg1, &kg2, &alignment, types.as_ref(), &a.fold)?;
    let (tr, va, te) = alignment.split_sizes();
    println!("kept {} of {} links (train {tr} / valid {va} / test {te})", alignment.links().len(), pair.links.len());
    rec.config = json!({
        "source": a.source, "threshold": a.threshold, "ratios": ratios,
        "shared_triples_1": a.shared_triples_1, "shared_triples_2": a.shared_triples_2,
        "names": a.names.to_json(),
    });
    rec.fold = Some(a.fold.clone());
    rec.seeds = json!({ "split": config.seed });
    rec.write(&[&a.out.join("ent_links")])?;
    Ok(())
}
