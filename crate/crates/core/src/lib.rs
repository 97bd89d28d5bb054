//! Entity alignment between event-centric knowledge graphs: graph loading,
//! string and embedding baselines, a time-aware literal encoder with its
//! contrastive trainer, retrieval evaluation, and structural analyses.

pub mod dataset;
pub mod embeddings;
pub mod eval;
pub mod graph_iso;
pub mod kg;
pub mod strsim;
pub mod tae;
pub mod timesplit;
pub mod train;
pub mod vecmath;
