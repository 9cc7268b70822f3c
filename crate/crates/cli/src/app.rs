use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use odqa_core::service::Engine;
use odqa_core::{AppConfig, ChunkStore, DenseIndex};

/// Where the engine's inputs come from; flags override the config file.
#[derive(Debug, Clone, Default)]
pub struct EngineSources {
    pub config: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub index: Option<PathBuf>,
}

pub fn load_config(path: Option<&Path>) -> Result<AppConfig> {
    match path {
        Some(p) => AppConfig::load(p).with_context(|| format!("loading config {}", p.display())),
        None => Ok(AppConfig::default()),
    }
}

/// Load chunks, index and providers. An inconsistent index still yields an
/// engine; it reports itself as refusing.
pub fn load_engine(sources: &EngineSources) -> Result<(Engine, AppConfig)> {
    let cfg = load_config(sources.config.as_deref())?;
    let corpus = sources
        .corpus
        .clone()
        .or_else(|| cfg.corpus.clone())
        .context("no corpus given (use --corpus or set `corpus` in the config)")?;
    let index_path = sources
        .index
        .clone()
        .or_else(|| cfg.index.clone())
        .context("no index given (use --index or set `index` in the config)")?;

    let chunks = ChunkStore::load(&corpus)
        .with_context(|| format!("loading chunks from {}", corpus.display()))?;
    let index = DenseIndex::load(&index_path).with_context(|| {
        format!(
            "loading index {} (build one with `qa index build`)",
            index_path.display()
        )
    })?;
    let stoplist = cfg.stoplist()?;
    let embedder = cfg.embedding_provider(&stoplist)?;
    let reader = cfg.span_scorer(&stoplist);
    let engine = Engine::new(
        chunks,
        index,
        embedder,
        reader,
        cfg.pipeline.clone(),
        stoplist,
    )
    .with_reader_fallback(cfg.reader.fallback_to_baseline);
    Ok((engine, cfg))
}
