//! Dense top-n, BM25+ re-rank, then cluster-proportional diversity selection.

mod allocation;
mod diversity;
mod kmeans;

use serde::{Deserialize, Serialize};

pub use allocation::proportional_allocation;
pub use diversity::diversity_select;
pub use kmeans::{kmeans, ClusterAssignment};

use crate::corpus::ChunkStore;
use crate::dense::{dense_search, DenseIndex, EmbeddingProvider};
use crate::error::{Error, Result};
use crate::lexical::{rerank_bm25, tfidf_vectors, Bm25Params, Stoplist};
use crate::ranking::RankedList;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Dense fan-out before BM25+ re-ranking.
    pub n: usize,
    /// Size of the re-ranked pool that gets clustered.
    pub k: usize,
    /// Documents handed to the reader.
    pub l: usize,
    pub num_clusters: usize,
    /// Maximum answer spans per document.
    pub m: usize,
    pub max_span_len: usize,
    /// Index (in pool order) of the k-means anchor point.
    pub kmeans_seed: u64,
    pub bm25: Bm25Params,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            n: 100,
            k: 20,
            l: 5,
            num_clusters: 3,
            m: 3,
            max_span_len: 50,
            kmeans_seed: 0,
            bm25: Bm25Params::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l >= 1 && self.l < self.k && self.k <= self.n) {
            return Err(Error::Config(format!(
                "pipeline needs 1 <= l < k <= n, got l={} k={} n={}",
                self.l, self.k, self.n
            )));
        }
        if self.num_clusters == 0 || self.num_clusters > self.k {
            return Err(Error::Config(format!(
                "num_clusters must be in [1, k], got {}",
                self.num_clusters
            )));
        }
        if self.m == 0 || self.max_span_len == 0 {
            return Err(Error::Config("m and max_span_len must be positive".into()));
        }
        self.bm25.validate()
    }

    pub fn with_l(&self, l: usize) -> Self {
        Self { l, ..self.clone() }
    }
}

/// Every intermediate ranking of one query, kept for explanation.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Retrieval {
    pub dense: RankedList,
    pub bm25: RankedList,
    pub pool: RankedList,
    pub clusters: ClusterAssignment,
    pub allocation: Vec<usize>,
    pub selected: RankedList,
}

/// Dense top-`n` re-ranked by BM25+: the hybrid ranking.
pub fn hybrid_ranking(
    query: &str,
    n: usize,
    bm25: &Bm25Params,
    index: &DenseIndex,
    provider: &dyn EmbeddingProvider,
    chunks: &ChunkStore,
    stoplist: &Stoplist,
) -> Result<(RankedList, RankedList)> {
    let dense = dense_search(query, index, provider, n)?;
    if dense.is_empty() {
        return Ok((dense, RankedList::default()));
    }
    let reranked = rerank_bm25(query, &dense, chunks, bm25, stoplist)?;
    Ok((dense, reranked))
}

/// Full retrieval path for one question.
pub fn retrieve(
    query: &str,
    cfg: &PipelineConfig,
    index: &DenseIndex,
    provider: &dyn EmbeddingProvider,
    chunks: &ChunkStore,
    stoplist: &Stoplist,
) -> Result<Retrieval> {
    let (dense, bm25) = hybrid_ranking(query, cfg.n, &cfg.bm25, index, provider, chunks, stoplist)?;
    if bm25.is_empty() {
        return Ok(Retrieval {
            dense,
            ..Default::default()
        });
    }
    let pool = bm25.truncated(cfg.k);
    let ids: Vec<&str> = pool.ids().collect();
    let features = tfidf_vectors(&ids, chunks, stoplist)?;
    let clusters = kmeans(
        &features.vectors,
        cfg.num_clusters.min(pool.len()),
        cfg.kmeans_seed,
    );
    let allocation = proportional_allocation(&clusters.sizes(), cfg.l, &clusters.first_positions());
    let selected = diversity_select(&pool, &clusters, &allocation);
    Ok(Retrieval {
        dense,
        bm25,
        pool,
        clusters,
        allocation,
        selected,
    })
}
