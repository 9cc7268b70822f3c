use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::stopwords::{remove_stopwords, Stoplist};
use crate::corpus::{tokenize, ChunkStore};
use crate::error::{Error, Result};
use crate::ranking::{RankedEntry, RankedList, ScoreSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdfVariant {
    /// `ln((N + 1) / df)`, strictly positive for any `df <= N`.
    #[default]
    SmoothedRatio,
    /// `ln(1 + (N - df + 0.5) / (df + 0.5))`, the Lucene form.
    Robertson,
}

impl IdfVariant {
    pub fn idf(self, doc_count: usize, doc_freq: usize) -> f64 {
        let n = doc_count as f64;
        let df = doc_freq as f64;
        match self {
            IdfVariant::SmoothedRatio => ((n + 1.0) / df).ln(),
            IdfVariant::Robertson => (1.0 + (n - df + 0.5) / (df + 0.5)).ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Bm25Params {
    pub k1: f64,
    pub b_len: f64,
    pub delta: f64,
    pub idf: IdfVariant,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self {
            k1: 1.5,
            b_len: 0.75,
            delta: 1.0,
            idf: IdfVariant::SmoothedRatio,
        }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1.is_finite() && self.k1 > 0.0) {
            return Err(Error::Config(format!(
                "bm25 k1 must be > 0, got {}",
                self.k1
            )));
        }
        if !(0.0..=1.0).contains(&self.b_len) {
            return Err(Error::Config(format!(
                "bm25 b_len must be in [0, 1], got {}",
                self.b_len
            )));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::Config(format!(
                "bm25 delta must be >= 0, got {}",
                self.delta
            )));
        }
        Ok(())
    }

    /// Contribution of one matched term: `idf * (tf_part + delta)`.
    pub fn term_contribution(&self, idf: f64, tf: u32, doc_len: usize, avg_doc_len: f64) -> f64 {
        if tf == 0 {
            return 0.0;
        }
        let tf = f64::from(tf);
        let norm = (1.0 - self.b_len) + self.b_len * doc_len as f64 / avg_doc_len;
        idf * ((self.k1 + 1.0) * tf / (self.k1 * norm + tf) + self.delta)
    }
}

#[derive(Debug, Clone)]
struct DocStats {
    len: usize,
    tf: HashMap<String, u32>,
}

/// Sufficient statistics for BM25 over a fixed document pool.
#[derive(Debug, Clone)]
pub struct TermStats {
    doc_count: usize,
    doc_freq: HashMap<String, usize>,
    avg_doc_len: f64,
    docs: HashMap<String, DocStats>,
}

impl TermStats {
    /// Build from `(doc id, tokens)` pairs. Tokens are used as given, so
    /// stopword removal must already have happened.
    pub fn build<I, S>(docs: I) -> Self
    where
        I: IntoIterator<Item = (String, Vec<S>)>,
        S: AsRef<str>,
    {
        let mut doc_freq: HashMap<String, usize> = HashMap::new();
        let mut stats = HashMap::new();
        let mut total_len = 0usize;
        for (id, tokens) in docs {
            let mut tf: HashMap<String, u32> = HashMap::new();
            for t in &tokens {
                *tf.entry(t.as_ref().to_string()).or_default() += 1;
            }
            for term in tf.keys() {
                *doc_freq.entry(term.clone()).or_default() += 1;
            }
            total_len += tokens.len();
            stats.insert(
                id,
                DocStats {
                    len: tokens.len(),
                    tf,
                },
            );
        }
        let doc_count = stats.len();
        let mean = if doc_count == 0 {
            0.0
        } else {
            total_len as f64 / doc_count as f64
        };
        Self {
            doc_count,
            doc_freq,
            // Every document empty: no term can match, any positive value works.
            avg_doc_len: if mean > 0.0 { mean } else { 1.0 },
            docs: stats,
        }
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.avg_doc_len
    }

    pub fn doc_len(&self, doc_id: &str) -> Option<usize> {
        self.docs.get(doc_id).map(|d| d.len)
    }

    pub fn term_freq(&self, doc_id: &str, term: &str) -> Option<u32> {
        self.docs
            .get(doc_id)
            .map(|d| d.tf.get(term).copied().unwrap_or(0))
    }
}

/// BM25+ score of `doc_id`, summing over distinct query terms.
pub fn bm25_plus_score<S: AsRef<str>>(
    query_tokens: &[S],
    doc_id: &str,
    stats: &TermStats,
    params: &Bm25Params,
) -> Result<f64> {
    let doc = stats
        .docs
        .get(doc_id)
        .ok_or_else(|| Error::UnknownChunk(doc_id.to_string()))?;
    let mut seen = HashSet::new();
    let mut score = 0.0;
    for term in query_tokens.iter().map(AsRef::as_ref) {
        if !seen.insert(term) {
            continue;
        }
        let df = stats.doc_freq(term);
        let tf = doc.tf.get(term).copied().unwrap_or(0);
        if df == 0 || tf == 0 {
            continue;
        }
        let idf = params.idf.idf(stats.doc_count, df);
        score += params.term_contribution(idf, tf, doc.len, stats.avg_doc_len);
    }
    Ok(score)
}

/// Re-order `pool` by BM25+ with statistics computed over the pool alone.
/// Ties keep their incoming order.
pub fn rerank_bm25(
    query: &str,
    pool: &RankedList,
    chunks: &ChunkStore,
    params: &Bm25Params,
    stoplist: &Stoplist,
) -> Result<RankedList> {
    let docs = pool
        .iter()
        .map(|e| {
            let chunk = chunks.require(&e.chunk_id)?;
            Ok((
                e.chunk_id.clone(),
                remove_stopwords(&tokenize(&chunk.text), stoplist),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let stats = TermStats::build(docs);
    let query_tokens = remove_stopwords(&tokenize(query), stoplist);

    let mut scored = pool
        .iter()
        .map(|e| {
            Ok(RankedEntry {
                chunk_id: e.chunk_id.clone(),
                score: bm25_plus_score(&query_tokens, &e.chunk_id, &stats, params)?,
                source: ScoreSource::Bm25,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // Stable: equal scores stay in dense order.
    scored.sort_by(|a, b| b.score.total_cmp(&a.score));
    Ok(RankedList::new(scored))
}
