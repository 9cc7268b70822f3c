use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{best_span_em, best_span_f1};
use crate::corpus::{normalize_whitespace, ChunkStore, QAPair};
use crate::dense::{dense_search, DenseIndex, EmbeddingProvider};
use crate::error::{Error, Result};
use crate::lexical::{rerank_bm25, Bm25Params, Stoplist};
use crate::pipeline::hybrid_ranking;
use crate::ranking::{RankedEntry, RankedList, ScoreSource};
use crate::reader::{select_spans, SpanScorer};

/// Ranking evaluated by FM@k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrievalSystem {
    /// Dense top-n as returned by the index.
    Dense,
    /// Dense top-n re-ranked by BM25+.
    Hybrid,
    /// BM25+ over the whole corpus, top-n.
    Bm25,
}

impl std::str::FromStr for RetrievalSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Self::Dense),
            "hybrid" => Ok(Self::Hybrid),
            "bm25" => Ok(Self::Bm25),
            other => Err(Error::Config(format!(
                "unknown system `{other}` (expected dense, hybrid or bm25)"
            ))),
        }
    }
}

/// Stable identifier for a QA pair: its id, or `q{position}` when absent.
pub fn question_key(pair: &QAPair, position: usize) -> String {
    pair.question_id
        .clone()
        .unwrap_or_else(|| format!("q{position}"))
}

/// Ranked chunk ids per question, keyed by [`question_key`].
#[allow(clippy::too_many_arguments)]
pub fn build_run(
    system: RetrievalSystem,
    questions: &[QAPair],
    n: usize,
    bm25: &Bm25Params,
    index: &DenseIndex,
    provider: &dyn EmbeddingProvider,
    chunks: &ChunkStore,
    stoplist: &Stoplist,
) -> Result<BTreeMap<String, Vec<String>>> {
    let corpus_pool: RankedList = match system {
        RetrievalSystem::Bm25 => chunks
            .iter()
            .map(|c| RankedEntry {
                chunk_id: c.chunk_id.clone(),
                score: 0.0,
                source: ScoreSource::Bm25,
            })
            .collect(),
        _ => RankedList::default(),
    };
    questions
        .par_iter()
        .enumerate()
        .map(|(i, q)| {
            let list = match system {
                RetrievalSystem::Dense => dense_search(&q.question, index, provider, n)?,
                RetrievalSystem::Hybrid => {
                    hybrid_ranking(&q.question, n, bm25, index, provider, chunks, stoplist)?.1
                }
                RetrievalSystem::Bm25 => {
                    rerank_bm25(&q.question, &corpus_pool, chunks, bm25, stoplist)?.truncated(n)
                }
            };
            Ok((question_key(q, i), list.ids().map(String::from).collect()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReaderResult {
    pub question_id: String,
    pub chunk_id: String,
    pub spans: Vec<String>,
    pub em: u8,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReaderReport {
    pub m: usize,
    pub scorer: String,
    /// Mean best-span exact match over evaluated questions.
    pub em: f64,
    /// Mean best-span token F1 over evaluated questions.
    pub f1: f64,
    pub results: Vec<ReaderResult>,
    /// Questions whose answer occurs in none of their article's chunks.
    pub skipped: Vec<String>,
}

/// Reading-comprehension evaluation: each question is read against the first
/// chunk of its context article that contains the gold answer, and scored by
/// the best of up to `m` extracted spans.
pub fn evaluate_reader(
    questions: &[QAPair],
    chunks: &ChunkStore,
    scorer: &dyn SpanScorer,
    m: usize,
    max_span_len: usize,
) -> Result<ReaderReport> {
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for (i, q) in questions.iter().enumerate() {
        let key = question_key(q, i);
        let answer = normalize_whitespace(&q.answer);
        let context = chunks.iter().find(|c| {
            c.article_id == q.context_article_id
                && !answer.is_empty()
                && normalize_whitespace(&c.text).contains(&answer)
        });
        let Some(chunk) = context else {
            skipped.push(key);
            continue;
        };
        let scores = scorer
            .score(&q.question, &[chunk])
            .pop()
            .ok_or_else(|| Error::provider("reader returned no result"))??;
        scores.validate(&chunk.text)?;
        let spans = select_spans(&scores, &chunk.text, m, max_span_len);
        results.push(ReaderResult {
            question_id: key,
            chunk_id: chunk.chunk_id.clone(),
            em: best_span_em(&spans, &q.answer),
            f1: best_span_f1(&spans, &q.answer),
            spans: spans.into_iter().map(|s| s.text).collect(),
        });
    }
    let count = results.len().max(1) as f64;
    Ok(ReaderReport {
        m,
        scorer: scorer.name(),
        em: results.iter().map(|r| f64::from(r.em)).sum::<f64>() / count,
        f1: results.iter().map(|r| r.f1).sum::<f64>() / count,
        results,
        skipped,
    })
}
