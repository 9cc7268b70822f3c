//! Request handling behind the HTTP API: validation, retrieval, date
//! filtering with fallback, reading and response shaping.

use std::sync::Arc;
use std::time::Instant;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::{ChunkStore, PassageChunk};
use crate::dense::{DenseIndex, EmbeddingProvider};
use crate::error::Error;
use crate::lexical::Stoplist;
use crate::pipeline::{retrieve, PipelineConfig, Retrieval};
use crate::ranking::RankedList;
use crate::reader::{answer_documents, AnsweredDocument, BaselineSpanScorer, SpanScorer};

pub const MAX_TOP_K: usize = 5;

fn default_top_k() -> usize {
    MAX_TOP_K
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRequest {
    pub question: String,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    /// Inclusive lower bound, `YYYY-MM-DD`.
    #[serde(default)]
    pub date_from: Option<String>,
    /// Inclusive upper bound, `YYYY-MM-DD`.
    #[serde(default)]
    pub date_to: Option<String>,
    /// Attach per-stage wall-clock timings (makes responses non-reproducible).
    #[serde(default)]
    pub include_timing: bool,
}

impl QueryRequest {
    pub fn new(question: impl Into<String>, top_k: usize) -> Self {
        Self {
            question: question.into(),
            top_k,
            date_from: None,
            date_to: None,
            include_timing: false,
        }
    }
}

/// Character range into `snippet`, counted in Unicode scalar values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Highlight {
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub dense_rank: Option<usize>,
    pub bm25_rank: Option<usize>,
    pub cluster: Option<usize>,
    /// Position among the documents handed to the reader.
    pub retrieval_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub chunk_id: String,
    pub article_id: String,
    pub title: String,
    pub journal: String,
    pub publish_date: Option<NaiveDate>,
    pub snippet: String,
    pub highlights: Vec<Highlight>,
    pub doc_confidence: Option<f64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub retrieval_ms: f64,
    pub date_filter_ms: f64,
    pub reader_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub question: String,
    pub top_k: usize,
    pub documents: Vec<ResultDocument>,
    pub date_filter_relaxed: bool,
    /// True when the configured reader failed and the baseline answered.
    pub reader_fallback: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<StageTiming>,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("{0}")]
    BadRequest(String),
    #[error("{stage} unavailable: {message}")]
    Unavailable {
        stage: &'static str,
        message: String,
    },
    #[error("service is not serving queries: {0}")]
    NotReady(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ServiceError {
    pub fn status_code(&self) -> u16 {
        match self {
            ServiceError::BadRequest(_) => 400,
            ServiceError::Unavailable { .. } | ServiceError::NotReady(_) => 503,
            ServiceError::Internal(_) => 500,
        }
    }

    fn from_stage(stage: &'static str, e: Error) -> Self {
        match e {
            Error::Provider { .. } | Error::Unsupported(_) => ServiceError::Unavailable {
                stage,
                message: e.to_string(),
            },
            other => ServiceError::Internal(format!("{stage}: {other}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderStatus {
    pub name: String,
    pub reachable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthReport {
    /// `ok`, `degraded` or `refusing`.
    pub status: String,
    pub chunk_count: usize,
    pub index_size: usize,
    pub index_fingerprint: String,
    pub embedder: ProviderStatus,
    pub reader: ProviderStatus,
    pub notes: Vec<String>,
    pub config: PipelineConfig,
}

/// Everything needed to answer queries; shared read-only between requests.
pub struct Engine {
    chunks: ChunkStore,
    index: DenseIndex,
    embedder: Arc<dyn EmbeddingProvider>,
    reader: Arc<dyn SpanScorer>,
    fallback_reader: Option<BaselineSpanScorer>,
    config: PipelineConfig,
    stoplist: Stoplist,
    max_top_k: usize,
    refusal: Option<String>,
}

impl Engine {
    /// Builds the engine. Inconsistencies between the index, the embedder
    /// and the chunk store do not fail construction; the engine starts in a
    /// refusing state that health reporting explains.
    pub fn new(
        chunks: ChunkStore,
        index: DenseIndex,
        embedder: Arc<dyn EmbeddingProvider>,
        reader: Arc<dyn SpanScorer>,
        config: PipelineConfig,
        stoplist: Stoplist,
    ) -> Self {
        let refusal = Self::consistency_problem(&chunks, &index, embedder.as_ref(), &config);
        Self {
            chunks,
            index,
            embedder,
            reader,
            fallback_reader: None,
            config,
            stoplist,
            max_top_k: MAX_TOP_K,
            refusal,
        }
    }

    /// Fall back to the lexical baseline when the configured reader fails
    /// on every passage of a query.
    pub fn with_reader_fallback(mut self, enabled: bool) -> Self {
        self.fallback_reader = enabled.then(|| BaselineSpanScorer::new(self.stoplist.clone()));
        self
    }

    /// Raise the `top_k` ceiling (the HTTP API keeps [`MAX_TOP_K`]). It can
    /// never exceed the re-ranked pool size `k`.
    pub fn with_max_top_k(mut self, max_top_k: usize) -> Self {
        self.max_top_k = max_top_k.clamp(1, self.config.k.saturating_sub(1).max(1));
        self
    }

    pub fn max_top_k(&self) -> usize {
        self.max_top_k
    }

    /// Every retrieval stage for `question` with `l = top_k`.
    pub fn explain(&self, question: &str, top_k: usize) -> Result<Retrieval, ServiceError> {
        if let Some(reason) = &self.refusal {
            return Err(ServiceError::NotReady(reason.clone()));
        }
        retrieve(
            question,
            &self.config.with_l(top_k.clamp(1, self.max_top_k)),
            &self.index,
            self.embedder.as_ref(),
            &self.chunks,
            &self.stoplist,
        )
        .map_err(|e| ServiceError::from_stage("retrieval", e))
    }

    fn consistency_problem(
        chunks: &ChunkStore,
        index: &DenseIndex,
        embedder: &dyn EmbeddingProvider,
        config: &PipelineConfig,
    ) -> Option<String> {
        if let Err(e) = index.check_provider(embedder) {
            return Some(e.to_string());
        }
        if let Some(missing) = index.ids().iter().find(|id| chunks.get(id).is_none()) {
            return Some(format!(
                "index references chunk `{missing}` absent from the corpus"
            ));
        }
        if let Err(e) = config.validate() {
            return Some(e.to_string());
        }
        None
    }

    pub fn chunks(&self) -> &ChunkStore {
        &self.chunks
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn is_ready(&self) -> bool {
        self.refusal.is_none()
    }

    pub fn health(&self) -> HealthReport {
        let probe = |r: crate::error::Result<()>, name: String| match r {
            Ok(()) => ProviderStatus {
                name,
                reachable: true,
                error: None,
            },
            Err(e) => ProviderStatus {
                name,
                reachable: false,
                error: Some(e.to_string()),
            },
        };
        let embedder = probe(self.embedder.probe(), self.embedder.fingerprint());
        let reader = probe(self.reader.probe(), self.reader.name());

        let mut notes = Vec::new();
        let status = if let Some(reason) = &self.refusal {
            notes.push(format!("refusing queries: {reason}"));
            "refusing"
        } else if !embedder.reachable || !reader.reachable {
            if !embedder.reachable {
                notes.push("embedding provider unreachable; queries will fail".into());
            }
            if !reader.reachable {
                if self.fallback_reader.is_some() {
                    notes.push("reader unreachable; baseline reader fallback active".into());
                } else {
                    notes.push("reader unreachable; documents will come back unanswered".into());
                }
            }
            "degraded"
        } else {
            "ok"
        };
        HealthReport {
            status: status.into(),
            chunk_count: self.chunks.len(),
            index_size: self.index.len(),
            index_fingerprint: self.index.fingerprint().to_string(),
            embedder,
            reader,
            notes,
            config: self.config.clone(),
        }
    }

    pub fn handle_query(&self, req: &QueryRequest) -> Result<QueryResponse, ServiceError> {
        let question = req.question.trim();
        if question.is_empty() {
            return Err(ServiceError::BadRequest(
                "question must not be empty".into(),
            ));
        }
        if !(1..=self.max_top_k).contains(&req.top_k) {
            return Err(ServiceError::BadRequest(format!(
                "top_k must be between 1 and {}, got {}",
                self.max_top_k, req.top_k
            )));
        }
        let from = parse_date("date_from", req.date_from.as_deref())?;
        let to = parse_date("date_to", req.date_to.as_deref())?;
        if let (Some(f), Some(t)) = (from, to) {
            if f > t {
                return Err(ServiceError::BadRequest(format!(
                    "date_from {f} is after date_to {t}"
                )));
            }
        }
        if let Some(reason) = &self.refusal {
            return Err(ServiceError::NotReady(reason.clone()));
        }

        let started = Instant::now();
        let cfg = self.config.with_l(req.top_k);
        let retrieval = retrieve(
            question,
            &cfg,
            &self.index,
            self.embedder.as_ref(),
            &self.chunks,
            &self.stoplist,
        )
        .map_err(|e| ServiceError::from_stage("retrieval", e))?;
        let t_retrieval = started.elapsed();

        let filter_active = from.is_some() || to.is_some();
        let filtered: RankedList = retrieval
            .selected
            .iter()
            .filter(|e| {
                !filter_active
                    || self
                        .chunks
                        .get(&e.chunk_id)
                        .and_then(|c| c.publish_date)
                        .is_some_and(|d| from.is_none_or(|f| d >= f) && to.is_none_or(|t| d <= t))
            })
            .cloned()
            .collect();
        let relaxed = filter_active && filtered.is_empty() && !retrieval.selected.is_empty();
        let for_reader = if relaxed {
            &retrieval.selected
        } else {
            &filtered
        };
        let t_filter = started.elapsed();

        let (mut answered, reader_fallback) = self.read(question, for_reader)?;
        answered.truncate(req.top_k);
        let t_reader = started.elapsed();

        let documents = answered
            .iter()
            .map(|a| self.shape_document(a, &retrieval))
            .collect::<Result<_, _>>()?;

        let timing = req.include_timing.then(|| StageTiming {
            retrieval_ms: ms(t_retrieval),
            date_filter_ms: ms(t_filter - t_retrieval),
            reader_ms: ms(t_reader - t_filter),
            total_ms: ms(started.elapsed()),
        });
        Ok(QueryResponse {
            question: question.to_string(),
            top_k: req.top_k,
            documents,
            date_filter_relaxed: relaxed,
            reader_fallback,
            timing,
        })
    }

    fn read(
        &self,
        question: &str,
        docs: &RankedList,
    ) -> Result<(Vec<AnsweredDocument>, bool), ServiceError> {
        let answered = answer_documents(
            question,
            docs,
            &self.chunks,
            self.reader.as_ref(),
            self.config.m,
            self.config.max_span_len,
        )
        .map_err(|e| ServiceError::from_stage("reader", e))?;
        let all_failed = !answered.is_empty() && answered.iter().all(|d| d.error.is_some());
        match (&self.fallback_reader, all_failed) {
            (Some(fallback), true) => {
                tracing::warn!("reader failed on every passage; using baseline reader");
                let answered = answer_documents(
                    question,
                    docs,
                    &self.chunks,
                    fallback,
                    self.config.m,
                    self.config.max_span_len,
                )
                .map_err(|e| ServiceError::from_stage("reader", e))?;
                Ok((answered, true))
            }
            (None, true) => Err(ServiceError::Unavailable {
                stage: "reader",
                message: answered[0].error.clone().unwrap_or_default(),
            }),
            _ => Ok((answered, false)),
        }
    }

    fn shape_document(
        &self,
        doc: &AnsweredDocument,
        retrieval: &Retrieval,
    ) -> Result<ResultDocument, ServiceError> {
        let chunk: &PassageChunk = self
            .chunks
            .get(&doc.chunk_id)
            .ok_or_else(|| ServiceError::Internal(format!("chunk `{}` vanished", doc.chunk_id)))?;
        let highlights = doc
            .spans
            .iter()
            .map(|s| Highlight {
                start: char_index(&chunk.text, s.start_char),
                end: char_index(&chunk.text, s.end_char),
                text: s.text.clone(),
                confidence: s.confidence,
            })
            .collect();
        Ok(ResultDocument {
            chunk_id: chunk.chunk_id.clone(),
            article_id: chunk.article_id.clone(),
            title: chunk.title.clone(),
            journal: chunk.journal.clone(),
            publish_date: chunk.publish_date,
            snippet: chunk.text.clone(),
            highlights,
            doc_confidence: doc.doc_confidence,
            provenance: Provenance {
                dense_rank: retrieval.dense.rank_of(&doc.chunk_id),
                bm25_rank: retrieval.bm25.rank_of(&doc.chunk_id),
                cluster: retrieval.clusters.cluster_of(&doc.chunk_id),
                retrieval_rank: doc.retrieval_rank,
            },
        })
    }
}

fn parse_date(field: &str, value: Option<&str>) -> Result<Option<NaiveDate>, ServiceError> {
    match value.map(str::trim).filter(|v| !v.is_empty()) {
        None => Ok(None),
        Some(v) => NaiveDate::parse_from_str(v, "%Y-%m-%d")
            .map(Some)
            .map_err(|_| {
                ServiceError::BadRequest(format!("{field} must be YYYY-MM-DD, got `{v}`"))
            }),
    }
}

fn char_index(text: &str, byte: usize) -> usize {
    text[..byte].chars().count()
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}
