//! Open-domain question answering over emergent-domain article collections.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`corpus`] turns articles into 100–200 token passages and QA datasets into
//!   retrieval samples and splits.
//! * [`dense`] embeds passages and runs exact inner-product search.
//! * [`lexical`] holds the stoplist, BM25+ re-ranking and TF-IDF features.
//! * [`pipeline`] chains dense search, BM25+ and cluster-based diversity selection.
//! * [`reader`] extracts up to `m` non-overlapping answer spans per passage and
//!   re-orders passages by answer confidence.
//! * [`eval`] implements the fuzzy-match retrieval metric, FM@k, EM and token F1.
//! * [`service`] wires everything behind a request/response API with date filters.

pub mod config;
pub mod corpus;
pub mod dense;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod lexical;
pub mod pipeline;
pub mod ranking;
pub mod reader;
pub mod service;

pub use config::AppConfig;
pub use corpus::{Article, ChunkStore, PassageChunk, QAPair, RetrievalSample, Split};
pub use dense::{BaselineEmbedder, DenseIndex, Embedding, EmbeddingProvider};
pub use error::{Error, Result};
pub use lexical::{Bm25Params, Stoplist};
pub use pipeline::PipelineConfig;
pub use ranking::{RankedEntry, RankedList, ScoreSource};
pub use reader::{AnswerSpan, AnsweredDocument, SpanScorer, SpanScores};
