//! Article ingestion, passage chunking and QA dataset preparation.

mod chunk;
mod io;
mod samples;
mod split;
mod text;

use std::collections::HashMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use chunk::{chunk_article, chunk_corpus, BLOCK_SEPARATOR};
pub use io::{read_jsonl, write_jsonl};
pub use samples::{build_retrieval_samples, SampleSet};
pub use split::{split_dataset, split_sizes, DatasetSplit, DocumentQuestionFilter};
pub use text::{
    normalize_whitespace, split_sentences, token_count, tokenize, tokenize_with_offsets,
    trim_range, Token,
};

pub const DEFAULT_MIN_TOKENS: usize = 100;
pub const DEFAULT_MAX_TOKENS: usize = 200;

/// One source article as it appears in the corpus JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Article {
    pub article_id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub journal: String,
    #[serde(default)]
    pub publish_date: Option<NaiveDate>,
    #[serde(default)]
    pub paragraphs: Vec<String>,
}

impl Article {
    /// Paragraphs joined by [`BLOCK_SEPARATOR`]; chunk offsets index into this.
    pub fn body(&self) -> String {
        self.paragraphs.join(BLOCK_SEPARATOR)
    }
}

/// A passage of at most 200 tokens; the unit of retrieval and reading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassageChunk {
    pub chunk_id: String,
    pub article_id: String,
    pub text: String,
    pub token_count: usize,
    /// Byte offsets of `text` within [`Article::body`].
    pub char_span: (usize, usize),
    #[serde(default)]
    pub journal: String,
    #[serde(default)]
    pub publish_date: Option<NaiveDate>,
    #[serde(default)]
    pub title: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QAPair {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question_id: Option<String>,
    pub question: String,
    pub answer: String,
    pub context_article_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalSample {
    pub question: String,
    pub positive_chunk_ids: Vec<String>,
    pub negative_chunk_ids: Vec<String>,
}

/// Chunks in corpus order with lookup by id.
#[derive(Debug, Clone, Default)]
pub struct ChunkStore {
    chunks: Vec<PassageChunk>,
    by_id: HashMap<String, usize>,
}

impl ChunkStore {
    pub fn new(chunks: Vec<PassageChunk>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(chunks.len());
        for (i, c) in chunks.iter().enumerate() {
            if by_id.insert(c.chunk_id.clone(), i).is_some() {
                return Err(Error::Invalid(format!(
                    "duplicate chunk id `{}`",
                    c.chunk_id
                )));
            }
        }
        Ok(Self { chunks, by_id })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::new(read_jsonl(path)?)
    }

    pub fn get(&self, chunk_id: &str) -> Option<&PassageChunk> {
        self.by_id.get(chunk_id).map(|&i| &self.chunks[i])
    }

    pub fn require(&self, chunk_id: &str) -> Result<&PassageChunk> {
        self.get(chunk_id)
            .ok_or_else(|| Error::UnknownChunk(chunk_id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PassageChunk> {
        self.chunks.iter()
    }

    pub fn as_slice(&self) -> &[PassageChunk] {
        &self.chunks
    }
}

impl<'a> IntoIterator for &'a ChunkStore {
    type Item = &'a PassageChunk;
    type IntoIter = std::slice::Iter<'a, PassageChunk>;

    fn into_iter(self) -> Self::IntoIter {
        self.chunks.iter()
    }
}
