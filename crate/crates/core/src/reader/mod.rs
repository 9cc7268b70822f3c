//! Extractive answering: multi-span selection and confidence re-ranking.

mod scorer;
mod spans;

use serde::{Deserialize, Serialize};

pub use scorer::{BaselineSpanScorer, EndpointSpanScorer, SpanScorer};
pub use spans::select_spans;

use crate::corpus::{ChunkStore, PassageChunk};
use crate::error::{Error, Result};
use crate::ranking::RankedList;

/// Per-token start and end scores with each token's byte range in the passage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanScores {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    pub offsets: Vec<(usize, usize)>,
}

impl SpanScores {
    pub fn len(&self) -> usize {
        self.start.len()
    }

    pub fn is_empty(&self) -> bool {
        self.start.is_empty()
    }

    /// Shape and offset sanity against the passage text.
    pub fn validate(&self, text: &str) -> Result<()> {
        let n = self.start.len();
        if self.end.len() != n || self.offsets.len() != n {
            return Err(Error::provider(format!(
                "span scores have mismatched lengths ({n}, {}, {})",
                self.end.len(),
                self.offsets.len()
            )));
        }
        for &(s, e) in &self.offsets {
            if s > e || e > text.len() || !text.is_char_boundary(s) || !text.is_char_boundary(e) {
                return Err(Error::provider(format!(
                    "token offset ({s}, {e}) outside passage"
                )));
            }
        }
        if self.start.iter().chain(&self.end).any(|v| !v.is_finite()) {
            return Err(Error::provider("non-finite span score"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerSpan {
    pub start_token: usize,
    pub end_token: usize,
    /// Byte offsets into the passage text.
    pub start_char: usize,
    pub end_char: usize,
    pub start_score: f64,
    pub end_score: f64,
    pub confidence: f64,
    pub text: String,
}

impl AnswerSpan {
    pub fn token_len(&self) -> usize {
        self.end_token - self.start_token + 1
    }

    pub fn overlaps(&self, other: &AnswerSpan) -> bool {
        self.start_token <= other.end_token && other.start_token <= self.end_token
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsweredDocument {
    pub chunk_id: String,
    /// Zero-based position in the retrieval ranking.
    pub retrieval_rank: usize,
    pub spans: Vec<AnswerSpan>,
    /// Confidence of the top span; `None` when no span was found.
    pub doc_confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Read every retrieved passage, then order passages by their top answer's
/// confidence. Passages without an answer (or whose scoring failed) keep
/// retrieval order below all answered ones.
pub fn answer_documents(
    question: &str,
    docs: &RankedList,
    chunks: &ChunkStore,
    scorer: &dyn SpanScorer,
    m: usize,
    max_span_len: usize,
) -> Result<Vec<AnsweredDocument>> {
    let passages: Vec<&PassageChunk> = docs
        .iter()
        .map(|e| chunks.require(&e.chunk_id))
        .collect::<Result<_>>()?;
    let scored = scorer.score(question, &passages);
    if scored.len() != passages.len() {
        return Err(Error::provider(format!(
            "reader returned {} results for {} passages",
            scored.len(),
            passages.len()
        )));
    }

    let mut out: Vec<AnsweredDocument> = passages
        .iter()
        .zip(scored)
        .enumerate()
        .map(|(rank, (p, result))| {
            let checked = result.and_then(|s| s.validate(&p.text).map(|_| s));
            match checked {
                Ok(scores) => {
                    let spans = select_spans(&scores, &p.text, m, max_span_len);
                    AnsweredDocument {
                        chunk_id: p.chunk_id.clone(),
                        retrieval_rank: rank,
                        doc_confidence: spans.first().map(|s| s.confidence),
                        spans,
                        error: None,
                    }
                }
                Err(e) => AnsweredDocument {
                    chunk_id: p.chunk_id.clone(),
                    retrieval_rank: rank,
                    spans: Vec::new(),
                    doc_confidence: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    out.sort_by(|a, b| match (a.doc_confidence, b.doc_confidence) {
        (Some(x), Some(y)) => y
            .total_cmp(&x)
            .then(a.retrieval_rank.cmp(&b.retrieval_rank)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.retrieval_rank.cmp(&b.retrieval_rank),
    });
    Ok(out)
}
