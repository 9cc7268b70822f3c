use std::collections::HashMap;

use super::text::normalize_whitespace;
use super::{ChunkStore, QAPair, RetrievalSample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct SampleSet {
    pub samples: Vec<RetrievalSample>,
    /// QA pairs whose answer was found in none of the context chunks,
    /// typically because it straddles a chunk boundary.
    pub dropped: usize,
}

/// Label each question's context chunks as positive (contains the answer
/// after lowercasing and whitespace collapsing) or negative.
pub fn build_retrieval_samples(qa: &[QAPair], chunks: &ChunkStore) -> Result<SampleSet> {
    let mut by_article: HashMap<&str, Vec<(&str, String)>> = HashMap::new();
    for c in chunks {
        by_article
            .entry(c.article_id.as_str())
            .or_default()
            .push((c.chunk_id.as_str(), normalize_whitespace(&c.text)));
    }

    let mut out = SampleSet::default();
    for pair in qa {
        let context = by_article
            .get(pair.context_article_id.as_str())
            .ok_or_else(|| {
                Error::Invalid(format!(
                    "no chunks for context article `{}`",
                    pair.context_article_id
                ))
            })?;
        let answer = normalize_whitespace(&pair.answer);
        if answer.is_empty() {
            out.dropped += 1;
            continue;
        }
        let (pos, neg): (Vec<_>, Vec<_>) = context.iter().partition(|(_, t)| t.contains(&answer));
        if pos.is_empty() {
            out.dropped += 1;
            continue;
        }
        out.samples.push(RetrievalSample {
            question: pair.question.clone(),
            positive_chunk_ids: pos.into_iter().map(|(id, _)| id.to_string()).collect(),
            negative_chunk_ids: neg.into_iter().map(|(id, _)| id.to_string()).collect(),
        });
    }
    Ok(out)
}
