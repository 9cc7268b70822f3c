use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fuzzy::{judge, Condition, FuzzyMatchConfig, FuzzyTarget, SentenceSet};
use crate::corpus::ChunkStore;
use crate::dense::EmbeddingProvider;
use crate::error::Result;

/// One line of a run file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub question_id: String,
    pub ranked_chunk_ids: Vec<String>,
}

/// One line of a gold file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub question_id: String,
    pub question: String,
    pub answer: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConditionHistogram {
    /// Judged documents on which each condition fired at least once.
    pub semantic_only: usize,
    pub semantic_and_keyword: usize,
    pub keyword_short_answer: usize,
    pub documents_judged: usize,
    pub documents_matched: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmReport {
    /// FM@k keyed by k.
    pub scores: BTreeMap<usize, f64>,
    pub thresholds: FuzzyMatchConfig,
    pub encoder: String,
    pub questions: usize,
    pub missing_questions: Vec<String>,
    /// Zero-based rank of the first matching document per question.
    pub first_match: BTreeMap<String, Option<usize>>,
    pub histogram: ConditionHistogram,
}

/// FM@k: the share of gold questions whose top-k list holds at least one
/// fuzzily matching document. Questions absent from `run` count as misses.
pub fn fm_at_k(
    run: &BTreeMap<String, Vec<String>>,
    gold: &BTreeMap<String, GoldRecord>,
    ks: &[usize],
    cfg: &FuzzyMatchConfig,
    chunks: &ChunkStore,
    encoder: &dyn EmbeddingProvider,
) -> Result<FmReport> {
    cfg.validate()?;
    let depth = ks.iter().copied().max().unwrap_or(0);

    let needed: BTreeSet<&str> = gold
        .keys()
        .filter_map(|q| run.get(q))
        .flat_map(|list| list.iter().take(depth).map(String::as_str))
        .collect();
    let sentence_sets: HashMap<&str, SentenceSet> = needed
        .par_iter()
        .map(|&id| Ok((id, SentenceSet::new(&chunks.require(id)?.text, encoder)?)))
        .collect::<Result<_>>()?;

    let mut missing = Vec::new();
    let per_question: Vec<(String, Option<usize>, ConditionHistogram)> = gold
        .par_iter()
        .map(|(qid, g)| {
            let Some(list) = run.get(qid) else {
                return Ok((qid.clone(), None, ConditionHistogram::default()));
            };
            let target = FuzzyTarget::new(&g.answer, &g.question, cfg, encoder)?;
            let mut hist = ConditionHistogram::default();
            let mut first = None;
            for (rank, id) in list.iter().take(depth).enumerate() {
                let j = judge(&sentence_sets[id.as_str()], &target, cfg);
                hist.documents_judged += 1;
                if j.matched {
                    hist.documents_matched += 1;
                    first.get_or_insert(rank);
                }
                let fired = |c| j.firings.iter().any(|f| f.condition == c);
                hist.semantic_only += usize::from(fired(Condition::SemanticOnly));
                hist.semantic_and_keyword += usize::from(fired(Condition::SemanticAndKeyword));
                hist.keyword_short_answer += usize::from(fired(Condition::KeywordShortAnswer));
            }
            Ok((qid.clone(), first, hist))
        })
        .collect::<Result<_>>()?;

    for qid in gold.keys().filter(|q| !run.contains_key(*q)) {
        tracing::warn!(question_id = %qid, "question missing from run; counted as a miss");
        missing.push(qid.clone());
    }

    let mut histogram = ConditionHistogram::default();
    let mut first_match = BTreeMap::new();
    for (qid, first, h) in per_question {
        histogram.semantic_only += h.semantic_only;
        histogram.semantic_and_keyword += h.semantic_and_keyword;
        histogram.keyword_short_answer += h.keyword_short_answer;
        histogram.documents_judged += h.documents_judged;
        histogram.documents_matched += h.documents_matched;
        first_match.insert(qid, first);
    }

    let total = gold.len();
    let scores = ks
        .iter()
        .map(|&k| {
            let hits = first_match
                .values()
                .filter(|f| f.is_some_and(|r| r < k))
                .count();
            let score = if total == 0 {
                0.0
            } else {
                hits as f64 / total as f64
            };
            (k, score)
        })
        .collect();

    Ok(FmReport {
        scores,
        thresholds: cfg.clone(),
        encoder: encoder.fingerprint(),
        questions: total,
        missing_questions: missing,
        first_match,
        histogram,
    })
}
