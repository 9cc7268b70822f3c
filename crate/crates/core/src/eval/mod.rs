//! Retrieval and reader evaluation: fuzzy matching, FM@k, exact match, token F1.

mod fm;
mod fuzzy;
mod metrics;
mod run;

pub use fm::{fm_at_k, ConditionHistogram, FmReport, GoldRecord, RunRecord};
pub use fuzzy::{
    fuzzy_match, judge, CompareAgainst, Condition, ConditionFiring, FuzzyMatchConfig, FuzzyTarget,
    RetrievalJudgment, SentenceSet,
};
pub use metrics::{exact_match, f1_score, normalize_answer, normalized_tokens, token_f1};
pub use run::{
    build_run, evaluate_reader, question_key, ReaderReport, ReaderResult, RetrievalSystem,
};

use crate::reader::AnswerSpan;

/// Best token F1 of any returned span against the gold answer.
pub fn best_span_f1(spans: &[AnswerSpan], gold: &str) -> f64 {
    spans
        .iter()
        .map(|s| f1_score(&s.text, gold))
        .fold(0.0, f64::max)
}

/// Best exact match of any returned span against the gold answer.
pub fn best_span_em(spans: &[AnswerSpan], gold: &str) -> u8 {
    spans
        .iter()
        .map(|s| exact_match(&s.text, gold))
        .max()
        .unwrap_or(0)
}
