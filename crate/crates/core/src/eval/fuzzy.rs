use serde::{Deserialize, Serialize};

use super::metrics::{normalized_tokens, token_f1};
use crate::corpus::split_sentences;
use crate::dense::{Embedding, EmbeddingProvider};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompareAgainst {
    /// Cosine between each sentence and the gold answer.
    #[default]
    Answer,
    /// Cosine between each sentence and the question.
    Question,
}

/// Thresholds for the fuzzy-match relevance test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FuzzyMatchConfig {
    /// Cosine alone suffices at or above `a`.
    pub a: f64,
    /// Cosine at or above `b` together with F1 at or above `c`.
    pub b: f64,
    pub c: f64,
    /// F1 alone suffices at or above `d`, for short answers only.
    pub d: f64,
    pub short_answer_max_tokens: usize,
    pub compare_against: CompareAgainst,
}

impl Default for FuzzyMatchConfig {
    fn default() -> Self {
        Self {
            a: 0.75,
            b: 0.60,
            c: 0.50,
            d: 0.80,
            short_answer_max_tokens: 3,
            compare_against: CompareAgainst::Answer,
        }
    }
}

impl FuzzyMatchConfig {
    /// Checks ranges only; `b < a` and `c < d` are the recommended shape
    /// but degenerate settings are allowed for sanity checks.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!(
                    "fuzzy threshold {name} must be in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Strict form: also requires `b < a` and `d > c`.
    pub fn validate_strict(&self) -> Result<()> {
        self.validate()?;
        if self.b >= self.a || self.d <= self.c {
            return Err(Error::Config(format!(
                "fuzzy thresholds need b < a and d > c, got a={} b={} c={} d={}",
                self.a, self.b, self.c, self.d
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    /// cosine >= a
    SemanticOnly,
    /// cosine >= b and F1 >= c
    SemanticAndKeyword,
    /// short answer and F1 >= d
    KeywordShortAnswer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionFiring {
    pub sentence: usize,
    pub condition: Condition,
    pub cosine: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalJudgment {
    pub matched: bool,
    pub firings: Vec<ConditionFiring>,
}

/// A passage split into sentences with their embeddings and F1 tokens,
/// reusable across questions.
#[derive(Debug, Clone)]
pub struct SentenceSet {
    pub sentences: Vec<String>,
    embeddings: Vec<Embedding>,
    tokens: Vec<Vec<String>>,
}

impl SentenceSet {
    pub fn new(text: &str, encoder: &dyn EmbeddingProvider) -> Result<Self> {
        let sentences: Vec<String> = split_sentences(text)
            .into_iter()
            .map(|r| text[r].to_string())
            .collect();
        let refs: Vec<&str> = sentences.iter().map(String::as_str).collect();
        let embeddings = if refs.is_empty() {
            Vec::new()
        } else {
            encoder.embed_texts(&refs)?
        };
        let tokens = sentences.iter().map(|s| normalized_tokens(s)).collect();
        Ok(Self {
            sentences,
            embeddings,
            tokens,
        })
    }
}

/// Gold answer (and question) prepared once for judging many passages.
#[derive(Debug, Clone)]
pub struct FuzzyTarget {
    tokens: Vec<String>,
    embedding: Embedding,
}

impl FuzzyTarget {
    pub fn new(
        answer: &str,
        question: &str,
        cfg: &FuzzyMatchConfig,
        encoder: &dyn EmbeddingProvider,
    ) -> Result<Self> {
        let target = match cfg.compare_against {
            CompareAgainst::Answer => answer,
            CompareAgainst::Question => question,
        };
        let embedding = encoder
            .embed_texts(&[target])?
            .pop()
            .ok_or_else(|| Error::provider("no vector for fuzzy-match target"))?;
        Ok(Self {
            tokens: normalized_tokens(answer),
            embedding,
        })
    }
}

pub fn judge(doc: &SentenceSet, target: &FuzzyTarget, cfg: &FuzzyMatchConfig) -> RetrievalJudgment {
    let short = target.tokens.len() <= cfg.short_answer_max_tokens;
    let mut firings = Vec::new();
    for (i, (emb, toks)) in doc.embeddings.iter().zip(&doc.tokens).enumerate() {
        let cosine = emb.cosine(&target.embedding);
        let f1 = token_f1(toks, &target.tokens);
        let mut fire = |condition| {
            firings.push(ConditionFiring {
                sentence: i,
                condition,
                cosine,
                f1,
            })
        };
        if cosine >= cfg.a {
            fire(Condition::SemanticOnly);
        }
        if cosine >= cfg.b && f1 >= cfg.c {
            fire(Condition::SemanticAndKeyword);
        }
        if short && f1 >= cfg.d {
            fire(Condition::KeywordShortAnswer);
        }
    }
    RetrievalJudgment {
        matched: !firings.is_empty(),
        firings,
    }
}

/// Does `document` contain a sentence that fuzzily matches the gold answer?
pub fn fuzzy_match(
    answer: &str,
    question: &str,
    document: &str,
    cfg: &FuzzyMatchConfig,
    encoder: &dyn EmbeddingProvider,
) -> Result<RetrievalJudgment> {
    let doc = SentenceSet::new(document, encoder)?;
    let target = FuzzyTarget::new(answer, question, cfg, encoder)?;
    Ok(judge(&doc, &target, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::BaselineEmbedder;

    fn fm(answer: &str, doc: &str, cfg: &FuzzyMatchConfig) -> RetrievalJudgment {
        fuzzy_match(answer, "", doc, cfg, &BaselineEmbedder::default()).unwrap()
    }

    fn fired(j: &RetrievalJudgment, c: Condition) -> bool {
        j.firings.iter().any(|f| f.condition == c)
    }

    #[test]
    fn verbatim_sentence_matches_semantically() {
        let answer = "Masks reduce droplet transmission in crowded indoor settings.";
        let doc = format!("Ventilation was poor. {answer} Further work is needed.");
        let j = fm(answer, &doc, &FuzzyMatchConfig::default());
        assert!(j.matched);
        assert!(fired(&j, Condition::SemanticOnly));
        assert_eq!(j.firings[0].sentence, 1);
    }

    #[test]
    fn short_answer_keyword_condition() {
        // Single-token answer; the one-word sentence has F1 = 1.
        let doc = "Several surfaces were swabbed over many weeks in the ward. Fomites. \
                   The remaining samples were negative.";
        let cfg = FuzzyMatchConfig {
            a: 1.0,
            b: 1.0,
            ..Default::default()
        };
        let j = fm("fomites", doc, &cfg);
        assert!(fired(&j, Condition::KeywordShortAnswer));
        assert!(j.matched);
    }

    #[test]
    fn keyword_condition_needs_short_answer() {
        let doc = "Fever cough fatigue.";
        let cfg = FuzzyMatchConfig {
            a: 1.0,
            b: 1.0,
            d: 0.5,
            short_answer_max_tokens: 2,
            ..Default::default()
        };
        assert!(!fired(
            &fm("fever cough fatigue", doc, &cfg),
            Condition::KeywordShortAnswer
        ));
    }

    #[test]
    fn unrelated_document() {
        let j = fm(
            "fever and dry cough",
            "Stock markets fell sharply. Bond yields rose.",
            &FuzzyMatchConfig::default(),
        );
        assert!(!j.matched);
        assert!(j.firings.is_empty());
    }

    #[test]
    fn empty_document() {
        assert!(!fm("fever", "", &FuzzyMatchConfig::default()).matched);
    }

    #[test]
    fn zero_thresholds_fire_everywhere() {
        let cfg = FuzzyMatchConfig {
            a: 0.0,
            b: 0.0,
            c: 0.0,
            d: 0.0,
            ..Default::default()
        };
        assert!(fm("fever", "Stock markets fell.", &cfg).matched);
    }

    #[test]
    fn compare_against_question() {
        let cfg = FuzzyMatchConfig {
            compare_against: CompareAgainst::Question,
            c: 1.0,
            d: 1.0,
            ..Default::default()
        };
        let enc = BaselineEmbedder::default();
        let q = "Do masks reduce droplet transmission indoors?";
        let j = fuzzy_match(
            "yes",
            q,
            "Masks reduce droplet transmission indoors.",
            &cfg,
            &enc,
        )
        .unwrap();
        assert!(fired(&j, Condition::SemanticOnly));
    }

    #[test]
    fn threshold_validation() {
        assert!(FuzzyMatchConfig::default().validate_strict().is_ok());
        let bad = FuzzyMatchConfig {
            a: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let inverted = FuzzyMatchConfig {
            b: 0.9,
            ..Default::default()
        };
        assert!(inverted.validate().is_ok());
        assert!(inverted.validate_strict().is_err());
    }
}
