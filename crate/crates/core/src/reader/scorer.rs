use std::collections::{HashMap, HashSet};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SpanScores;
use crate::corpus::{tokenize, tokenize_with_offsets, PassageChunk};
use crate::error::{Error, Result};
use crate::lexical::Stoplist;

/// Produces per-token start/end scores for a question against passages.
pub trait SpanScorer: Send + Sync {
    fn name(&self) -> String;

    /// One result per passage, in input order. A failure affects only its
    /// own passage.
    fn score(&self, question: &str, passages: &[&PassageChunk]) -> Vec<Result<SpanScores>>;

    fn probe(&self) -> Result<()> {
        Ok(())
    }
}

/// Lexical stand-in for a fine-tuned reader: a token "matches" when it is a
/// content word of the question, and start/end scores are geometrically
/// decayed match counts over a forward/backward window.
#[derive(Debug, Clone)]
pub struct BaselineSpanScorer {
    pub window: usize,
    pub decay: f64,
    stoplist: Stoplist,
}

impl BaselineSpanScorer {
    pub const WINDOW: usize = 10;
    pub const DECAY: f64 = 0.9;

    pub fn new(stoplist: Stoplist) -> Self {
        Self {
            window: Self::WINDOW,
            decay: Self::DECAY,
            stoplist,
        }
    }

    pub fn score_one(&self, question: &str, text: &str) -> SpanScores {
        let wanted: HashSet<String> = tokenize(question)
            .into_iter()
            .filter(|t| !self.stoplist.contains(t))
            .collect();
        let tokens = tokenize_with_offsets(text);
        let matches: Vec<f64> = tokens
            .iter()
            .map(|t| {
                if !self.stoplist.contains(&t.text) && wanted.contains(&t.text) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let len = matches.len();
        let w = self.window.max(1);
        let start = (0..len)
            .map(|i| {
                (i..len.min(i + w))
                    .map(|j| matches[j] * self.decay.powi((j - i) as i32))
                    .sum()
            })
            .collect();
        let end = (0..len)
            .map(|i| {
                (i.saturating_sub(w - 1)..=i)
                    .map(|j| matches[j] * self.decay.powi((i - j) as i32))
                    .sum()
            })
            .collect();
        SpanScores {
            start,
            end,
            offsets: tokens.iter().map(|t| (t.start, t.end)).collect(),
        }
    }
}

impl Default for BaselineSpanScorer {
    fn default() -> Self {
        Self::new(Stoplist::default())
    }
}

impl SpanScorer for BaselineSpanScorer {
    fn name(&self) -> String {
        format!("baseline-lexical/w{}/g{}", self.window, self.decay)
    }

    fn score(&self, question: &str, passages: &[&PassageChunk]) -> Vec<Result<SpanScores>> {
        passages
            .par_iter()
            .map(|p| Ok(self.score_one(question, &p.text)))
            .collect()
    }
}

#[derive(Serialize)]
struct ScoreRequest<'a> {
    question: &'a str,
    passages: Vec<PassageRef<'a>>,
}

#[derive(Serialize)]
struct PassageRef<'a> {
    id: &'a str,
    text: &'a str,
}

#[derive(Deserialize)]
struct ScoreResponse {
    scores: Vec<ScoreRecord>,
}

#[derive(Deserialize)]
struct ScoreRecord {
    id: String,
    start: Vec<f64>,
    end: Vec<f64>,
    offsets: Vec<(usize, usize)>,
}

/// Remote reader speaking `POST /score_spans`.
pub struct EndpointSpanScorer {
    url: String,
    agent: ureq::Agent,
}

impl EndpointSpanScorer {
    /// `base_url` is the server root; requests go to `<base_url>/score_spans`.
    pub fn new(base_url: &str, timeout_ms: u64) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(timeout_ms)))
            .build()
            .into();
        Self {
            url: format!("{}/score_spans", base_url.trim_end_matches('/')),
            agent,
        }
    }

    fn request(&self, question: &str, passages: &[&PassageChunk]) -> Result<Vec<ScoreRecord>> {
        let body = ScoreRequest {
            question,
            passages: passages
                .iter()
                .map(|p| PassageRef {
                    id: &p.chunk_id,
                    text: &p.text,
                })
                .collect(),
        };
        let mut resp = self
            .agent
            .post(&self.url)
            .send_json(body)
            .map_err(|e| Error::provider(format!("{}: {e}", self.url)))?;
        let parsed: ScoreResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| Error::provider(format!("{}: bad response: {e}", self.url)))?;
        Ok(parsed.scores)
    }
}

impl SpanScorer for EndpointSpanScorer {
    fn name(&self) -> String {
        format!("endpoint:{}", self.url)
    }

    fn score(&self, question: &str, passages: &[&PassageChunk]) -> Vec<Result<SpanScores>> {
        match self.request(question, passages) {
            Ok(records) => {
                let mut by_id: HashMap<String, ScoreRecord> =
                    records.into_iter().map(|r| (r.id.clone(), r)).collect();
                passages
                    .iter()
                    .map(|p| {
                        by_id
                            .remove(&p.chunk_id)
                            .map(|r| SpanScores {
                                start: r.start,
                                end: r.end,
                                offsets: r.offsets,
                            })
                            .ok_or_else(|| Error::Provider {
                                chunk_id: Some(p.chunk_id.clone()),
                                message: "missing from reader response".into(),
                            })
                    })
                    .collect()
            }
            Err(e) => {
                let msg = e.to_string();
                passages
                    .iter()
                    .map(|p| {
                        Err(Error::Provider {
                            chunk_id: Some(p.chunk_id.clone()),
                            message: msg.clone(),
                        })
                    })
                    .collect()
            }
        }
    }

    fn probe(&self) -> Result<()> {
        self.request("ping", &[]).map(drop)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    #[test]
    fn no_shared_content_tokens() {
        let s = BaselineSpanScorer::default().score_one("vaccine efficacy", "masks reduce spread");
        assert!(s.start.iter().chain(&s.end).all(|&v| v == 0.0));
    }

    #[test]
    fn own_tokens_peak_at_zero() {
        let q = "median incubation period estimate";
        let s = BaselineSpanScorer::default().score_one(q, q);
        let max = s.start.iter().copied().fold(f64::MIN, f64::max);
        assert_eq!(s.start[0], max);
        // 1 + 0.9 + 0.81 + 0.729
        assert!((s.start[0] - 3.439).abs() < EPS);
    }

    #[test]
    fn single_match_window() {
        let text = (0..30)
            .map(|i| {
                if i == 15 {
                    "fomites".to_string()
                } else {
                    format!("w{i}")
                }
            })
            .collect::<Vec<_>>()
            .join(" ");
        let s = BaselineSpanScorer::default().score_one("fomites?", &text);
        for i in 0..30 {
            let expected_start = if (6..=15).contains(&i) {
                0.9f64.powi(15 - i)
            } else {
                0.0
            };
            let expected_end = if (15..=24).contains(&i) {
                0.9f64.powi(i - 15)
            } else {
                0.0
            };
            assert!(
                (s.start[i as usize] - expected_start).abs() < EPS,
                "start {i}"
            );
            assert!((s.end[i as usize] - expected_end).abs() < EPS, "end {i}");
        }
        assert_eq!(s.start[15], 1.0);
        assert_eq!(s.offsets.len(), 30);
    }

    #[test]
    fn stopwords_never_match() {
        let s = BaselineSpanScorer::default().score_one("what is the cause", "the cause is what");
        let matched: Vec<_> = s.start.iter().map(|&v| v > 0.0).collect();
        assert_eq!(matched, [true, true, false, false]);
    }
}
