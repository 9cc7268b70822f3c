use super::{AnswerSpan, SpanScores};

/// Pick up to `m` non-overlapping answer spans, best first.
///
/// Every `(start, end)` pair with `start <= end` and at most `max_span_len`
/// tokens is a candidate, scored `start_score[start] + end_score[end]`.
/// Candidates are taken greedily in order of score (then shorter span, then
/// earlier start), skipping any that overlap an accepted span. Spans scoring
/// `<= 0` are never returned.
pub fn select_spans(
    scores: &SpanScores,
    text: &str,
    m: usize,
    max_span_len: usize,
) -> Vec<AnswerSpan> {
    let len = scores.start.len().min(scores.end.len());
    let mut accepted: Vec<(usize, usize, f64)> = Vec::with_capacity(m);

    while accepted.len() < m {
        let mut best: Option<(usize, usize, f64)> = None;
        for s in 0..len {
            if covered(&accepted, s) {
                continue;
            }
            let last = len.min(s + max_span_len);
            for e in s..last {
                // Spans only grow from `s`; once `e` hits an accepted span
                // every longer one overlaps too.
                if covered(&accepted, e) {
                    break;
                }
                let score = scores.start[s] + scores.end[e];
                if score <= 0.0 {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bs, be, bscore)) => {
                        score > bscore || (score == bscore && (e - s, s) < (be - bs, bs))
                    }
                };
                if better {
                    best = Some((s, e, score));
                }
            }
        }
        match best {
            Some(b) => accepted.push(b),
            None => break,
        }
    }

    accepted
        .into_iter()
        .map(|(s, e, confidence)| {
            let (start_char, end_char) = (scores.offsets[s].0, scores.offsets[e].1);
            AnswerSpan {
                start_token: s,
                end_token: e,
                start_char,
                end_char,
                start_score: scores.start[s],
                end_score: scores.end[e],
                confidence,
                text: text
                    .get(start_char..end_char)
                    .unwrap_or_default()
                    .to_string(),
            }
        })
        .collect()
}

fn covered(accepted: &[(usize, usize, f64)], token: usize) -> bool {
    accepted.iter().any(|&(s, e, _)| s <= token && token <= e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(start: &[f64], end: &[f64]) -> SpanScores {
        SpanScores {
            start: start.to_vec(),
            end: end.to_vec(),
            offsets: (0..start.len()).map(|i| (i * 2, i * 2 + 1)).collect(),
        }
    }

    fn text(n: usize) -> String {
        (0..n)
            .map(|i| ((b'a' + (i % 26) as u8) as char).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }

    #[test]
    fn two_peaks() {
        let s = scores(
            &[0.0, 5.0, 0.0, 0.0, 0.0, 0.0, 4.0, 0.0],
            &[0.0, 0.0, 5.0, 0.0, 0.0, 0.0, 0.0, 4.0],
        );
        let spans = select_spans(&s, &text(8), 2, 10);
        let got: Vec<_> = spans.iter().map(|a| (a.start_token, a.end_token)).collect();
        assert_eq!(got, [(1, 2), (6, 7)]);
        assert_eq!(spans[0].text, "b c");
        assert_eq!(spans[0].confidence, 10.0);
        assert!(spans[0].confidence >= spans[1].confidence);
    }

    #[test]
    fn all_zero_is_suppressed() {
        let s = scores(&[0.0; 6], &[0.0; 6]);
        assert!(select_spans(&s, &text(6), 3, 10).is_empty());
    }

    #[test]
    fn end_before_start_is_invalid() {
        let s = scores(&[0.0, 0.0, 9.0], &[9.0, 0.0, 0.0]);
        let spans = select_spans(&s, &text(3), 1, 10);
        // (2,2) = 9 beats (0,0) = 9 only on the start-position tie-break.
        assert_eq!((spans[0].start_token, spans[0].end_token), (0, 0));
        assert_eq!(spans[0].confidence, 9.0);
    }

    #[test]
    fn length_bound() {
        let s = scores(&[3.0, 0.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 0.0, 3.0]);
        let spans = select_spans(&s, &text(5), 1, 3);
        assert!(spans[0].token_len() <= 3);
        assert_eq!(spans[0].confidence, 3.0);
    }

    #[test]
    fn tie_prefers_shorter_span() {
        let s = scores(&[1.0, 1.0, 0.0], &[0.0, 1.0, 1.0]);
        let spans = select_spans(&s, &text(3), 1, 10);
        assert_eq!((spans[0].start_token, spans[0].end_token), (1, 1));
    }
}
