use std::collections::HashMap;

/// SQuAD answer normalization: lowercase, drop punctuation and the articles
/// a/an/the, collapse whitespace.
pub fn normalize_answer(text: &str) -> String {
    let lowered = text.to_lowercase();
    let no_punct: String = lowered
        .chars()
        .filter(|c| !c.is_ascii_punctuation() && !is_unicode_punct(*c))
        .collect();
    no_punct
        .split_whitespace()
        .filter(|w| !matches!(*w, "a" | "an" | "the"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn is_unicode_punct(c: char) -> bool {
    matches!(
        c,
        '\u{2010}'..='\u{2027}' | '\u{2030}'..='\u{205E}' | '\u{00A1}' | '\u{00BF}' | '\u{00AB}' | '\u{00BB}'
    )
}

pub fn normalized_tokens(text: &str) -> Vec<String> {
    normalize_answer(text)
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

pub fn exact_match(prediction: &str, gold: &str) -> u8 {
    u8::from(normalize_answer(prediction) == normalize_answer(gold))
}

/// Multiset token overlap F1. Zero if either side is empty.
pub fn token_f1<S: AsRef<str>>(prediction: &[S], gold: &[S]) -> f64 {
    if prediction.is_empty() || gold.is_empty() {
        return 0.0;
    }
    let mut counts: HashMap<&str, i64> = HashMap::new();
    for t in gold {
        *counts.entry(t.as_ref()).or_default() += 1;
    }
    let mut overlap = 0usize;
    for t in prediction {
        if let Some(c) = counts.get_mut(t.as_ref()) {
            if *c > 0 {
                *c -= 1;
                overlap += 1;
            }
        }
    }
    if overlap == 0 {
        return 0.0;
    }
    let p = overlap as f64 / prediction.len() as f64;
    let r = overlap as f64 / gold.len() as f64;
    2.0 * p * r / (p + r)
}

/// Token F1 between two strings after SQuAD normalization.
pub fn f1_score(prediction: &str, gold: &str) -> f64 {
    token_f1(&normalized_tokens(prediction), &normalized_tokens(gold))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_examples() {
        assert_eq!(token_f1(&["fever", "cough"], &["fever", "cough"]), 1.0);
        assert_eq!(token_f1(&["fever"], &["cough"]), 0.0);
        assert!((token_f1(&["fever", "cough"], &["fever"]) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(token_f1::<&str>(&[], &["x"]), 0.0);
    }

    #[test]
    fn f1_counts_multiplicity() {
        // overlap 1 (gold has one "a"): p = 1/2, r = 1
        assert!((token_f1(&["a", "a"], &["a"]) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn em_examples() {
        assert_eq!(exact_match("Fever.", "fever"), 1);
        assert_eq!(exact_match("fever", "cough"), 0);
        assert_eq!(exact_match("the fever", "fever"), 1);
        assert_eq!(exact_match("  An   apple ", "apple"), 1);
    }

    #[test]
    fn normalization() {
        assert_eq!(
            normalize_answer("The  SARS-CoV-2 virus, (mostly)!"),
            "sarscov2 virus mostly"
        );
    }
}
