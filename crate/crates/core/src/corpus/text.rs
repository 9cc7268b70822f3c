//! Tokenization and sentence splitting shared by every stage.

use std::ops::Range;

/// A lowercased token and the byte range it occupies in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Lowercased alphanumeric tokens; a hyphen between two alphanumerics joins
/// them into one compound (`covid-19`). Everything else separates.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_with_offsets(text)
        .into_iter()
        .map(|t| t.text)
        .collect()
}

pub fn tokenize_with_offsets(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    let mut start: Option<usize> = None;

    while let Some((i, c)) = chars.next() {
        if c.is_alphanumeric() {
            if start.is_none() {
                start = Some(i);
            }
            continue;
        }
        if let Some(s) = start {
            let joins = c == '-' && chars.peek().is_some_and(|&(_, n)| n.is_alphanumeric());
            if joins {
                continue;
            }
            tokens.push(make_token(text, s, i));
            start = None;
        }
    }
    if let Some(s) = start {
        tokens.push(make_token(text, s, text.len()));
    }
    tokens
}

fn make_token(text: &str, start: usize, end: usize) -> Token {
    Token {
        text: text[start..end].to_lowercase(),
        start,
        end,
    }
}

/// Number of tokens `tokenize` would produce, without allocating them.
pub fn token_count(text: &str) -> usize {
    tokenize_with_offsets(text).len()
}

/// Lowercase and collapse runs of whitespace to a single space.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

const ABBREVIATIONS: &[&str] = &[
    "e.g.", "i.e.", "al.", "approx.", "ca.", "cf.", "dr.", "eq.", "eqs.", "fig.", "figs.", "mr.",
    "mrs.", "ms.", "no.", "nos.", "prof.", "ref.", "refs.", "resp.", "sp.", "spp.", "st.", "vol.",
    "vs.",
];

/// Split text into trimmed sentence byte ranges.
///
/// A boundary follows `.`, `!` or `?` (plus any closing quotes or brackets)
/// when the next non-space character is uppercase or a digit, unless the word
/// ending at the period is a known abbreviation or a single-letter initial.
/// Blank lines always end a sentence.
pub fn split_sentences(text: &str) -> Vec<Range<usize>> {
    let bytes = text.as_bytes();
    let mut cuts = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            let mut j = i + 1;
            while j < bytes.len() && (bytes[j] == b' ' || bytes[j] == b'\t' || bytes[j] == b'\r') {
                j += 1;
            }
            if j < bytes.len() && bytes[j] == b'\n' {
                cuts.push(i);
                i = j + 1;
                continue;
            }
        }
        if matches!(c, b'.' | b'!' | b'?') {
            let mut end = i + 1;
            while end < bytes.len() && matches!(bytes[end], b'"' | b'\'' | b')' | b']') {
                end += 1;
            }
            let mut next = end;
            while next < bytes.len() && (bytes[next] as char).is_ascii_whitespace() {
                next += 1;
            }
            if next > end && next < bytes.len() {
                let follower = text[next..].chars().next().unwrap_or(' ');
                if (follower.is_uppercase() || follower.is_ascii_digit())
                    && !(c == b'.' && is_abbreviation(&text[..i + 1]))
                {
                    cuts.push(end);
                    i = next;
                    continue;
                }
            }
        }
        i += 1;
    }

    let mut sentences = Vec::new();
    let mut start = 0;
    for cut in cuts.into_iter().chain(std::iter::once(text.len())) {
        if let Some(r) = trim_range(text, start..cut) {
            sentences.push(r);
        }
        start = cut;
    }
    sentences
}

fn is_abbreviation(prefix: &str) -> bool {
    let word = prefix
        .rsplit(|c: char| c.is_whitespace() || c == '(' || c == '[')
        .next()
        .unwrap_or("");
    let lower = word.to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    // Single-letter initials such as "J." in author lists.
    let mut chars = word.chars();
    matches!((chars.next(), chars.next(), chars.next()), (Some(a), Some('.'), None) if a.is_uppercase())
}

/// Shrink a byte range so it excludes leading and trailing whitespace.
/// Returns `None` if nothing but whitespace remains.
pub fn trim_range(text: &str, range: Range<usize>) -> Option<Range<usize>> {
    let slice = &text[range.clone()];
    let lead = slice.len() - slice.trim_start().len();
    let trimmed = slice.trim();
    if trimmed.is_empty() {
        return None;
    }
    let start = range.start + lead;
    Some(start..start + trimmed.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_examples() {
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("COVID-19 spreads."), ["covid-19", "spreads"]);
        assert_eq!(
            tokenize("Social distancing, distancing"),
            ["social", "distancing", "distancing"]
        );
    }

    #[test]
    fn hyphen_edges_do_not_join() {
        assert_eq!(tokenize("-a- b--c"), ["a", "b", "c"]);
        assert_eq!(tokenize("SARS-CoV-2"), ["sars-cov-2"]);
        assert_eq!(tokenize("it's 3.5"), ["it", "s", "3", "5"]);
    }

    #[test]
    fn offsets_point_into_source() {
        let text = "Masks (N95) work; Ärzte agree.";
        for t in tokenize_with_offsets(text) {
            assert_eq!(text[t.start..t.end].to_lowercase(), t.text);
        }
    }

    #[test]
    fn sentence_boundaries() {
        let text = "Fever is common. Cough e.g. dry cough is too. 12 patients died! what now";
        let got: Vec<&str> = split_sentences(text)
            .into_iter()
            .map(|r| &text[r])
            .collect();
        assert_eq!(
            got,
            [
                "Fever is common.",
                "Cough e.g. dry cough is too.",
                "12 patients died! what now"
            ]
        );
    }

    #[test]
    fn sentence_guards() {
        let text = "Smith J. Wrote it. See Fig. 2 for details.\n\nnew paragraph";
        let got: Vec<&str> = split_sentences(text)
            .into_iter()
            .map(|r| &text[r])
            .collect();
        assert_eq!(
            got,
            [
                "Smith J. Wrote it.",
                "See Fig. 2 for details.",
                "new paragraph"
            ]
        );
    }

    #[test]
    fn empty_and_blank() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("  \n\n ").is_empty());
    }
}
