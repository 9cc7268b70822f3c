use std::collections::{BTreeSet, VecDeque};
use std::ops::Range;

use rayon::prelude::*;

use super::text::{split_sentences, tokenize_with_offsets, trim_range, Token};
use super::{Article, PassageChunk};
use crate::error::{Error, Result};

/// Separator inserted between paragraphs when building an article body.
pub const BLOCK_SEPARATOR: &str = "\n\n";

/// Split an article into passages of at most `max_tokens` tokens.
///
/// Consecutive paragraphs are merged until a passage holds at least
/// `min_tokens`; paragraphs longer than `max_tokens` are first cut into
/// near-equal parts at the sentence boundaries closest to the equal-size
/// targets. When merging would overflow, the next block is cut so the current
/// passage lands in `[min_tokens, max_tokens]`. Only the final passage of an
/// article may fall below `min_tokens`.
pub fn chunk_article(
    article: &Article,
    min_tokens: usize,
    max_tokens: usize,
) -> Result<Vec<PassageChunk>> {
    if min_tokens == 0 || min_tokens >= max_tokens {
        return Err(Error::Config(format!(
            "chunk bounds require 0 < min < max, got min={min_tokens} max={max_tokens}"
        )));
    }
    let body = article.body();
    let tokens = tokenize_with_offsets(&body);
    if tokens.is_empty() {
        return Ok(Vec::new());
    }

    let boundaries = sentence_starts(&body, &tokens);
    let mut blocks = Vec::new();
    for para in paragraph_ranges(article, &tokens) {
        split_oversize(para, max_tokens, &boundaries, &mut blocks);
    }
    let ranges = merge_blocks(blocks, min_tokens, max_tokens, &boundaries);

    let mut chunks = Vec::with_capacity(ranges.len());
    for (idx, range) in ranges.iter().enumerate() {
        let start = if idx == 0 {
            0
        } else {
            tokens[range.start].start
        };
        let end = ranges
            .get(idx + 1)
            .map_or(body.len(), |next| tokens[next.start].start);
        let span = trim_range(&body, start..end).expect("chunk holds at least one token");
        chunks.push(PassageChunk {
            chunk_id: format!("{}#{:03}", article.article_id, idx),
            article_id: article.article_id.clone(),
            text: body[span.clone()].to_string(),
            token_count: range.len(),
            char_span: (span.start, span.end),
            journal: article.journal.clone(),
            publish_date: article.publish_date,
            title: article.title.clone(),
        });
    }
    Ok(chunks)
}

/// Chunk every article in parallel; output keeps corpus order.
pub fn chunk_corpus(
    articles: &[Article],
    min_tokens: usize,
    max_tokens: usize,
) -> Result<Vec<PassageChunk>> {
    let mut seen = std::collections::HashSet::with_capacity(articles.len());
    for a in articles {
        if !seen.insert(a.article_id.as_str()) {
            return Err(Error::Invalid(format!(
                "duplicate article id `{}`",
                a.article_id
            )));
        }
    }
    let per_article: Vec<Vec<PassageChunk>> = articles
        .par_iter()
        .map(|a| chunk_article(a, min_tokens, max_tokens))
        .collect::<Result<_>>()?;
    Ok(per_article.into_iter().flatten().collect())
}

/// Token indices at which a sentence (or paragraph) begins.
fn sentence_starts(body: &str, tokens: &[Token]) -> BTreeSet<usize> {
    let mut starts = BTreeSet::new();
    let mut t = 0;
    for sentence in split_sentences(body) {
        while t < tokens.len() && tokens[t].start < sentence.start {
            t += 1;
        }
        if t < tokens.len() && tokens[t].start < sentence.end {
            starts.insert(t);
        }
    }
    starts
}

fn paragraph_ranges(article: &Article, tokens: &[Token]) -> Vec<Range<usize>> {
    let mut ranges = Vec::with_capacity(article.paragraphs.len());
    let mut offset = 0;
    let mut t = 0;
    for para in &article.paragraphs {
        let end = offset + para.len();
        let first = t;
        while t < tokens.len() && tokens[t].start < end {
            t += 1;
        }
        if t > first {
            ranges.push(first..t);
        }
        offset = end + BLOCK_SEPARATOR.len();
    }
    ranges
}

fn split_oversize(
    range: Range<usize>,
    max_tokens: usize,
    boundaries: &BTreeSet<usize>,
    out: &mut Vec<Range<usize>>,
) {
    let len = range.len();
    if len <= max_tokens {
        out.push(range);
        return;
    }
    let parts = len.div_ceil(max_tokens);
    let mut cuts = Vec::with_capacity(parts - 1);
    let mut prev = range.start;
    for i in 1..parts {
        let target = range.start + len * i / parts;
        let cut = nearest_boundary(boundaries, prev + 1..range.end, target).unwrap_or(target);
        if cut > prev && cut < range.end {
            cuts.push(cut);
            prev = cut;
        }
    }
    let mut start = range.start;
    for cut in cuts.into_iter().chain(std::iter::once(range.end)) {
        if cut - start > max_tokens {
            let mid = start + (cut - start) / 2;
            // No usable sentence boundary left: halve on token boundaries.
            split_oversize(start..mid, max_tokens, boundaries, out);
            split_oversize(mid..cut, max_tokens, boundaries, out);
        } else {
            out.push(start..cut);
        }
        start = cut;
    }
}

fn nearest_boundary(
    boundaries: &BTreeSet<usize>,
    window: Range<usize>,
    target: usize,
) -> Option<usize> {
    boundaries
        .range(window)
        .min_by_key(|&&b| (b.abs_diff(target), b))
        .copied()
}

fn merge_blocks(
    blocks: Vec<Range<usize>>,
    min_tokens: usize,
    max_tokens: usize,
    boundaries: &BTreeSet<usize>,
) -> Vec<Range<usize>> {
    let mut out: Vec<Range<usize>> = Vec::new();
    let mut queue: VecDeque<Range<usize>> = blocks.into();
    let mut acc: Option<Range<usize>> = None;

    while let Some(block) = queue.pop_front() {
        let acc_len = acc.as_ref().map_or(0, |a| a.len());
        if acc_len + block.len() <= max_tokens {
            let merged = acc.take().map_or(block.clone(), |a| a.start..block.end);
            if merged.len() >= min_tokens {
                out.push(merged);
            } else {
                acc = Some(merged);
            }
            continue;
        }
        // acc is short and the whole block would overflow: take a prefix.
        let need = min_tokens - acc_len;
        let room = max_tokens - acc_len;
        let cut = boundaries
            .range(block.start + need..=block.start + room)
            .next()
            .copied()
            .unwrap_or(block.start + need);
        let start = acc.take().map_or(block.start, |a| a.start);
        out.push(start..cut);
        queue.push_front(cut..block.end);
    }

    if let Some(tail) = acc {
        match out.last_mut() {
            Some(last) if last.len() + tail.len() <= max_tokens => last.end = tail.end,
            _ => out.push(tail),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn article(paragraphs: Vec<String>) -> Article {
        Article {
            article_id: "a1".into(),
            title: "T".into(),
            journal: "J".into(),
            publish_date: None,
            paragraphs,
        }
    }

    /// `n` tokens grouped into sentences of `sentence_len` tokens.
    fn para(n: usize, sentence_len: usize) -> String {
        let mut s = String::new();
        for i in 0..n {
            if i % sentence_len == 0 {
                s.push_str(if i == 0 { "Word" } else { " Word" });
            } else {
                s.push_str(" word");
            }
            s.push_str(&i.to_string());
            if (i + 1) % sentence_len == 0 || i + 1 == n {
                s.push('.');
            }
        }
        s
    }

    #[test]
    fn oversize_paragraph_splits_at_middle_sentence() {
        let chunks = chunk_article(&article(vec![para(250, 25)]), 100, 200).unwrap();
        let counts: Vec<_> = chunks.iter().map(|c| c.token_count).collect();
        assert_eq!(counts, [125, 125]);
    }

    #[test]
    fn short_paragraphs_merge() {
        let chunks = chunk_article(&article(vec![para(60, 10), para(70, 10)]), 100, 200).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].token_count, 130);
        assert!(chunks[0].text.contains(BLOCK_SEPARATOR));
    }

    #[test]
    fn lone_short_paragraph_is_kept() {
        let chunks = chunk_article(&article(vec![para(80, 10)]), 100, 200).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].token_count, 80);
    }

    #[test]
    fn empty_article() {
        assert!(chunk_article(&article(vec![]), 100, 200)
            .unwrap()
            .is_empty());
        assert!(chunk_article(&article(vec!["...".into()]), 100, 200)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn bad_bounds() {
        assert!(matches!(
            chunk_article(&article(vec![para(10, 5)]), 200, 100),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn overflow_cuts_next_block() {
        // 90 then 150: the merged 240 overflows, so 10+ tokens move over.
        let chunks = chunk_article(&article(vec![para(90, 10), para(150, 10)]), 100, 200).unwrap();
        let counts: Vec<_> = chunks.iter().map(|c| c.token_count).collect();
        assert_eq!(counts.iter().sum::<usize>(), 240);
        assert!(counts[0] >= 100 && counts[0] <= 200);
        assert!(counts.iter().all(|&c| c <= 200));
    }

    #[test]
    fn unpunctuated_paragraph_falls_back_to_token_cuts() {
        let text = (0..450)
            .map(|i| format!("w{i}"))
            .collect::<Vec<_>>()
            .join(" ");
        let chunks = chunk_article(&article(vec![text]), 100, 200).unwrap();
        assert!(chunks.iter().all(|c| c.token_count <= 200));
        assert!(chunks[..chunks.len() - 1]
            .iter()
            .all(|c| c.token_count >= 100));
        assert_eq!(chunks.iter().map(|c| c.token_count).sum::<usize>(), 450);
    }

    #[test]
    fn spans_locate_text_and_ids_are_ordered() {
        let a = article(vec![para(130, 13), para(40, 8), para(300, 20), para(20, 5)]);
        let body = a.body();
        let chunks = chunk_article(&a, 100, 200).unwrap();
        for (i, c) in chunks.iter().enumerate() {
            assert_eq!(&body[c.char_span.0..c.char_span.1], c.text);
            assert_eq!(tokenize(&c.text).len(), c.token_count);
            assert_eq!(c.chunk_id, format!("a1#{i:03}"));
        }
    }
}
