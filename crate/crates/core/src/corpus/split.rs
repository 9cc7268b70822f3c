use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::text::normalize_whitespace;
use super::{QAPair, Split};

/// Flags questions that only make sense next to their source document
/// ("How many participants are there in this study?").
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentQuestionFilter {
    pub patterns: Vec<String>,
}

impl Default for DocumentQuestionFilter {
    fn default() -> Self {
        Self {
            patterns: ["this study", "this paper", "this article", "this review"]
                .map(String::from)
                .to_vec(),
        }
    }
}

impl DocumentQuestionFilter {
    pub fn matches(&self, question: &str) -> bool {
        let q = normalize_whitespace(question);
        self.patterns
            .iter()
            .any(|p| q.contains(&normalize_whitespace(p)))
    }
}

#[derive(Debug, Clone, Default)]
pub struct DatasetSplit {
    pub train: Vec<QAPair>,
    pub dev: Vec<QAPair>,
    pub test: Vec<QAPair>,
    /// Test-split questions removed by the document-question filter.
    pub excluded: Vec<QAPair>,
}

/// Train/dev/test partition sizes for `n` questions: 70% and 10% rounded to
/// the nearest integer, the remainder to test.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let train = (n * 7 + 5) / 10;
    let dev = ((n + 5) / 10).min(n - train);
    (train, dev, n - train - dev)
}

/// Seeded shuffle, then a 70/10/20 partition by question count.
pub fn split_dataset(qa: Vec<QAPair>, seed: u64, filter: &DocumentQuestionFilter) -> DatasetSplit {
    let mut qa = qa;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    qa.shuffle(&mut rng);

    let (n_train, n_dev, _) = split_sizes(qa.len());
    let mut out = DatasetSplit::default();
    for (i, mut pair) in qa.into_iter().enumerate() {
        let split = if i < n_train {
            Split::Train
        } else if i < n_train + n_dev {
            Split::Dev
        } else {
            Split::Test
        };
        pair.split = Some(split);
        match split {
            Split::Train => out.train.push(pair),
            Split::Dev => out.dev.push(pair),
            Split::Test if filter.matches(&pair.question) => out.excluded.push(pair),
            Split::Test => out.test.push(pair),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(n: usize) -> Vec<QAPair> {
        (0..n)
            .map(|i| QAPair {
                question_id: Some(format!("q{i}")),
                question: format!("question {i}?"),
                answer: "a".into(),
                context_article_id: "x".into(),
                split: None,
            })
            .collect()
    }

    #[test]
    fn sizes() {
        assert_eq!(split_sizes(2019), (1413, 202, 404));
        assert_eq!(split_sizes(10), (7, 1, 2));
        assert_eq!(split_sizes(0), (0, 0, 0));
        assert_eq!(split_sizes(1), (1, 0, 0));
        for n in 0..500 {
            let (a, b, c) = split_sizes(n);
            assert_eq!(a + b + c, n);
        }
    }

    #[test]
    fn ten_pairs() {
        let s = split_dataset(pairs(10), 7, &DocumentQuestionFilter::default());
        assert_eq!((s.train.len(), s.dev.len(), s.test.len()), (7, 1, 2));
    }

    #[test]
    fn reproducible_and_seed_sensitive() {
        let f = DocumentQuestionFilter::default();
        let a = split_dataset(pairs(50), 1, &f);
        let b = split_dataset(pairs(50), 1, &f);
        let c = split_dataset(pairs(50), 2, &f);
        assert_eq!(a.train, b.train);
        assert_ne!(a.train, c.train);
    }

    #[test]
    fn document_specific_questions() {
        let f = DocumentQuestionFilter::default();
        assert!(f.matches("How many participants are there in this study?"));
        assert!(f.matches("What does THIS   review conclude?"));
        assert!(!f.matches("What are symptoms of covid?"));
    }

    #[test]
    fn deictic_test_questions_are_excluded() {
        let mut qa = pairs(10);
        for p in &mut qa {
            p.question = "How many participants are there in this study?".into();
        }
        let s = split_dataset(qa, 3, &DocumentQuestionFilter::default());
        assert!(s.test.is_empty());
        assert_eq!(s.excluded.len(), 2);
        assert_eq!(s.train.len(), 7);
    }
}
