use std::collections::{BTreeMap, HashMap};

use super::stopwords::{remove_stopwords, Stoplist};
use crate::corpus::{tokenize, ChunkStore};
use crate::error::Result;

/// Sparse, L2-normalized TF-IDF weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TfidfVector {
    pub weights: BTreeMap<String, f64>,
}

impl TfidfVector {
    pub fn norm(&self) -> f64 {
        self.weights.values().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &TfidfVector) -> f64 {
        let (small, large) = if self.weights.len() <= other.weights.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .weights
            .iter()
            .filter_map(|(t, w)| large.weights.get(t).map(|v| w * v))
            .sum()
    }

    pub fn cosine(&self, other: &TfidfVector) -> f64 {
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            0.0
        } else {
            self.dot(other) / denom
        }
    }

    pub fn is_zero(&self) -> bool {
        self.weights.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct TfidfSet {
    /// One vector per pool entry, in pool order.
    pub vectors: Vec<(String, TfidfVector)>,
    /// Chunks left with no tokens after stopword removal; their vectors are zero.
    pub empty: Vec<String>,
}

impl TfidfSet {
    pub fn get(&self, chunk_id: &str) -> Option<&TfidfVector> {
        self.vectors
            .iter()
            .find(|(id, _)| id == chunk_id)
            .map(|(_, v)| v)
    }

    /// Sorted vocabulary across all vectors.
    pub fn vocabulary(&self) -> Vec<&str> {
        let mut vocab: Vec<&str> = self
            .vectors
            .iter()
            .flat_map(|(_, v)| v.weights.keys().map(String::as_str))
            .collect();
        vocab.sort_unstable();
        vocab.dedup();
        vocab
    }
}

/// TF-IDF over the pool only: raw counts times `ln((N + 1) / df)`, normalized.
pub fn tfidf_vectors<S: AsRef<str>>(
    pool: &[S],
    chunks: &ChunkStore,
    stoplist: &Stoplist,
) -> Result<TfidfSet> {
    let mut counts = Vec::with_capacity(pool.len());
    let mut df: HashMap<String, usize> = HashMap::new();
    for id in pool {
        let chunk = chunks.require(id.as_ref())?;
        let mut tf: BTreeMap<String, f64> = BTreeMap::new();
        for t in remove_stopwords(&tokenize(&chunk.text), stoplist) {
            *tf.entry(t).or_default() += 1.0;
        }
        for term in tf.keys() {
            *df.entry(term.clone()).or_default() += 1;
        }
        counts.push((id.as_ref().to_string(), tf));
    }

    let n = pool.len() as f64;
    let mut set = TfidfSet::default();
    for (id, tf) in counts {
        let mut weights: BTreeMap<String, f64> = tf
            .into_iter()
            .map(|(t, c)| {
                let idf = ((n + 1.0) / df[&t] as f64).ln();
                (t, c * idf)
            })
            .collect();
        let norm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            weights.values_mut().for_each(|w| *w /= norm);
        } else {
            set.empty.push(id.clone());
        }
        set.vectors.push((id, TfidfVector { weights }));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::store_from_texts;

    #[test]
    fn identical_documents() {
        let store = store_from_texts(&[("a", "mask policy"), ("b", "mask policy")]);
        let set = tfidf_vectors(&["a", "b"], &store, &Stoplist::default()).unwrap();
        let (a, b) = (set.get("a").unwrap(), set.get("b").unwrap());
        assert!((a.cosine(b) - 1.0).abs() < 1e-12);
        assert_eq!(a, b);
    }

    #[test]
    fn disjoint_documents() {
        let store = store_from_texts(&[("a", "mask policy"), ("b", "vaccine trial")]);
        let set = tfidf_vectors(&["a", "b"], &store, &Stoplist::default()).unwrap();
        assert_eq!(set.get("a").unwrap().cosine(set.get("b").unwrap()), 0.0);
    }

    #[test]
    fn hand_computed_weights() {
        // N = 3; "virus" is in every doc (df 3), the rest are unique (df 1).
        let store = store_from_texts(&[
            ("a", "virus virus mask"),
            ("b", "virus trial"),
            ("c", "virus"),
        ]);
        let set = tfidf_vectors(&["a", "b", "c"], &store, &Stoplist::default()).unwrap();
        let shared = (4.0f64 / 3.0).ln();
        let unique = 4.0f64.ln();
        let raw_a = [2.0 * shared, unique];
        let norm_a = (raw_a[0] * raw_a[0] + raw_a[1] * raw_a[1]).sqrt();
        let a = set.get("a").unwrap();
        assert!((a.weights["virus"] - raw_a[0] / norm_a).abs() < 1e-12);
        assert!((a.weights["mask"] - raw_a[1] / norm_a).abs() < 1e-12);
        let c = set.get("c").unwrap();
        assert!((c.weights["virus"] - 1.0).abs() < 1e-12);
        for (_, v) in &set.vectors {
            assert!((v.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn stopword_only_chunk_is_flagged() {
        let store = store_from_texts(&[("a", "the of and"), ("b", "virus")]);
        let set = tfidf_vectors(&["a", "b"], &store, &Stoplist::default()).unwrap();
        assert_eq!(set.empty, ["a"]);
        assert!(set.get("a").unwrap().is_zero());
    }
}
