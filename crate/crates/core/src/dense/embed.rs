use serde::{Deserialize, Serialize};

use super::provider::EmbeddingProvider;
use crate::corpus::tokenize;
use crate::error::{Error, Result};
use crate::lexical::{remove_stopwords, Stoplist};

pub const DEFAULT_DIMENSION: usize = 256;
const MIN_DIMENSION: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Embedding(pub Vec<f32>);

impl Embedding {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn dot(&self, other: &Embedding) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn cosine(&self, other: &Embedding) -> f64 {
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            0.0
        } else {
            self.dot(other) / denom
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

pub(crate) fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| f64::from(x) * f64::from(y))
        .sum()
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Signed feature hashing of content unigrams and bigrams, L2-normalized.
/// Text with no content tokens maps to the zero vector.
pub fn baseline_embed(text: &str, dim: usize, stoplist: &Stoplist) -> Embedding {
    let tokens = remove_stopwords(&tokenize(text), stoplist);
    let mut acc = vec![0.0f64; dim];
    let mut add = |feature: &str| {
        let h = fnv1a(feature.as_bytes());
        let bucket = (h % dim as u64) as usize;
        acc[bucket] += if h >> 63 == 0 { 1.0 } else { -1.0 };
    };
    for t in &tokens {
        add(&format!("u:{t}"));
    }
    for pair in tokens.windows(2) {
        add(&format!("b:{} {}", pair[0], pair[1]));
    }
    let norm = acc.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Embedding::zeros(dim);
    }
    Embedding(acc.into_iter().map(|v| (v / norm) as f32).collect())
}

/// Deterministic stand-in for a trained encoder.
#[derive(Debug, Clone)]
pub struct BaselineEmbedder {
    dim: usize,
    stoplist: Stoplist,
}

impl BaselineEmbedder {
    pub fn new(dim: usize, stoplist: Stoplist) -> Result<Self> {
        if dim < MIN_DIMENSION {
            return Err(Error::Config(format!(
                "baseline embedder needs dimension >= {MIN_DIMENSION}, got {dim}"
            )));
        }
        Ok(Self { dim, stoplist })
    }

    pub fn embed(&self, text: &str) -> Embedding {
        baseline_embed(text, self.dim, &self.stoplist)
    }
}

impl Default for BaselineEmbedder {
    fn default() -> Self {
        Self::new(DEFAULT_DIMENSION, Stoplist::default()).expect("default dimension is valid")
    }
}

impl EmbeddingProvider for BaselineEmbedder {
    fn fingerprint(&self) -> String {
        format!("baseline-fnv1a-unibigram-v1/d{}", self.dim)
    }

    fn dimension(&self) -> usize {
        self.dim
    }

    fn embed_texts(&self, texts: &[&str]) -> Result<Vec<Embedding>> {
        Ok(texts.iter().map(|t| self.embed(t)).collect())
    }
}
