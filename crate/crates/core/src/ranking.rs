//! Ranked candidate lists passed between pipeline stages.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreSource {
    Dense,
    Bm25,
    Diversity,
    Reader,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub chunk_id: String,
    pub score: f64,
    pub source: ScoreSource,
}

/// Best-first list of chunk ids with the score that produced the order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RankedList {
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    pub fn new(entries: Vec<RankedEntry>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, RankedEntry> {
        self.entries.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.chunk_id.as_str())
    }

    pub fn truncated(&self, n: usize) -> Self {
        Self::new(self.entries.iter().take(n).cloned().collect())
    }

    /// Zero-based position of `chunk_id`, if present.
    pub fn rank_of(&self, chunk_id: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.chunk_id == chunk_id)
    }
}

impl FromIterator<RankedEntry> for RankedList {
    fn from_iter<I: IntoIterator<Item = RankedEntry>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a RankedList {
    type Item = &'a RankedEntry;
    type IntoIter = std::slice::Iter<'a, RankedEntry>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}
