//! Stopword filtering, BM25+ re-ranking and TF-IDF features over a candidate pool.

mod bm25;
mod stopwords;
mod tfidf;

pub use bm25::{bm25_plus_score, rerank_bm25, Bm25Params, IdfVariant, TermStats};
pub use stopwords::{remove_stopwords, Stoplist};
pub use tfidf::{tfidf_vectors, TfidfSet, TfidfVector};
