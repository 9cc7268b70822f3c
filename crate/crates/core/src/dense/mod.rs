//! Embedding providers, the persisted dense index and exact inner-product search.

mod embed;
mod index;
mod provider;

pub use embed::{baseline_embed, BaselineEmbedder, Embedding, DEFAULT_DIMENSION};
pub use index::{build_index, dense_search, DenseIndex, INDEX_MAGIC, INDEX_VERSION};
pub use provider::{
    EmbeddingProvider, EndpointEmbedder, EndpointSettings, PrecomputedVectors, ProviderSpec,
};
