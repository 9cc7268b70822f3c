//! On-disk configuration (TOML) shared by the CLI and the HTTP service.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{DEFAULT_MAX_TOKENS, DEFAULT_MIN_TOKENS};
use crate::dense::{EmbeddingProvider, EndpointSettings, ProviderSpec, DEFAULT_DIMENSION};
use crate::error::{Error, Result};
use crate::eval::FuzzyMatchConfig;
use crate::lexical::Stoplist;
use crate::pipeline::PipelineConfig;
use crate::reader::{BaselineSpanScorer, EndpointSpanScorer, SpanScorer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChunkingConfig {
    pub min_tokens: usize,
    pub max_tokens: usize,
}

impl Default for ChunkingConfig {
    fn default() -> Self {
        Self {
            min_tokens: DEFAULT_MIN_TOKENS,
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingConfig {
    /// `baseline`, `endpoint:<url>` or `file:<path>`.
    pub provider: String,
    pub dimension: usize,
    pub endpoint: EndpointSettings,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            provider: "baseline".into(),
            dimension: DEFAULT_DIMENSION,
            endpoint: EndpointSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReaderConfig {
    /// `baseline` or `endpoint:<url>`.
    pub provider: String,
    pub timeout_ms: u64,
    /// Use the baseline scorer when the endpoint fails every passage.
    pub fallback_to_baseline: bool,
}

impl Default for ReaderConfig {
    fn default() -> Self {
        Self {
            provider: "baseline".into(),
            timeout_ms: 30_000,
            fallback_to_baseline: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AppConfig {
    pub corpus: Option<PathBuf>,
    pub index: Option<PathBuf>,
    /// Stoplist file; the shipped list is used when absent.
    pub stoplist: Option<PathBuf>,
    pub chunking: ChunkingConfig,
    pub pipeline: PipelineConfig,
    pub embedding: EmbeddingConfig,
    pub reader: ReaderConfig,
    pub fuzzy: FuzzyMatchConfig,
}

impl AppConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let cfg: Self =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        self.pipeline.validate()?;
        self.fuzzy.validate()?;
        ProviderSpec::parse(&self.embedding.provider)?;
        if self.reader.provider != "baseline" && !self.reader.provider.starts_with("endpoint:") {
            return Err(Error::Config(format!(
                "unknown reader provider `{}`",
                self.reader.provider
            )));
        }
        Ok(())
    }

    pub fn stoplist(&self) -> Result<Stoplist> {
        match &self.stoplist {
            Some(p) => Stoplist::load(p),
            None => Ok(Stoplist::default()),
        }
    }

    pub fn embedding_provider(&self, stoplist: &Stoplist) -> Result<Arc<dyn EmbeddingProvider>> {
        ProviderSpec::parse(&self.embedding.provider)?.build(
            self.embedding.dimension,
            stoplist,
            &self.embedding.endpoint,
        )
    }

    pub fn span_scorer(&self, stoplist: &Stoplist) -> Arc<dyn SpanScorer> {
        match self.reader.provider.strip_prefix("endpoint:") {
            Some(url) => Arc::new(EndpointSpanScorer::new(url, self.reader.timeout_ms)),
            None => Arc::new(BaselineSpanScorer::new(stoplist.clone())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = AppConfig::default();
        let back: AppConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_files_fill_defaults() {
        let cfg: AppConfig =
            toml::from_str("[pipeline]\nk = 30\n[pipeline.bm25]\ndelta = 0.5\n").unwrap();
        assert_eq!(cfg.pipeline.k, 30);
        assert_eq!(cfg.pipeline.n, 100);
        assert_eq!(cfg.pipeline.bm25.delta, 0.5);
        assert_eq!(cfg.pipeline.bm25.k1, 1.5);
    }

    #[test]
    fn rejects_bad_provider() {
        let cfg: AppConfig = toml::from_str("[embedding]\nprovider = \"word2vec\"\n").unwrap();
        assert!(cfg.validate().is_err());
    }
}
