use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::embed::{BaselineEmbedder, Embedding};
use crate::corpus::{read_jsonl, PassageChunk};
use crate::error::{Error, Result};
use crate::lexical::Stoplist;

/// Produces fixed-dimension vectors for passages and questions alike.
///
/// Implementations must be deterministic for a given fingerprint: the
/// fingerprint is stored in the index and compared at query time.
pub trait EmbeddingProvider: Send + Sync {
    fn fingerprint(&self) -> String;

    fn dimension(&self) -> usize;

    fn embed_texts(&self, texts: &[&str]) -> Result<Vec<Embedding>>;

    fn embed_chunks(&self, chunks: &[&PassageChunk]) -> Result<Vec<Embedding>> {
        let texts: Vec<&str> = chunks.iter().map(|c| c.text.as_str()).collect();
        self.embed_texts(&texts)
    }

    fn batch_size(&self) -> usize {
        64
    }

    /// Cheap reachability check used by health reporting.
    fn probe(&self) -> Result<()> {
        Ok(())
    }
}

/// Provider selection as written on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProviderSpec {
    Baseline,
    Endpoint(String),
    File(PathBuf),
}

impl ProviderSpec {
    /// `baseline`, `endpoint:<url>` or `file:<path>`.
    pub fn parse(spec: &str) -> Result<Self> {
        if spec == "baseline" {
            Ok(Self::Baseline)
        } else if let Some(url) = spec.strip_prefix("endpoint:") {
            Ok(Self::Endpoint(url.to_string()))
        } else if let Some(path) = spec.strip_prefix("file:") {
            Ok(Self::File(PathBuf::from(path)))
        } else {
            Err(Error::Config(format!(
                "unknown provider `{spec}` (expected baseline, endpoint:<url> or file:<path>)"
            )))
        }
    }

    pub fn build(
        &self,
        dim: usize,
        stoplist: &Stoplist,
        endpoint: &EndpointSettings,
    ) -> Result<Arc<dyn EmbeddingProvider>> {
        Ok(match self {
            Self::Baseline => Arc::new(BaselineEmbedder::new(dim, stoplist.clone())?),
            Self::Endpoint(url) => Arc::new(EndpointEmbedder::connect(url, endpoint.clone())?),
            Self::File(path) => Arc::new(PrecomputedVectors::load(path, None)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EndpointSettings {
    pub timeout_ms: u64,
    pub batch_size: usize,
    /// Expected dimension; discovered with a probe request when absent.
    pub dimension: Option<usize>,
    /// Stable model name for the fingerprint; defaults to the URL.
    pub model: Option<String>,
}

impl Default for EndpointSettings {
    fn default() -> Self {
        Self {
            timeout_ms: 30_000,
            batch_size: 32,
            dimension: None,
            model: None,
        }
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f32>>,
}

/// Remote encoder speaking `POST /embed {"texts": [...]} -> {"vectors": [...]}`.
pub struct EndpointEmbedder {
    url: String,
    agent: ureq::Agent,
    settings: EndpointSettings,
    dim: usize,
}

impl EndpointEmbedder {
    /// `base_url` is the server root; requests go to `<base_url>/embed`.
    pub fn connect(base_url: &str, settings: EndpointSettings) -> Result<Self> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(settings.timeout_ms)))
            .build()
            .into();
        let mut this = Self {
            url: format!("{}/embed", base_url.trim_end_matches('/')),
            agent,
            dim: settings.dimension.unwrap_or(0),
            settings,
        };
        if this.settings.dimension.is_none() {
            let probe = this.request(&["dimension probe"])?;
            this.dim = probe.first().map_or(0, Embedding::dim);
            if this.dim == 0 {
                return Err(Error::provider("endpoint returned an empty vector"));
            }
        }
        Ok(this)
    }

    fn request(&self, texts: &[&str]) -> Result<Vec<Embedding>> {
        let mut resp = self
            .agent
            .post(&self.url)
            .send_json(EmbedRequest { texts })
            .map_err(|e| Error::provider(format!("{}: {e}", self.url)))?;
        let body: EmbedResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| Error::provider(format!("{}: bad response: {e}", self.url)))?;
        if body.vectors.len() != texts.len() {
            return Err(Error::provider(format!(
                "{}: sent {} texts, got {} vectors",
                self.url,
                texts.len(),
                body.vectors.len()
            )));
        }
        Ok(body.vectors.into_iter().map(Embedding).collect())
    }
}

impl EmbeddingProvider for EndpointEmbedder {
    fn fingerprint(&self) -> String {
        let name = self.settings.model.as_deref().unwrap_or(&self.url);
        format!("endpoint:{name}/d{}", self.dim)
    }

    fn dimension(&self) -> usize {
        self.dim
    }

    fn embed_texts(&self, texts: &[&str]) -> Result<Vec<Embedding>> {
        let mut out = Vec::with_capacity(texts.len());
        for batch in texts.chunks(self.settings.batch_size.max(1)) {
            out.extend(self.request(batch)?);
        }
        Ok(out)
    }

    fn batch_size(&self) -> usize {
        self.settings.batch_size.max(1)
    }

    fn probe(&self) -> Result<()> {
        self.request(&["ping"]).map(drop)
    }
}

#[derive(Deserialize)]
struct VectorRecord {
    chunk_id: String,
    vector: Vec<f32>,
}

/// Passage vectors computed offline, one `{"chunk_id", "vector"}` per line.
/// Can build an index but cannot embed free text.
pub struct PrecomputedVectors {
    vectors: HashMap<String, Embedding>,
    dim: usize,
    fingerprint: String,
}

impl PrecomputedVectors {
    pub fn load(path: impl AsRef<Path>, fingerprint: Option<String>) -> Result<Self> {
        let path = path.as_ref();
        let records: Vec<VectorRecord> = read_jsonl(path)?;
        let dim = records.first().map_or(0, |r| r.vector.len());
        let mut vectors = HashMap::with_capacity(records.len());
        for (i, r) in records.into_iter().enumerate() {
            if r.vector.len() != dim || r.vector.iter().any(|v| !v.is_finite()) {
                return Err(Error::Record {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: format!(
                        "vector for `{}` has wrong dimension or non-finite values",
                        r.chunk_id
                    ),
                });
            }
            vectors.insert(r.chunk_id, Embedding(r.vector));
        }
        let fingerprint = fingerprint.unwrap_or_else(|| {
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("vectors");
            format!("precomputed:{stem}/d{dim}")
        });
        Ok(Self {
            vectors,
            dim,
            fingerprint,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl EmbeddingProvider for PrecomputedVectors {
    fn fingerprint(&self) -> String {
        self.fingerprint.clone()
    }

    fn dimension(&self) -> usize {
        self.dim
    }

    fn embed_texts(&self, _texts: &[&str]) -> Result<Vec<Embedding>> {
        Err(Error::Unsupported(
            "precomputed vectors cannot embed free text; pair the index with an endpoint provider"
                .into(),
        ))
    }

    fn embed_chunks(&self, chunks: &[&PassageChunk]) -> Result<Vec<Embedding>> {
        chunks
            .iter()
            .map(|c| {
                self.vectors
                    .get(&c.chunk_id)
                    .cloned()
                    .ok_or_else(|| Error::Provider {
                        chunk_id: Some(c.chunk_id.clone()),
                        message: "no precomputed vector".into(),
                    })
            })
            .collect()
    }
}
