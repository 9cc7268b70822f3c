use std::cmp::Ordering;
use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use super::embed::{dot, Embedding};
use super::provider::EmbeddingProvider;
use crate::corpus::{ChunkStore, PassageChunk};
use crate::error::{Error, Result};
use crate::ranking::{RankedEntry, RankedList, ScoreSource};

pub const INDEX_MAGIC: &[u8; 8] = b"ODQAIDX\0";
pub const INDEX_VERSION: u32 = 1;

/// Row-major matrix of passage embeddings keyed by chunk id.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseIndex {
    dim: usize,
    fingerprint: String,
    ids: Vec<String>,
    matrix: Vec<f32>,
}

impl DenseIndex {
    pub fn new(dim: usize, fingerprint: String, rows: Vec<(String, Embedding)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(rows.len());
        let mut ids = Vec::with_capacity(rows.len());
        let mut matrix = Vec::with_capacity(rows.len() * dim);
        for (id, e) in rows {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: e.dim(),
                });
            }
            if !seen.insert(id.clone()) {
                return Err(Error::IndexFormat(format!("duplicate chunk id `{id}`")));
            }
            ids.push(id);
            matrix.extend_from_slice(e.as_slice());
        }
        Ok(Self {
            dim,
            fingerprint,
            ids,
            matrix,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.matrix[i * self.dim..(i + 1) * self.dim]
    }

    pub fn check_provider(&self, provider: &dyn EmbeddingProvider) -> Result<()> {
        let fp = provider.fingerprint();
        if fp != self.fingerprint {
            return Err(Error::FingerprintMismatch {
                index: self.fingerprint.clone(),
                provider: fp,
            });
        }
        Ok(())
    }

    /// Exact top-`n` by inner product; ties go to the smaller chunk id.
    pub fn search_embedding(&self, query: &Embedding, n: usize) -> Result<RankedList> {
        if query.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: query.dim(),
            });
        }
        let mut scored: Vec<(f64, usize)> = (0..self.ids.len())
            .map(|i| (dot(self.row(i), query.as_slice()), i))
            .collect();
        let order = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
            b.0.total_cmp(&a.0)
                .then_with(|| self.ids[a.1].cmp(&self.ids[b.1]))
        };
        let n = n.min(scored.len());
        if n == 0 {
            return Ok(RankedList::default());
        }
        if n < scored.len() {
            scored.select_nth_unstable_by(n - 1, order);
            scored.truncate(n);
        }
        scored.sort_unstable_by(order);
        Ok(scored
            .into_iter()
            .map(|(score, i)| RankedEntry {
                chunk_id: self.ids[i].clone(),
                score,
                source: ScoreSource::Dense,
            })
            .collect())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(INDEX_MAGIC)?;
        w.write_all(&INDEX_VERSION.to_le_bytes())?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        write_str(&mut w, &self.fingerprint)?;
        w.write_all(&(self.ids.len() as u64).to_le_bytes())?;
        for id in &self.ids {
            write_str(&mut w, id)?;
        }
        for v in &self.matrix {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        read_exact(&mut r, &mut magic)?;
        if &magic != INDEX_MAGIC {
            return Err(Error::IndexFormat("bad magic bytes".into()));
        }
        let version = read_u32(&mut r)?;
        if version != INDEX_VERSION {
            return Err(Error::IndexFormat(format!("unsupported version {version}")));
        }
        let dim = read_u32(&mut r)? as usize;
        let fingerprint = read_str(&mut r)?;
        let count = read_u64(&mut r)? as usize;
        let mut ids = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            ids.push(read_str(&mut r)?);
        }
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != count * dim * 4 {
            return Err(Error::IndexFormat(format!(
                "expected {} matrix bytes, found {}",
                count * dim * 4,
                bytes.len()
            )));
        }
        let matrix: Vec<f32> = bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        if ids.iter().collect::<HashSet<_>>().len() != ids.len() {
            return Err(Error::IndexFormat("duplicate chunk ids".into()));
        }
        Ok(Self {
            dim,
            fingerprint,
            ids,
            matrix,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

fn write_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::IndexFormat("truncated file".into()),
        _ => Error::Io(e),
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_str<R: Read>(r: &mut R) -> Result<String> {
    let len = read_u32(r)? as usize;
    let mut b = vec![0u8; len];
    read_exact(r, &mut b)?;
    String::from_utf8(b).map_err(|_| Error::IndexFormat("non-UTF-8 string".into()))
}

/// Embed every chunk with `provider`. Batches run in parallel and are
/// reassembled in corpus order; any failure aborts with the chunk id.
pub fn build_index(chunks: &ChunkStore, provider: &dyn EmbeddingProvider) -> Result<DenseIndex> {
    let dim = provider.dimension();
    let refs: Vec<&PassageChunk> = chunks.iter().collect();
    let batches: Vec<Vec<Embedding>> = refs
        .par_chunks(provider.batch_size().max(1))
        .map(|batch| embed_batch(provider, batch, dim))
        .collect::<Result<_>>()?;
    let rows = refs
        .iter()
        .map(|c| c.chunk_id.clone())
        .zip(batches.into_iter().flatten())
        .collect();
    DenseIndex::new(dim, provider.fingerprint(), rows)
}

fn embed_batch(
    provider: &dyn EmbeddingProvider,
    batch: &[&PassageChunk],
    dim: usize,
) -> Result<Vec<Embedding>> {
    let vectors = match provider.embed_chunks(batch) {
        Ok(v) if v.len() == batch.len() => v,
        Ok(v) => {
            return Err(Error::Provider {
                chunk_id: Some(batch[0].chunk_id.clone()),
                message: format!("batch of {} returned {} vectors", batch.len(), v.len()),
            })
        }
        Err(batch_err) => {
            // Retry one by one to name the chunk that fails.
            for c in batch {
                if let Err(e) = provider.embed_chunks(std::slice::from_ref(c)) {
                    return Err(Error::Provider {
                        chunk_id: Some(c.chunk_id.clone()),
                        message: e.to_string(),
                    });
                }
            }
            return Err(Error::Provider {
                chunk_id: Some(batch[0].chunk_id.clone()),
                message: batch_err.to_string(),
            });
        }
    };
    for (c, v) in batch.iter().zip(&vectors) {
        if v.dim() != dim || !v.is_finite() {
            return Err(Error::Provider {
                chunk_id: Some(c.chunk_id.clone()),
                message: format!("bad vector (dimension {}, expected {dim})", v.dim()),
            });
        }
    }
    Ok(vectors)
}

/// Embed `query` with the index's own provider and return the exact top-`n`.
pub fn dense_search(
    query: &str,
    index: &DenseIndex,
    provider: &dyn EmbeddingProvider,
    n: usize,
) -> Result<RankedList> {
    index.check_provider(provider)?;
    let q = provider
        .embed_texts(&[query])?
        .pop()
        .ok_or_else(|| Error::provider("no vector for query"))?;
    index.search_embedding(&q, n)
}
