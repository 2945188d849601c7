//! Binary model file.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "SIDM" | u32 version | u64 len | metadata JSON | u64 len | manifest JSON
//!        | u64 len | payload (f32 LE, tensors back to back)
//! ```
//!
//! The manifest lists every tensor's name, shape and byte offset into the
//! payload.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Model, ModelConfig, ModelParams};
use crate::trainer::TrainConfig;

pub const MAGIC: &[u8; 4] = b"SIDM";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub model: ModelConfig,
    pub vocabulary: Vec<String>,
    pub vocab_max_size: usize,
    pub stopwords_sha256: String,
    pub seed: u64,
    pub history_digest: Option<String>,
    pub best_val_loss: Option<f64>,
    pub train: Option<TrainConfig>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelContainer {
    pub metadata: Metadata,
    pub model: Model<f32>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Container(msg.into())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| bad(format!("truncated while reading {what}")))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn block(&mut self, what: &str) -> Result<&'a [u8]> {
        let len = u64::from_le_bytes(self.take(8, what)?.try_into().unwrap());
        let len = usize::try_from(len).map_err(|_| bad(format!("{what} length overflows")))?;
        self.take(len, what)
    }
}

fn push_block(out: &mut Vec<u8>, block: &[u8]) {
    out.extend_from_slice(&(block.len() as u64).to_le_bytes());
    out.extend_from_slice(block);
}

impl ModelContainer {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut manifest = Vec::new();
        let mut payload = Vec::new();
        for (name, tensor) in self.model.params.named() {
            manifest.push(ManifestEntry {
                name,
                shape: tensor.shape().to_vec(),
                offset: payload.len() as u64,
            });
            for v in tensor.data() {
                payload.extend_from_slice(&v.to_le_bytes());
            }
        }
        let mut out = Vec::with_capacity(payload.len() + 4096);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        push_block(&mut out, &serde_json::to_vec(&self.metadata).expect("metadata serialises"));
        push_block(&mut out, &serde_json::to_vec(&manifest).expect("manifest serialises"));
        push_block(&mut out, &payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4, "magic")? != MAGIC {
            return Err(bad("not a model file (bad magic bytes)"));
        }
        let version = r.u32("version")?;
        if version != VERSION {
            return Err(Error::ContainerVersion {
                found: version,
                expected: VERSION,
            });
        }
        let metadata: Metadata =
            serde_json::from_slice(r.block("metadata")?).map_err(|e| bad(format!("metadata: {e}")))?;
        let manifest: Vec<ManifestEntry> =
            serde_json::from_slice(r.block("manifest")?).map_err(|e| bad(format!("manifest: {e}")))?;
        let payload = r.block("payload")?;
        if r.pos != bytes.len() {
            return Err(bad("trailing bytes after payload"));
        }
        metadata.model.validate()?;

        let mut params = ModelParams::<f32>::zeros(&metadata.model);
        let names = ModelParams::<f32>::names();
        if manifest.len() != names.len() {
            return Err(bad(format!(
                "manifest lists {} tensors, expected {}",
                manifest.len(),
                names.len()
            )));
        }
        let mut expected_offset = 0u64;
        for ((entry, name), tensor) in manifest.iter().zip(&names).zip(params.tensors_mut()) {
            if &entry.name != name {
                return Err(bad(format!("manifest entry '{}' where '{name}' was expected", entry.name)));
            }
            if entry.shape != tensor.shape() {
                return Err(bad(format!(
                    "tensor '{name}' has shape {:?}, config implies {:?}",
                    entry.shape,
                    tensor.shape()
                )));
            }
            if entry.offset != expected_offset {
                return Err(bad(format!("tensor '{name}' offset {} overlaps or leaves a gap", entry.offset)));
            }
            let start = entry.offset as usize;
            let end = start + 4 * tensor.len();
            if end > payload.len() {
                return Err(bad(format!("tensor '{name}' runs past the payload")));
            }
            for (dst, chunk) in tensor.data_mut().iter_mut().zip(payload[start..end].chunks_exact(4)) {
                *dst = f32::from_le_bytes(chunk.try_into().unwrap());
            }
            expected_offset = end as u64;
        }
        if expected_offset != payload.len() as u64 {
            return Err(bad("payload is longer than the manifest describes"));
        }
        let model = Model::from_params(metadata.model, params)?;
        Ok(ModelContainer { metadata, model })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

/// Reads the tensor manifest of an encoded container without decoding the
/// payload.
pub fn read_manifest(bytes: &[u8]) -> Result<Vec<ManifestEntry>> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(bad("not a model file (bad magic bytes)"));
    }
    r.u32("version")?;
    r.block("metadata")?;
    serde_json::from_slice(r.block("manifest")?).map_err(|e| bad(format!("manifest: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Tensor;
    use crate::textprep::DEFAULT_STOPWORDS_SHA256;

    fn sample() -> ModelContainer {
        let config = ModelConfig {
            vocab_size: 6,
            max_len: 8,
            embed_dim: 3,
            conv_filters: 2,
            kernel_size: 3,
            pool_size: 2,
            gru_units: 2,
            attention_width: 2,
            dropout: 0.5,
        };
        ModelContainer {
            metadata: Metadata {
                model: config,
                vocabulary: ["a", "b", "c", "d"].map(String::from).to_vec(),
                vocab_max_size: 6,
                stopwords_sha256: DEFAULT_STOPWORDS_SHA256.to_string(),
                seed: 9,
                history_digest: Some("ab".repeat(32)),
                best_val_loss: Some(0.123_456_789_012_345_6),
                train: Some(TrainConfig::default()),
            },
            model: Model::new(config, 9).unwrap(),
        }
    }

    #[test]
    fn round_trip_is_bitwise() {
        let c = sample();
        let bytes = c.to_bytes();
        let back = ModelContainer::from_bytes(&bytes).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_bytes(), bytes);
        for (a, b) in c.model.params.tensors().iter().zip(back.model.params.tensors()) {
            let bits = |t: &Tensor<f32>| t.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(a), bits(b));
        }
    }

    #[test]
    fn manifest_offsets_tile_the_payload() {
        let c = sample();
        let entries = read_manifest(&c.to_bytes()).unwrap();
        let mut end = 0;
        for e in &entries {
            assert_eq!(e.offset, end);
            end += 4 * e.shape.iter().product::<usize>() as u64;
        }
        assert_eq!(end as usize, 4 * c.model.param_count());
    }

    #[test]
    fn version_and_corruption_are_reported() {
        let bytes = sample().to_bytes();

        let mut wrong_version = bytes.clone();
        wrong_version[4..8].copy_from_slice(&7u32.to_le_bytes());
        assert!(matches!(
            ModelContainer::from_bytes(&wrong_version),
            Err(Error::ContainerVersion { found: 7, expected: 1 })
        ));

        let mut wrong_magic = bytes.clone();
        wrong_magic[0] = b'X';
        assert!(ModelContainer::from_bytes(&wrong_magic).is_err());

        assert!(ModelContainer::from_bytes(&bytes[..bytes.len() - 1]).is_err());

        let text = String::from_utf8_lossy(&bytes).into_owned();
        let at = text.find("\"offset\":0").unwrap();
        let mut shifted = bytes.clone();
        shifted[at + 9] = b'4';
        assert!(matches!(ModelContainer::from_bytes(&shifted), Err(Error::Container(_))));

        let at = text.find("conv.w").unwrap();
        let mut renamed = bytes.clone();
        renamed[at] = b'k';
        assert!(matches!(ModelContainer::from_bytes(&renamed), Err(Error::Container(_))));
    }

    #[test]
    fn save_and_load_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.sidm");
        let c = sample();
        c.save(&path).unwrap();
        assert_eq!(ModelContainer::load(&path).unwrap(), c);
        assert!(ModelContainer::load(&dir.path().join("missing")).is_err());
    }
}
