//! Neural proxy compressor: segment, arithmetic-code each segment under a
//! byte model with equal-information windows, pack the bits into symbols.
//!
//! Segment byte lengths are not recoverable from the packed symbols, so the
//! output alone cannot be decoded. [`NeuralCompressor::decompress_with_metadata`]
//! accepts the per-segment records emitted alongside the symbols.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::cache::{CacheKey, SegmentCache};
use super::{CompressedUnit, ProxyCompressor};
use crate::bytelm::{ByteModel, NextByteModel, UniformModel};
use crate::coder::{
    ac_decode, ac_encode, pack_bits, unpack_bits, PackedBits, PackingConfig, WindowConfig,
    WindowedCode,
};
use crate::error::{Error, Result};
use crate::segmenter::{segment, SegmentStrategy};

/// Stable identity of a model, used to key the segment cache.
pub trait Fingerprint {
    fn fingerprint(&self) -> [u8; 32];
}

impl Fingerprint for ByteModel {
    fn fingerprint(&self) -> [u8; 32] {
        Sha256::digest(self.to_bytes()).into()
    }
}

impl Fingerprint for UniformModel {
    fn fingerprint(&self) -> [u8; 32] {
        Sha256::digest(b"uniform-byte-model").into()
    }
}

impl<M: Fingerprint + ?Sized> Fingerprint for Arc<M> {
    fn fingerprint(&self) -> [u8; 32] {
        (**self).fingerprint()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuralConfig {
    pub strategy: SegmentStrategy,
    pub window: WindowConfig,
    pub packing: PackingConfig,
}

impl NeuralConfig {
    /// Entropy segmentation with the given thresholds, 16-bit windows and
    /// 16-bit symbols.
    pub fn with_strategy(strategy: SegmentStrategy) -> Self {
        Self {
            strategy,
            window: WindowConfig::default(),
            packing: PackingConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentMeta {
    pub byte_len: usize,
    pub total_bits: usize,
    pub symbol_count: usize,
}

pub struct NeuralCompressor<M = ByteModel> {
    model: Arc<M>,
    config: NeuralConfig,
    key_prefix: [u8; 32],
    cache: Arc<SegmentCache>,
}

impl<M: NextByteModel + Fingerprint> NeuralCompressor<M> {
    pub fn new(model: Arc<M>, config: NeuralConfig, cache: Arc<SegmentCache>) -> Self {
        let mut h = Sha256::new();
        h.update(model.fingerprint());
        h.update(serde_json::to_vec(&(config.window, config.packing)).expect("config serializes"));
        Self {
            key_prefix: h.finalize().into(),
            model,
            config,
            cache,
        }
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn config(&self) -> &NeuralConfig {
        &self.config
    }

    pub fn cache(&self) -> &SegmentCache {
        &self.cache
    }

    fn cache_key(&self, bytes: &[u8]) -> CacheKey {
        let mut h = Sha256::new();
        h.update(self.key_prefix);
        h.update(bytes);
        h.finalize().into()
    }

    /// Codes one segment independently of its neighbours.
    pub fn compress_segment(&self, bytes: &[u8]) -> Result<Arc<PackedBits>> {
        let key = self.cache_key(bytes);
        if let Some(hit) = self.cache.get(&key) {
            return Ok(hit);
        }
        let code = ac_encode(bytes, &*self.model, self.config.window)?;
        let packed = pack_bits(&code.bits(), self.config.packing);
        self.cache.insert(key, packed)
    }

    fn segments(&self, doc: &[u8]) -> Result<Vec<(std::ops::Range<usize>, Arc<PackedBits>)>> {
        if doc.is_empty() {
            return Ok(Vec::new());
        }
        segment(doc, &*self.model, &self.config.strategy)?
            .into_iter()
            .map(|s| Ok((s.range(), self.compress_segment(s.bytes)?)))
            .collect()
    }

    pub fn compress_with_metadata(&self, doc: &[u8]) -> Result<(Vec<u32>, Vec<SegmentMeta>)> {
        let mut symbols = Vec::new();
        let mut meta = Vec::new();
        for (range, packed) in self.segments(doc)? {
            symbols.extend_from_slice(&packed.symbols);
            meta.push(SegmentMeta {
                byte_len: range.len(),
                total_bits: packed.total_bits,
                symbol_count: packed.symbols.len(),
            });
        }
        Ok((symbols, meta))
    }

    pub fn decompress_with_metadata(
        &self,
        symbols: &[u32],
        meta: &[SegmentMeta],
    ) -> Result<Vec<u8>> {
        let claimed: usize = meta.iter().map(|m| m.symbol_count).sum();
        if claimed != symbols.len() {
            return Err(Error::Metadata(format!(
                "metadata covers {claimed} symbols, got {}",
                symbols.len()
            )));
        }
        let mut out = Vec::new();
        let mut pos = 0;
        for (i, m) in meta.iter().enumerate() {
            if m.byte_len == 0 {
                return Err(Error::Metadata(format!("segment {i} has zero length")));
            }
            let chunk = &symbols[pos..pos + m.symbol_count];
            pos += m.symbol_count;
            let bits = unpack_bits(chunk, m.total_bits, self.config.packing)
                .map_err(|e| Error::Metadata(format!("segment {i}: {e}")))?;
            let code = WindowedCode::from_bits(bits, self.config.window);
            out.extend(ac_decode(&code, &*self.model, m.byte_len)?);
        }
        Ok(out)
    }
}

impl<M: NextByteModel + Fingerprint> ProxyCompressor for NeuralCompressor<M> {
    fn name(&self) -> &str {
        "neural"
    }

    fn comp_vocab_size(&self) -> u32 {
        self.config.packing.vocab_size()
    }

    fn invertible(&self) -> bool {
        false
    }

    fn compress(&self, doc: &[u8]) -> Result<Vec<u32>> {
        Ok(self.compress_with_metadata(doc)?.0)
    }

    fn compress_units(&self, doc: &[u8]) -> Result<Vec<CompressedUnit>> {
        Ok(self
            .segments(doc)?
            .into_iter()
            .map(|(source, packed)| CompressedUnit {
                source,
                symbols: packed.symbols.clone(),
            })
            .collect())
    }
}
