use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mixer::{effective_multiplier, parse_shard, DatasetManifest, HEADER_LEN};
use crate::vocab::{Sentinel, SymbolClass};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub compressor: String,
    pub docs: usize,
    pub contexts: usize,
    pub source_bytes: u64,
    pub raw_symbols: u64,
    pub comp_symbols: u64,
    pub sentinel_symbols: u64,
    pub padding_symbols: u64,
    /// Source bytes per compressed symbol over the whole corpus.
    pub compressor_cr: f64,
    /// Source bytes per payload symbol in the shards.
    pub dataset_cr: f64,
    pub r_final: f64,
    pub expected_multiplier: f64,
    pub effective_multiplier_at_r_final: f64,
    /// `dataset_cr / expected_multiplier - 1`.
    pub relative_deviation: f64,
}

/// Re-reads every shard listed in the manifest in `dir`, checks headers,
/// checksums and symbol ranges, and recounts symbols by class.
pub fn compression_report(dir: &Path) -> Result<CompressionReport> {
    let m = DatasetManifest::load(dir)?;
    let layout = m.layout.to_layout()?;
    let (mut raw, mut comp, mut sentinel, mut padding) = (0u64, 0u64, 0u64, 0u64);
    let mut contexts = 0;
    for entry in &m.shards {
        let path = dir.join(&entry.file);
        let corrupt = |offset: usize, reason: String| Error::CorruptShard {
            path: path.clone(),
            offset: offset as u64,
            reason,
        };
        let bytes = fs::read(&path).map_err(Error::io_at(&path))?;
        let shard = parse_shard(&path, &bytes)?;
        if shard.header.context_len as usize != m.config.context_len {
            return Err(corrupt(
                8,
                format!("context length {} != manifest", shard.header.context_len),
            ));
        }
        if shard.header.layout_fingerprint != m.layout_fingerprint {
            return Err(corrupt(
                12,
                "layout fingerprint differs from manifest".into(),
            ));
        }
        if shard.contexts.len() != entry.contexts {
            return Err(corrupt(
                bytes.len(),
                format!(
                    "{} contexts, manifest lists {}",
                    shard.contexts.len(),
                    entry.contexts
                ),
            ));
        }
        for (i, &id) in shard.contexts.iter().flatten().enumerate() {
            match layout.classify(id) {
                Ok(SymbolClass::Byte(_)) => raw += 1,
                Ok(SymbolClass::Compressed(_)) => comp += 1,
                Ok(SymbolClass::Sentinel(Some(Sentinel::DocSep))) => padding += 1,
                Ok(SymbolClass::Sentinel(Some(_))) => sentinel += 1,
                Ok(SymbolClass::Sentinel(None)) | Err(_) => {
                    return Err(corrupt(
                        HEADER_LEN + 4 * i,
                        format!("invalid symbol id {id}"),
                    ));
                }
            }
        }
        if hex::encode(Sha256::digest(&bytes)) != entry.sha256 {
            return Err(corrupt(0, "checksum differs from manifest".into()));
        }
        contexts += shard.contexts.len();
    }
    let a = &m.accounting;
    if raw + comp != a.payload_symbols {
        return Err(Error::Metadata(format!(
            "shards hold {} payload symbols, manifest says {}",
            raw + comp,
            a.payload_symbols
        )));
    }
    let dataset_cr = a.source_bytes as f64 / (raw + comp) as f64;
    Ok(CompressionReport {
        compressor: m.compressor.name.clone(),
        docs: a.docs,
        contexts,
        source_bytes: a.source_bytes,
        raw_symbols: raw,
        comp_symbols: comp,
        sentinel_symbols: sentinel,
        padding_symbols: padding,
        compressor_cr: a.measured_c,
        dataset_cr,
        r_final: m.config.mix.r_final,
        expected_multiplier: a.expected_multiplier,
        effective_multiplier_at_r_final: effective_multiplier(m.config.mix.r_final, a.measured_c),
        relative_deviation: dataset_cr / a.expected_multiplier - 1.0,
    })
}
