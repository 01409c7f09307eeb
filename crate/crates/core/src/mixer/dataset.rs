//! End-to-end dataset construction: compress, assign views, pack, write
//! shards plus a boundary sidecar and a manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::pack::{Boundary, ContextPacker, PackedContext};
use super::rate::{effective_multiplier, mix_rate, step_multiplier, MixConfig};
use super::shard::{encode_shard, ShardHeader};
use super::views::{assign_views, compress_corpus, DocumentView, ViewKind};
use crate::compressors::ProxyCompressor;
use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::vocab::{LayoutManifest, VocabLayout};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const BOUNDARIES_FILE: &str = "boundaries.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub mix: MixConfig,
    pub context_len: usize,
    pub contexts_per_shard: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            mix: MixConfig::default(),
            context_len: 2048,
            contexts_per_shard: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressorInfo {
    pub name: String,
    pub comp_vocab_size: u32,
    pub invertible: bool,
    /// Caller-supplied description (asset hashes, thresholds, encodings).
    pub params: serde_json::Value,
}

/// Sample-throughput accounting. Lengths exclude sentinels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accounting {
    pub docs: usize,
    pub source_bytes: u64,
    pub comp_symbols: u64,
    pub mean_raw_len: f64,
    pub mean_comp_len: f64,
    /// Mean raw length over mean compressed length, over the whole corpus.
    pub measured_c: f64,
    pub payload_symbols: u64,
    /// Source bytes per payload symbol actually emitted.
    pub measured_multiplier: f64,
    /// The same quantity predicted from each document's rate and pairing.
    pub expected_multiplier: f64,
    pub effective_multiplier_at_r_final: f64,
    pub raw_sources: u64,
    pub comp_sources: u64,
    /// Compressed share of all (raw + compressed) document sources.
    pub comp_fraction: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewCounts {
    pub raw: usize,
    pub comp: usize,
    pub pair_raw_first: usize,
    pub pair_comp_first: usize,
}

impl ViewCounts {
    fn add(&mut self, kind: ViewKind) {
        match kind {
            ViewKind::Raw => self.raw += 1,
            ViewKind::Comp => self.comp += 1,
            ViewKind::PairRawFirst => self.pair_raw_first += 1,
            ViewKind::PairCompFirst => self.pair_comp_first += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.raw + self.comp + self.pair_raw_first + self.pair_comp_first
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardEntry {
    pub file: String,
    pub contexts: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub compressor: CompressorInfo,
    pub layout: LayoutManifest,
    pub layout_fingerprint: u64,
    pub config: DatasetConfig,
    pub accounting: Accounting,
    pub views: ViewCounts,
    pub contexts: usize,
    pub fill: u64,
    pub padding: u64,
    pub shards: Vec<ShardEntry>,
    pub boundaries_file: String,
}

impl DatasetManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        Ok(serde_json::from_slice(
            &fs::read(&path).map_err(Error::io_at(&path))?,
        )?)
    }
}

pub fn account(
    docs: &[Document],
    compressed: &[Vec<u32>],
    views: &[DocumentView],
    cfg: &MixConfig,
) -> Accounting {
    let n = docs.len();
    let source_bytes: u64 = docs.iter().map(|d| d.text.len() as u64).sum();
    let comp_symbols: u64 = compressed.iter().map(|c| c.len() as u64).sum();
    let payload_symbols: u64 = views.iter().map(|v| v.payload_len() as u64).sum();
    let measured_c = source_bytes as f64 / comp_symbols as f64;
    let (raw_sources, comp_sources) = views.iter().fold((0u64, 0u64), |(r, c), v| {
        let (dr, dc) = v.kind.sources();
        (r + dr as u64, c + dc as u64)
    });
    let inverse_sum: f64 = views
        .iter()
        .map(|v| {
            1.0 / step_multiplier(
                mix_rate(v.step, cfg),
                cfg.pairing_active(v.step),
                measured_c,
            )
        })
        .sum();
    Accounting {
        docs: n,
        source_bytes,
        comp_symbols,
        mean_raw_len: source_bytes as f64 / n as f64,
        mean_comp_len: comp_symbols as f64 / n as f64,
        measured_c,
        payload_symbols,
        measured_multiplier: source_bytes as f64 / payload_symbols as f64,
        expected_multiplier: n as f64 / inverse_sum,
        effective_multiplier_at_r_final: effective_multiplier(cfg.r_final, measured_c),
        raw_sources,
        comp_sources,
        comp_fraction: comp_sources as f64 / (raw_sources + comp_sources) as f64,
    }
}

/// Everything [`build_dataset`] writes, computed in memory.
#[derive(Debug)]
pub struct DatasetPlan {
    pub layout: VocabLayout,
    pub views: Vec<DocumentView>,
    pub accounting: Accounting,
}

pub fn plan_dataset(
    docs: &[Document],
    compressor: &dyn ProxyCompressor,
    cfg: &DatasetConfig,
) -> Result<DatasetPlan> {
    if docs.is_empty() {
        return Err(Error::EmptyInput("dataset corpus"));
    }
    if cfg.contexts_per_shard == 0 {
        return Err(Error::invalid("contexts_per_shard must be positive"));
    }
    let layout = VocabLayout::for_comp_vocab(compressor.comp_vocab_size());
    let compressed = compress_corpus(docs, compressor)?;
    let views = assign_views(docs, &compressed, &layout, &cfg.mix)?;
    let accounting = account(docs, &compressed, &views, &cfg.mix);
    Ok(DatasetPlan {
        layout,
        views,
        accounting,
    })
}

#[derive(Serialize)]
struct BoundaryLine<'a> {
    context: usize,
    #[serde(flatten)]
    boundary: &'a Boundary,
}

/// Builds the dataset and writes it to `out_dir`, replacing earlier output
/// of the same names. Shards are `shard-00000.bin`, ...
pub fn build_dataset(
    docs: &[Document],
    compressor: &dyn ProxyCompressor,
    cfg: &DatasetConfig,
    params: serde_json::Value,
    out_dir: &Path,
) -> Result<DatasetManifest> {
    let plan = plan_dataset(docs, compressor, cfg)?;
    fs::create_dir_all(out_dir)?;
    let header = ShardHeader::new(cfg.context_len, plan.layout.fingerprint());

    let mut boundaries = BufWriter::new(File::create(out_dir.join(BOUNDARIES_FILE))?);
    let mut shards = Vec::new();
    let mut pending: Vec<PackedContext> = Vec::new();
    let mut views = ViewCounts::default();
    let (mut contexts, mut fill) = (0usize, 0u64);

    let flush = |pending: &mut Vec<PackedContext>, shards: &mut Vec<ShardEntry>| -> Result<()> {
        let file = format!("shard-{:05}.bin", shards.len());
        let bytes = encode_shard(header, pending);
        fs::write(out_dir.join(&file), &bytes)?;
        shards.push(ShardEntry {
            file,
            contexts: pending.len(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        pending.clear();
        Ok(())
    };

    let mut packer = ContextPacker::new(cfg.context_len)?;
    let mut emit = |ctx: PackedContext,
                    pending: &mut Vec<PackedContext>,
                    shards: &mut Vec<ShardEntry>|
     -> Result<()> {
        for b in &ctx.boundaries {
            serde_json::to_writer(
                &mut boundaries,
                &BoundaryLine {
                    context: contexts,
                    boundary: b,
                },
            )?;
            boundaries.write_all(b"\n")?;
        }
        contexts += 1;
        fill += ctx.fill as u64;
        pending.push(ctx);
        if pending.len() == cfg.contexts_per_shard {
            flush(pending, shards)?;
        }
        Ok(())
    };
    for v in &plan.views {
        views.add(v.kind);
        for ctx in packer.push(v) {
            emit(ctx, &mut pending, &mut shards)?;
        }
    }
    if let Some(ctx) = packer.finish() {
        emit(ctx, &mut pending, &mut shards)?;
    }
    if !pending.is_empty() {
        flush(&mut pending, &mut shards)?;
    }
    boundaries.flush()?;

    let manifest = DatasetManifest {
        format_version: 1,
        compressor: CompressorInfo {
            name: compressor.name().to_string(),
            comp_vocab_size: compressor.comp_vocab_size(),
            invertible: compressor.invertible(),
            params,
        },
        layout: plan.layout.manifest(),
        layout_fingerprint: plan.layout.fingerprint(),
        config: *cfg,
        accounting: plan.accounting,
        views,
        contexts,
        fill,
        padding: (contexts * cfg.context_len) as u64 - fill,
        shards,
        boundaries_file: BOUNDARIES_FILE.to_string(),
    };
    fs::write(
        out_dir.join(MANIFEST_FILE),
        serde_json::to_vec_pretty(&manifest)?,
    )?;
    Ok(manifest)
}
