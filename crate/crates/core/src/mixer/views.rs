use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rate::{calibrated_pair_rate, mix_rate, MixConfig, PairOrder};
use crate::compressors::ProxyCompressor;
use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::vocab::{byte_to_symbol, Sentinel, SymbolId, VocabLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewKind {
    Raw,
    Comp,
    PairRawFirst,
    PairCompFirst,
}

impl ViewKind {
    pub fn is_pair(self) -> bool {
        matches!(self, ViewKind::PairRawFirst | ViewKind::PairCompFirst)
    }

    /// (raw sources, compressed sources) contributed by one view.
    pub fn sources(self) -> (u32, u32) {
        match self {
            ViewKind::Raw => (1, 0),
            ViewKind::Comp => (0, 1),
            _ => (1, 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentView {
    /// Position of the document in the input corpus.
    pub ordinal: usize,
    pub doc_id: String,
    pub kind: ViewKind,
    pub step: u64,
    /// Sentinel-framed global symbols.
    pub symbols: Vec<SymbolId>,
}

impl DocumentView {
    /// Symbols excluding sentinels.
    pub fn payload_len(&self) -> usize {
        let frames = if self.kind.is_pair() { 4 } else { 2 };
        self.symbols.len() - frames
    }
}

pub fn raw_frame(doc: &[u8]) -> Vec<SymbolId> {
    let mut out = Vec::with_capacity(doc.len() + 2);
    out.push(Sentinel::RawOpen.id());
    out.extend(doc.iter().map(|&b| byte_to_symbol(b)));
    out.push(Sentinel::RawClose.id());
    out
}

/// Frames local compressor symbols, shifting them into the global range.
pub fn comp_frame(local: &[u32], layout: &VocabLayout) -> Result<Vec<SymbolId>> {
    let mut out = Vec::with_capacity(local.len() + 2);
    out.push(Sentinel::CompOpen.id());
    for &s in local {
        out.push(layout.comp_to_symbol(s)?);
    }
    out.push(Sentinel::CompClose.id());
    Ok(out)
}

/// Compresses every document, in parallel, preserving corpus order.
pub fn compress_corpus(
    docs: &[Document],
    compressor: &dyn ProxyCompressor,
) -> Result<Vec<Vec<u32>>> {
    docs.par_iter()
        .map(|d| compressor.compress(d.bytes()))
        .collect()
}

/// The generator for one document: ChaCha8 seeded from `seed`, on stream
/// `ordinal`. Independent of scheduling, so parallel and serial runs agree.
pub fn doc_rng(seed: u64, ordinal: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(ordinal as u64);
    rng
}

/// Chooses a representation for every document.
///
/// `compressed[i]` holds the local compressor symbols of `docs[i]`. The
/// schedule step of a document is the number of symbols emitted before it
/// divided by `symbols_per_step`.
pub fn assign_views(
    docs: &[Document],
    compressed: &[Vec<u32>],
    layout: &VocabLayout,
    cfg: &MixConfig,
) -> Result<Vec<DocumentView>> {
    cfg.validate()?;
    if docs.len() != compressed.len() {
        return Err(Error::invalid(format!(
            "{} documents but {} compressed outputs",
            docs.len(),
            compressed.len()
        )));
    }
    let mut emitted = 0u64;
    let mut views = Vec::with_capacity(docs.len());
    for (i, (doc, comp)) in docs.iter().zip(compressed).enumerate() {
        let step = emitted / cfg.symbols_per_step;
        let kind = choose_kind(cfg, step, &mut doc_rng(cfg.seed, i));
        let symbols = match kind {
            ViewKind::Raw => raw_frame(doc.bytes()),
            ViewKind::Comp => comp_frame(comp, layout)?,
            ViewKind::PairRawFirst => {
                let mut s = raw_frame(doc.bytes());
                s.extend(comp_frame(comp, layout)?);
                s
            }
            ViewKind::PairCompFirst => {
                let mut s = comp_frame(comp, layout)?;
                s.extend(raw_frame(doc.bytes()));
                s
            }
        };
        emitted += symbols.len() as u64;
        views.push(DocumentView {
            ordinal: i,
            doc_id: doc.id.clone(),
            kind,
            step,
            symbols,
        });
    }
    Ok(views)
}

fn choose_kind(cfg: &MixConfig, step: u64, rng: &mut ChaCha8Rng) -> ViewKind {
    let r = mix_rate(step, cfg);
    let u: f64 = rng.gen();
    let paired = cfg.pairing_active(step) && r > 0.0 && r < 1.0;
    if !paired {
        return if u < r { ViewKind::Comp } else { ViewKind::Raw };
    }
    let rp = calibrated_pair_rate(r).expect("0 < r < 1");
    if u >= rp {
        return if r > 0.5 {
            ViewKind::Comp
        } else {
            ViewKind::Raw
        };
    }
    let raw_first = match cfg.pair_order {
        PairOrder::RawFirst => true,
        PairOrder::CompFirst => false,
        PairOrder::Randomized => rng.gen_bool(0.5),
    };
    if raw_first {
        ViewKind::PairRawFirst
    } else {
        ViewKind::PairCompFirst
    }
}
