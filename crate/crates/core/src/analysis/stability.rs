use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::levenshtein::normalized_levenshtein_capped;
use crate::compressors::ProxyCompressor;
use crate::error::{Error, Result};
use crate::mixer::doc_rng;
use crate::segmenter::nearest_rank;

pub const DEFAULT_LENGTH_CAP: usize = 4096;

/// Deletes `floor(frac * n)` characters chosen uniformly without
/// replacement. Input that is not valid UTF-8 is handled byte-wise.
pub fn perturb_delete<R: Rng + ?Sized>(doc: &[u8], frac: f64, rng: &mut R) -> Result<Vec<u8>> {
    if !(0.0..=1.0).contains(&frac) {
        return Err(Error::invalid(format!(
            "deletion fraction {frac} outside [0, 1]"
        )));
    }
    match std::str::from_utf8(doc) {
        Ok(text) => {
            let chars: Vec<char> = text.chars().collect();
            let keep = survivors(chars.len(), frac, rng);
            let out: String = chars
                .iter()
                .zip(keep)
                .filter(|(_, k)| *k)
                .map(|(c, _)| c)
                .collect();
            Ok(out.into_bytes())
        }
        Err(_) => {
            log::warn!("perturbing invalid UTF-8 at byte granularity");
            let keep = survivors(doc.len(), frac, rng);
            Ok(doc
                .iter()
                .zip(keep)
                .filter(|(_, k)| *k)
                .map(|(b, _)| *b)
                .collect())
        }
    }
}

fn survivors<R: Rng + ?Sized>(n: usize, frac: f64, rng: &mut R) -> Vec<bool> {
    let k = (frac * n as f64).floor() as usize;
    let mut keep = vec![true; n];
    for i in index::sample(rng, n, k.min(n)) {
        keep[i] = false;
    }
    keep
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub compressor: String,
    pub frac: f64,
    pub seed: u64,
    pub samples: usize,
    /// How distances are normalized.
    pub normalization: String,
    pub length_cap: usize,
    pub truncated: usize,
    pub mean: f64,
    pub median: f64,
    pub p95: f64,
    pub distances: Vec<f64>,
}

/// Per document: distance between the compressed original and the
/// compressed perturbed copy. Document `i` draws its deletions from
/// stream `i` of `seed`.
pub fn stability_study<D: AsRef<[u8]> + Sync>(
    docs: &[D],
    compressor: &dyn ProxyCompressor,
    frac: f64,
    seed: u64,
    length_cap: usize,
) -> Result<StabilityReport> {
    if docs.is_empty() {
        return Err(Error::EmptyInput("stability sample"));
    }
    let rows: Vec<(f64, bool)> = docs
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let doc = d.as_ref();
            let perturbed = perturb_delete(doc, frac, &mut doc_rng(seed, i))?;
            let a = compressor.compress(doc)?;
            let b = compressor.compress(&perturbed)?;
            Ok(normalized_levenshtein_capped(&a, &b, length_cap))
        })
        .collect::<Result<_>>()?;
    let distances: Vec<f64> = rows.iter().map(|r| r.0).collect();
    Ok(StabilityReport {
        compressor: compressor.name().to_string(),
        frac,
        seed,
        samples: docs.len(),
        normalization: "edit distance / max(len)".into(),
        length_cap,
        truncated: rows.iter().filter(|r| r.1).count(),
        mean: distances.iter().sum::<f64>() / distances.len() as f64,
        median: nearest_rank(&distances, 50.0)?,
        p95: nearest_rank(&distances, 95.0)?,
        distances,
    })
}
