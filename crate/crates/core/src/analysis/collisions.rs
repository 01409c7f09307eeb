use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compressors::ProxyCompressor;
use crate::error::{Error, Result};

/// Longest common prefix of all chunks over their mean length.
pub fn lcp_ratio<C: AsRef<[u8]>>(chunks: &[C]) -> Result<f64> {
    if chunks.len() < 2 {
        return Err(Error::invalid("LCP ratio needs at least two chunks"));
    }
    let first = chunks[0].as_ref();
    let lcp = chunks[1..].iter().fold(first.len(), |acc, c| {
        first[..acc]
            .iter()
            .zip(c.as_ref())
            .take_while(|(x, y)| x == y)
            .count()
    });
    let (mean, _) = length_stats(chunks);
    Ok(if mean == 0.0 { 0.0 } else { lcp as f64 / mean })
}

/// Mean and population standard deviation of chunk lengths.
pub fn length_stats<C: AsRef<[u8]>>(chunks: &[C]) -> (f64, f64) {
    if chunks.is_empty() {
        return (0.0, 0.0);
    }
    let n = chunks.len() as f64;
    let mean = chunks.iter().map(|c| c.as_ref().len() as f64).sum::<f64>() / n;
    let var = chunks
        .iter()
        .map(|c| (c.as_ref().len() as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionGroup {
    pub symbols: Vec<u32>,
    /// Distinct source chunks, lossily decoded for display.
    pub members: Vec<String>,
    pub lcp_ratio: f64,
    pub mean_len: f64,
    pub len_stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub compressor: String,
    pub samples: usize,
    pub chunks: usize,
    pub groups: usize,
    /// Group size to number of groups.
    pub histogram: BTreeMap<usize, usize>,
    /// Groups with two or more members, largest first.
    pub collisions: Vec<CollisionGroup>,
}

impl CollisionReport {
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("group_size,groups\n");
        for (size, n) in &self.histogram {
            writeln!(out, "{size},{n}").unwrap();
        }
        out
    }
}

/// Groups every independently compressed unit of every document by its
/// symbol output.
pub fn collision_study<D: AsRef<[u8]> + Sync>(
    docs: &[D],
    compressor: &dyn ProxyCompressor,
) -> Result<CollisionReport> {
    let units: Vec<Vec<(Vec<u32>, Vec<u8>)>> = docs
        .par_iter()
        .map(|d| {
            let doc = d.as_ref();
            Ok(compressor
                .compress_units(doc)?
                .into_iter()
                .map(|u| (u.symbols, doc[u.source].to_vec()))
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut groups: BTreeMap<Vec<u32>, BTreeSet<Vec<u8>>> = BTreeMap::new();
    let mut chunks = 0;
    for (symbols, source) in units.into_iter().flatten() {
        chunks += 1;
        groups.entry(symbols).or_default().insert(source);
    }
    let mut histogram = BTreeMap::new();
    let mut collisions = Vec::new();
    for (symbols, members) in &groups {
        *histogram.entry(members.len()).or_insert(0) += 1;
        if members.len() >= 2 {
            let members: Vec<&Vec<u8>> = members.iter().collect();
            let (mean_len, len_stddev) = length_stats(&members);
            collisions.push(CollisionGroup {
                symbols: symbols.clone(),
                members: members
                    .iter()
                    .map(|m| String::from_utf8_lossy(m).into_owned())
                    .collect(),
                lcp_ratio: lcp_ratio(&members)?,
                mean_len,
                len_stddev,
            });
        }
    }
    collisions.sort_by(|a, b| {
        b.members
            .len()
            .cmp(&a.members.len())
            .then_with(|| a.symbols.cmp(&b.symbols))
    });
    Ok(CollisionReport {
        compressor: compressor.name().to_string(),
        samples: docs.len(),
        chunks,
        groups: groups.len(),
        histogram,
        collisions,
    })
}
