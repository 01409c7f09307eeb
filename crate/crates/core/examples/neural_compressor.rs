//! Segment-wise arithmetic coding with a content-addressed cache, and the
//! metadata needed to decode it.

use std::sync::Arc;

use proxymix::analysis::collision_study;
use proxymix::bytelm::ByteModel;
use proxymix::compressors::{NeuralCompressor, NeuralConfig, SegmentCache};
use proxymix::corpus::synthetic_code_corpus;
use proxymix::segmenter::{calibrate_thresholds, SegmentConfig, SegmentStrategy};

pub fn run_example() -> anyhow::Result<()> {
    let docs = synthetic_code_corpus(100, 4);
    let model = Arc::new(ByteModel::fit(&docs, 3, 0.1)?);
    let thresholds = calibrate_thresholds(&docs, &*model, &SegmentConfig::default())?;
    let config = NeuralConfig::with_strategy(SegmentStrategy::Entropy {
        thresholds,
        min_segment_len: 1,
    });
    let dir = tempfile::tempdir()?;
    let cache = Arc::new(SegmentCache::open(&dir.path().join("segments.cache"))?);
    let neural = NeuralCompressor::new(model, config, cache);

    let doc = docs[0].bytes();
    let (symbols, meta) = neural.compress_with_metadata(doc)?;
    println!(
        "{} bytes -> {} symbols in {} segments",
        doc.len(),
        symbols.len(),
        meta.len()
    );
    assert_eq!(neural.decompress_with_metadata(&symbols, &meta)?, doc);

    neural.compress_with_metadata(doc)?;
    println!(
        "cache: {} hits, {} misses",
        neural.cache().hits(),
        neural.cache().misses()
    );

    let report = collision_study(&docs[..20], &neural)?;
    println!(
        "{} chunks, {} groups, histogram {:?}",
        report.chunks, report.groups, report.histogram
    );
    if let Some(g) = report.collisions.first() {
        println!("largest collision: {:?}", g.members);
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
