//! Entropy-threshold segmentation with calibrated percentiles.

use proxymix::bytelm::ByteModel;
use proxymix::corpus::synthetic_code_corpus;
use proxymix::segmenter::{calibrate_thresholds, segment, SegmentConfig, SegmentStrategy};

pub fn run_example() -> anyhow::Result<()> {
    let docs = synthetic_code_corpus(100, 3);
    let model = ByteModel::fit(&docs, 3, 0.1)?;
    let cfg = SegmentConfig {
        abs_percentile: 90.0,
        ..SegmentConfig::default()
    };
    let thresholds = calibrate_thresholds(&docs, &model, &cfg)?;
    println!(
        "theta_abs = {:.2}, theta_jump = {:.2}",
        thresholds.theta_abs, thresholds.theta_jump
    );

    let doc = b"def merge_entry(entry, limit):\n    return entry % 7\n";
    let strategy = SegmentStrategy::Entropy {
        thresholds,
        min_segment_len: 2,
    };
    let segments = segment(doc, &model, &strategy)?;
    for s in &segments {
        println!(
            "{:>3}..{:<3} {:?}",
            s.start,
            s.end,
            String::from_utf8_lossy(s.bytes)
        );
    }
    assert_eq!(segments.iter().map(|s| s.len()).sum::<usize>(), doc.len());
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
