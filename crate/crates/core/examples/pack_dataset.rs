//! Builds a mixed dataset on disk, re-reads it and prints one context.

use std::sync::Arc;

use proxymix::analysis::compression_report;
use proxymix::cli::cmd_inspect;
use proxymix::compressors::{BpeTokenizer, Pretokenizer, TokenEncoding, TokenizerCompressor};
use proxymix::corpus::synthetic_code_corpus;
use proxymix::mixer::{build_dataset, DatasetConfig, MixConfig, Pairing, Warmup};

pub fn run_example() -> anyhow::Result<()> {
    let docs = synthetic_code_corpus(300, 5);
    let tok = Arc::new(BpeTokenizer::train(&docs, 512, Pretokenizer::DefaultRegex)?);
    let comp = TokenizerCompressor::new(tok, TokenEncoding::TokenIndex, None)?;
    let cfg = DatasetConfig {
        mix: MixConfig {
            warmup: Some(Warmup {
                a: 0.4,
                b: 0.9,
                steps: 10,
            }),
            pairing: Pairing::WarmupOnly,
            symbols_per_step: 4096,
            seed: 11,
            ..MixConfig::default()
        },
        context_len: 512,
        contexts_per_shard: 32,
    };
    let dir = tempfile::tempdir()?;
    let manifest = build_dataset(&docs, &comp, &cfg, serde_json::Value::Null, dir.path())?;
    println!("views {:?}", manifest.views);
    println!(
        "C = {:.3}, multiplier measured {:.3} vs expected {:.3}",
        manifest.accounting.measured_c,
        manifest.accounting.measured_multiplier,
        manifest.accounting.expected_multiplier
    );
    let report = compression_report(dir.path())?;
    println!(
        "dataset rate {:.3} over {} contexts",
        report.dataset_cr, report.contexts
    );
    let text = cmd_inspect(dir.path(), 0, 0, false)?;
    println!("{}", &text[..text.len().min(300)]);
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
