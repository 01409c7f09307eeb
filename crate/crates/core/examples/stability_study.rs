//! How much compressed outputs move when 10% of characters are deleted.

use std::sync::Arc;

use proxymix::analysis::{normalized_levenshtein, stability_study, DEFAULT_LENGTH_CAP};
use proxymix::compressors::{
    BpeTokenizer, GzipCompressor, Pretokenizer, TokenEncoding, TokenizerCompressor,
};
use proxymix::corpus::synthetic_code_corpus;

pub fn run_example() -> anyhow::Result<()> {
    println!(
        "kitten/sitting = {:.4}",
        normalized_levenshtein(b"kitten", b"sitting")
    );
    let docs = synthetic_code_corpus(200, 7);
    let tok = Arc::new(BpeTokenizer::train(&docs, 512, Pretokenizer::DefaultRegex)?);
    let tokenizer = TokenizerCompressor::new(tok, TokenEncoding::TokenIndex, None)?;
    let gzip = GzipCompressor::default();
    let sample = &docs[..100];
    let t = stability_study(sample, &tokenizer, 0.1, 1, DEFAULT_LENGTH_CAP)?;
    let g = stability_study(sample, &gzip, 0.1, 1, DEFAULT_LENGTH_CAP)?;
    for r in [&t, &g] {
        println!(
            "{:<16} mean {:.3} median {:.3} p95 {:.3}",
            r.compressor, r.mean, r.median, r.p95
        );
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
