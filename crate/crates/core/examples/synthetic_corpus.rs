//! Writes a seeded Python-like JSONL corpus.
//!
//! cargo run --example synthetic_corpus -- out.jsonl 500 7

use std::path::PathBuf;

use proxymix::compressors::{compression_rate, GzipCompressor};
use proxymix::corpus::{read_jsonl, synthetic_code_corpus, write_jsonl};

pub fn run_example() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("corpus.jsonl");
    write(&path, 50, 7)?;
    assert_eq!(read_jsonl(&path)?.len(), 50);
    Ok(())
}

fn write(path: &std::path::Path, n: usize, seed: u64) -> anyhow::Result<()> {
    let docs = synthetic_code_corpus(n, seed);
    write_jsonl(path, &docs)?;
    let bytes: usize = docs.iter().map(|d| d.text.len()).sum();
    println!(
        "{n} documents, {bytes} bytes, gzip rate {:.2} -> {}",
        compression_rate(&GzipCompressor::default(), &docs)?,
        path.display()
    );
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let Some(path) = args.next() else {
        return run_example();
    };
    let n = args.next().map(|s| s.parse()).transpose()?.unwrap_or(500);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);
    write(&PathBuf::from(path), n, seed)
}
