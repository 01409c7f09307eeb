//! gzip as a proxy compressor: deterministic, invertible.

use proxymix::compressors::{GzipCompressor, ProxyCompressor};

pub fn run_example() -> anyhow::Result<()> {
    let gz = GzipCompressor::default();
    let doc = b"for item in items:\n    total = total + item\n".repeat(8);
    let a = gz.compress(&doc)?;
    let b = gz.compress(&doc)?;
    assert_eq!(a, b);
    assert_eq!(gz.decompress(&a)?, doc);
    println!(
        "{} bytes -> {} symbols, header {:02x?}",
        doc.len(),
        a.len(),
        &a[..10]
    );
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
