//! BPE training and the four token-to-symbol encodings.

use std::sync::Arc;

use proxymix::compressors::{
    compression_rate, fixed_width, gray_code, BpeTokenizer, Pretokenizer, ProxyCompressor,
    TokenEncoding, TokenizerCompressor,
};
use proxymix::corpus::synthetic_code_corpus;

pub fn run_example() -> anyhow::Result<()> {
    let docs = synthetic_code_corpus(200, 2);
    let tok = Arc::new(BpeTokenizer::train(&docs, 600, Pretokenizer::DefaultRegex)?);
    let ids = tok.encode(b"def find_node(node):");
    println!("{} merges; sample encodes to {ids:?}", tok.merges().len());
    assert_eq!(tok.decode(&ids)?, b"def find_node(node):");

    let freqs = TokenizerCompressor::token_frequencies(&tok, &docs);
    for enc in [
        TokenEncoding::TokenIndex,
        TokenEncoding::FixedBytes,
        TokenEncoding::HuffmanBytes,
        TokenEncoding::GrayBytes,
    ] {
        let c = TokenizerCompressor::new(tok.clone(), enc, Some(&freqs))?;
        let rate = compression_rate(&c, &docs)?;
        let doc = docs[0].bytes();
        assert_eq!(c.decompress(&c.compress(doc)?)?, doc);
        println!(
            "{:<18} V={:<6} rate {rate:.2}",
            c.name(),
            c.comp_vocab_size()
        );
    }
    println!("fixed width for V=96640: {} bytes", fixed_width(96_640));
    println!(
        "gray(5) = {:#b}, gray(6) = {:#b}",
        gray_code(5),
        gray_code(6)
    );
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
