//! An oracle-translation prompt: compressed problem and solution, then the
//! raw problem left open for continuation.

use std::sync::Arc;

use proxymix::compressors::{
    BpeTokenizer, Pretokenizer, ProxyCompressor, TokenEncoding, TokenizerCompressor,
};
use proxymix::corpus::synthetic_code_corpus;
use proxymix::mixer::build_oracle_translation_prompt;
use proxymix::vocab::{Sentinel, VocabLayout};

pub fn run_example() -> anyhow::Result<()> {
    let docs = synthetic_code_corpus(100, 6);
    let tok = Arc::new(BpeTokenizer::train(&docs, 400, Pretokenizer::DefaultRegex)?);
    let comp = TokenizerCompressor::new(tok, TokenEncoding::TokenIndex, None)?;
    let layout = VocabLayout::for_comp_vocab(comp.comp_vocab_size());

    let problem = b"def add(a, b):\n";
    let solution = b"    return a + b\n";
    let prompt = build_oracle_translation_prompt(problem, solution, &comp, &layout)?;
    let close = prompt
        .iter()
        .position(|&s| s == Sentinel::CompClose.id())
        .unwrap();
    println!(
        "{} symbols, compressed span {} symbols",
        prompt.len(),
        close - 1
    );
    assert_eq!(prompt[close + 1], Sentinel::RawOpen.id());
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
