//! Proxy compressors: map a byte document to a sequence of local symbols
//! `0..comp_vocab_size`. The mixer shifts them into the global vocabulary.

use std::ops::Range;

mod bpe;
mod cache;
mod gzip;
mod huffman;
mod neural;
mod pretok;
mod token_bytes;

pub use bpe::BpeTokenizer;
pub use cache::SegmentCache;
pub use gzip::GzipCompressor;
pub use huffman::{huffman_build, HuffmanCode};
pub use neural::{Fingerprint, NeuralCompressor, NeuralConfig, SegmentMeta};
pub use pretok::Pretokenizer;
pub use token_bytes::{fixed_width, gray_code, gray_decode, TokenEncoding, TokenizerCompressor};

use crate::error::{Error, Result};

/// Symbols produced for one contiguous piece of a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedUnit {
    pub source: Range<usize>,
    pub symbols: Vec<u32>,
}

pub trait ProxyCompressor: Send + Sync {
    fn name(&self) -> &str;

    fn comp_vocab_size(&self) -> u32;

    fn invertible(&self) -> bool;

    fn compress(&self, doc: &[u8]) -> Result<Vec<u32>>;

    fn decompress(&self, _symbols: &[u32]) -> Result<Vec<u8>> {
        Err(Error::NotInvertible(self.name().to_string()))
    }

    /// The independently compressed pieces of `doc`. Compressors that code a
    /// document as a whole return a single unit.
    fn compress_units(&self, doc: &[u8]) -> Result<Vec<CompressedUnit>> {
        Ok(vec![CompressedUnit {
            source: 0..doc.len(),
            symbols: self.compress(doc)?,
        }])
    }
}

/// Raw bytes as 256-ary local symbols. Useful as a reference point: it
/// compresses nothing.
#[derive(Debug, Clone, Copy, Default)]
pub struct ByteIdentity;

impl ProxyCompressor for ByteIdentity {
    fn name(&self) -> &str {
        "identity"
    }

    fn comp_vocab_size(&self) -> u32 {
        256
    }

    fn invertible(&self) -> bool {
        true
    }

    fn compress(&self, doc: &[u8]) -> Result<Vec<u32>> {
        Ok(doc.iter().map(|&b| b as u32).collect())
    }

    fn decompress(&self, symbols: &[u32]) -> Result<Vec<u8>> {
        symbols_to_bytes(symbols)
    }
}

pub(crate) fn symbols_to_bytes(symbols: &[u32]) -> Result<Vec<u8>> {
    symbols
        .iter()
        .map(|&s| u8::try_from(s).map_err(|_| Error::Decode(format!("symbol {s} is not a byte"))))
        .collect()
}

/// Mean source bytes per emitted symbol over a corpus.
pub fn compression_rate<D: AsRef<[u8]>>(
    compressor: &dyn ProxyCompressor,
    corpus: &[D],
) -> Result<f64> {
    let mut bytes = 0usize;
    let mut symbols = 0usize;
    for doc in corpus {
        bytes += doc.as_ref().len();
        symbols += compressor.compress(doc.as_ref())?.len();
    }
    if symbols == 0 {
        return Err(Error::EmptyInput(
            "compression rate with no emitted symbols",
        ));
    }
    Ok(bytes as f64 / symbols as f64)
}
