use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bpe::BpeTokenizer;
use super::huffman::{huffman_build, HuffmanCode};
use super::{symbols_to_bytes, ProxyCompressor};
use crate::error::{Error, Result};

/// How token ids become compressed symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenEncoding {
    /// One symbol per token, alphabet of size V.
    TokenIndex,
    /// `B` big-endian bytes per token id.
    FixedBytes,
    /// Byte-aligned prefix code from token frequencies.
    HuffmanBytes,
    /// `B` big-endian bytes of the Gray code of the token's lexicographic
    /// rank.
    GrayBytes,
}

impl FromStr for TokenEncoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "index" | "token-index" => Ok(TokenEncoding::TokenIndex),
            "fixed" | "fixed-bytes" => Ok(TokenEncoding::FixedBytes),
            "huffman" | "huffman-bytes" => Ok(TokenEncoding::HuffmanBytes),
            "gray" | "gray-bytes" => Ok(TokenEncoding::GrayBytes),
            other => Err(Error::invalid(format!("unknown token encoding {other:?}"))),
        }
    }
}

impl fmt::Display for TokenEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TokenEncoding::TokenIndex => "index",
            TokenEncoding::FixedBytes => "fixed",
            TokenEncoding::HuffmanBytes => "huffman",
            TokenEncoding::GrayBytes => "gray",
        })
    }
}

/// Smallest `B` with `256^B >= vocab_size`.
pub fn fixed_width(vocab_size: u32) -> u32 {
    let mut b = 1;
    while (vocab_size as u64) > 1u64 << (8 * b) {
        b += 1;
    }
    b
}

pub const fn gray_code(rank: u32) -> u32 {
    rank ^ (rank >> 1)
}

pub const fn gray_decode(mut gray: u32) -> u32 {
    let mut rank = gray;
    while gray > 0 {
        gray >>= 1;
        rank ^= gray;
    }
    rank
}

#[derive(Debug, Clone)]
enum Scheme {
    Index,
    Fixed,
    Huffman(HuffmanCode),
    Gray { rank_of: Vec<u32>, id_of: Vec<u32> },
}

#[derive(Debug, Clone)]
pub struct TokenizerCompressor {
    tokenizer: Arc<BpeTokenizer>,
    encoding: TokenEncoding,
    width: u32,
    scheme: Scheme,
    name: String,
}

impl TokenizerCompressor {
    /// `token_freqs` is required for [`TokenEncoding::HuffmanBytes`] and
    /// ignored otherwise; see [`TokenizerCompressor::token_frequencies`].
    pub fn new(
        tokenizer: Arc<BpeTokenizer>,
        encoding: TokenEncoding,
        token_freqs: Option<&[u64]>,
    ) -> Result<Self> {
        let v = tokenizer.vocab_size();
        let scheme = match encoding {
            TokenEncoding::TokenIndex => Scheme::Index,
            TokenEncoding::FixedBytes => Scheme::Fixed,
            TokenEncoding::HuffmanBytes => {
                let freqs = token_freqs.ok_or_else(|| {
                    Error::invalid("huffman token encoding needs token frequencies")
                })?;
                if freqs.len() != v as usize {
                    return Err(Error::invalid(format!(
                        "{} token frequencies for a vocabulary of {v}",
                        freqs.len()
                    )));
                }
                Scheme::Huffman(huffman_build(freqs)?)
            }
            TokenEncoding::GrayBytes => {
                let mut id_of: Vec<u32> = (0..v).collect();
                id_of.sort_by(|&a, &b| {
                    tokenizer
                        .token_bytes(a)
                        .cmp(&tokenizer.token_bytes(b))
                        .then(a.cmp(&b))
                });
                let mut rank_of = vec![0; v as usize];
                for (rank, &id) in id_of.iter().enumerate() {
                    rank_of[id as usize] = rank as u32;
                }
                Scheme::Gray { rank_of, id_of }
            }
        };
        Ok(Self {
            name: format!("tokenizer-{encoding}"),
            width: fixed_width(v),
            tokenizer,
            encoding,
            scheme,
        })
    }

    /// Token counts of `corpus` under `tokenizer`, indexed by token id.
    pub fn token_frequencies<D: AsRef<[u8]>>(tokenizer: &BpeTokenizer, corpus: &[D]) -> Vec<u64> {
        let mut freqs = vec![0u64; tokenizer.vocab_size() as usize];
        for doc in corpus {
            for id in tokenizer.encode(doc.as_ref()) {
                freqs[id as usize] += 1;
            }
        }
        // all-zero tables (empty corpus) fall back to uniform weights
        if freqs.iter().all(|&f| f == 0) {
            freqs.iter_mut().for_each(|f| *f = 1);
        }
        freqs
    }

    pub fn tokenizer(&self) -> &BpeTokenizer {
        &self.tokenizer
    }

    pub fn encoding(&self) -> TokenEncoding {
        self.encoding
    }

    /// Bytes per token for the fixed-width encodings.
    pub fn bytes_per_token(&self) -> u32 {
        self.width
    }

    fn push_be(&self, value: u32, out: &mut Vec<u32>) {
        for i in (0..self.width).rev() {
            out.push((value >> (8 * i)) & 0xFF);
        }
    }

    fn read_be(&self, symbols: &[u32]) -> Result<Vec<u32>> {
        let w = self.width as usize;
        if !symbols.len().is_multiple_of(w) {
            return Err(Error::Decode(format!(
                "{} byte symbols is not a multiple of {w}",
                symbols.len()
            )));
        }
        let bytes = symbols_to_bytes(symbols)?;
        Ok(bytes
            .chunks(w)
            .map(|c| c.iter().fold(0u32, |acc, &b| (acc << 8) | b as u32))
            .collect())
    }
}

impl ProxyCompressor for TokenizerCompressor {
    fn name(&self) -> &str {
        &self.name
    }

    fn comp_vocab_size(&self) -> u32 {
        match self.scheme {
            Scheme::Index => self.tokenizer.vocab_size(),
            _ => 256,
        }
    }

    fn invertible(&self) -> bool {
        true
    }

    fn compress(&self, doc: &[u8]) -> Result<Vec<u32>> {
        let ids = self.tokenizer.encode(doc);
        Ok(match &self.scheme {
            Scheme::Index => ids,
            Scheme::Fixed => {
                let mut out = Vec::with_capacity(ids.len() * self.width as usize);
                for id in ids {
                    self.push_be(id, &mut out);
                }
                out
            }
            Scheme::Gray { rank_of, .. } => {
                let mut out = Vec::with_capacity(ids.len() * self.width as usize);
                for id in ids {
                    self.push_be(gray_code(rank_of[id as usize]), &mut out);
                }
                out
            }
            Scheme::Huffman(code) => code.encode(&ids)?.into_iter().map(u32::from).collect(),
        })
    }

    fn decompress(&self, symbols: &[u32]) -> Result<Vec<u8>> {
        let ids = match &self.scheme {
            Scheme::Index => symbols.to_vec(),
            Scheme::Fixed => self.read_be(symbols)?,
            Scheme::Gray { id_of, .. } => self
                .read_be(symbols)?
                .into_iter()
                .map(|g| {
                    id_of.get(gray_decode(g) as usize).copied().ok_or_else(|| {
                        Error::Decode(format!("gray code {g} outside the vocabulary"))
                    })
                })
                .collect::<Result<_>>()?,
            Scheme::Huffman(code) => code.decode(&symbols_to_bytes(symbols)?)?,
        };
        self.tokenizer.decode(&ids)
    }
}
