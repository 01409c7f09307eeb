//! Byte-level BPE.
//!
//! Training starts from the 256 single-byte tokens and repeatedly merges the
//! most frequent adjacent pair inside pretokens. Ties go to the pair whose
//! `(left bytes, right bytes)` is lexicographically smallest.
//!
//! Tokenizer files are JSON:
//! `{"vocab": ["<hex>", ...], "merges": [[left, right], ...], "pretokenizer": "default" | "line"}`
//! where `vocab[256 + k]` is the concatenation produced by `merges[k]`.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::pretok::Pretokenizer;
use crate::error::{Error, Result};

type Pair = (u32, u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpeTokenizer {
    vocab: Vec<Vec<u8>>,
    merges: Vec<Pair>,
    pretokenizer: Pretokenizer,
    ranks: HashMap<Pair, u32>,
}

#[derive(Serialize, Deserialize)]
struct TokenizerFile {
    vocab: Vec<String>,
    merges: Vec<[u32; 2]>,
    pretokenizer: Pretokenizer,
}

struct Word {
    ids: Vec<u32>,
    count: u64,
}

fn pairs_of(ids: &[u32]) -> impl Iterator<Item = Pair> + '_ {
    ids.windows(2).map(|w| (w[0], w[1]))
}

fn merge_in_place(ids: &mut Vec<u32>, pair: Pair, new_id: u32) {
    let mut out = Vec::with_capacity(ids.len());
    let mut i = 0;
    while i < ids.len() {
        if i + 1 < ids.len() && ids[i] == pair.0 && ids[i + 1] == pair.1 {
            out.push(new_id);
            i += 2;
        } else {
            out.push(ids[i]);
            i += 1;
        }
    }
    *ids = out;
}

impl BpeTokenizer {
    pub fn train<D: AsRef<[u8]>>(
        corpus: &[D],
        target_vocab: u32,
        pretokenizer: Pretokenizer,
    ) -> Result<Self> {
        if target_vocab <= 256 {
            return Err(Error::invalid(format!(
                "target vocabulary {target_vocab} must exceed the 256 byte tokens"
            )));
        }
        let mut word_counts: HashMap<&[u8], u64> = HashMap::new();
        for doc in corpus {
            for piece in pretokenizer.split(doc.as_ref()) {
                *word_counts.entry(piece).or_default() += 1;
            }
        }
        let mut entries: Vec<(&[u8], u64)> = word_counts.into_iter().collect();
        entries.sort_unstable();
        let mut words: Vec<Word> = entries
            .into_iter()
            .map(|(w, count)| Word {
                ids: w.iter().map(|&b| b as u32).collect(),
                count,
            })
            .collect();

        let mut tok = Self::bytes_only(pretokenizer);
        let mut pair_counts: HashMap<Pair, u64> = HashMap::new();
        let mut where_: HashMap<Pair, HashSet<usize>> = HashMap::new();
        for (wi, w) in words.iter().enumerate() {
            for p in pairs_of(&w.ids) {
                *pair_counts.entry(p).or_default() += w.count;
                where_.entry(p).or_default().insert(wi);
            }
        }

        while (tok.vocab.len() as u32) < target_vocab {
            let best = pair_counts
                .iter()
                .filter(|(_, &c)| c > 0)
                .max_by(|(pa, ca), (pb, cb)| {
                    ca.cmp(cb).then_with(|| {
                        let ka = (&tok.vocab[pa.0 as usize], &tok.vocab[pa.1 as usize]);
                        let kb = (&tok.vocab[pb.0 as usize], &tok.vocab[pb.1 as usize]);
                        kb.cmp(&ka).then_with(|| pb.cmp(pa))
                    })
                })
                .map(|(&p, _)| p);
            let Some(pair) = best else { break };
            let new_id = tok.push_merge(pair);
            let mut affected: Vec<usize> = where_
                .remove(&pair)
                .unwrap_or_default()
                .into_iter()
                .collect();
            affected.sort_unstable();
            for wi in affected {
                let w = &mut words[wi];
                for p in pairs_of(&w.ids) {
                    if let Some(c) = pair_counts.get_mut(&p) {
                        *c -= w.count;
                    }
                }
                merge_in_place(&mut w.ids, pair, new_id);
                for p in pairs_of(&w.ids) {
                    *pair_counts.entry(p).or_default() += w.count;
                    where_.entry(p).or_default().insert(wi);
                }
            }
            pair_counts.retain(|_, c| *c > 0);
        }
        Ok(tok)
    }

    fn bytes_only(pretokenizer: Pretokenizer) -> Self {
        Self {
            vocab: (0..=255u8).map(|b| vec![b]).collect(),
            merges: Vec::new(),
            pretokenizer,
            ranks: HashMap::new(),
        }
    }

    fn push_merge(&mut self, pair: Pair) -> u32 {
        let id = self.vocab.len() as u32;
        let mut bytes = self.vocab[pair.0 as usize].clone();
        bytes.extend_from_slice(&self.vocab[pair.1 as usize]);
        self.vocab.push(bytes);
        self.ranks.insert(pair, self.merges.len() as u32);
        self.merges.push(pair);
        id
    }

    pub fn vocab_size(&self) -> u32 {
        self.vocab.len() as u32
    }

    pub fn merges(&self) -> &[(u32, u32)] {
        &self.merges
    }

    pub fn pretokenizer(&self) -> Pretokenizer {
        self.pretokenizer
    }

    pub fn token_bytes(&self, id: u32) -> Option<&[u8]> {
        self.vocab.get(id as usize).map(Vec::as_slice)
    }

    pub fn vocab(&self) -> &[Vec<u8>] {
        &self.vocab
    }

    fn encode_word(&self, word: &[u8], out: &mut Vec<u32>) {
        let mut ids: Vec<u32> = word.iter().map(|&b| b as u32).collect();
        loop {
            let best = pairs_of(&ids)
                .filter_map(|p| self.ranks.get(&p).map(|&r| (r, p)))
                .min();
            let Some((rank, pair)) = best else { break };
            merge_in_place(&mut ids, pair, 256 + rank);
        }
        out.extend(ids);
    }

    pub fn encode(&self, text: &[u8]) -> Vec<u32> {
        let mut out = Vec::with_capacity(text.len() / 2);
        let mut cache: HashMap<&[u8], Vec<u32>> = HashMap::new();
        for piece in self.pretokenizer.split(text) {
            let ids = cache.entry(piece).or_insert_with(|| {
                let mut v = Vec::new();
                self.encode_word(piece, &mut v);
                v
            });
            out.extend_from_slice(ids);
        }
        out
    }

    pub fn decode(&self, ids: &[u32]) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for &id in ids {
            let bytes = self.token_bytes(id).ok_or_else(|| {
                Error::Decode(format!(
                    "token id {id} outside vocabulary of {}",
                    self.vocab.len()
                ))
            })?;
            out.extend_from_slice(bytes);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        let file = TokenizerFile {
            vocab: self.vocab.iter().map(hex::encode).collect(),
            merges: self.merges.iter().map(|&(a, b)| [a, b]).collect(),
            pretokenizer: self.pretokenizer,
        };
        serde_json::to_string(&file).expect("tokenizer serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: TokenizerFile =
            serde_json::from_str(json).map_err(|e| Error::TokenizerFormat(e.to_string()))?;
        let vocab = file
            .vocab
            .iter()
            .map(|h| {
                hex::decode(h).map_err(|e| Error::TokenizerFormat(format!("bad hex {h:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if vocab.len() != 256 + file.merges.len() {
            return Err(Error::TokenizerFormat(format!(
                "{} vocab entries for {} merges",
                vocab.len(),
                file.merges.len()
            )));
        }
        let mut tok = Self::bytes_only(file.pretokenizer);
        if vocab[..256] != tok.vocab[..] {
            return Err(Error::TokenizerFormat(
                "first 256 entries must be the byte values".into(),
            ));
        }
        for (k, [a, b]) in file.merges.into_iter().enumerate() {
            let id = 256 + k;
            if a as usize >= id || b as usize >= id {
                return Err(Error::TokenizerFormat(format!(
                    "merge {k} refers to a later token"
                )));
            }
            tok.push_merge((a, b));
            if tok.vocab[id] != vocab[id] {
                return Err(Error::TokenizerFormat(format!(
                    "vocab entry {id} disagrees with its merge"
                )));
            }
        }
        Ok(tok)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(Error::io_at(path))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(Error::io_at(path))?)
    }
}
