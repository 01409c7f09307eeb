//! Unified symbol space shared by raw bytes and compressed symbols.
//!
//! Ids `[0, 64)` are reserved for sentinels, `[64, 320)` hold the 256 raw
//! byte values and everything from 320 upwards belongs to the active proxy
//! compressor.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type SymbolId = u32;

pub const SENTINEL_COUNT: u32 = 64;
pub const BYTE_BASE: SymbolId = 64;
pub const COMP_BASE: SymbolId = 320;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sentinel {
    RawOpen,
    RawClose,
    CompOpen,
    CompClose,
    DocSep,
}

impl Sentinel {
    pub const ALL: [Sentinel; 5] = [
        Sentinel::RawOpen,
        Sentinel::RawClose,
        Sentinel::CompOpen,
        Sentinel::CompClose,
        Sentinel::DocSep,
    ];

    pub const fn id(self) -> SymbolId {
        match self {
            Sentinel::RawOpen => 0,
            Sentinel::RawClose => 1,
            Sentinel::CompOpen => 2,
            Sentinel::CompClose => 3,
            Sentinel::DocSep => 4,
        }
    }

    pub fn from_id(id: SymbolId) -> Option<Sentinel> {
        Self::ALL.into_iter().find(|s| s.id() == id)
    }

    pub const fn name(self) -> &'static str {
        match self {
            Sentinel::RawOpen => "raw",
            Sentinel::RawClose => "/raw",
            Sentinel::CompOpen => "comp",
            Sentinel::CompClose => "/comp",
            Sentinel::DocSep => "docsep",
        }
    }
}

/// Which of the three id ranges a symbol falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolClass {
    /// A sentinel slot; `None` for the reserved, unnamed ids 5..63.
    Sentinel(Option<Sentinel>),
    Byte(u8),
    /// Local compressor id (global id minus `comp_base`).
    Compressed(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VocabLayout {
    comp_vocab_size: u32,
}

impl VocabLayout {
    pub fn for_comp_vocab(comp_vocab_size: u32) -> Self {
        assert!(
            comp_vocab_size <= u32::MAX - COMP_BASE,
            "compressed vocabulary does not fit in 32-bit ids"
        );
        Self { comp_vocab_size }
    }

    pub const fn sentinel_count(&self) -> u32 {
        SENTINEL_COUNT
    }

    pub const fn byte_base(&self) -> SymbolId {
        BYTE_BASE
    }

    pub const fn comp_base(&self) -> SymbolId {
        COMP_BASE
    }

    pub const fn comp_vocab_size(&self) -> u32 {
        self.comp_vocab_size
    }

    pub const fn total_size(&self) -> u32 {
        COMP_BASE + self.comp_vocab_size
    }

    pub fn classify(&self, id: SymbolId) -> Result<SymbolClass> {
        match id {
            _ if id < BYTE_BASE => Ok(SymbolClass::Sentinel(Sentinel::from_id(id))),
            _ if id < COMP_BASE => Ok(SymbolClass::Byte((id - BYTE_BASE) as u8)),
            _ if id < self.total_size() => Ok(SymbolClass::Compressed(id - COMP_BASE)),
            _ => Err(Error::SymbolOutOfRange {
                id,
                total: self.total_size(),
            }),
        }
    }

    pub fn comp_to_symbol(&self, local: u32) -> Result<SymbolId> {
        if local >= self.comp_vocab_size {
            return Err(Error::SymbolOutOfRange {
                id: COMP_BASE.saturating_add(local),
                total: self.total_size(),
            });
        }
        Ok(COMP_BASE + local)
    }

    pub fn symbol_to_comp(&self, id: SymbolId) -> Result<u32> {
        match self.classify(id)? {
            SymbolClass::Compressed(local) => Ok(local),
            _ => Err(Error::invalid(format!(
                "symbol {id} is not a compressed symbol"
            ))),
        }
    }

    pub fn manifest(&self) -> LayoutManifest {
        LayoutManifest {
            sentinels: Sentinel::ALL
                .into_iter()
                .map(|s| (s.name().to_string(), s.id()))
                .collect(),
            byte_base: BYTE_BASE,
            comp_base: COMP_BASE,
            comp_vocab_size: self.comp_vocab_size,
        }
    }

    /// First eight bytes of the SHA-256 of the canonical manifest JSON,
    /// little-endian. Written into every shard header.
    pub fn fingerprint(&self) -> u64 {
        let json = serde_json::to_vec(&self.manifest()).expect("layout manifest serializes");
        let digest = Sha256::digest(&json);
        u64::from_le_bytes(digest[..8].try_into().unwrap())
    }
}

pub const fn byte_to_symbol(b: u8) -> SymbolId {
    BYTE_BASE + b as u32
}

pub fn symbol_to_byte(id: SymbolId) -> Result<u8> {
    if (BYTE_BASE..COMP_BASE).contains(&id) {
        Ok((id - BYTE_BASE) as u8)
    } else {
        Err(Error::NotAByteSymbol(id))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutManifest {
    pub sentinels: BTreeMap<String, SymbolId>,
    pub byte_base: SymbolId,
    pub comp_base: SymbolId,
    pub comp_vocab_size: u32,
}

impl LayoutManifest {
    pub fn to_layout(&self) -> Result<VocabLayout> {
        if self.byte_base != BYTE_BASE || self.comp_base != COMP_BASE {
            return Err(Error::invalid(
                "manifest layout bases do not match this build",
            ));
        }
        let expected = VocabLayout::for_comp_vocab(self.comp_vocab_size).manifest();
        if expected.sentinels != self.sentinels {
            return Err(Error::invalid("manifest sentinel assignment differs"));
        }
        Ok(VocabLayout::for_comp_vocab(self.comp_vocab_size))
    }
}
