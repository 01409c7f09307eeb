//! Binary context shards.
//!
//! Layout, all little-endian: magic `PXMX`, version `u32`, context length
//! `u32`, layout fingerprint `u64`, then contexts as `u32` symbol arrays.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::pack::PackedContext;
use crate::error::{Error, Result};

pub const SHARD_MAGIC: [u8; 4] = *b"PXMX";
pub const SHARD_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShardHeader {
    pub version: u32,
    pub context_len: u32,
    pub layout_fingerprint: u64,
}

impl ShardHeader {
    pub fn new(context_len: usize, layout_fingerprint: u64) -> Self {
        Self {
            version: SHARD_VERSION,
            context_len: context_len as u32,
            layout_fingerprint,
        }
    }

    fn to_bytes(self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[..4].copy_from_slice(&SHARD_MAGIC);
        b[4..8].copy_from_slice(&self.version.to_le_bytes());
        b[8..12].copy_from_slice(&self.context_len.to_le_bytes());
        b[12..20].copy_from_slice(&self.layout_fingerprint.to_le_bytes());
        b
    }
}

pub fn encode_shard(header: ShardHeader, contexts: &[PackedContext]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + contexts.len() * header.context_len as usize * 4);
    out.extend_from_slice(&header.to_bytes());
    for c in contexts {
        for s in &c.symbols {
            out.extend_from_slice(&s.to_le_bytes());
        }
    }
    out
}

pub fn write_shard(path: &Path, header: ShardHeader, contexts: &[PackedContext]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode_shard(header, contexts))?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shard {
    pub header: ShardHeader,
    pub contexts: Vec<Vec<u32>>,
}

pub fn read_shard(path: &Path) -> Result<Shard> {
    let mut buf = Vec::new();
    File::open(path)
        .map_err(Error::io_at(path))?
        .read_to_end(&mut buf)?;
    parse_shard(path, &buf)
}

pub fn parse_shard(path: &Path, buf: &[u8]) -> Result<Shard> {
    let corrupt = |offset: usize, reason: String| Error::CorruptShard {
        path: path.to_path_buf(),
        offset: offset as u64,
        reason,
    };
    if buf.len() < HEADER_LEN {
        return Err(corrupt(
            buf.len(),
            format!("header needs {HEADER_LEN} bytes"),
        ));
    }
    if buf[..4] != SHARD_MAGIC {
        return Err(corrupt(0, "bad magic".into()));
    }
    let u32_at = |i: usize| u32::from_le_bytes(buf[i..i + 4].try_into().unwrap());
    let header = ShardHeader {
        version: u32_at(4),
        context_len: u32_at(8),
        layout_fingerprint: u64::from_le_bytes(buf[12..20].try_into().unwrap()),
    };
    if header.version != SHARD_VERSION {
        return Err(corrupt(
            4,
            format!("unsupported version {}", header.version),
        ));
    }
    if header.context_len < 2 {
        return Err(corrupt(8, format!("context length {}", header.context_len)));
    }
    let ctx_bytes = header.context_len as usize * 4;
    let body = &buf[HEADER_LEN..];
    if !body.len().is_multiple_of(ctx_bytes) {
        let offset = HEADER_LEN + body.len() / ctx_bytes * ctx_bytes;
        return Err(corrupt(offset, "truncated context".into()));
    }
    let contexts = body
        .chunks_exact(ctx_bytes)
        .map(|c| {
            c.chunks_exact(4)
                .map(|s| u32::from_le_bytes(s.try_into().unwrap()))
                .collect()
        })
        .collect();
    Ok(Shard { header, contexts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn ctx(symbols: Vec<u32>) -> PackedContext {
        PackedContext {
            fill: symbols.len(),
            symbols,
            boundaries: Vec::new(),
        }
    }

    #[test]
    fn roundtrip_and_corruption() {
        let h = ShardHeader::new(3, 0xDEAD_BEEF);
        let bytes = encode_shard(h, &[ctx(vec![0, 70, 1]), ctx(vec![2, 400, 3])]);
        assert_eq!(&bytes[..4], b"PXMX");
        assert_eq!(bytes.len(), 20 + 24);
        let p = PathBuf::from("s.bin");
        let shard = parse_shard(&p, &bytes).unwrap();
        assert_eq!(shard.header, h);
        assert_eq!(shard.contexts[1], vec![2, 400, 3]);

        match parse_shard(&p, &bytes[..bytes.len() - 2]) {
            Err(Error::CorruptShard { offset, .. }) => assert_eq!(offset, 32),
            other => panic!("{other:?}"),
        }
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            parse_shard(&p, &bad),
            Err(Error::CorruptShard { offset: 0, .. })
        ));
    }
}
