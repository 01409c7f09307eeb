use std::io::{Read, Write};

use flate2::read::GzDecoder;
use flate2::{Compression, GzBuilder};

use super::{symbols_to_bytes, ProxyCompressor};
use crate::error::{Error, Result};

/// gzip framing with every variable header field pinned: mtime 0, no file
/// name, OS byte 255, compression level 9.
#[derive(Debug, Clone, Copy)]
pub struct GzipCompressor {
    level: u32,
}

impl Default for GzipCompressor {
    fn default() -> Self {
        Self { level: 9 }
    }
}

impl GzipCompressor {
    pub fn with_level(level: u32) -> Result<Self> {
        if level > 9 {
            return Err(Error::invalid(format!("gzip level {level} outside 0..=9")));
        }
        Ok(Self { level })
    }

    pub fn compress_bytes(&self, doc: &[u8]) -> Result<Vec<u8>> {
        let mut enc = GzBuilder::new().mtime(0).operating_system(255).write(
            Vec::with_capacity(doc.len() / 2 + 32),
            Compression::new(self.level),
        );
        enc.write_all(doc)?;
        Ok(enc.finish()?)
    }

    pub fn decompress_bytes(&self, data: &[u8]) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        GzDecoder::new(data)
            .read_to_end(&mut out)
            .map_err(|e| Error::Decode(format!("gzip: {e}")))?;
        Ok(out)
    }
}

impl ProxyCompressor for GzipCompressor {
    fn name(&self) -> &str {
        "gzip"
    }

    fn comp_vocab_size(&self) -> u32 {
        256
    }

    fn invertible(&self) -> bool {
        true
    }

    fn compress(&self, doc: &[u8]) -> Result<Vec<u32>> {
        Ok(self
            .compress_bytes(doc)?
            .into_iter()
            .map(u32::from)
            .collect())
    }

    fn decompress(&self, symbols: &[u32]) -> Result<Vec<u8>> {
        self.decompress_bytes(&symbols_to_bytes(symbols)?)
    }
}
