//! Content-addressed store of packed segment codes.
//!
//! Persisted as an append-only file of little-endian records:
//! `key: [u8; 32], total_bits: u64, count: u32, symbols: [u32; count]`.
//! A truncated trailing record (interrupted write) is ignored on load.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use crate::coder::PackedBits;
use crate::error::Result;

pub type CacheKey = [u8; 32];

#[derive(Debug, Default)]
pub struct SegmentCache {
    entries: RwLock<HashMap<CacheKey, Arc<PackedBits>>>,
    hits: AtomicU64,
    misses: AtomicU64,
    log: Option<Mutex<BufWriter<File>>>,
}

impl SegmentCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads existing records from `path` (if present) and appends new
    /// inserts to it.
    pub fn open(path: &Path) -> Result<Self> {
        let mut entries = HashMap::new();
        if path.exists() {
            let mut buf = Vec::new();
            File::open(path)?.read_to_end(&mut buf)?;
            let mut pos = 0;
            while let Some((key, packed, next)) = parse_record(&buf, pos) {
                entries.insert(key, Arc::new(packed));
                pos = next;
            }
            if pos != buf.len() {
                log::warn!(
                    "segment cache {}: ignoring {} trailing bytes",
                    path.display(),
                    buf.len() - pos
                );
                // drop the partial record so later appends stay aligned
                OpenOptions::new()
                    .write(true)
                    .open(path)?
                    .set_len(pos as u64)?;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            entries: RwLock::new(entries),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            log: Some(Mutex::new(BufWriter::new(file))),
        })
    }

    pub fn get(&self, key: &CacheKey) -> Option<Arc<PackedBits>> {
        let found = self.entries.read().unwrap().get(key).cloned();
        match found {
            Some(_) => self.hits.fetch_add(1, Ordering::Relaxed),
            None => self.misses.fetch_add(1, Ordering::Relaxed),
        };
        found
    }

    /// Inserts unless the key is present. Concurrent inserts of the same key
    /// are expected to carry identical values; the first one wins.
    pub fn insert(&self, key: CacheKey, value: PackedBits) -> Result<Arc<PackedBits>> {
        let mut map = self.entries.write().unwrap();
        if let Some(existing) = map.get(&key) {
            return Ok(existing.clone());
        }
        if let Some(log) = &self.log {
            let mut w = log.lock().unwrap();
            w.write_all(&key)?;
            w.write_all(&(value.total_bits as u64).to_le_bytes())?;
            w.write_all(&(value.symbols.len() as u32).to_le_bytes())?;
            for s in &value.symbols {
                w.write_all(&s.to_le_bytes())?;
            }
        }
        let value = Arc::new(value);
        map.insert(key, value.clone());
        Ok(value)
    }

    pub fn flush(&self) -> Result<()> {
        if let Some(log) = &self.log {
            log.lock().unwrap().flush()?;
        }
        Ok(())
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Drop for SegmentCache {
    fn drop(&mut self) {
        if let Err(e) = self.flush() {
            log::warn!("segment cache flush failed: {e}");
        }
    }
}

fn parse_record(buf: &[u8], pos: usize) -> Option<(CacheKey, PackedBits, usize)> {
    let header = buf.get(pos..pos + 44)?;
    let key: CacheKey = header[..32].try_into().unwrap();
    let total_bits = u64::from_le_bytes(header[32..40].try_into().unwrap()) as usize;
    let count = u32::from_le_bytes(header[40..44].try_into().unwrap()) as usize;
    let body = buf.get(pos + 44..pos + 44 + 4 * count)?;
    let symbols = body
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Some((
        key,
        PackedBits {
            symbols,
            total_bits,
        },
        pos + 44 + 4 * count,
    ))
}
