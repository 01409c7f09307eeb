//! Conditional next-byte models.
//!
//! Every model hands out integer frequency tables over the 256 byte values
//! with a fixed total of [`FREQ_TOTAL`]. The arithmetic coder consumes these
//! tables directly, and [`NextByteModel::next_distribution`] reports the same
//! numbers as probabilities, so entropy profiles measure exactly what the
//! coder pays.
//!
//! [`ByteModel`] is an order-k add-α context model with backoff to the
//! longest context that has been observed.
//!
//! # Model file format
//!
//! All integers little-endian.
//!
//! ```text
//! magic      4 bytes  "PXBM"
//! version    u32      1
//! order      u32
//! alpha      u64      IEEE-754 bits of the f64 smoothing constant
//! contexts   u64      number of context records
//! record*    sorted by (context length, context bytes)
//!   len      u8
//!   context  len bytes
//!   entries  u16      number of nonzero counts (1..=256)
//!   entry*   sorted by byte: byte u8, count u32
//! ```

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const FREQ_BITS: u32 = 24;
pub const FREQ_TOTAL: u32 = 1 << FREQ_BITS;

const MODEL_MAGIC: &[u8; 4] = b"PXBM";
const MODEL_VERSION: u32 = 1;

pub const DEFAULT_ORDER: usize = 4;
pub const DEFAULT_ALPHA: f64 = 0.1;

/// Quantized next-byte distribution. Frequencies sum to [`FREQ_TOTAL`].
#[derive(Clone, PartialEq, Eq)]
pub struct FreqTable {
    freqs: [u32; 256],
}

impl std::fmt::Debug for FreqTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let nonzero: Vec<_> = (0..256)
            .filter(|&b| self.freqs[b] > 0)
            .map(|b| (b, self.freqs[b]))
            .collect();
        f.debug_struct("FreqTable")
            .field("nonzero", &nonzero)
            .finish()
    }
}

impl FreqTable {
    pub fn uniform() -> Self {
        Self {
            freqs: [FREQ_TOTAL / 256; 256],
        }
    }

    /// All mass on one byte. Other bytes cannot be coded under this table.
    pub fn certain(byte: u8) -> Self {
        let mut freqs = [0; 256];
        freqs[byte as usize] = FREQ_TOTAL;
        Self { freqs }
    }

    /// Builds a table from raw frequencies that must already sum to
    /// [`FREQ_TOTAL`].
    pub fn from_freqs(freqs: [u32; 256]) -> Result<Self> {
        let sum: u64 = freqs.iter().map(|&f| f as u64).sum();
        if sum != FREQ_TOTAL as u64 {
            return Err(Error::invalid(format!(
                "frequency table sums to {sum}, expected {FREQ_TOTAL}"
            )));
        }
        Ok(Self { freqs })
    }

    /// Quantizes `(count_b + alpha) / (total + 256 alpha)`.
    ///
    /// Every entry is rounded up, so no byte gets less than its smoothed
    /// probability; the surplus comes out of the largest entry.
    fn from_smoothed_counts(counts: &[u32; 256], total: u64, alpha: f64) -> Self {
        let denom = total as f64 + 256.0 * alpha;
        let scale = FREQ_TOTAL as f64 / denom;
        let mut freqs = [0u32; 256];
        let mut sum = 0u64;
        for (f, &c) in freqs.iter_mut().zip(counts.iter()) {
            let q = ((c as f64 + alpha) * scale).ceil().max(1.0) as u32;
            *f = q;
            sum += q as u64;
        }
        let excess = sum - FREQ_TOTAL as u64;
        let mut argmax = 0;
        for b in 1..256 {
            if freqs[b] > freqs[argmax] {
                argmax = b;
            }
        }
        freqs[argmax] -= excess as u32;
        Self { freqs }
    }

    pub fn freq(&self, byte: u8) -> u32 {
        self.freqs[byte as usize]
    }

    pub fn freqs(&self) -> &[u32; 256] {
        &self.freqs
    }

    /// `(cumulative low, cumulative high)` for `byte`.
    pub fn interval(&self, byte: u8) -> (u32, u32) {
        let lo: u32 = self.freqs[..byte as usize].iter().sum();
        (lo, lo + self.freqs[byte as usize])
    }

    /// The byte whose cumulative interval contains `target`, with its interval.
    pub fn lookup(&self, target: u32) -> (u8, u32, u32) {
        debug_assert!(target < FREQ_TOTAL);
        let mut lo = 0;
        for (b, &f) in self.freqs.iter().enumerate() {
            if target < lo + f {
                return (b as u8, lo, lo + f);
            }
            lo += f;
        }
        unreachable!("frequencies sum to FREQ_TOTAL")
    }

    pub fn probability(&self, byte: u8) -> f64 {
        self.freqs[byte as usize] as f64 / FREQ_TOTAL as f64
    }
}

/// Per-byte cross-entropies in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyProfile {
    pub h: Vec<f64>,
}

impl EntropyProfile {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn total_bits(&self) -> f64 {
        self.h.iter().sum()
    }

    /// `h_t - h_{t-1}` for `t >= 1`.
    pub fn deltas(&self) -> impl Iterator<Item = f64> + '_ {
        self.h.windows(2).map(|w| w[1] - w[0])
    }
}

pub trait NextByteModel: Send + Sync {
    /// Distribution of the byte following `context`. The model decides how
    /// much of the context it looks at.
    fn freq_table(&self, context: &[u8]) -> FreqTable;

    fn next_distribution(&self, context: &[u8]) -> [f64; 256] {
        let table = self.freq_table(context);
        let mut out = [0.0; 256];
        for (p, &f) in out.iter_mut().zip(table.freqs.iter()) {
            *p = f as f64 / FREQ_TOTAL as f64;
        }
        out
    }

    /// `h_t = -log2 P(doc_t | doc_<t)` for every position of `doc`.
    fn entropy_profile(&self, doc: &[u8]) -> Result<EntropyProfile> {
        if doc.is_empty() {
            return Err(Error::EmptyInput("entropy profile of an empty document"));
        }
        let h = (0..doc.len())
            .map(|t| {
                let f = self.freq_table(&doc[..t]).freq(doc[t]);
                if f == 0 {
                    f64::INFINITY
                } else {
                    FREQ_BITS as f64 - (f as f64).log2()
                }
            })
            .collect();
        Ok(EntropyProfile { h })
    }
}

impl<M: NextByteModel + ?Sized> NextByteModel for &M {
    fn freq_table(&self, context: &[u8]) -> FreqTable {
        (**self).freq_table(context)
    }
}

impl<M: NextByteModel + ?Sized> NextByteModel for std::sync::Arc<M> {
    fn freq_table(&self, context: &[u8]) -> FreqTable {
        (**self).freq_table(context)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UniformModel;

impl NextByteModel for UniformModel {
    fn freq_table(&self, _context: &[u8]) -> FreqTable {
        FreqTable::uniform()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct ContextCounts {
    total: u64,
    counts: Box<[u32; 256]>,
}

impl ContextCounts {
    fn new() -> Self {
        Self {
            total: 0,
            counts: Box::new([0; 256]),
        }
    }
}

/// Order-k add-α context model.
#[derive(Debug, Clone, PartialEq)]
pub struct ByteModel {
    order: usize,
    alpha: f64,
    contexts: HashMap<Vec<u8>, ContextCounts>,
}

impl ByteModel {
    /// A model with no observations; every distribution is uniform.
    pub fn untrained(order: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!(
                "smoothing must be positive, got {alpha}"
            )));
        }
        if order > u8::MAX as usize {
            return Err(Error::invalid(format!("order {order} exceeds 255")));
        }
        Ok(Self {
            order,
            alpha,
            contexts: HashMap::new(),
        })
    }

    /// Counts every (context, next byte) event of length up to `order + 1`
    /// in every document. Contexts never cross document boundaries.
    pub fn fit<D: AsRef<[u8]>>(corpus: &[D], order: usize, alpha: f64) -> Result<Self> {
        if corpus.iter().all(|d| d.as_ref().is_empty()) {
            return Err(Error::EmptyInput("byte model corpus"));
        }
        let mut model = Self::untrained(order, alpha)?;
        for doc in corpus {
            model.observe(doc.as_ref());
        }
        Ok(model)
    }

    fn observe(&mut self, doc: &[u8]) {
        for t in 0..doc.len() {
            let next = doc[t];
            for k in 0..=self.order.min(t) {
                let ctx = &doc[t - k..t];
                let entry = match self.contexts.get_mut(ctx) {
                    Some(e) => e,
                    None => self
                        .contexts
                        .entry(ctx.to_vec())
                        .or_insert_with(ContextCounts::new),
                };
                entry.total += 1;
                entry.counts[next as usize] += 1;
            }
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn context_count(&self) -> usize {
        self.contexts.len()
    }

    /// Longest suffix of `context` (at most `order` bytes) with observations.
    fn backoff<'a>(&'a self, context: &[u8]) -> Option<&'a ContextCounts> {
        let longest = self.order.min(context.len());
        (0..=longest).rev().find_map(|k| {
            self.contexts
                .get(&context[context.len() - k..])
                .filter(|c| c.total > 0)
        })
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let mut keys: Vec<&Vec<u8>> = self.contexts.keys().collect();
        keys.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        w.write_all(MODEL_MAGIC)?;
        w.write_all(&MODEL_VERSION.to_le_bytes())?;
        w.write_all(&(self.order as u32).to_le_bytes())?;
        w.write_all(&self.alpha.to_bits().to_le_bytes())?;
        w.write_all(&(keys.len() as u64).to_le_bytes())?;
        for key in keys {
            let entry = &self.contexts[key];
            w.write_all(&[key.len() as u8])?;
            w.write_all(key)?;
            let nonzero: Vec<(u8, u32)> = entry
                .counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(b, &c)| (b as u8, c))
                .collect();
            w.write_all(&(nonzero.len() as u16).to_le_bytes())?;
            for (b, c) in nonzero {
                w.write_all(&[b])?;
                w.write_all(&c.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)
            .expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
            let mut buf = [0u8; N];
            r.read_exact(&mut buf)
                .map_err(|e| Error::ModelFormat(format!("truncated model file: {e}")))?;
            Ok(buf)
        }
        if &take::<4, _>(&mut r)? != MODEL_MAGIC {
            return Err(Error::ModelFormat("bad magic".into()));
        }
        let version = u32::from_le_bytes(take(&mut r)?);
        if version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!("unsupported version {version}")));
        }
        let order = u32::from_le_bytes(take(&mut r)?) as usize;
        let alpha = f64::from_bits(u64::from_le_bytes(take(&mut r)?));
        let mut model =
            Self::untrained(order, alpha).map_err(|e| Error::ModelFormat(e.to_string()))?;
        let n = u64::from_le_bytes(take(&mut r)?);
        for _ in 0..n {
            let [len] = take::<1, _>(&mut r)?;
            if len as usize > order {
                return Err(Error::ModelFormat(format!(
                    "context of length {len} exceeds order {order}"
                )));
            }
            let mut key = vec![0u8; len as usize];
            r.read_exact(&mut key)
                .map_err(|e| Error::ModelFormat(format!("truncated context: {e}")))?;
            let entries = u16::from_le_bytes(take(&mut r)?);
            let mut counts = ContextCounts::new();
            for _ in 0..entries {
                let [b] = take::<1, _>(&mut r)?;
                let c = u32::from_le_bytes(take(&mut r)?);
                counts.counts[b as usize] = c;
                counts.total += c as u64;
            }
            if model.contexts.insert(key, counts).is_some() {
                return Err(Error::ModelFormat("duplicate context record".into()));
            }
        }
        Ok(model)
    }
}

impl NextByteModel for ByteModel {
    fn freq_table(&self, context: &[u8]) -> FreqTable {
        match self.backoff(context) {
            Some(c) => FreqTable::from_smoothed_counts(&c.counts, c.total, self.alpha),
            None => FreqTable::uniform(),
        }
    }
}
