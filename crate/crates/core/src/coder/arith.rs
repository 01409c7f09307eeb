//! Binary arithmetic coder over 62-bit integer intervals.
//!
//! Underflow is handled with pending bits (the bitwise form of carry
//! propagation). Interval products are taken in 128-bit arithmetic so the
//! full [`FREQ_TOTAL`](crate::bytelm::FREQ_TOTAL) resolution is kept.
//!
//! Termination emits the shortest bit string whose every continuation stays
//! inside the final interval. The code is therefore self-delimiting: a
//! decoder may read whatever follows it (zero padding or the next run's
//! code) and still recover the same symbols.

use bitvec::prelude::*;

use crate::bytelm::{FreqTable, FREQ_TOTAL};
use crate::error::{Error, Result};

pub type Bits = BitVec<u8, Msb0>;
pub type BitsSlice = BitSlice<u8, Msb0>;

const PRECISION: u32 = 62;
const FULL: u64 = 1 << PRECISION;
const HALF: u64 = FULL / 2;
const QUARTER: u64 = FULL / 4;
const THREE_QUARTERS: u64 = HALF + QUARTER;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shift {
    /// Interval in the lower half; a 0 bit is settled.
    Lower,
    /// Interval in the upper half; a 1 bit is settled.
    Upper,
    /// Interval straddles the midpoint inside the middle half.
    Middle,
}

/// Interval state shared by encoder and decoder. Both sides evolve it
/// identically, which lets the decoder know how long the encoder's
/// terminated output was at any point.
#[derive(Debug, Clone)]
struct Interval {
    low: u64,
    high: u64,
    pending: usize,
    settled: usize,
}

impl Interval {
    fn new() -> Self {
        Self {
            low: 0,
            high: FULL - 1,
            pending: 0,
            settled: 0,
        }
    }

    /// Narrows to `[cum_lo, cum_hi)` out of `FREQ_TOTAL` and renormalizes.
    /// `on_shift` sees each shift together with the pending count before
    /// the shift was applied.
    fn narrow(&mut self, cum_lo: u32, cum_hi: u32, mut on_shift: impl FnMut(Shift, usize)) {
        debug_assert!(cum_lo < cum_hi && cum_hi <= FREQ_TOTAL);
        let range = (self.high - self.low + 1) as u128;
        let total = FREQ_TOTAL as u128;
        self.high = self.low + (range * cum_hi as u128 / total) as u64 - 1;
        self.low += (range * cum_lo as u128 / total) as u64;
        loop {
            let shift = if self.high < HALF {
                Shift::Lower
            } else if self.low >= HALF {
                self.low -= HALF;
                self.high -= HALF;
                Shift::Upper
            } else if self.low >= QUARTER && self.high < THREE_QUARTERS {
                self.low -= QUARTER;
                self.high -= QUARTER;
                Shift::Middle
            } else {
                break;
            };
            on_shift(shift, self.pending);
            match shift {
                Shift::Middle => self.pending += 1,
                _ => {
                    self.settled += 1 + self.pending;
                    self.pending = 0;
                }
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
        }
    }

    /// Termination suffix in scaled coordinates: `None` when nothing needs
    /// to be written, otherwise the leading bit (pending bits follow it,
    /// inverted) and an optional trailing bit.
    fn tail(&self) -> Option<(bool, Option<bool>)> {
        if self.pending == 0 && self.low == 0 && self.high == FULL - 1 {
            None
        } else if self.low == 0 && self.high >= HALF - 1 {
            Some((false, None))
        } else if self.high == FULL - 1 && self.low <= HALF {
            Some((true, None))
        } else if self.low <= QUARTER {
            Some((false, Some(true)))
        } else {
            Some((true, Some(false)))
        }
    }

    fn terminated_len(&self) -> usize {
        let tail = match self.tail() {
            None => 0,
            Some((_, None)) => 1 + self.pending,
            Some((_, Some(_))) => 2 + self.pending,
        };
        self.settled + tail
    }
}

#[derive(Debug, Clone)]
pub struct Encoder {
    state: Interval,
    out: Bits,
}

impl Default for Encoder {
    fn default() -> Self {
        Self::new()
    }
}

impl Encoder {
    pub fn new() -> Self {
        Self {
            state: Interval::new(),
            out: Bits::new(),
        }
    }

    pub fn encode(&mut self, table: &FreqTable, byte: u8) -> Result<()> {
        let (lo, hi) = table.interval(byte);
        if lo == hi {
            return Err(Error::invalid(format!(
                "byte 0x{byte:02x} has zero probability under the model"
            )));
        }
        let out = &mut self.out;
        self.state.narrow(lo, hi, |shift, pending| {
            let bit = match shift {
                Shift::Lower => false,
                Shift::Upper => true,
                Shift::Middle => return,
            };
            out.push(bit);
            out.extend(std::iter::repeat_n(!bit, pending));
        });
        Ok(())
    }

    /// Length the output would have if the coder were finished now.
    pub fn terminated_len(&self) -> usize {
        self.state.terminated_len()
    }

    pub fn finish(mut self) -> Bits {
        if let Some((lead, trail)) = self.state.tail() {
            self.out.push(lead);
            self.out
                .extend(std::iter::repeat_n(!lead, self.state.pending));
            if let Some(t) = trail {
                self.out.push(t);
            }
        }
        debug_assert_eq!(self.out.len(), self.state.terminated_len());
        self.out
    }
}

/// Reads a code starting at a given bit offset. Bits past the end of the
/// slice read as zero.
#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    bits: &'a BitsSlice,
    next: usize,
    value: u64,
    state: Interval,
}

impl<'a> Decoder<'a> {
    pub fn new(bits: &'a BitsSlice, start: usize) -> Self {
        let mut dec = Self {
            bits,
            next: start,
            value: 0,
            state: Interval::new(),
        };
        for _ in 0..PRECISION {
            dec.value = (dec.value << 1) | dec.read_bit();
        }
        dec
    }

    fn read_bit(&mut self) -> u64 {
        let bit = self.bits.get(self.next).map_or(0, |b| *b as u64);
        self.next += 1;
        bit
    }

    pub fn decode(&mut self, table: &FreqTable) -> u8 {
        let range = (self.state.high - self.state.low + 1) as u128;
        let offset = (self.value - self.state.low + 1) as u128;
        let target = ((offset * FREQ_TOTAL as u128 - 1) / range) as u32;
        let (byte, lo, hi) = table.lookup(target);
        let Decoder {
            bits,
            next,
            value,
            state,
        } = self;
        state.narrow(lo, hi, |shift, _| {
            match shift {
                Shift::Lower => {}
                Shift::Upper => *value -= HALF,
                Shift::Middle => *value -= QUARTER,
            }
            let bit = bits.get(*next).map_or(0, |b| *b as u64);
            *next += 1;
            *value = (*value << 1) | bit;
        });
        byte
    }

    /// Length of the encoder's terminated output for the symbols decoded so
    /// far.
    pub fn terminated_len(&self) -> usize {
        self.state.terminated_len()
    }
}
