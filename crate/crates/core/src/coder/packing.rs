//! Bitstream to fixed-width symbol packing. Big-endian within each symbol;
//! the final chunk is zero-padded on the right and the padding is excluded
//! from `total_bits`.

use bitvec::prelude::*;
use serde::{Deserialize, Serialize};

use super::arith::{Bits, BitsSlice};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct PackingConfig {
    bits_per_symbol: u32,
}

impl TryFrom<u32> for PackingConfig {
    type Error = Error;

    fn try_from(n: u32) -> Result<Self> {
        Self::new(n)
    }
}

impl From<PackingConfig> for u32 {
    fn from(p: PackingConfig) -> u32 {
        p.bits_per_symbol
    }
}

impl PackingConfig {
    pub fn new(bits_per_symbol: u32) -> Result<Self> {
        match bits_per_symbol {
            8 | 16 => Ok(Self { bits_per_symbol }),
            n => Err(Error::invalid(format!(
                "packing width {n} unsupported (use 8 or 16)"
            ))),
        }
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    pub fn vocab_size(&self) -> u32 {
        1 << self.bits_per_symbol
    }
}

impl Default for PackingConfig {
    fn default() -> Self {
        Self {
            bits_per_symbol: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PackedBits {
    pub symbols: Vec<u32>,
    pub total_bits: usize,
}

pub fn pack_bits(bits: &BitsSlice, p: PackingConfig) -> PackedBits {
    let n = p.bits_per_symbol as usize;
    let symbols = bits
        .chunks(n)
        .map(|chunk| {
            let v: u32 = chunk.load_be();
            v << (n - chunk.len())
        })
        .collect();
    PackedBits {
        symbols,
        total_bits: bits.len(),
    }
}

pub fn unpack_bits(symbols: &[u32], total_bits: usize, p: PackingConfig) -> Result<Bits> {
    let n = p.bits_per_symbol as usize;
    let needed = total_bits.div_ceil(n);
    if needed != symbols.len() {
        return Err(Error::invalid(format!(
            "{total_bits} bits need {needed} symbols of {n} bits, got {}",
            symbols.len()
        )));
    }
    let mut out = Bits::with_capacity(symbols.len() * n);
    for &s in symbols {
        if s >= p.vocab_size() {
            return Err(Error::invalid(format!(
                "symbol {s} does not fit in {n} bits"
            )));
        }
        let start = out.len();
        out.resize(start + n, false);
        out[start..].store_be(s);
    }
    out.truncate(total_bits);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits_of(s: &str) -> Bits {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn forty_bits_into_three_symbols() {
        let bits: Bits = (0..40).map(|i| i % 3 == 0).collect();
        let packed = pack_bits(&bits, PackingConfig::default());
        assert_eq!(packed.symbols.len(), 3);
        assert_eq!(packed.total_bits, 40);
        assert_eq!(packed.symbols[2] & 0xFF, 0);
    }

    #[test]
    fn exact_fit() {
        let bits = bits_of("1011111011101111");
        assert_eq!(
            pack_bits(&bits, PackingConfig::default()).symbols,
            vec![0xBEEF]
        );
    }

    #[test]
    fn unpack_examples() {
        let p = PackingConfig::default();
        assert_eq!(
            unpack_bits(&[0x0001], 16, p).unwrap(),
            bits_of("0000000000000001")
        );
        assert_eq!(unpack_bits(&[0x8000], 1, p).unwrap(), bits_of("1"));
        assert!(unpack_bits(&[0x8000, 0], 1, p).is_err());
        assert!(unpack_bits(&[0x8000], 17, p).is_err());
        assert!(unpack_bits(&[0x1_0000], 16, p).is_err());
    }

    #[test]
    fn empty_stream() {
        let packed = pack_bits(&Bits::new(), PackingConfig::default());
        assert!(packed.symbols.is_empty());
        assert!(unpack_bits(&[], 0, PackingConfig::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn unsupported_width() {
        assert!(PackingConfig::new(12).is_err());
        assert_eq!(PackingConfig::new(8).unwrap().vocab_size(), 256);
    }

    proptest! {
        #[test]
        fn roundtrip(bits in proptest::collection::vec(any::<bool>(), 0..300), wide in any::<bool>()) {
            let p = PackingConfig::new(if wide { 16 } else { 8 }).unwrap();
            let bits: Bits = bits.into_iter().collect();
            let packed = pack_bits(&bits, p);
            prop_assert_eq!(unpack_bits(&packed.symbols, packed.total_bits, p).unwrap(), bits);
        }
    }
}
