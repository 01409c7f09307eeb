//! Model-driven arithmetic coding with equal-information windows.
//!
//! A document is coded as a sequence of runs. Each run restarts the coder
//! and the model context. After every byte the encoder checks whether the
//! bits left over from the previous window plus the current run's
//! terminated length reach `tau`; if so the run is terminated and its bits
//! are appended to the stream, which is cut into `tau`-bit windows. Bits
//! past the last full window carry into the next one.
//!
//! Because termination is self-delimiting and the decoder tracks the same
//! interval state, the decoder can replay every run boundary from the bits,
//! the model and the document length alone.

mod arith;
pub mod packing;

pub use arith::{Bits, BitsSlice, Decoder, Encoder};
pub use packing::{pack_bits, unpack_bits, PackedBits, PackingConfig};

use serde::{Deserialize, Serialize};

use crate::bytelm::NextByteModel;
use crate::error::{Error, Result};

/// Equal-information window size in bits, or no windowing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Option<u32>", into = "Option<u32>")]
pub struct WindowConfig {
    tau: Option<u32>,
}

impl TryFrom<Option<u32>> for WindowConfig {
    type Error = Error;

    fn try_from(tau: Option<u32>) -> Result<Self> {
        match tau {
            Some(t) => Self::bits(t),
            None => Ok(Self::UNWINDOWED),
        }
    }
}

impl From<WindowConfig> for Option<u32> {
    fn from(w: WindowConfig) -> Self {
        w.tau
    }
}

impl WindowConfig {
    pub const UNWINDOWED: WindowConfig = WindowConfig { tau: None };

    pub fn bits(tau: u32) -> Result<Self> {
        if tau == 0 {
            return Err(Error::invalid("window size must be at least one bit"));
        }
        Ok(Self { tau: Some(tau) })
    }

    pub fn tau(&self) -> Option<u32> {
        self.tau
    }
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { tau: Some(16) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowedCode {
    pub windows: Vec<Bits>,
    pub bits_per_window: Option<u32>,
    pub total_bits: usize,
    /// Bytes of each run credited to the window holding the run's last bit.
    pub consumed_bytes_per_window: Vec<usize>,
}

impl WindowedCode {
    /// Builds a code from a flat bitstream, re-cutting it into windows.
    /// Per-window byte counts are not recoverable and are left empty.
    pub fn from_bits(bits: Bits, window: WindowConfig) -> Self {
        let total_bits = bits.len();
        let windows = match window.tau {
            Some(tau) if total_bits > 0 => {
                bits.chunks(tau as usize).map(|c| c.to_bitvec()).collect()
            }
            _ => vec![bits],
        };
        Self {
            windows,
            bits_per_window: window.tau,
            total_bits,
            consumed_bytes_per_window: Vec::new(),
        }
    }

    pub fn bits(&self) -> Bits {
        let mut all = Bits::with_capacity(self.total_bits);
        for w in &self.windows {
            all.extend_from_bitslice(w);
        }
        all
    }

    pub fn window_config(&self) -> WindowConfig {
        WindowConfig {
            tau: self.bits_per_window,
        }
    }
}

pub fn ac_encode<M: NextByteModel + ?Sized>(
    doc: &[u8],
    model: &M,
    window: WindowConfig,
) -> Result<WindowedCode> {
    if doc.is_empty() {
        return Err(Error::EmptyInput("arithmetic coding of an empty document"));
    }
    let mut stream = Bits::new();
    // (stream length after the run, bytes in the run)
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut enc = Encoder::new();
    let mut run_start = 0;
    for t in 0..doc.len() {
        enc.encode(&model.freq_table(&doc[run_start..t]), doc[t])?;
        let close = match window.tau {
            Some(tau) => {
                let carry = stream.len() % tau as usize;
                carry + enc.terminated_len() >= tau as usize
            }
            None => false,
        };
        if close || t + 1 == doc.len() {
            let run = std::mem::take(&mut enc).finish();
            stream.extend_from_bitslice(&run);
            runs.push((stream.len(), t + 1 - run_start));
            run_start = t + 1;
        }
    }

    let mut code = WindowedCode::from_bits(stream, window);
    code.consumed_bytes_per_window = vec![0; code.windows.len()];
    for (end, bytes) in runs {
        let idx = match window.tau {
            Some(tau) if end > 0 => (end - 1) / tau as usize,
            _ => 0,
        };
        code.consumed_bytes_per_window[idx] += bytes;
    }
    Ok(code)
}

/// Inverse of [`ac_encode`]. Needs the same model and the source length;
/// neither is recorded in the code itself.
pub fn ac_decode<M: NextByteModel + ?Sized>(
    code: &WindowedCode,
    model: &M,
    byte_len: usize,
) -> Result<Vec<u8>> {
    let bits = code.bits();
    let total = bits.len();
    if total != code.total_bits {
        return Err(Error::Decode(format!(
            "windows hold {total} bits but the code claims {}",
            code.total_bits
        )));
    }
    let mut out = Vec::with_capacity(byte_len);
    let mut pos = 0usize;
    while out.len() < byte_len {
        let mut dec = Decoder::new(&bits, pos);
        let run_start = out.len();
        loop {
            let byte = dec.decode(&model.freq_table(&out[run_start..]));
            out.push(byte);
            let len = dec.terminated_len();
            let close = match code.bits_per_window {
                Some(tau) => pos % tau as usize + len >= tau as usize,
                None => false,
            };
            if close || out.len() == byte_len {
                pos += len;
                break;
            }
        }
        if pos > total {
            return Err(Error::Decode(format!(
                "run ends at bit {pos} past the end of a {total}-bit code"
            )));
        }
    }
    if pos != total {
        return Err(Error::Decode(format!(
            "decoded {byte_len} bytes from {pos} of {total} bits"
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bytelm::{ByteModel, FreqTable, UniformModel};
    use proptest::prelude::*;

    struct Certain(u8);

    impl NextByteModel for Certain {
        fn freq_table(&self, _: &[u8]) -> FreqTable {
            FreqTable::certain(self.0)
        }
    }

    fn fixture_model() -> ByteModel {
        ByteModel::fit(
            &[
                "def add(a, b):\n    return a + b\n",
                "def sub(a, b):\n    return a - b\n",
                "for i in range(10):\n    print(i)\n",
            ],
            3,
            0.1,
        )
        .unwrap()
    }

    #[test]
    fn zero_entropy_source_is_free() {
        let code = ac_encode(b"aaaa", &Certain(b'a'), WindowConfig::UNWINDOWED).unwrap();
        assert!(code.total_bits <= 2);
        assert_eq!(ac_decode(&code, &Certain(b'a'), 4).unwrap(), b"aaaa");
    }

    #[test]
    fn uniform_four_bytes() {
        let code = ac_encode(b"wxyz", &UniformModel, WindowConfig::UNWINDOWED).unwrap();
        assert!((32..=34).contains(&code.total_bits));
        assert_eq!(code.windows.len(), 1);
        assert_eq!(code.consumed_bytes_per_window, vec![4]);
    }

    #[test]
    fn uniform_windows_hold_two_bytes_at_sixteen_bits() {
        let doc = b"0123456789";
        let code = ac_encode(doc, &UniformModel, WindowConfig::bits(16).unwrap()).unwrap();
        assert_eq!(code.windows.len(), 5);
        assert!(code.windows.iter().all(|w| w.len() == 16));
        assert_eq!(code.consumed_bytes_per_window, vec![2; 5]);
        assert_eq!(ac_decode(&code, &UniformModel, doc.len()).unwrap(), doc);
    }

    #[test]
    fn windows_are_exactly_tau() {
        let model = fixture_model();
        let doc = b"def mul(a, b):\n    return a * b\n# trailing comment \xff\x00";
        for tau in [1, 3, 8, 16, 32] {
            let code = ac_encode(doc, &model, WindowConfig::bits(tau).unwrap()).unwrap();
            let (last, full) = code.windows.split_last().unwrap();
            assert!(full.iter().all(|w| w.len() == tau as usize));
            assert!(last.len() <= tau as usize);
            assert_eq!(
                code.consumed_bytes_per_window.iter().sum::<usize>(),
                doc.len()
            );
            assert_eq!(ac_decode(&code, &model, doc.len()).unwrap(), doc);
        }
    }

    #[test]
    fn wrong_length_is_detected() {
        let model = fixture_model();
        let doc = b"return a + b";
        let code = ac_encode(doc, &model, WindowConfig::bits(16).unwrap()).unwrap();
        for len in [doc.len() + 3, doc.len() + 40] {
            match ac_decode(&code, &model, len) {
                Ok(out) => assert_ne!(out, doc),
                Err(e) => assert!(matches!(e, Error::Decode(_))),
            }
        }
    }

    #[test]
    fn empty_document_rejected() {
        assert!(ac_encode(b"", &UniformModel, WindowConfig::UNWINDOWED).is_err());
    }

    proptest! {
        #[test]
        fn lossless(doc in proptest::collection::vec(any::<u8>(), 1..200), tau in prop_oneof![Just(None), (1u32..40).prop_map(Some)]) {
            let model = fixture_model();
            let w = match tau { Some(t) => WindowConfig::bits(t).unwrap(), None => WindowConfig::UNWINDOWED };
            let code = ac_encode(&doc, &model, w).unwrap();
            prop_assert_eq!(ac_decode(&code, &model, doc.len()).unwrap(), doc);
        }

        #[test]
        fn unwindowed_length_tracks_entropy(doc in proptest::collection::vec(any::<u8>(), 1..200)) {
            let model = fixture_model();
            let code = ac_encode(&doc, &model, WindowConfig::UNWINDOWED).unwrap();
            let h = model.entropy_profile(&doc).unwrap().total_bits();
            prop_assert!((code.total_bits as f64) <= h + 2.0 + 1e-9);
            prop_assert!((code.total_bits as f64) >= h - 1e-6);
        }
    }
}
