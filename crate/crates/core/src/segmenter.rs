//! Splits documents into independently coded segments.
//!
//! The entropy strategy starts a new segment at position `t >= 1` when the
//! per-byte cross-entropy `h_t` reaches the absolute threshold or the rise
//! `h_t - h_{t-1}` reaches the jump threshold. Thresholds are nearest-rank
//! percentiles of profiles pooled over a calibration sample.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::bytelm::{EntropyProfile, NextByteModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentConfig {
    pub abs_percentile: f64,
    pub jump_percentile: f64,
    /// Bytes drawn (whole documents, in order) for threshold calibration.
    pub calibration_sample: usize,
    pub min_segment_len: usize,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            abs_percentile: 95.0,
            jump_percentile: 95.0,
            calibration_sample: 1 << 20,
            min_segment_len: 1,
        }
    }
}

impl SegmentConfig {
    pub fn validate(&self) -> Result<()> {
        for p in [self.abs_percentile, self.jump_percentile] {
            if !(p > 0.0 && p <= 100.0) {
                return Err(Error::invalid(format!("percentile {p} outside (0, 100]")));
            }
        }
        if self.min_segment_len == 0 {
            return Err(Error::invalid("min_segment_len must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Bits. `f64::INFINITY` disables the criterion.
    #[serde(with = "infinite_as_null")]
    pub theta_abs: f64,
    #[serde(with = "infinite_as_null")]
    pub theta_jump: f64,
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Nearest-rank percentile: the smallest value with at least `p` percent of
/// the sample at or below it.
pub fn nearest_rank(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("percentile of an empty sample"));
    }
    if !(p > 0.0 && p <= 100.0) {
        return Err(Error::invalid(format!("percentile {p} outside (0, 100]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    Ok(sorted[rank.clamp(1, sorted.len()) - 1])
}

pub fn calibrate_thresholds<D, M>(
    sample: &[D],
    model: &M,
    cfg: &SegmentConfig,
) -> Result<Thresholds>
where
    D: AsRef<[u8]>,
    M: NextByteModel + ?Sized,
{
    cfg.validate()?;
    let mut pooled = Vec::new();
    let mut jumps = Vec::new();
    for doc in sample.iter().map(AsRef::as_ref).filter(|d| !d.is_empty()) {
        let profile = model.entropy_profile(doc)?;
        jumps.extend(profile.deltas());
        pooled.extend(profile.h);
    }
    if pooled.is_empty() {
        return Err(Error::EmptyInput("threshold calibration sample"));
    }
    let theta_abs = nearest_rank(&pooled, cfg.abs_percentile)?;
    // single-byte documents only: nothing to jump from
    let theta_jump = if jumps.is_empty() {
        f64::INFINITY
    } else {
        nearest_rank(&jumps, cfg.jump_percentile)?
    };
    Ok(Thresholds {
        theta_abs,
        theta_jump,
    })
}

/// Segment start positions (excluding 0), ascending.
pub fn find_boundaries(
    profile: &EntropyProfile,
    th: &Thresholds,
    min_segment_len: usize,
) -> Vec<usize> {
    let h = &profile.h;
    let mut out = Vec::new();
    let mut last = 0;
    for t in 1..h.len() {
        let hit = h[t] >= th.theta_abs || h[t] - h[t - 1] >= th.theta_jump;
        if hit && t - last >= min_segment_len {
            out.push(t);
            last = t;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentStrategy {
    Entropy {
        thresholds: Thresholds,
        min_segment_len: usize,
    },
    FixedLength {
        len: usize,
    },
    /// Split after every 0x0A.
    Lines,
    Whole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment<'a> {
    pub start: usize,
    pub end: usize,
    pub bytes: &'a [u8],
}

impl Segment<'_> {
    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

fn tile(doc: &[u8], starts: impl IntoIterator<Item = usize>) -> Vec<Segment<'_>> {
    let mut segments = Vec::new();
    let mut start = 0;
    for b in starts.into_iter().chain(std::iter::once(doc.len())) {
        if b > start {
            segments.push(Segment {
                start,
                end: b,
                bytes: &doc[start..b],
            });
            start = b;
        }
    }
    segments
}

pub fn segment<'a, M: NextByteModel + ?Sized>(
    doc: &'a [u8],
    model: &M,
    strategy: &SegmentStrategy,
) -> Result<Vec<Segment<'a>>> {
    if doc.is_empty() {
        return Err(Error::EmptyInput("segmentation of an empty document"));
    }
    let starts: Vec<usize> = match *strategy {
        SegmentStrategy::Entropy {
            thresholds,
            min_segment_len,
        } => {
            let profile = model.entropy_profile(doc)?;
            find_boundaries(&profile, &thresholds, min_segment_len.max(1))
        }
        SegmentStrategy::FixedLength { len } => {
            if len == 0 {
                return Err(Error::invalid("fixed segment length must be positive"));
            }
            (len..doc.len()).step_by(len).collect()
        }
        SegmentStrategy::Lines => doc
            .iter()
            .enumerate()
            .filter(|&(i, &b)| b == b'\n' && i + 1 < doc.len())
            .map(|(i, _)| i + 1)
            .collect(),
        SegmentStrategy::Whole => Vec::new(),
    };
    Ok(tile(doc, starts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bytelm::{ByteModel, UniformModel};
    use proptest::prelude::*;

    fn profile(h: &[f64]) -> EntropyProfile {
        EntropyProfile { h: h.to_vec() }
    }

    fn th(theta_abs: f64, theta_jump: f64) -> Thresholds {
        Thresholds {
            theta_abs,
            theta_jump,
        }
    }

    #[test]
    fn absolute_threshold_example() {
        let b = find_boundaries(&profile(&[0.1, 0.1, 3.0, 0.1]), &th(2.5, f64::INFINITY), 1);
        assert_eq!(b, vec![2]);
    }

    #[test]
    fn jump_threshold_example() {
        let b = find_boundaries(
            &profile(&[1.0, 1.0, 1.0, 5.0, 5.0]),
            &th(f64::INFINITY, 3.0),
            1,
        );
        assert_eq!(b, vec![3]);
    }

    #[test]
    fn quiet_profile_has_no_boundaries() {
        assert!(find_boundaries(&profile(&[0.5, 0.4, 0.6]), &th(2.0, 1.0), 1).is_empty());
    }

    #[test]
    fn min_length_suppresses_close_boundaries() {
        let p = profile(&[0.0, 9.0, 9.0, 9.0, 9.0, 9.0]);
        assert_eq!(
            find_boundaries(&p, &th(5.0, f64::INFINITY), 1),
            vec![1, 2, 3, 4, 5]
        );
        assert_eq!(find_boundaries(&p, &th(5.0, f64::INFINITY), 2), vec![2, 4]);
    }

    #[test]
    fn nearest_rank_examples() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(nearest_rank(&v, 95.0).unwrap(), 95.0);
        assert_eq!(nearest_rank(&v, 100.0).unwrap(), 100.0);
        assert_eq!(nearest_rank(&v, 0.5).unwrap(), 1.0);
        assert!(nearest_rank(&[], 50.0).is_err());
        assert!(nearest_rank(&v, 0.0).is_err());
    }

    #[test]
    fn uniform_model_thresholds() {
        let t = calibrate_thresholds(&["abcdef", "xyz"], &UniformModel, &SegmentConfig::default())
            .unwrap();
        assert_eq!(t.theta_abs, 8.0);
        assert_eq!(t.theta_jump, 0.0);
    }

    #[test]
    fn calibration_requires_data() {
        let empty: [&str; 0] = [];
        assert!(calibrate_thresholds(&empty, &UniformModel, &SegmentConfig::default()).is_err());
        let t =
            calibrate_thresholds(&["a", "b"], &UniformModel, &SegmentConfig::default()).unwrap();
        assert!(t.theta_jump.is_infinite());
    }

    #[test]
    fn thresholds_json_handles_infinity() {
        let t = th(3.5, f64::INFINITY);
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"theta_abs":3.5,"theta_jump":null}"#);
        assert_eq!(serde_json::from_str::<Thresholds>(&json).unwrap(), t);
    }

    #[test]
    fn alternative_strategies() {
        let doc = b"ab\ncd\n\nef";
        let lines: Vec<_> = segment(doc, &UniformModel, &SegmentStrategy::Lines)
            .unwrap()
            .iter()
            .map(|s| s.bytes)
            .collect();
        assert_eq!(lines, vec![&b"ab\n"[..], b"cd\n", b"\n", b"ef"]);
        let fixed = segment(doc, &UniformModel, &SegmentStrategy::FixedLength { len: 4 }).unwrap();
        assert_eq!(
            fixed.iter().map(|s| s.len()).collect::<Vec<_>>(),
            vec![4, 4, 1]
        );
        let whole = segment(doc, &UniformModel, &SegmentStrategy::Whole).unwrap();
        assert_eq!(whole.len(), 1);
        assert_eq!(whole[0].range(), 0..doc.len());
    }

    fn tiles(doc: &[u8], segs: &[Segment<'_>]) -> bool {
        let mut pos = 0;
        for s in segs {
            if s.start != pos || s.end <= s.start || s.bytes != &doc[s.start..s.end] {
                return false;
            }
            pos = s.end;
        }
        pos == doc.len()
    }

    proptest! {
        #[test]
        fn entropy_segments_tile(doc in proptest::collection::vec(any::<u8>(), 1..300), min_len in 1usize..5) {
            let model = ByteModel::fit(&["the cat sat on the mat", "if x:\n    y = 1\n"], 2, 0.1).unwrap();
            let thresholds = calibrate_thresholds(&["the dog sat on a log"], &model, &SegmentConfig::default()).unwrap();
            let segs = segment(&doc, &model, &SegmentStrategy::Entropy { thresholds, min_segment_len: min_len }).unwrap();
            prop_assert!(tiles(&doc, &segs));
            prop_assert!(segs[..segs.len() - 1].iter().all(|s| s.len() >= min_len));
        }

        #[test]
        fn lowering_abs_threshold_adds_boundaries(h in proptest::collection::vec(0.0f64..12.0, 1..100), a in 0.0f64..12.0, b in 0.0f64..12.0, jump in 0.0f64..12.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let p = profile(&h);
            let loose = find_boundaries(&p, &th(lo, jump), 1);
            let strict = find_boundaries(&p, &th(hi, jump), 1);
            prop_assert!(loose.len() >= strict.len());
        }
    }
}
