//! Mixing-rate schedule and the sample-throughput accounting for mixed
//! raw/compressed batches.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear ramp of the mixing rate from `a` to `b` over `steps` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Warmup {
    pub a: f64,
    pub b: f64,
    pub steps: u64,
}

impl Default for Warmup {
    fn default() -> Self {
        Self {
            a: 0.4,
            b: 0.9,
            steps: 10_000,
        }
    }
}

impl FromStr for Warmup {
    type Err = Error;

    /// Parses `a,b,T`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::invalid(format!("warmup must be `a,b,T`, got `{s}`"));
        let [a, b, t] = parts[..] else {
            return Err(bad());
        };
        Ok(Self {
            a: a.parse().map_err(|_| bad())?,
            b: b.parse().map_err(|_| bad())?,
            steps: t.parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    #[default]
    None,
    WarmupOnly,
    AlwaysOn,
}

impl FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Pairing::None),
            "warmup" | "warmup_only" => Ok(Pairing::WarmupOnly),
            "always" | "always_on" => Ok(Pairing::AlwaysOn),
            _ => Err(Error::invalid(format!("unknown pairing mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairOrder {
    #[default]
    Randomized,
    RawFirst,
    CompFirst,
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pairing::None => "none",
            Pairing::WarmupOnly => "warmup",
            Pairing::AlwaysOn => "always",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MixConfig {
    pub r_final: f64,
    pub warmup: Option<Warmup>,
    pub pairing: Pairing,
    pub pair_order: PairOrder,
    pub seed: u64,
    /// Symbols per optimizer step; the schedule advances as views are emitted.
    pub symbols_per_step: u64,
}

impl Default for MixConfig {
    fn default() -> Self {
        Self {
            r_final: 0.9,
            warmup: None,
            pairing: Pairing::None,
            pair_order: PairOrder::Randomized,
            seed: 0,
            symbols_per_step: 65_536,
        }
    }
}

impl MixConfig {
    /// Constant rate `r`, no warmup, no pairing.
    pub fn constant(r: f64, seed: u64) -> Self {
        Self {
            r_final: r,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} = {v} is not a probability")))
            }
        };
        prob("r_final", self.r_final)?;
        if let Some(w) = self.warmup {
            prob("warmup.a", w.a)?;
            prob("warmup.b", w.b)?;
            if w.steps == 0 {
                return Err(Error::invalid("warmup needs at least one step"));
            }
        }
        if self.pairing == Pairing::WarmupOnly && self.warmup.is_none() {
            return Err(Error::invalid(
                "warmup-only pairing requires a warmup schedule",
            ));
        }
        if self.symbols_per_step == 0 {
            return Err(Error::invalid("symbols_per_step must be positive"));
        }
        Ok(())
    }

    pub fn pairing_active(&self, step: u64) -> bool {
        match self.pairing {
            Pairing::None => false,
            Pairing::AlwaysOn => true,
            Pairing::WarmupOnly => self.warmup.is_some_and(|w| step < w.steps),
        }
    }
}

pub fn mix_rate(step: u64, cfg: &MixConfig) -> f64 {
    match cfg.warmup {
        Some(w) if step <= w.steps => {
            let r = w.a + (w.b - w.a) * step as f64 / w.steps as f64;
            r.clamp(w.a.min(w.b), w.a.max(w.b))
        }
        _ => cfg.r_final,
    }
}

/// Pair probability that keeps the compressed share of sources at `r`.
pub fn calibrated_pair_rate(r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::invalid(format!("pairing is undefined at r = {r}")));
    }
    Ok(calibrated_unchecked(r))
}

fn calibrated_unchecked(r: f64) -> f64 {
    if r > 0.5 {
        1.0 / r - 1.0
    } else {
        r / (1.0 - r)
    }
}

/// Documents consumed per fixed symbol budget, relative to raw bytes.
pub fn effective_multiplier(r: f64, c: f64) -> f64 {
    1.0 / (r / c + (1.0 - r))
}

pub fn pairing_multiplier(r: f64, c: f64) -> Result<f64> {
    calibrated_pair_rate(r)?;
    Ok(paired_unchecked(r, c))
}

/// Multiplier with pairing on; the degenerate rates fall back to the
/// unpaired value, which is their limit.
fn paired_unchecked(r: f64, c: f64) -> f64 {
    let rp = calibrated_unchecked(r);
    if r > 0.5 {
        1.0 / (rp + 1.0 / c)
    } else {
        1.0 / (1.0 + rp / c)
    }
}

/// Multiplier for one document emitted at rate `r`.
pub(crate) fn step_multiplier(r: f64, paired: bool, c: f64) -> f64 {
    if paired && r > 0.0 && r < 1.0 {
        paired_unchecked(r, c)
    } else {
        effective_multiplier(r, c)
    }
}

/// Mean multiplier over warmup steps `1..=T`, pairing on, by direct summation.
pub fn warmup_average_multiplier(cfg: &MixConfig, c: f64) -> Result<f64> {
    let w = cfg
        .warmup
        .ok_or_else(|| Error::invalid("warmup average needs a warmup schedule"))?;
    let sum: f64 = (1..=w.steps)
        .map(|i| {
            let r = mix_rate(i, cfg);
            if r >= 1.0 {
                c
            } else if r <= 0.0 {
                1.0
            } else {
                paired_unchecked(r, c)
            }
        })
        .sum();
    Ok(sum / w.steps as f64)
}
