//! Measurement instruments: compressor stability under deletion noise,
//! collision enumeration for non-invertible compressors, and dataset
//! compression reports.

mod collisions;
mod levenshtein;
mod report;
mod stability;

pub use collisions::{collision_study, lcp_ratio, length_stats, CollisionGroup, CollisionReport};
pub use levenshtein::{levenshtein, normalized_levenshtein, normalized_levenshtein_capped};
pub use report::{compression_report, CompressionReport};
pub use stability::{perturb_delete, stability_study, StabilityReport, DEFAULT_LENGTH_CAP};
