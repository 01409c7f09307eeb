//! Mixed raw/compressed training streams: per-document representation
//! choice, sentinel framing, translation pairs, context packing and shards.

mod dataset;
mod pack;
mod rate;
mod shard;
mod views;

pub use dataset::{
    account, build_dataset, plan_dataset, Accounting, CompressorInfo, DatasetConfig,
    DatasetManifest, DatasetPlan, ShardEntry, ViewCounts, BOUNDARIES_FILE, MANIFEST_FILE,
};
pub use pack::{
    build_oracle_translation_prompt, pack_contexts, Boundary, ContextPacker, PackedContext,
};
pub use rate::{
    calibrated_pair_rate, effective_multiplier, mix_rate, pairing_multiplier,
    warmup_average_multiplier, MixConfig, PairOrder, Pairing, Warmup,
};
pub use shard::{
    encode_shard, parse_shard, read_shard, write_shard, Shard, ShardHeader, HEADER_LEN,
    SHARD_MAGIC, SHARD_VERSION,
};
pub use views::{
    assign_views, comp_frame, compress_corpus, doc_rng, raw_frame, DocumentView, ViewKind,
};
