//! Batch pipeline behind the `proxymix` binary: configuration, one function
//! per subcommand, and the context pretty-printer.
//!
//! Every function here is deterministic given its configuration; worker
//! count only affects speed.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    collision_study, compression_report, stability_study, CollisionReport, CompressionReport,
    StabilityReport,
};
use crate::bytelm::{ByteModel, NextByteModel};
use crate::coder::{PackingConfig, WindowConfig};
use crate::compressors::{
    compression_rate, BpeTokenizer, GzipCompressor, NeuralCompressor, NeuralConfig, Pretokenizer,
    ProxyCompressor, SegmentCache, TokenEncoding, TokenizerCompressor,
};
use crate::corpus::{read_jsonl, Document};
use crate::error::{Error, Result};
use crate::mixer::{
    build_dataset, read_shard, DatasetConfig, DatasetManifest, MixConfig, PairOrder, Pairing,
    Warmup,
};
use crate::segmenter::{calibrate_thresholds, SegmentConfig, SegmentStrategy};
use crate::vocab::{Sentinel, SymbolClass, VocabLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompressorKind {
    #[default]
    Tokenizer,
    Neural,
    Gzip,
}

impl std::str::FromStr for CompressorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tokenizer" => Ok(Self::Tokenizer),
            "neural" => Ok(Self::Neural),
            "gzip" => Ok(Self::Gzip),
            _ => Err(Error::invalid(format!("unknown compressor `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub tokenizer: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BpeSettings {
    pub vocab_size: u32,
    pub pretokenizer: Pretokenizer,
    pub encoding: TokenEncoding,
}

impl Default for BpeSettings {
    fn default() -> Self {
        Self {
            vocab_size: 1024,
            pretokenizer: Pretokenizer::DefaultRegex,
            encoding: TokenEncoding::TokenIndex,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ByteLmSettings {
    pub order: usize,
    pub alpha: f64,
    /// Every n-th document is held out for evaluation; 0 disables.
    pub heldout_every: usize,
}

impl Default for ByteLmSettings {
    fn default() -> Self {
        Self {
            order: 4,
            alpha: 0.1,
            heldout_every: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    #[default]
    Entropy,
    Fixed,
    Lines,
    Whole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeuralSettings {
    pub strategy: StrategyKind,
    pub fixed_len: usize,
    pub segment: SegmentConfig,
    /// Window size in bits; absent for unwindowed coding.
    pub window_bits: Option<u32>,
    pub packing_bits: u32,
}

impl Default for NeuralSettings {
    fn default() -> Self {
        Self {
            strategy: StrategyKind::Entropy,
            fixed_len: 16,
            segment: SegmentConfig::default(),
            window_bits: Some(16),
            packing_bits: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixSettings {
    pub rate: f64,
    pub warmup: Option<Warmup>,
    pub pairing: Pairing,
    pub pair_order: PairOrder,
    pub symbols_per_step: u64,
    pub context_len: usize,
    pub contexts_per_shard: usize,
}

impl Default for MixSettings {
    fn default() -> Self {
        let m = MixConfig::default();
        let d = DatasetConfig::default();
        Self {
            rate: m.r_final,
            warmup: m.warmup,
            pairing: m.pairing,
            pair_order: m.pair_order,
            symbols_per_step: m.symbols_per_step,
            context_len: d.context_len,
            contexts_per_shard: d.contexts_per_shard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSettings {
    pub frac: f64,
    pub length_cap: usize,
    /// Documents used by stability and collision studies.
    pub sample: usize,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            frac: 0.1,
            length_cap: crate::analysis::DEFAULT_LENGTH_CAP,
            sample: 2000,
        }
    }
}

/// Everything a run needs. Loaded from TOML; command-line flags override.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    /// 0 lets the thread pool decide.
    pub workers: usize,
    pub compressor: CompressorKind,
    pub paths: Paths,
    pub bpe: BpeSettings,
    pub bytelm: ByteLmSettings,
    pub neural: NeuralSettings,
    pub mix: MixSettings,
    pub analysis: AnalysisSettings,
}

impl PipelineConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::invalid(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn mix_config(&self) -> MixConfig {
        MixConfig {
            r_final: self.mix.rate,
            warmup: self.mix.warmup,
            pairing: self.mix.pairing,
            pair_order: self.mix.pair_order,
            seed: self.seed,
            symbols_per_step: self.mix.symbols_per_step,
        }
    }

    pub fn dataset_config(&self) -> DatasetConfig {
        DatasetConfig {
            mix: self.mix_config(),
            context_len: self.mix.context_len,
            contexts_per_shard: self.mix.contexts_per_shard,
        }
    }

    fn required<'a>(&self, p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
        p.as_deref()
            .ok_or_else(|| Error::invalid(format!("no {what} path configured")))
    }

    fn existing<'a>(&self, p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
        let path = self.required(p, what)?;
        if !path.exists() {
            return Err(Error::invalid(format!(
                "{what} {} does not exist",
                path.display()
            )));
        }
        Ok(path)
    }

    pub fn corpus_path(&self) -> Result<&Path> {
        self.existing(&self.paths.corpus, "corpus")
    }

    pub fn out_path(&self) -> Result<&Path> {
        self.required(&self.paths.out, "output")
    }
}

/// Process exit status for a library error: 2 for usage and configuration
/// problems (including missing inputs), 3 for bad data.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::EmptyInput(_) => 2,
        Error::Io(e)
            if matches!(
                e.kind(),
                std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied
            ) =>
        {
            2
        }
        _ => 3,
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

fn load_corpus(cfg: &PipelineConfig) -> Result<Vec<Document>> {
    let docs = read_jsonl(cfg.corpus_path()?)?;
    if docs.is_empty() {
        return Err(Error::EmptyInput("corpus"));
    }
    Ok(docs)
}

/// Creates `path` for writing, along with any missing parent directories.
fn create_output(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(Error::io_at(dir))?;
    }
    Ok(BufWriter::new(
        File::create(path).map_err(Error::io_at(path))?,
    ))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create_output(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainBpeSummary {
    pub requested_vocab: u32,
    pub vocab_size: u32,
    pub merges: usize,
    pub compression_rate: f64,
    pub output: PathBuf,
}

pub fn cmd_train_bpe(cfg: &PipelineConfig) -> Result<TrainBpeSummary> {
    let docs = load_corpus(cfg)?;
    let out = cfg.required(&cfg.paths.tokenizer, "tokenizer")?;
    let tok = BpeTokenizer::train(&docs, cfg.bpe.vocab_size, cfg.bpe.pretokenizer)?;
    let mut w = create_output(out)?;
    w.write_all(tok.to_json().as_bytes())?;
    w.flush()?;
    let comp = TokenizerCompressor::new(Arc::new(tok), TokenEncoding::TokenIndex, None)?;
    Ok(TrainBpeSummary {
        requested_vocab: cfg.bpe.vocab_size,
        vocab_size: comp.tokenizer().vocab_size(),
        merges: comp.tokenizer().merges().len(),
        compression_rate: compression_rate(&comp, &docs)?,
        output: out.to_path_buf(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitByteLmSummary {
    pub order: usize,
    pub alpha: f64,
    pub contexts: usize,
    pub train_docs: usize,
    pub heldout_docs: usize,
    /// Mean cross-entropy in bits per byte on the held-out documents.
    pub heldout_bits_per_byte: Option<f64>,
    pub output: PathBuf,
}

pub fn cmd_fit_bytelm(cfg: &PipelineConfig) -> Result<FitByteLmSummary> {
    let docs = load_corpus(cfg)?;
    let out = cfg.required(&cfg.paths.model, "model")?;
    let every = cfg.bytelm.heldout_every;
    let held = |i: usize| every > 0 && docs.len() > 1 && i % every == every - 1;
    let (mut train, mut heldout) = (Vec::new(), Vec::new());
    for (i, d) in docs.iter().enumerate() {
        if held(i) {
            heldout.push(d)
        } else {
            train.push(d)
        }
    }
    let model = ByteModel::fit(&train, cfg.bytelm.order, cfg.bytelm.alpha)?;
    let mut w = create_output(out)?;
    model.write_to(&mut w)?;
    w.flush()?;

    let (bits, bytes) = heldout
        .par_iter()
        .filter(|d| !d.text.is_empty())
        .map(|d| Ok((model.entropy_profile(d.bytes())?.total_bits(), d.text.len())))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((0.0, 0usize), |(b, n), (db, dn)| (b + db, n + dn));
    Ok(FitByteLmSummary {
        order: model.order(),
        alpha: model.alpha(),
        contexts: model.context_count(),
        train_docs: train.len(),
        heldout_docs: heldout.len(),
        heldout_bits_per_byte: (bytes > 0).then(|| bits / bytes as f64),
        output: out.to_path_buf(),
    })
}

/// A configured compressor of any kind.
pub enum AnyCompressor {
    Tokenizer(TokenizerCompressor),
    Neural(NeuralCompressor),
    Gzip(GzipCompressor),
}

impl AnyCompressor {
    pub fn as_dyn(&self) -> &dyn ProxyCompressor {
        match self {
            AnyCompressor::Tokenizer(c) => c,
            AnyCompressor::Neural(c) => c,
            AnyCompressor::Gzip(c) => c,
        }
    }
}

/// Builds the configured compressor. `corpus` supplies Huffman token
/// frequencies and the threshold calibration sample.
pub fn build_compressor(
    cfg: &PipelineConfig,
    corpus: &[Document],
) -> Result<(AnyCompressor, serde_json::Value)> {
    match cfg.compressor {
        CompressorKind::Gzip => Ok((
            AnyCompressor::Gzip(GzipCompressor::default()),
            serde_json::json!({ "level": 9 }),
        )),
        CompressorKind::Tokenizer => {
            let path = cfg.existing(&cfg.paths.tokenizer, "tokenizer")?;
            let tok = Arc::new(BpeTokenizer::load(path)?);
            let freqs = (cfg.bpe.encoding == TokenEncoding::HuffmanBytes)
                .then(|| TokenizerCompressor::token_frequencies(&tok, corpus));
            let comp = TokenizerCompressor::new(tok, cfg.bpe.encoding, freqs.as_deref())?;
            let params = serde_json::json!({
                "tokenizer_sha256": sha256_file(path)?,
                "vocab_size": comp.tokenizer().vocab_size(),
                "encoding": cfg.bpe.encoding,
            });
            Ok((AnyCompressor::Tokenizer(comp), params))
        }
        CompressorKind::Neural => {
            let path = cfg.existing(&cfg.paths.model, "model")?;
            let file = File::open(path).map_err(Error::io_at(path))?;
            let model = Arc::new(ByteModel::read_from(std::io::BufReader::new(file))?);
            let n = &cfg.neural;
            let strategy = match n.strategy {
                StrategyKind::Entropy => {
                    let mut budget = 0usize;
                    let sample: Vec<&Document> = corpus
                        .iter()
                        .take_while(|d| {
                            let take = budget < n.segment.calibration_sample;
                            budget += d.text.len();
                            take
                        })
                        .collect();
                    SegmentStrategy::Entropy {
                        thresholds: calibrate_thresholds(&sample, &*model, &n.segment)?,
                        min_segment_len: n.segment.min_segment_len,
                    }
                }
                StrategyKind::Fixed => SegmentStrategy::FixedLength { len: n.fixed_len },
                StrategyKind::Lines => SegmentStrategy::Lines,
                StrategyKind::Whole => SegmentStrategy::Whole,
            };
            let config = NeuralConfig {
                strategy,
                window: WindowConfig::try_from(n.window_bits)?,
                packing: PackingConfig::new(n.packing_bits)?,
            };
            let cache = match &cfg.paths.cache {
                Some(p) => SegmentCache::open(p)?,
                None => SegmentCache::new(),
            };
            let params = serde_json::json!({
                "model_sha256": sha256_file(path)?,
                "config": config,
            });
            Ok((
                AnyCompressor::Neural(NeuralCompressor::new(model, config, Arc::new(cache))),
                params,
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressSummary {
    pub compressor: String,
    pub docs: usize,
    pub source_bytes: u64,
    pub symbols: u64,
    pub compression_rate: f64,
    pub output: PathBuf,
}

#[derive(Serialize)]
struct CompressedLine<'a> {
    id: &'a str,
    symbols: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    segments: Option<Vec<crate::compressors::SegmentMeta>>,
}

/// Writes one `{"id", "symbols", "segments"?}` line per document. Segment
/// metadata is included for the neural compressor.
pub fn cmd_compress(cfg: &PipelineConfig) -> Result<CompressSummary> {
    let docs = load_corpus(cfg)?;
    let out = cfg.out_path()?;
    let (comp, _) = build_compressor(cfg, &docs)?;
    let lines: Vec<(Vec<u32>, Option<Vec<_>>)> = docs
        .par_iter()
        .map(|d| match &comp {
            AnyCompressor::Neural(n) => n
                .compress_with_metadata(d.bytes())
                .map(|(s, m)| (s, Some(m))),
            other => other.as_dyn().compress(d.bytes()).map(|s| (s, None)),
        })
        .collect::<Result<_>>()?;
    let mut w = create_output(out)?;
    let mut symbols = 0u64;
    for (d, (s, m)) in docs.iter().zip(lines) {
        symbols += s.len() as u64;
        serde_json::to_writer(
            &mut w,
            &CompressedLine {
                id: &d.id,
                symbols: s,
                segments: m,
            },
        )?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    let source_bytes: u64 = docs.iter().map(|d| d.text.len() as u64).sum();
    Ok(CompressSummary {
        compressor: comp.as_dyn().name().to_string(),
        docs: docs.len(),
        source_bytes,
        symbols,
        compression_rate: source_bytes as f64 / symbols as f64,
        output: out.to_path_buf(),
    })
}

pub const PIPELINE_FILE: &str = "pipeline.toml";

/// Builds shards, sidecar and manifest in the output directory and stores
/// the effective configuration next to them.
pub fn cmd_mix(cfg: &PipelineConfig) -> Result<DatasetManifest> {
    let docs = load_corpus(cfg)?;
    let out = cfg.out_path()?;
    let (comp, params) = build_compressor(cfg, &docs)?;
    let manifest = build_dataset(&docs, comp.as_dyn(), &cfg.dataset_config(), params, out)?;
    fs::write(out.join(PIPELINE_FILE), cfg.to_toml())?;
    Ok(manifest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyzeMode {
    Stability,
    Collisions,
    Report,
}

impl std::str::FromStr for AnalyzeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stability" => Ok(Self::Stability),
            "collisions" => Ok(Self::Collisions),
            "report" => Ok(Self::Report),
            _ => Err(Error::invalid(format!("unknown analysis `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnalysisOutput {
    Stability(StabilityReport),
    Collisions(CollisionReport),
    Report(CompressionReport),
}

/// Runs one analysis. Stability and collision studies read the first
/// `analysis.sample` corpus documents; the report reads the dataset in the
/// output directory.
pub fn cmd_analyze(cfg: &PipelineConfig, mode: AnalyzeMode) -> Result<AnalysisOutput> {
    if mode == AnalyzeMode::Report {
        return Ok(AnalysisOutput::Report(cmd_report(cfg.out_path()?)?));
    }
    let docs = load_corpus(cfg)?;
    let sample = &docs[..docs.len().min(cfg.analysis.sample)];
    let (comp, _) = build_compressor(cfg, &docs)?;
    Ok(match mode {
        AnalyzeMode::Stability => AnalysisOutput::Stability(stability_study(
            sample,
            comp.as_dyn(),
            cfg.analysis.frac,
            cfg.seed,
            cfg.analysis.length_cap,
        )?),
        AnalyzeMode::Collisions => {
            AnalysisOutput::Collisions(collision_study(sample, comp.as_dyn())?)
        }
        AnalyzeMode::Report => unreachable!(),
    })
}

pub fn cmd_report(dataset_dir: &Path) -> Result<CompressionReport> {
    compression_report(dataset_dir)
}

pub fn save_report<T: Serialize>(path: &Path, report: &T) -> Result<()> {
    write_json(path, report)
}

/// Renders context `context` of shard `shard` in the dataset at `dir`.
pub fn cmd_inspect(dir: &Path, shard: usize, context: usize, color: bool) -> Result<String> {
    let m = DatasetManifest::load(dir)?;
    let entry = m
        .shards
        .get(shard)
        .ok_or_else(|| Error::invalid(format!("dataset has {} shards", m.shards.len())))?;
    let s = read_shard(&dir.join(&entry.file))?;
    let symbols = s
        .contexts
        .get(context)
        .ok_or_else(|| Error::invalid(format!("shard has {} contexts", s.contexts.len())))?;
    Ok(render_context(symbols, &m.layout.to_layout()?, color))
}

const SENTINEL_STYLE: &str = "\x1b[1;33m";
const COMP_STYLE: &str = "\x1b[36m";
const PAD_STYLE: &str = "\x1b[2m";
const RESET: &str = "\x1b[0m";

/// Sentinels as `<raw>`, bytes as escaped text, compressed symbols as
/// `[local id]`. Runs of padding collapse to one marker.
pub fn render_context(symbols: &[u32], layout: &VocabLayout, color: bool) -> String {
    let paint = |out: &mut String, style: &str, text: &str| {
        if color {
            let _ = write!(out, "{style}{text}{RESET}");
        } else {
            out.push_str(text);
        }
    };
    let mut out = String::new();
    let mut i = 0;
    while i < symbols.len() {
        match layout.classify(symbols[i]) {
            Ok(SymbolClass::Sentinel(Some(Sentinel::DocSep))) => {
                let run = symbols[i..]
                    .iter()
                    .take_while(|&&s| s == Sentinel::DocSep.id())
                    .count();
                paint(&mut out, PAD_STYLE, &format!("<docsep x{run}>"));
                i += run;
                continue;
            }
            Ok(SymbolClass::Sentinel(Some(s))) => {
                paint(&mut out, SENTINEL_STYLE, &format!("<{}>", s.name()))
            }
            Ok(SymbolClass::Sentinel(None)) => {
                paint(&mut out, SENTINEL_STYLE, &format!("<s{}>", symbols[i]))
            }
            Ok(SymbolClass::Byte(b)) => match b {
                b'\n' => out.push_str("\\n\n"),
                _ => {
                    let _ = write!(out, "{}", [b].escape_ascii());
                }
            },
            Ok(SymbolClass::Compressed(c)) => paint(&mut out, COMP_STYLE, &format!("[{c}]")),
            Err(_) => paint(
                &mut out,
                SENTINEL_STYLE,
                &format!("<invalid {}>", symbols[i]),
            ),
        }
        i += 1;
    }
    out
}
