use std::io::{IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use proxymix::cli::{self, AnalyzeMode, CompressorKind, PipelineConfig, StrategyKind};
use proxymix::compressors::{Pretokenizer, TokenEncoding};
use proxymix::mixer::{Pairing, Warmup};

#[derive(Parser)]
#[command(
    name = "proxymix",
    version,
    about = "Mixed raw/compressed training data pipeline"
)]
struct Cli {
    /// TOML pipeline configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for per-document work (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// JSONL corpus with `id` and `text` fields.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CompressorArgs {
    /// tokenizer, neural or gzip.
    #[arg(long, value_parser = parse::<CompressorKind>)]
    compressor: Option<CompressorKind>,
    #[arg(long)]
    tokenizer: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Persistent segment cache for the neural compressor.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// index, fixed, huffman or gray.
    #[arg(long, value_parser = parse::<TokenEncoding>)]
    encoding: Option<TokenEncoding>,
    /// entropy, fixed, lines or whole.
    #[arg(long, value_parser = parse_strategy)]
    segmentation: Option<StrategyKind>,
    /// Window size in bits, or `none`.
    #[arg(long)]
    window: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a BPE tokenizer on the corpus.
    TrainBpe {
        #[arg(long)]
        vocab_size: Option<u32>,
        /// default or line.
        #[arg(long, value_parser = parse::<Pretokenizer>)]
        pretokenizer: Option<Pretokenizer>,
        /// Output tokenizer JSON.
        #[arg(long)]
        tokenizer: Option<PathBuf>,
    },
    /// Fit the order-k byte model.
    FitBytelm {
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Output model file.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Compress every corpus document to a JSONL file.
    Compress {
        #[command(flatten)]
        comp: CompressorArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build packed mixed-representation shards.
    Mix {
        #[command(flatten)]
        comp: CompressorArgs,
        /// Final mixing rate r.
        #[arg(long)]
        rate: Option<f64>,
        /// a,b,T
        #[arg(long, value_parser = parse::<Warmup>)]
        warmup: Option<Warmup>,
        /// none, warmup or always.
        #[arg(long, value_parser = parse::<Pairing>)]
        pairing: Option<Pairing>,
        #[arg(long)]
        context_len: Option<usize>,
        #[arg(long)]
        contexts_per_shard: Option<usize>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// stability, collisions or report.
    Analyze {
        #[arg(value_parser = parse::<AnalyzeMode>)]
        mode: AnalyzeMode,
        #[command(flatten)]
        comp: CompressorArgs,
        #[arg(long)]
        frac: Option<f64>,
        #[arg(long)]
        sample: Option<usize>,
        /// Dataset directory (for `report`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Collision group-size histogram as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compression report for a dataset directory.
    Report {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pretty-print one packed context.
    Inspect {
        /// Dataset directory.
        dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        shard: usize,
        #[arg(long, default_value_t = 0)]
        context: usize,
        #[arg(long)]
        no_color: bool,
    },
}

fn parse<T: std::str::FromStr<Err = proxymix::Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: proxymix::Error| e.to_string())
}

fn parse_strategy(s: &str) -> std::result::Result<StrategyKind, String> {
    match s {
        "entropy" => Ok(StrategyKind::Entropy),
        "fixed" => Ok(StrategyKind::Fixed),
        "lines" => Ok(StrategyKind::Lines),
        "whole" => Ok(StrategyKind::Whole),
        _ => Err(format!("unknown segmentation `{s}`")),
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_opt<T>(slot: &mut Option<T>, v: Option<T>) {
    if v.is_some() {
        *slot = v;
    }
}

impl CompressorArgs {
    fn apply(self, cfg: &mut PipelineConfig) -> Result<()> {
        set(&mut cfg.compressor, self.compressor);
        set_opt(&mut cfg.paths.tokenizer, self.tokenizer);
        set_opt(&mut cfg.paths.model, self.model);
        set_opt(&mut cfg.paths.cache, self.cache);
        set(&mut cfg.bpe.encoding, self.encoding);
        set(&mut cfg.neural.strategy, self.segmentation);
        if let Some(w) = self.window {
            cfg.neural.window_bits = match w.as_str() {
                "none" => None,
                n => Some(n.parse().with_context(|| format!("bad --window `{n}`"))?),
            };
        }
        Ok(())
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    emit(&serde_json::to_string_pretty(v)?)
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => PipelineConfig::default(),
    };
    set(&mut cfg.seed, cli.seed);
    set(&mut cfg.workers, cli.workers);
    set_opt(&mut cfg.paths.corpus, cli.corpus);
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build_global()?;

    match cli.command {
        Command::TrainBpe {
            vocab_size,
            pretokenizer,
            tokenizer,
        } => {
            set(&mut cfg.bpe.vocab_size, vocab_size);
            set(&mut cfg.bpe.pretokenizer, pretokenizer);
            set_opt(&mut cfg.paths.tokenizer, tokenizer);
            print_json(&cli::cmd_train_bpe(&cfg)?)
        }
        Command::FitBytelm {
            order,
            alpha,
            model,
        } => {
            set(&mut cfg.bytelm.order, order);
            set(&mut cfg.bytelm.alpha, alpha);
            set_opt(&mut cfg.paths.model, model);
            print_json(&cli::cmd_fit_bytelm(&cfg)?)
        }
        Command::Compress { comp, out } => {
            comp.apply(&mut cfg)?;
            set_opt(&mut cfg.paths.out, out);
            print_json(&cli::cmd_compress(&cfg)?)
        }
        Command::Mix {
            comp,
            rate,
            warmup,
            pairing,
            context_len,
            contexts_per_shard,
            out,
        } => {
            comp.apply(&mut cfg)?;
            set(&mut cfg.mix.rate, rate);
            set_opt(&mut cfg.mix.warmup, warmup);
            set(&mut cfg.mix.pairing, pairing);
            set(&mut cfg.mix.context_len, context_len);
            set(&mut cfg.mix.contexts_per_shard, contexts_per_shard);
            set_opt(&mut cfg.paths.out, out);
            let m = cli::cmd_mix(&cfg)?;
            print_json(&serde_json::json!({
                "contexts": m.contexts,
                "shards": m.shards.len(),
                "views": m.views,
                "accounting": m.accounting,
            }))
        }
        Command::Analyze {
            mode,
            comp,
            frac,
            sample,
            out,
            report,
            csv,
        } => {
            comp.apply(&mut cfg)?;
            set(&mut cfg.analysis.frac, frac);
            set(&mut cfg.analysis.sample, sample);
            set_opt(&mut cfg.paths.out, out);
            let result = cli::cmd_analyze(&cfg, mode)?;
            if let (Some(path), cli::AnalysisOutput::Collisions(c)) = (&csv, &result) {
                std::fs::write(path, c.histogram_csv())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            match report {
                Some(path) => Ok(cli::save_report(&path, &result)?),
                None => print_json(&result),
            }
        }
        Command::Report { out } => {
            set_opt(&mut cfg.paths.out, out);
            print_json(&cli::cmd_report(cfg.out_path()?)?)
        }
        Command::Inspect {
            dir,
            shard,
            context,
            no_color,
        } => {
            let color = !no_color && std::io::stdout().is_terminal();
            emit(&cli::cmd_inspect(&dir, shard, context, color)?)
        }
    }
}

fn fail(code: u8, kind: &str, message: &str) -> ExitCode {
    eprintln!(
        "{}",
        serde_json::json!({ "error": kind, "exit_code": code, "message": message })
    );
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return fail(2, "usage", &e.kind().to_string());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e
                .chain()
                .find_map(|c| c.downcast_ref::<proxymix::Error>())
                .map_or(2, cli::exit_code);
            let kind = if code == 2 { "usage" } else { "data" };
            fail(code as u8, kind, &format!("{e:#}"))
        }
    }
}
