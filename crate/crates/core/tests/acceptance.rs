//! Acceptance suite. Each criterion runs independently and prints one
//! PASS/FAIL line; the test fails if any criterion fails.

// Negated comparisons are deliberate: NaN must fail a check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use proxymix::analysis::{
    collision_study, lcp_ratio, length_stats, levenshtein, normalized_levenshtein, stability_study,
    DEFAULT_LENGTH_CAP,
};
use proxymix::bytelm::{ByteModel, EntropyProfile, NextByteModel, UniformModel};
use proxymix::cli::{cmd_mix, cmd_train_bpe, CompressorKind, PipelineConfig};
use proxymix::coder::{ac_decode, ac_encode, PackingConfig, WindowConfig};
use proxymix::compressors::{
    fixed_width, gray_code, gray_decode, huffman_build, BpeTokenizer, GzipCompressor,
    NeuralCompressor, NeuralConfig, Pretokenizer, ProxyCompressor, SegmentCache, TokenEncoding,
    TokenizerCompressor,
};
use proxymix::corpus::{read_jsonl, synthetic_code_corpus, Document};
use proxymix::mixer::{
    build_dataset, build_oracle_translation_prompt, effective_multiplier, pairing_multiplier,
    warmup_average_multiplier, DatasetConfig, MixConfig, Pairing, Warmup,
};
use proxymix::segmenter::{
    calibrate_thresholds, find_boundaries, nearest_rank, segment, SegmentConfig, SegmentStrategy,
    Thresholds,
};
use proxymix::vocab::{
    byte_to_symbol, symbol_to_byte, Sentinel, SymbolClass, VocabLayout, BYTE_BASE, COMP_BASE,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check, Duration);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !($cond) {
            return Err(format!($($fmt)+));
        }
    };
}

/// Writes straight to the stderr handle, which the test harness does not
/// capture, so the per-criterion lines appear in every run.
macro_rules! say {
    ($($fmt:tt)+) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stderr(), $($fmt)+);
    }};
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn fixture_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus.jsonl")
}

fn fixture() -> Vec<Document> {
    read_jsonl(&fixture_path()).unwrap()
}

fn random_doc(rng: &mut ChaCha8Rng, max_len: usize, alphabet: &[u8]) -> Vec<u8> {
    let n = rng.gen_range(1..=max_len);
    (0..n)
        .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
        .collect()
}

fn all_bytes() -> Vec<u8> {
    (0..=255).collect()
}

fn tokenizer(docs: &[Document], vocab: u32) -> Arc<BpeTokenizer> {
    Arc::new(BpeTokenizer::train(docs, vocab, Pretokenizer::DefaultRegex).unwrap())
}

// 1. Rate math.

/// Closed-form average of the paired multiplier over a linear ramp a -> b.
/// With k = C - 1 and D = C - k r, the r <= 0.5 branch is C(1-r)/D and the
/// r > 0.5 branch is C r / D.
fn integral_oracle(a: f64, b: f64, c: f64) -> f64 {
    let k = c - 1.0;
    let d = |r: f64| c - k * r;
    let int_r_over_d = |r: f64| -(c * d(r).ln() - d(r)) / (k * k);
    let int_inv_d = |r: f64| -d(r).ln() / k;
    let low = |r: f64| c * (int_inv_d(r) - int_r_over_d(r));
    let high = |r: f64| c * int_r_over_d(r);
    let mid = 0.5f64.clamp(a, b);
    let total = (low(mid) - low(a)) + (high(b) - high(mid));
    total / (b - a)
}

fn criterion_1() -> Check {
    let eff = effective_multiplier(0.9, 3.7);
    ensure!((eff - 2.913).abs() <= 0.005, "effective multiplier {eff}");
    let pair = pairing_multiplier(0.9, 3.7).map_err(e)?;
    ensure!((pair - 2.622).abs() <= 0.005, "pairing multiplier {pair}");
    let cfg = MixConfig {
        warmup: Some(Warmup {
            a: 0.4,
            b: 0.9,
            steps: 10_000,
        }),
        pairing: Pairing::WarmupOnly,
        ..MixConfig::default()
    };
    let avg = warmup_average_multiplier(&cfg, 3.7).map_err(e)?;
    ensure!((avg - 1.38).abs() <= 0.02, "warmup average {avg}");
    let oracle = integral_oracle(0.4, 0.9, 3.7);
    ensure!(
        (avg - oracle).abs() <= 1e-3,
        "summation {avg} vs integral {oracle}"
    );
    say!(
        "    effective {eff:.4}, paired {pair:.4}, warmup average {avg:.4} (integral {oracle:.4})"
    );
    Ok(())
}

// 2. Vocabulary layout.

fn criterion_2() -> Check {
    ensure!(
        BYTE_BASE == 64 && COMP_BASE == 320,
        "bases {BYTE_BASE} {COMP_BASE}"
    );
    for s in Sentinel::ALL {
        ensure!(s.id() < 64, "sentinel {s:?} at {}", s.id());
    }
    let layout = VocabLayout::for_comp_vocab(1000);
    for b in 0..=255u8 {
        let id = byte_to_symbol(b);
        ensure!(id == 64 + b as u32, "byte {b} -> {id}");
        ensure!(symbol_to_byte(id).map_err(e)? == b, "byte {b} roundtrip");
        ensure!(
            layout.classify(id).map_err(e)? == SymbolClass::Byte(b),
            "byte {b} class"
        );
    }
    for local in [0, 1, 999] {
        let id = layout.comp_to_symbol(local).map_err(e)?;
        ensure!(id == 320 + local, "comp {local} -> {id}");
        ensure!(
            layout.symbol_to_comp(id).map_err(e)? == local,
            "comp {local} roundtrip"
        );
    }
    ensure!(
        layout.comp_to_symbol(1000).is_err(),
        "out-of-range compressed symbol accepted"
    );
    Ok(())
}

// 3. Arithmetic coder.

fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let alphabets: [&[u8]; 3] = [b"ab", b"abcdefgh \n", &all_bytes()];
    let mut models: Vec<Box<dyn NextByteModel>> = vec![Box::new(UniformModel)];
    for order in 0..=3 {
        for alphabet in alphabets {
            let train: Vec<Vec<u8>> = (0..20)
                .map(|_| random_doc(&mut rng, 200, alphabet))
                .collect();
            let alpha = [0.01, 0.1, 1.0][order % 3];
            models.push(Box::new(ByteModel::fit(&train, order, alpha).map_err(e)?));
        }
    }
    let taus = [None, Some(8), Some(16), Some(32)];
    let mut worst_slack = f64::INFINITY;
    for case in 0..1000 {
        let model = &models[rng.gen_range(0..models.len())];
        let alphabet = alphabets[rng.gen_range(0..alphabets.len())];
        let doc = random_doc(&mut rng, 300, alphabet);
        let tau = taus[case % taus.len()];
        let window = WindowConfig::try_from(tau).map_err(e)?;
        let code = ac_encode(&doc, &**model, window).map_err(e)?;
        let back = ac_decode(&code, &**model, doc.len()).map_err(e)?;
        ensure!(back == doc, "case {case}: roundtrip mismatch (tau {tau:?})");
        match tau {
            None => {
                let h = model.entropy_profile(&doc).map_err(e)?.total_bits();
                let bits = code.total_bits as f64;
                ensure!(bits <= h + 2.0 + 1e-9, "case {case}: {bits} bits > {h} + 2");
                worst_slack = worst_slack.min(h + 2.0 - bits);
            }
            Some(t) => {
                let (last, rest) = code.windows.split_last().ok_or("no windows")?;
                ensure!(
                    rest.iter().all(|w| w.len() == t as usize),
                    "case {case}: non-final window != {t}"
                );
                ensure!(
                    last.len() <= t as usize,
                    "case {case}: final window too long"
                );
            }
        }
    }
    say!("    1000 roundtrips; minimum slack to the +2 bound {worst_slack:.3} bits");
    Ok(())
}

// 4. Token-byte encodings.

fn criterion_4() -> Check {
    ensure!(
        fixed_width(96_640) == 3,
        "B(96640) = {}",
        fixed_width(96_640)
    );
    ensure!(
        fixed_width(65_536) == 2,
        "B(65536) = {}",
        fixed_width(65_536)
    );
    for rank in 0..65_535u32 {
        let diff = gray_code(rank) ^ gray_code(rank + 1);
        ensure!(
            diff.count_ones() == 1,
            "gray({rank}) and gray({}) differ in {} bits",
            rank + 1,
            diff.count_ones()
        );
        ensure!(gray_code(rank) < 65_536, "gray({rank}) leaves 16 bits");
        ensure!(gray_decode(gray_code(rank)) == rank, "gray decode {rank}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut codes = Vec::new();
    for _ in 0..20 {
        let v = rng.gen_range(2..5000);
        let freqs: Vec<u64> = (0..v).map(|_| rng.gen_range(0..1000u64).pow(2)).collect();
        let code = huffman_build(&freqs).map_err(e)?;
        let kraft = code.kraft_sum();
        ensure!(kraft <= 1.0 + 1e-12, "Kraft sum {kraft} for V={v}");
        codes.push((v, code));
    }
    for i in 0..10_000 {
        let (v, code) = &codes[i % codes.len()];
        let seq: Vec<u32> = (0..rng.gen_range(0..60))
            .map(|_| rng.gen_range(0..*v as u32))
            .collect();
        let bytes = code.encode(&seq).map_err(e)?;
        ensure!(
            code.decode(&bytes).map_err(e)? == seq,
            "huffman roundtrip {i} (V={v})"
        );
    }
    Ok(())
}

// 5. Invertibility and the many-to-one neural map.

fn criterion_5() -> Check {
    let fix = fixture();
    let tok = tokenizer(&fix, 512);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let random: Vec<Vec<u8>> = (0..1000)
        .map(|_| random_doc(&mut rng, 200, &all_bytes()))
        .collect();
    let docs: Vec<&[u8]> = random
        .iter()
        .map(Vec::as_slice)
        .chain(fix.iter().take(100).map(Document::bytes))
        .collect();

    let freqs = TokenizerCompressor::token_frequencies(&tok, &fix);
    let gzip = GzipCompressor::default();
    let mut compressors: Vec<Box<dyn ProxyCompressor>> = vec![Box::new(gzip)];
    for enc in [
        TokenEncoding::TokenIndex,
        TokenEncoding::FixedBytes,
        TokenEncoding::HuffmanBytes,
        TokenEncoding::GrayBytes,
    ] {
        compressors.push(Box::new(
            TokenizerCompressor::new(tok.clone(), enc, Some(&freqs)).map_err(e)?,
        ));
    }
    for c in &compressors {
        for (i, doc) in docs.iter().enumerate() {
            let symbols = c.compress(doc).map_err(e)?;
            ensure!(
                c.decompress(&symbols).map_err(e)? == *doc,
                "{} doc {i} not restored",
                c.name()
            );
        }
    }
    for doc in &docs {
        let (a, b) = (
            gzip.compress(doc).map_err(e)?,
            gzip.compress(doc).map_err(e)?,
        );
        ensure!(a == b, "gzip output not deterministic");
        ensure!(a[4..8] == [0, 0, 0, 0], "gzip mtime not zero");
    }

    let model = Arc::new(ByteModel::fit(&fix, 2, 0.1).map_err(e)?);
    let thresholds =
        calibrate_thresholds(&fix[..50], &*model, &SegmentConfig::default()).map_err(e)?;
    let neural = NeuralCompressor::new(
        model,
        NeuralConfig::with_strategy(SegmentStrategy::Entropy {
            thresholds,
            min_segment_len: 1,
        }),
        Arc::new(SegmentCache::new()),
    );
    for (i, doc) in docs
        .iter()
        .take(200)
        .chain(docs.iter().skip(1000))
        .enumerate()
    {
        let (symbols, meta) = neural.compress_with_metadata(doc).map_err(e)?;
        ensure!(
            neural
                .decompress_with_metadata(&symbols, &meta)
                .map_err(e)?
                == *doc,
            "neural doc {i}"
        );
    }

    let toy = Arc::new(ByteModel::fit(&[b"aaaaaaaaab".repeat(3)], 0, 0.5).map_err(e)?);
    let toy_config = NeuralConfig {
        window: WindowConfig::UNWINDOWED,
        packing: PackingConfig::new(8).map_err(e)?,
        ..NeuralConfig::with_strategy(SegmentStrategy::Whole)
    };
    let toy_neural = NeuralCompressor::new(toy, toy_config, Arc::new(SegmentCache::new()));
    let mut groups: HashMap<Vec<u32>, Vec<String>> = HashMap::new();
    for len in 1..=6 {
        for mask in 0..1u32 << len {
            let doc: Vec<u8> = (0..len)
                .map(|i| if mask >> i & 1 == 1 { b'b' } else { b'a' })
                .collect();
            groups
                .entry(toy_neural.compress(&doc).map_err(e)?)
                .or_default()
                .push(String::from_utf8(doc).unwrap());
        }
    }
    let largest = groups.values().max_by_key(|g| g.len()).unwrap();
    ensure!(
        largest.len() >= 2,
        "no collisions among 126 {{a,b}} documents"
    );
    say!(
        "    {} distinct outputs for 126 docs; largest group {:?}",
        groups.len(),
        largest
    );
    Ok(())
}

// 6. Segmentation.

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let train: Vec<Vec<u8>> = (0..30)
        .map(|_| random_doc(&mut rng, 300, b"abcde \n"))
        .collect();
    let model = ByteModel::fit(&train, 2, 0.1).map_err(e)?;
    for i in 0..1000 {
        let doc = random_doc(
            &mut rng,
            200,
            if i % 2 == 0 { b"abcde \n" } else { b"xyzab" },
        );
        let strategy = match i % 4 {
            0 | 1 => SegmentStrategy::Entropy {
                thresholds: Thresholds {
                    theta_abs: rng.gen_range(0.5..8.0),
                    theta_jump: rng.gen_range(0.0..6.0),
                },
                min_segment_len: rng.gen_range(1..5),
            },
            2 => SegmentStrategy::FixedLength {
                len: rng.gen_range(1..40),
            },
            _ => SegmentStrategy::Lines,
        };
        let segments = segment(&doc, &model, &strategy).map_err(e)?;
        let mut pos = 0;
        for s in &segments {
            ensure!(
                s.start == pos && s.end > s.start,
                "doc {i}: gap or empty segment at {pos}"
            );
            ensure!(s.bytes == &doc[s.start..s.end], "doc {i}: segment bytes");
            pos = s.end;
        }
        ensure!(
            pos == doc.len(),
            "doc {i}: segments stop at {pos} of {}",
            doc.len()
        );
    }

    let profile = |h: &[f64]| EntropyProfile { h: h.to_vec() };
    let th = |a: f64, j: f64| Thresholds {
        theta_abs: a,
        theta_jump: j,
    };
    let b = find_boundaries(&profile(&[0.1, 0.1, 3.0, 0.1]), &th(2.5, f64::INFINITY), 1);
    ensure!(b == [2], "h=[.1,.1,3,.1] boundaries {b:?}");
    let b = find_boundaries(
        &profile(&[1.0, 1.0, 1.0, 5.0, 5.0]),
        &th(f64::INFINITY, 3.0),
        1,
    );
    ensure!(b == [3], "jump example boundaries {b:?}");
    let b = find_boundaries(&profile(&[0.1, 0.2, 0.3]), &th(5.0, 5.0), 1);
    ensure!(b.is_empty(), "quiet profile boundaries {b:?}");
    let hundred: Vec<f64> = (1..=100).map(f64::from).collect();
    ensure!(
        nearest_rank(&hundred, 95.0).map_err(e)? == 95.0,
        "p95 of 1..100"
    );
    let uniform = calibrate_thresholds(&[b"some text"], &UniformModel, &SegmentConfig::default())
        .map_err(e)?;
    ensure!(
        uniform.theta_abs == 8.0 && uniform.theta_jump == 0.0,
        "uniform thresholds {uniform:?}"
    );

    for i in 0..100 {
        let n = rng.gen_range(1..500);
        let values: Vec<f64> = (0..n)
            .map(|_| (rng.gen_range(0.0..12.0f64) * 4.0).round() / 4.0)
            .collect();
        let p = rng.gen_range(1..=100) as f64;
        // smallest sample value with at least p% of the sample at or below it
        let oracle = values
            .iter()
            .copied()
            .filter(|&v| 100.0 * values.iter().filter(|&&x| x <= v).count() as f64 >= p * n as f64)
            .fold(f64::INFINITY, f64::min);
        let got = nearest_rank(&values, p).map_err(e)?;
        ensure!(got == oracle, "profile {i}: p{p} = {got}, oracle {oracle}");
    }
    Ok(())
}

// 7. Mixer statistics.

/// Packs byte pairs into one symbol; rate just under 2.
struct PairBytes;

impl ProxyCompressor for PairBytes {
    fn name(&self) -> &str {
        "pair-bytes"
    }
    fn comp_vocab_size(&self) -> u32 {
        65_536
    }
    fn invertible(&self) -> bool {
        false
    }
    fn compress(&self, doc: &[u8]) -> proxymix::Result<Vec<u32>> {
        Ok(doc
            .chunks(2)
            .map(|c| c.iter().fold(0u32, |acc, &b| acc << 8 | b as u32))
            .collect())
    }
}

fn short_docs(n: usize, seed: u64) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let text: String = (0..rng.gen_range(20..120))
                .map(|_| rng.gen_range(b'a'..=b'z') as char)
                .collect();
            Document::new(format!("doc{i}"), text)
        })
        .collect()
}

fn criterion_7() -> Check {
    let docs = short_docs(100_000, 7);
    let r = 0.9;
    let run = |pairing: Pairing| {
        let cfg = DatasetConfig {
            mix: MixConfig {
                pairing,
                ..MixConfig::constant(r, 17)
            },
            context_len: 4096,
            contexts_per_shard: 4096,
        };
        let dir = tempfile::tempdir().map_err(e)?;
        build_dataset(&docs, &PairBytes, &cfg, serde_json::Value::Null, dir.path()).map_err(e)
    };

    let m = run(Pairing::None)?;
    let fraction = m.views.comp as f64 / m.views.total() as f64;
    ensure!(
        (fraction - r).abs() <= 0.01,
        "compressed view fraction {fraction}"
    );
    let a = &m.accounting;
    let target = effective_multiplier(r, a.measured_c);
    let dev = a.measured_multiplier / target - 1.0;
    ensure!(
        dev.abs() <= 0.02,
        "multiplier {} vs {target} ({dev:+.4})",
        a.measured_multiplier
    );
    say!(
        "    no pairing: comp fraction {fraction:.4}, C {:.4}, multiplier {:.4} vs {target:.4}",
        a.measured_c,
        a.measured_multiplier
    );

    let m = run(Pairing::AlwaysOn)?;
    let cf = m.accounting.comp_fraction;
    ensure!(
        (cf / r - 1.0).abs() <= 0.01,
        "paired compressed:raw fraction {cf}"
    );
    say!(
        "    always-on pairing: compressed share of sources {cf:.4}, views {:?}",
        m.views
    );
    Ok(())
}

// 8. Oracle-translation prompt.

fn criterion_8() -> Check {
    let fix = fixture();
    let comp =
        TokenizerCompressor::new(tokenizer(&fix[..100], 400), TokenEncoding::TokenIndex, None)
            .map_err(e)?;
    let layout = VocabLayout::for_comp_vocab(comp.comp_vocab_size());
    for (i, doc) in fix.iter().take(100).enumerate() {
        let text = doc.bytes();
        let split = text
            .iter()
            .position(|&b| b == b'\n')
            .ok_or("fixture doc without newline")?
            + 1;
        let (p, s) = text.split_at(split);
        let prompt = build_oracle_translation_prompt(p, s, &comp, &layout).map_err(e)?;
        let n_comp = comp.compress(p).map_err(e)?.len() + comp.compress(s).map_err(e)?.len();
        ensure!(
            prompt[0] == Sentinel::CompOpen.id(),
            "pair {i}: does not open with <comp>"
        );
        for &id in &prompt[1..=n_comp] {
            ensure!(
                matches!(layout.classify(id), Ok(SymbolClass::Compressed(_))),
                "pair {i}: non-compressed symbol in span"
            );
        }
        ensure!(
            prompt[n_comp + 1] == Sentinel::CompClose.id(),
            "pair {i}: missing </comp>"
        );
        ensure!(
            prompt[n_comp + 2] == Sentinel::RawOpen.id(),
            "pair {i}: missing <raw>"
        );
        let raw: Result<Vec<u8>, _> = prompt[n_comp + 3..]
            .iter()
            .map(|&id| symbol_to_byte(id))
            .collect();
        ensure!(
            raw.map_err(e)? == p,
            "pair {i}: raw tail is not the problem"
        );
        ensure!(
            *prompt.last().unwrap() != Sentinel::RawClose.id(),
            "pair {i}: trailing </raw>"
        );
    }
    Ok(())
}

// 9. Analysis instruments.

fn criterion_9() -> Check {
    ensure!(
        levenshtein(b"kitten", b"sitting") == 3,
        "kitten/sitting distance"
    );
    let nk = normalized_levenshtein(b"kitten", b"sitting");
    ensure!(
        (nk - 3.0 / 7.0).abs() < 1e-12,
        "normalized kitten/sitting {nk}"
    );

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..1000 {
        let [a, b, c] = [(); 3].map(|_| {
            let n = rng.gen_range(0..12);
            (0..n)
                .map(|_| rng.gen_range(b'a'..=b'c'))
                .collect::<Vec<u8>>()
        });
        let (ab, bc, ac) = (
            levenshtein(&a, &b),
            levenshtein(&b, &c),
            levenshtein(&a, &c),
        );
        ensure!(levenshtein(&a, &a) == 0, "triple {i}: d(a,a) != 0");
        ensure!(
            (ab == 0) == (a == b),
            "triple {i}: identity of indiscernibles"
        );
        ensure!(ab == levenshtein(&b, &a), "triple {i}: symmetry");
        ensure!(ac <= ab + bc, "triple {i}: triangle inequality");
    }

    let docs = synthetic_code_corpus(2000, 19);
    let tok = TokenizerCompressor::new(
        tokenizer(&docs[..300], 512),
        TokenEncoding::TokenIndex,
        None,
    )
    .map_err(e)?;
    let gzip = GzipCompressor::default();
    for c in [&tok as &dyn ProxyCompressor, &gzip] {
        let r = stability_study(&docs[..200], c, 0.0, 1, DEFAULT_LENGTH_CAP).map_err(e)?;
        ensure!(
            r.mean == 0.0 && r.distances.iter().all(|&d| d == 0.0),
            "{} unstable at frac 0",
            c.name()
        );
    }
    let t = stability_study(&docs, &tok, 0.1, 1, DEFAULT_LENGTH_CAP).map_err(e)?;
    let g = stability_study(&docs, &gzip, 0.1, 1, DEFAULT_LENGTH_CAP).map_err(e)?;

    let model = Arc::new(ByteModel::fit(&docs[..300], 3, 0.1).map_err(e)?);
    let thresholds =
        calibrate_thresholds(&docs[..50], &*model, &SegmentConfig::default()).map_err(e)?;
    let neural = NeuralCompressor::new(
        model,
        NeuralConfig::with_strategy(SegmentStrategy::Entropy {
            thresholds,
            min_segment_len: 1,
        }),
        Arc::new(SegmentCache::new()),
    );
    let n = stability_study(&docs[..200], &neural, 0.1, 1, DEFAULT_LENGTH_CAP).map_err(e)?;
    say!(
        "    mean distance at 10% deletions: gzip {:.3}, tokenizer {:.3}, neural (200 docs) {:.3}",
        g.mean,
        t.mean,
        n.mean
    );
    ensure!(
        g.mean > t.mean,
        "gzip {} not less stable than tokenizer {}",
        g.mean,
        t.mean
    );
    Ok(())
}

// 10. Collision statistics.

fn criterion_10() -> Check {
    let variants: [&[u8]; 2] = [b"True\n\n ", b"True\n\n  "];
    let (mean, sd) = length_stats(&variants);
    ensure!(
        (mean - 7.5).abs() < 1e-12 && (sd - 0.5).abs() < 1e-12,
        "lengths mean {mean} sd {sd}"
    );
    let ratio = lcp_ratio(&variants).map_err(e)?;
    say!("    variant cluster: mean length {mean}, sd {sd}, LCP ratio {ratio:.4}");

    let cases: [(&[&[u8]], f64); 3] = [
        (&[b"ab", b"ab"], 1.0),
        (&[b"ab", b"abcd"], 2.0 / 3.0),
        (&[b"x", b"y"], 0.0),
    ];
    for (chunks, want) in cases {
        let got = lcp_ratio(chunks).map_err(e)?;
        ensure!(
            (got - want).abs() < 1e-12,
            "lcp_ratio {chunks:?} = {got}, want {want}"
        );
    }
    ensure!(
        lcp_ratio(&[b"solo".as_slice()]).is_err(),
        "single chunk accepted"
    );

    let fix = fixture();
    let tok = TokenizerCompressor::new(tokenizer(&fix, 512), TokenEncoding::TokenIndex, None)
        .map_err(e)?;
    for c in [&tok as &dyn ProxyCompressor, &GzipCompressor::default()] {
        let report = collision_study(&fix[..200], c).map_err(e)?;
        let sizes: BTreeMap<usize, usize> = report.histogram.clone();
        ensure!(
            report.collisions.is_empty() && sizes.keys().all(|&k| k == 1),
            "{} groups {sizes:?}",
            c.name()
        );
    }
    Ok(())
}

// 11. End-to-end determinism.

fn hash_dir(dir: &Path) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(e)? {
        let path = entry.map_err(e)?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name.ends_with(".bin") || name.ends_with(".json") || name.ends_with(".jsonl") {
            out.insert(
                name,
                hex::encode(Sha256::digest(fs::read(&path).map_err(e)?)),
            );
        }
    }
    Ok(out)
}

fn criterion_11() -> Check {
    let work = tempfile::tempdir().map_err(e)?;
    let mut cfg = PipelineConfig {
        seed: 2024,
        ..PipelineConfig::default()
    };
    cfg.paths.corpus = Some(fixture_path());
    cfg.paths.tokenizer = Some(work.path().join("tokenizer.json"));
    cfg.bpe.vocab_size = 512;
    cmd_train_bpe(&cfg).map_err(e)?;
    cfg.compressor = CompressorKind::Tokenizer;
    cfg.mix.warmup = Some(Warmup {
        a: 0.4,
        b: 0.9,
        steps: 4,
    });
    cfg.mix.pairing = Pairing::WarmupOnly;
    cfg.mix.symbols_per_step = 8192;
    cfg.mix.context_len = 1024;
    cfg.mix.contexts_per_shard = 16;

    let mut hashes = Vec::new();
    for run in ["a", "b"] {
        cfg.paths.out = Some(work.path().join(run));
        cmd_mix(&cfg).map_err(e)?;
        hashes.push(hash_dir(cfg.paths.out.as_ref().unwrap())?);
    }
    ensure!(hashes[0].contains_key("manifest.json"), "manifest missing");
    ensure!(
        hashes[0].keys().filter(|k| k.ends_with(".bin")).count() > 1,
        "expected several shards"
    );
    ensure!(
        hashes[0] == hashes[1],
        "runs differ: {:?} vs {:?}",
        hashes[0],
        hashes[1]
    );
    say!("    {} files hash-identical across runs", hashes[0].len());
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 11] = [
        ("1 rate math", criterion_1, Duration::from_secs(1)),
        ("2 vocabulary layout", criterion_2, Duration::from_secs(1)),
        ("3 arithmetic coder", criterion_3, Duration::from_secs(30)),
        (
            "4 token-byte encodings",
            criterion_4,
            Duration::from_secs(30),
        ),
        (
            "5 compressor invertibility",
            criterion_5,
            Duration::from_secs(120),
        ),
        ("6 segmentation", criterion_6, Duration::from_secs(10)),
        ("7 mixer statistics", criterion_7, Duration::from_secs(120)),
        (
            "8 oracle-translation prompt",
            criterion_8,
            Duration::from_secs(5),
        ),
        (
            "9 analysis instruments",
            criterion_9,
            Duration::from_secs(300),
        ),
        (
            "10 collision statistics",
            criterion_10,
            Duration::from_secs(10),
        ),
        (
            "11 end-to-end determinism",
            criterion_11,
            Duration::from_secs(120),
        ),
    ];
    let mut failed = Vec::new();
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let status = match &outcome {
            Ok(()) => "PASS",
            Err(_) => "FAIL",
        };
        let over = if took > budget {
            format!(" (over {budget:?} budget)")
        } else {
            String::new()
        };
        say!("{status} criterion {name} [{took:.2?}]{over}");
        if let Err(msg) = outcome {
            say!("    {msg}");
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
