//! Arithmetic coding under a fitted byte model, with and without
//! equal-information windows.

use proxymix::bytelm::{ByteModel, NextByteModel};
use proxymix::coder::{ac_decode, ac_encode, pack_bits, PackingConfig, WindowConfig};
use proxymix::corpus::synthetic_code_corpus;

pub fn run_example() -> anyhow::Result<()> {
    let train = synthetic_code_corpus(100, 1);
    let model = ByteModel::fit(&train, 3, 0.1)?;
    let doc = b"def load_value(path):\n    return len(path)\n";

    let h = model.entropy_profile(doc)?.total_bits();
    let plain = ac_encode(doc, &model, WindowConfig::UNWINDOWED)?;
    println!("sum of h_t = {h:.2} bits, code = {} bits", plain.total_bits);
    assert!(plain.total_bits as f64 <= h + 2.0);

    let windowed = ac_encode(doc, &model, WindowConfig::bits(16)?)?;
    println!(
        "tau = 16: {} windows, bytes per window {:?}",
        windowed.windows.len(),
        windowed.consumed_bytes_per_window
    );
    assert_eq!(ac_decode(&windowed, &model, doc.len())?, doc);

    let packed = pack_bits(&windowed.bits(), PackingConfig::default());
    println!(
        "{} bits -> {} 16-bit symbols",
        packed.total_bits,
        packed.symbols.len()
    );
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
