//! The shared symbol space: sentinels, raw bytes, compressed symbols.

use proxymix::vocab::{byte_to_symbol, symbol_to_byte, Sentinel, SymbolClass, VocabLayout};

pub fn run_example() -> anyhow::Result<()> {
    let layout = VocabLayout::for_comp_vocab(65_536);
    println!("total vocabulary: {}", layout.total_size());
    for s in Sentinel::ALL {
        println!("  <{}> = {}", s.name(), s.id());
    }
    let id = byte_to_symbol(b'A');
    assert_eq!(symbol_to_byte(id)?, b'A');
    println!("byte 'A' -> {id}");

    let comp = layout.comp_to_symbol(1234)?;
    assert_eq!(layout.classify(comp)?, SymbolClass::Compressed(1234));
    println!("compressed 1234 -> {comp}");
    println!("layout fingerprint {:016x}", layout.fingerprint());
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
