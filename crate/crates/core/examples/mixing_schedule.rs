//! Mixing-rate schedule and sample-throughput multipliers.

use proxymix::mixer::{
    calibrated_pair_rate, effective_multiplier, mix_rate, pairing_multiplier,
    warmup_average_multiplier, MixConfig, Pairing, Warmup,
};

pub fn run_example() -> anyhow::Result<()> {
    let cfg = MixConfig {
        warmup: Some(Warmup::default()),
        pairing: Pairing::WarmupOnly,
        ..MixConfig::default()
    };
    for step in [0, 2_500, 5_000, 10_000, 20_000] {
        println!(
            "r({step}) = {:.3}, pairing {}",
            mix_rate(step, &cfg),
            cfg.pairing_active(step)
        );
    }
    let c = 3.7;
    println!("r' at 0.9 = {:.4}", calibrated_pair_rate(0.9)?);
    println!(
        "effective multiplier (0.9, {c}) = {:.4}",
        effective_multiplier(0.9, c)
    );
    println!(
        "pairing multiplier (0.9, {c}) = {:.4}",
        pairing_multiplier(0.9, c)?
    );
    println!(
        "warmup average = {:.4}",
        warmup_average_multiplier(&cfg, c)?
    );
    Ok(())
}

fn main() -> anyhow::Result<()> {
    run_example()
}
