//! Greedy depth search on a small DNN-dBP with a short training budget.
//!
//! cargo run --release --example depth_search

use ubpnet::harness::run_depth_search;
use ubpnet::mimo::SystemConfig;
use ubpnet::presets::DepthSearchPreset;
use ubpnet::train::TrainingSchedule;
use ubpnet::unfolded::NetVariant;

fn main() -> ubpnet::Result<()> {
    let preset = DepthSearchPreset {
        system: SystemConfig::new(4, 8, 16),
        variant: NetVariant::DnnDbp,
        l_min: 1,
        l_max: 5,
        budget: None,
        threshold: 0.05,
        schedule: TrainingSchedule {
            snr_list_db: vec![6.0, 12.0],
            samples_per_snr_per_batch: 10,
            batch_size: 20,
            total_iterations: 20,
            seed: 3,
            ..Default::default()
        },
        validation_snr_db: vec![8.0, 12.0],
        validation_bits: 20_000,
        validation_seed: 4,
    };
    let result = run_depth_search(&preset, None)?;
    for (l, ber) in &result.trace {
        println!("L = {l}: validation BER {ber:.4e}");
    }
    println!("chosen L = {}", result.chosen);
    Ok(())
}
