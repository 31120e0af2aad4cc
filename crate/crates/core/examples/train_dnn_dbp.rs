//! Trains a small DNN-dBP on 8x32 i.i.d. channels and prints the loss trace.
//!
//! cargo run --release --example train_dnn_dbp -- [iterations]

use std::time::Instant;

use ubpnet::mimo::SystemConfig;
use ubpnet::train::{train_with, TrainingSchedule};
use ubpnet::unfolded::{FactorKind, NetVariant};

fn main() -> ubpnet::Result<()> {
    let iterations = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let cfg = SystemConfig::new(8, 32, 16);
    let schedule = TrainingSchedule {
        snr_list_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
        samples_per_snr_per_batch: 20,
        batch_size: 100,
        total_iterations: iterations,
        seed: 1,
        ..Default::default()
    };
    let start = Instant::now();
    let out = train_with(cfg, NetVariant::DnnDbp, 7, &schedule, |p| {
        if p.iteration % 10 == 0 {
            println!("iter {:5}  loss {:.5}  ({:.1?})", p.iteration, p.loss, start.elapsed());
        }
        Ok(())
    })?;
    let deltas = out.network.factors.values(FactorKind::Delta).unwrap_or(&[]);
    let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
    println!(
        "{} iterations in {:.1?}; final loss {:.5}; mean delta {mean:.4}",
        iterations,
        start.elapsed(),
        out.losses.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}
