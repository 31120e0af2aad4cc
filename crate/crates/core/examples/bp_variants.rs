//! Runs every fixed-factor BP variant and MMSE on the same 8x32 frames.
//!
//! cargo run --release --example bp_variants -- [snr_db]

use ubpnet::bp::{bp_detect, mmse_detect, BpVariant, HadConstant, RealSystem};
use ubpnet::mimo::{random_frame, transmit, ChannelScenario, ScenarioChannel, SystemConfig};
use ubpnet::rng::stream;

fn main() -> ubpnet::Result<()> {
    let snr: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10.0);
    let cfg = SystemConfig::new(8, 32, 16);
    let ch = ScenarioChannel::new(cfg, ChannelScenario::Iid)?;
    let variants = [
        ("bp", BpVariant::Plain),
        ("damped 0.5", BpVariant::Damped { delta: 0.5 }),
        ("had", BpVariant::Had { constant: HadConstant::FirstIteration }),
        ("ms", BpVariant::MaxSum),
        ("corrected ms", BpVariant::CorrectedMaxSum { delta: 0.3, lambda: 0.9, omega: 0.01 }),
    ];
    let frames = 300;
    let mut errors = vec![0usize; variants.len() + 1];
    for f in 0..frames {
        let mut rng = stream(3, &[f]);
        let inst = ch.generate(snr, &mut rng)?;
        let frame = random_frame(&cfg, &mut rng)?;
        let rx = transmit(&inst, &frame, &mut rng)?;
        let sys = RealSystem::new(&cfg, &inst, &rx)?;
        let count = |d: &[usize]| d.iter().zip(&frame.labels).filter(|(a, b)| a != b).count();
        for (v, (_, variant)) in variants.iter().enumerate() {
            errors[v] += count(&bp_detect(&sys, *variant, 10)?.decisions);
        }
        errors[variants.len()] += count(&mmse_detect(&cfg, &inst, &rx)?.decisions);
    }
    let dims = (frames as usize * cfg.real_tx()) as f64;
    println!("real-dimension symbol error rate at {snr} dB, 10 iterations, {frames} frames:");
    for ((name, _), e) in variants.iter().zip(&errors) {
        println!("  {name:<13} {:.4}", *e as f64 / dims);
    }
    println!("  {:<13} {:.4}", "mmse", errors[variants.len()] as f64 / dims);
    Ok(())
}
