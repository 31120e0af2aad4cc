//! Compares tape gradients with central differences on a tiny system.
//!
//! cargo run --release --example gradient_check

use ubpnet::autodiff::{loss_and_gradient, Tape};
use ubpnet::mimo::{ChannelScenario, ScenarioChannel, SystemConfig};
use ubpnet::train::{draw_batch, TrainingSchedule};
use ubpnet::unfolded::{loss, FactorInit, NetVariant, UnfoldedNetwork};

fn main() -> ubpnet::Result<()> {
    let cfg = SystemConfig::new(2, 4, 4);
    let channel = ScenarioChannel::new(cfg, ChannelScenario::Iid)?;
    let schedule = TrainingSchedule {
        snr_list_db: vec![8.0],
        samples_per_snr_per_batch: 1,
        batch_size: 1,
        seed: 5,
        ..Default::default()
    };
    let sample = draw_batch(&cfg, &channel, &schedule, 0)?.remove(0);
    let onehot = {
        let k = cfg.alphabet_size();
        let mut v = vec![0.0; sample.labels.len() * k];
        for (i, &l) in sample.labels.iter().enumerate() {
            v[i * k + l] = 1.0;
        }
        v
    };
    let init = FactorInit { delta: 0.4, lambda: 0.8, omega: 0.05 };
    for variant in [NetVariant::DnnDbp, NetVariant::DnnMs] {
        let net = UnfoldedNetwork::with_init(cfg, variant, 3, init)?;
        let (l, grad) = loss_and_gradient(&mut Tape::new(), &net.factors, &sample.system, &sample.labels)?;
        let raw = net.factors.raw_params();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for p in 0..raw.len() {
            let eval = |x: f64| -> ubpnet::Result<f64> {
                let mut probe = net.clone();
                let mut r = raw.clone();
                r[p] = x;
                probe.factors.set_raw_params(&r)?;
                loss(&probe.forward_system(&sample.system)?, &onehot)
            };
            let fd = (eval(raw[p] + h)? - eval(raw[p] - h)?) / (2.0 * h);
            worst = worst.max((grad[p] - fd).abs() / grad[p].abs().max(fd.abs()).max(1e-6));
        }
        println!("{variant:<8} loss {l:.6}  {} params  worst relative error {worst:.2e}", raw.len());
    }
    Ok(())
}
