//! Draws correlated channels and shows the empirical transmit correlation.
//!
//! cargo run --release --example channel_model

use num_complex::Complex64;
use ubpnet::mimo::{random_frame, transmit, ChannelScenario, ScenarioChannel, SystemConfig};
use ubpnet::rng::stream;

fn main() -> ubpnet::Result<()> {
    let cfg = SystemConfig::new(4, 16, 16);
    for scenario in [ChannelScenario::Iid, ChannelScenario::TxCorrelated { r: 0.3 }, ChannelScenario::RxtxCorrelated { r: 0.7 }] {
        let ch = ScenarioChannel::new(cfg, scenario)?;
        let draws = 2000;
        let mut c01 = Complex64::new(0.0, 0.0);
        let mut power = 0.0;
        for d in 0..draws {
            let h = ch.generate(10.0, &mut stream(1, &[d]))?.h;
            for j in 0..16 {
                c01 += h[(j, 0)] * h[(j, 1)].conj();
                power += h[(j, 0)].norm_sqr();
            }
        }
        let n = (draws * 16) as f64;
        println!("{:<22} E|h|^2 = {:.3}  tx corr(0,1) = {:.3}", scenario.to_string(), power / n, (c01 / n).re);
    }

    let ch = ScenarioChannel::new(cfg, ChannelScenario::Iid)?;
    let mut rng = stream(2, &[]);
    let inst = ch.generate(20.0, &mut rng)?;
    let frame = random_frame(&cfg, &mut rng)?;
    let rx = transmit(&inst, &frame, &mut rng)?;
    println!("sigma2 at 20 dB: {:.4}; first bits {:?}; y[0] = {:.3}", inst.sigma2, &frame.bits[..8], rx.y[0]);
    Ok(())
}
