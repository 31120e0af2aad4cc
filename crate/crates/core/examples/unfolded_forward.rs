//! Forward pass of an untrained DNN-dBP and DNN-MS: soft outputs, loss and
//! decisions for one frame.
//!
//! cargo run --release --example unfolded_forward

use ubpnet::bp::RealSystem;
use ubpnet::mimo::{random_frame, transmit, ChannelScenario, ScenarioChannel, SystemConfig};
use ubpnet::rng::stream;
use ubpnet::unfolded::{loss, FactorInit, NetVariant, UnfoldedNetwork};

fn main() -> ubpnet::Result<()> {
    let cfg = SystemConfig::new(4, 8, 16);
    let ch = ScenarioChannel::new(cfg, ChannelScenario::Iid)?;
    let mut rng = stream(4, &[]);
    let inst = ch.generate(12.0, &mut rng)?;
    let frame = random_frame(&cfg, &mut rng)?;
    let rx = transmit(&inst, &frame, &mut rng)?;
    let sys = RealSystem::new(&cfg, &inst, &rx)?;
    println!("labels      {:?}", frame.labels);
    let init = FactorInit { delta: 0.3, lambda: 0.9, omega: 0.01 };
    for variant in [NetVariant::DnnDbp, NetVariant::DnnMs] {
        let net = UnfoldedNetwork::with_init(cfg, variant, 5, init)?;
        let out = net.forward_system(&sys)?;
        println!(
            "{variant:<11} {:?}  loss {:.4}  params {}",
            out.decisions(),
            loss(&out, &frame.labels_onehot())?,
            net.factors.num_params()
        );
    }
    Ok(())
}
