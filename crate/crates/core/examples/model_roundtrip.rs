//! Saves a briefly trained network, loads it back and checks that the
//! reloaded copy makes identical decisions.
//!
//! cargo run --release --example model_roundtrip

use ubpnet::bp::RealSystem;
use ubpnet::harness::{load_model, save_model};
use ubpnet::mimo::{random_frame, transmit, ChannelScenario, ScenarioChannel, SystemConfig};
use ubpnet::rng::stream;
use ubpnet::train::{train, TrainingSchedule};
use ubpnet::unfolded::NetVariant;

fn main() -> ubpnet::Result<()> {
    let cfg = SystemConfig::new(2, 4, 16);
    let schedule = TrainingSchedule {
        snr_list_db: vec![5.0, 15.0],
        samples_per_snr_per_batch: 8,
        batch_size: 16,
        total_iterations: 30,
        seed: 7,
        ..Default::default()
    };
    let net = train(cfg, NetVariant::DnnMs, 3, &schedule)?.network;
    let path = std::env::temp_dir().join("ubpnet-example.ubp");
    save_model(&net, &path)?;
    let back = load_model(&path)?;
    println!("wrote {} ({} bytes); equal after reload: {}", path.display(), std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0), back == net);

    let ch = ScenarioChannel::new(cfg, ChannelScenario::Iid)?;
    let mut same = 0;
    for f in 0..200 {
        let mut rng = stream(8, &[f]);
        let inst = ch.generate(10.0, &mut rng)?;
        let frame = random_frame(&cfg, &mut rng)?;
        let rx = transmit(&inst, &frame, &mut rng)?;
        let sys = RealSystem::new(&cfg, &inst, &rx)?;
        same += usize::from(net.forward_system(&sys)?.decisions() == back.forward_system(&sys)?.decisions());
    }
    println!("identical decisions on {same}/200 frames");
    std::fs::remove_file(&path).ok();
    Ok(())
}
