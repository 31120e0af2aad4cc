//! Lists the built-in presets and shows one of them in detail.
//!
//! cargo run --example presets -- [name]

use ubpnet::presets::{find_preset, preset_catalog, PresetBody};

fn main() -> ubpnet::Result<()> {
    for p in preset_catalog() {
        println!("{:<28} {}", p.name, p.body.kind());
    }
    let name = std::env::args().nth(1).unwrap_or_else(|| "fig4".into());
    let preset = find_preset(&name)?;
    println!("\n{}: {}", preset.name, preset.description);
    match preset.body {
        PresetBody::Experiment(e) => {
            println!("  {}x{} {}, SNR {:?} dB", e.system.tx_antennas, e.system.rx_antennas, e.channel, e.snr_grid_db);
            for d in &e.detectors {
                println!("  detector {} (layers {:?}, model {:?})", d.id(), d.layers, d.model);
            }
        }
        PresetBody::Training(t) => println!(
            "  {} L={} batch {} x {} iterations, init {:?}",
            t.variant, t.layers, t.schedule.batch_size, t.schedule.total_iterations, t.schedule.init
        ),
        PresetBody::DepthSearch(d) => println!("  {} L in [{}, {}], budget {}", d.variant, d.l_min, d.l_max, d.budget()),
    }
    Ok(())
}
