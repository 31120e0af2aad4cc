//! Small paired-stream BER sweep of MMSE, BP and HAD on 8x32 i.i.d. channels.
//!
//! cargo run --release --example ber_sweep -- [bits_per_point]

use ubpnet::harness::{evaluate_ber, records_to_csv, DetectorSpec, ExperimentSpec};
use ubpnet::mimo::{ChannelScenario, SystemConfig};

fn main() -> ubpnet::Result<()> {
    let bits = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50_000);
    let mut spec = ExperimentSpec::new(
        SystemConfig::new(8, 32, 16),
        ChannelScenario::Iid,
        vec![
            DetectorSpec::new("mmse"),
            DetectorSpec::new("bp").with_layers(7),
            DetectorSpec::new("had").with_layers(7),
        ],
        vec![4.0, 8.0, 12.0],
    );
    spec.min_bits = bits;
    spec.max_bit_errors = Some(200);
    spec.seed = 1;
    print!("{}", records_to_csv(&evaluate_ber(&spec)?));
    Ok(())
}
