//! Monte-Carlo BER evaluation, model checkpoints and the command line.

mod ber;
mod cli;
mod detector;
mod model_io;

pub use ber::{
    evaluate_ber, evaluate_ber_in, evaluate_detectors, records_to_csv, sort_records, write_csv, BerRecord,
    ExperimentSpec, CSV_HEADER,
};
pub use cli::run_cli;
pub use detector::{Detector, DetectorSpec, DETECTOR_KINDS};
pub use model_io::{load_model, model_from_str, model_to_string, save_model};

use crate::error::Result;
use crate::presets::DepthSearchPreset;
use crate::train::{greedy_depth_search, train, DepthSearchResult};

/// Runs a depth search: trains one network per depth and scores it by its
/// mean BER over the validation SNRs.
///
/// `iterations` overrides the schedule's iteration count when given.
pub fn run_depth_search(preset: &DepthSearchPreset, iterations: Option<usize>) -> Result<DepthSearchResult> {
    preset.validate()?;
    let mut schedule = preset.schedule.clone();
    if let Some(it) = iterations {
        schedule.total_iterations = it;
    }
    let mut spec = ExperimentSpec::new(
        preset.system,
        schedule.channel,
        Vec::new(),
        preset.validation_snr_db.clone(),
    );
    spec.min_bits = preset.validation_bits;
    spec.max_bit_errors = None;
    spec.seed = preset.validation_seed;
    greedy_depth_search(
        (preset.l_min, preset.l_max),
        preset.budget(),
        preset.threshold,
        |layers| {
            let net = train(preset.system, preset.variant, layers, &schedule)?.network;
            let dets = [(preset.variant.to_string(), Detector::Unfolded(Box::new(net)))];
            let recs = evaluate_detectors(&spec, &dets)?;
            Ok(recs.iter().map(BerRecord::ber).sum::<f64>() / recs.len() as f64)
        },
    )
}
