use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::detector::{Detector, DetectorSpec};
use crate::bp::RealSystem;
use crate::error::{Error, Result};
use crate::mimo::{indices_to_bits, random_frame, transmit, ChannelScenario, ScenarioChannel, SystemConfig};
use crate::rng::stream;

fn default_min_bits() -> u64 {
    1_000_000
}

fn default_max_errors() -> Option<u64> {
    Some(500)
}

fn default_chunk() -> usize {
    256
}

/// A Monte-Carlo BER experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub system: SystemConfig,
    #[serde(default)]
    pub channel: ChannelScenario,
    pub detectors: Vec<DetectorSpec>,
    pub snr_grid_db: Vec<f64>,
    /// Bits simulated per point unless the error target is met first.
    #[serde(default = "default_min_bits")]
    pub min_bits: u64,
    /// Early-stop target per point; `None` or `0` always runs `min_bits`.
    #[serde(default = "default_max_errors")]
    pub max_bit_errors: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    /// Frames simulated per parallel work unit. Results do not depend on it.
    #[serde(default = "default_chunk")]
    pub frames_per_chunk: usize,
}

impl ExperimentSpec {
    pub fn new(system: SystemConfig, channel: ChannelScenario, detectors: Vec<DetectorSpec>, snr_grid_db: Vec<f64>) -> Self {
        Self {
            system,
            channel,
            detectors,
            snr_grid_db,
            min_bits: default_min_bits(),
            max_bit_errors: default_max_errors(),
            seed: 0,
            frames_per_chunk: default_chunk(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.snr_grid_db.is_empty() || self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidConfig("SNR grid must be nonempty and finite".into()));
        }
        if self.min_bits == 0 {
            return Err(Error::InvalidConfig("min_bits must be > 0".into()));
        }
        if self.frames_per_chunk == 0 {
            return Err(Error::InvalidConfig("frames_per_chunk must be > 0".into()));
        }
        if self.detectors.is_empty() {
            return Err(Error::InvalidConfig("no detectors".into()));
        }
        let mut ids = BTreeSet::new();
        for d in &self.detectors {
            if !ids.insert(d.id()) {
                return Err(Error::InvalidConfig(format!("duplicate detector id `{}`", d.id())));
            }
        }
        Ok(())
    }
}

/// BER of one detector at one SNR.
#[derive(Clone, Debug, PartialEq)]
pub struct BerRecord {
    pub snr_db: f64,
    pub detector: String,
    pub bits_simulated: u64,
    pub errors: u64,
}

impl BerRecord {
    pub fn ber(&self) -> f64 {
        self.errors as f64 / self.bits_simulated as f64
    }

    /// Binomial standard error of [`BerRecord::ber`].
    pub fn std_error(&self) -> f64 {
        let p = self.ber();
        (p * (1.0 - p) / self.bits_simulated as f64).sqrt()
    }
}

/// Runs every detector at every SNR of `spec`; model paths resolve against
/// the current directory.
pub fn evaluate_ber(spec: &ExperimentSpec) -> Result<Vec<BerRecord>> {
    evaluate_ber_in(spec, Path::new("."))
}

/// [`evaluate_ber`] with model paths relative to `base`.
///
/// Frame `f` at SNR index `s` draws its channel, symbols and noise from the
/// stream `(seed, s, f)`, and every detector sees that same frame. Each
/// detector stops at the first frame where its bit count reaches `min_bits`
/// or its error count reaches `max_bit_errors`.
pub fn evaluate_ber_in(spec: &ExperimentSpec, base: &Path) -> Result<Vec<BerRecord>> {
    spec.validate()?;
    let detectors: Vec<(String, Detector)> = spec
        .detectors
        .iter()
        .map(|d| Ok((d.id().to_string(), d.build(&spec.system, base)?)))
        .collect::<Result<_>>()?;
    evaluate_detectors(spec, &detectors)
}

/// Runs already-built detectors under the system, channel, grid and
/// stopping rule of `spec`; `spec.detectors` is not consulted.
pub fn evaluate_detectors(spec: &ExperimentSpec, detectors: &[(String, Detector)]) -> Result<Vec<BerRecord>> {
    let mut probe = spec.clone();
    probe.detectors = detectors.iter().map(|(id, _)| DetectorSpec::new("bp").with_label(id)).collect();
    probe.validate()?;
    let cfg = spec.system;
    let channel = ScenarioChannel::new(cfg, spec.channel)?;
    let ccfg = *channel.config();
    let bits_per_frame = cfg.bits_per_vector() as u64;

    let mut records = Vec::new();
    for (s, &snr) in spec.snr_grid_db.iter().enumerate() {
        let mut bits = vec![0u64; detectors.len()];
        let mut errors = vec![0u64; detectors.len()];
        let mut active: Vec<bool> = vec![true; detectors.len()];
        let mut next_frame = 0u64;
        while active.iter().any(|&a| a) {
            let frames: Vec<u64> = (next_frame..next_frame + spec.frames_per_chunk as u64).collect();
            next_frame += spec.frames_per_chunk as u64;
            let act = active.clone();
            let per_frame: Vec<Result<Vec<u64>>> = frames
                .par_iter()
                .map(|&f| {
                    let mut rng = stream(spec.seed, &[s as u64, f]);
                    let ch = channel.generate(snr, &mut rng)?;
                    let frame = random_frame(&ccfg, &mut rng)?;
                    let rx = transmit(&ch, &frame, &mut rng)?;
                    let sys = RealSystem::new(&ccfg, &ch, &rx)?;
                    let mut out = vec![0u64; detectors.len()];
                    for (d, (_, det)) in detectors.iter().enumerate() {
                        if !act[d] {
                            continue;
                        }
                        let decided = indices_to_bits(&det.detect(&ccfg, &ch, &rx, &sys)?, &ccfg)?;
                        out[d] = decided.iter().zip(&frame.bits).filter(|(a, b)| a != b).count() as u64;
                    }
                    Ok(out)
                })
                .collect();
            for frame_errors in per_frame {
                let frame_errors = frame_errors?;
                for d in 0..detectors.len() {
                    if !active[d] {
                        continue;
                    }
                    bits[d] += bits_per_frame;
                    errors[d] += frame_errors[d];
                    let enough_bits = bits[d] >= spec.min_bits;
                    let enough_errors = spec.max_bit_errors.is_some_and(|m| m > 0 && errors[d] >= m);
                    if enough_bits || enough_errors {
                        active[d] = false;
                    }
                }
            }
        }
        for (d, (id, _)) in detectors.iter().enumerate() {
            records.push(BerRecord {
                snr_db: snr,
                detector: id.clone(),
                bits_simulated: bits[d],
                errors: errors[d],
            });
        }
    }
    sort_records(&mut records);
    Ok(records)
}

/// Orders records by detector id, then SNR.
pub fn sort_records(records: &mut [BerRecord]) {
    records.sort_by(|a, b| a.detector.cmp(&b.detector).then(a.snr_db.total_cmp(&b.snr_db)));
}

pub const CSV_HEADER: &str = "snr_db,detector,ber,bits_simulated,errors";

pub fn records_to_csv(records: &[BerRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{},{},{},{},{}", r.snr_db, r.detector, r.ber(), r.bits_simulated, r.errors);
    }
    out
}

pub fn write_csv(records: &[BerRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, records_to_csv(records)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_and_order() {
        let mut recs = vec![
            BerRecord {
                snr_db: 10.0,
                detector: "mmse".into(),
                bits_simulated: 100,
                errors: 3,
            },
            BerRecord {
                snr_db: 5.0,
                detector: "mmse".into(),
                bits_simulated: 100,
                errors: 7,
            },
            BerRecord {
                snr_db: 5.0,
                detector: "bp".into(),
                bits_simulated: 200,
                errors: 1,
            },
        ];
        sort_records(&mut recs);
        let csv = records_to_csv(&recs);
        assert_eq!(
            csv,
            "snr_db,detector,ber,bits_simulated,errors\n5,bp,0.005,200,1\n5,mmse,0.07,100,7\n10,mmse,0.03,100,3\n"
        );
    }

    #[test]
    fn noiseless_mmse_is_error_free() {
        let cfg = SystemConfig::new(4, 4, 16);
        let mut spec = ExperimentSpec::new(cfg, ChannelScenario::Iid, vec![DetectorSpec::new("mmse")], vec![200.0]);
        spec.min_bits = 20_000;
        let recs = evaluate_ber(&spec).unwrap();
        assert_eq!(recs[0].errors, 0);
        assert!(recs[0].bits_simulated >= 20_000);
    }

    #[test]
    fn rejects_duplicate_ids() {
        let cfg = SystemConfig::new(2, 2, 4);
        let spec = ExperimentSpec::new(
            cfg,
            ChannelScenario::Iid,
            vec![DetectorSpec::new("bp"), DetectorSpec::new("bp")],
            vec![0.0],
        );
        assert!(spec.validate().is_err());
    }
}
