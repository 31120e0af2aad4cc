//! Named experiment and training configurations.
//!
//! Presets are TOML files under `presets/` in this crate, embedded at build
//! time. Config files given on the command line use the same format:
//!
//! ```toml
//! name = "my-run"
//! description = "free text"
//!
//! [experiment]          # or [training] or [depth_search]
//! ...
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::ExperimentSpec;
use crate::mimo::SystemConfig;
use crate::train::{TrainingSchedule, DEFAULT_PLATEAU_THRESHOLD};
use crate::unfolded::NetVariant;

/// Training run of one network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingPreset {
    pub system: SystemConfig,
    pub variant: NetVariant,
    pub layers: usize,
    #[serde(default)]
    pub schedule: TrainingSchedule,
}

impl TrainingPreset {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.layers == 0 {
            return Err(Error::InvalidConfig("layers must be >= 1".into()));
        }
        self.schedule.validate()
    }
}

fn default_threshold() -> f64 {
    DEFAULT_PLATEAU_THRESHOLD
}

fn default_validation_bits() -> u64 {
    200_000
}

/// Greedy search over network depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepthSearchPreset {
    pub system: SystemConfig,
    pub variant: NetVariant,
    pub l_min: usize,
    pub l_max: usize,
    /// Maximum number of depths to train; defaults to the whole range.
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub schedule: TrainingSchedule,
    /// The validation BER is the mean BER over these SNRs.
    pub validation_snr_db: Vec<f64>,
    #[serde(default = "default_validation_bits")]
    pub validation_bits: u64,
    #[serde(default)]
    pub validation_seed: u64,
}

impl DepthSearchPreset {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if self.l_min == 0 || self.l_min > self.l_max {
            return Err(Error::InvalidConfig(format!("depth range [{}, {}] is empty", self.l_min, self.l_max)));
        }
        if self.validation_snr_db.is_empty() || self.validation_bits == 0 {
            return Err(Error::InvalidConfig("validation needs SNRs and bits".into()));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::InvalidConfig("threshold must be positive".into()));
        }
        self.schedule.validate()
    }

    pub fn budget(&self) -> usize {
        self.budget.unwrap_or(self.l_max - self.l_min + 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PresetBody {
    Experiment(ExperimentSpec),
    Training(TrainingPreset),
    DepthSearch(DepthSearchPreset),
}

impl PresetBody {
    pub fn kind(&self) -> &'static str {
        match self {
            PresetBody::Experiment(_) => "experiment",
            PresetBody::Training(_) => "training",
            PresetBody::DepthSearch(_) => "depth-search",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub body: PresetBody,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PresetFile {
    name: String,
    #[serde(default)]
    description: String,
    experiment: Option<ExperimentSpec>,
    training: Option<TrainingPreset>,
    depth_search: Option<DepthSearchPreset>,
}

/// Parses and validates a preset or config file.
pub fn parse_preset(text: &str) -> Result<Preset> {
    let file: PresetFile = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let body = match (file.experiment, file.training, file.depth_search) {
        (Some(e), None, None) => {
            e.validate()?;
            PresetBody::Experiment(e)
        }
        (None, Some(t), None) => {
            t.validate()?;
            PresetBody::Training(t)
        }
        (None, None, Some(d)) => {
            d.validate()?;
            PresetBody::DepthSearch(d)
        }
        _ => {
            return Err(Error::InvalidConfig(format!(
                "`{}` must contain exactly one of [experiment], [training], [depth_search]",
                file.name
            )))
        }
    };
    Ok(Preset {
        name: file.name,
        description: file.description,
        body,
    })
}

pub fn load_preset_file(path: impl AsRef<Path>) -> Result<Preset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_preset(&text).map_err(|e| match e {
        Error::InvalidConfig(msg) => Error::InvalidConfig(format!("{}: {msg}", path.display())),
        other => other,
    })
}

macro_rules! embedded {
    ($($file:literal),* $(,)?) => {
        &[$(($file, include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/presets/", $file)))),*]
    };
}

const EMBEDDED: &[(&str, &str)] = embedded![
    "fig4.toml",
    "fig5-rx-corr.toml",
    "fig5-tx-corr.toml",
    "fig5-rxtx-corr.toml",
    "fig6-rx-corr.toml",
    "fig6-tx-corr.toml",
    "fig6-rxtx-corr.toml",
    "fig7.toml",
    "fig8-rx-corr.toml",
    "fig8-tx-corr.toml",
    "fig8-rxtx-corr.toml",
    "fig9-rx-corr.toml",
    "fig9-tx-corr.toml",
    "fig9-rxtx-corr.toml",
    "fig10-depth-8x32.toml",
    "siso-awgn.toml",
    "table3-dbp-8x32.toml",
    "table3-dbp-16x16.toml",
    "table3-ms-8x32.toml",
    "table3-ms-16x16.toml",
    "table3-dbp-8x32-snr0-25.toml",
    "table3-ms-8x32-l10.toml",
];

/// Every built-in preset, in catalogue order.
pub fn preset_catalog() -> Vec<Preset> {
    EMBEDDED
        .iter()
        .map(|(file, text)| parse_preset(text).unwrap_or_else(|e| panic!("built-in preset {file}: {e}")))
        .collect()
}

pub fn find_preset(name: &str) -> Result<Preset> {
    preset_catalog()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}

/// Conventional checkpoint path of a training preset under `dir`.
pub fn model_path(dir: &Path, training_preset: &str) -> PathBuf {
    dir.join(format!("{training_preset}.ubp"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn catalogue_parses_with_unique_names() {
        let all = preset_catalog();
        let names: BTreeSet<_> = all.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names.len(), all.len());
        for (file, _) in EMBEDDED {
            assert!(names.contains(file.trim_end_matches(".toml")), "{file}");
        }
    }

    #[test]
    fn table3_values() {
        let PresetBody::Training(t) = find_preset("table3-dbp-8x32").unwrap().body else {
            panic!("training preset expected")
        };
        assert_eq!((t.layers, t.schedule.total_iterations, t.schedule.batch_size), (7, 5000, 100));
        assert_eq!((t.system.tx_antennas, t.system.rx_antennas), (8, 32));
        for (name, l, it) in [
            ("table3-dbp-16x16", 15, 5000),
            ("table3-ms-8x32", 15, 10000),
            ("table3-ms-16x16", 15, 10000),
        ] {
            let PresetBody::Training(t) = find_preset(name).unwrap().body else {
                panic!("{name}")
            };
            assert_eq!((t.layers, t.schedule.total_iterations, t.schedule.batch_size), (l, it, 100), "{name}");
            assert!(t.schedule.init.delta == 0.5 || t.variant == NetVariant::DnnMs);
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(find_preset("fig99"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn rejects_multiple_bodies() {
        let text = "name = \"x\"\n[training]\nvariant = \"dnn-dbp\"\nlayers = 2\n[training.system]\ntx_antennas = 1\nrx_antennas = 1\n[depth_search]\n";
        assert!(parse_preset(text).is_err());
    }
}
