use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::model_io::load_model;
use crate::bp::{bp_detect, mmse_detect, BpVariant, HadConstant, RealSystem};
use crate::error::{Error, Result};
use crate::mimo::{ChannelInstance, ReceivedFrame, SystemConfig};
use crate::unfolded::UnfoldedNetwork;

/// Detector kinds accepted in experiment configs.
pub const DETECTOR_KINDS: &[&str] = &["mmse", "bp", "damped", "had", "ms", "corrected-ms", "dnn-dbp", "dnn-ms"];

const DEFAULT_LAYERS: usize = 10;

/// One detector entry of an experiment.
///
/// `kind` picks the algorithm; the other fields are its parameters and are
/// ignored by kinds that do not use them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSpec {
    pub kind: String,
    /// Name in the results; defaults to `kind`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// BP iterations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// HAD constant `c`; the first-iteration rule when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub had_c: Option<f64>,
    /// Checkpoint of a trained network.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
}

impl DetectorSpec {
    pub fn new(kind: &str) -> Self {
        Self {
            kind: kind.to_string(),
            label: None,
            layers: None,
            delta: None,
            lambda: None,
            omega: None,
            had_c: None,
            model: None,
        }
    }

    pub fn with_layers(mut self, layers: usize) -> Self {
        self.layers = Some(layers);
        self
    }

    pub fn with_model(mut self, path: impl Into<PathBuf>) -> Self {
        self.model = Some(path.into());
        self
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    /// Parses `kind[:model-path]`, as used on the command line.
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, model) = match text.split_once(':') {
            Some((k, m)) => (k, Some(m)),
            None => (text, None),
        };
        if !DETECTOR_KINDS.contains(&kind) {
            return Err(Error::UnknownDetector(kind.to_string()));
        }
        let mut spec = DetectorSpec::new(kind);
        spec.model = model.map(PathBuf::from);
        Ok(spec)
    }

    pub fn id(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.kind)
    }

    /// Resolves the spec, loading model files relative to `base`.
    pub fn build(&self, cfg: &SystemConfig, base: &Path) -> Result<Detector> {
        let layers = self.layers.unwrap_or(DEFAULT_LAYERS);
        let bp = |variant| Ok(Detector::Bp { variant, layers });
        match self.kind.as_str() {
            "mmse" => Ok(Detector::Mmse),
            "bp" => bp(BpVariant::Plain),
            "damped" => bp(BpVariant::Damped {
                delta: self.delta.unwrap_or(0.5),
            }),
            "had" => bp(BpVariant::Had {
                constant: self.had_c.map_or(HadConstant::FirstIteration, HadConstant::Fixed),
            }),
            "ms" => bp(BpVariant::MaxSum),
            "corrected-ms" => bp(BpVariant::CorrectedMaxSum {
                delta: self.delta.unwrap_or(0.0),
                lambda: self.lambda.unwrap_or(1.0),
                omega: self.omega.unwrap_or(0.0),
            }),
            "dnn-dbp" | "dnn-ms" => {
                let path = self.model.as_ref().ok_or_else(|| {
                    Error::InvalidConfig(format!("detector `{}` needs a model path", self.id()))
                })?;
                let net = load_model(base.join(path))?;
                if net.variant().as_str() != self.kind {
                    return Err(Error::InvalidConfig(format!(
                        "model {} holds a {} network, detector is {}",
                        path.display(),
                        net.variant(),
                        self.kind
                    )));
                }
                let (m, n) = (net.cfg.tx_antennas, net.cfg.rx_antennas);
                if m != cfg.tx_antennas || n != cfg.rx_antennas || net.cfg.modulation_order != cfg.modulation_order {
                    return Err(Error::Dimension(format!(
                        "model {} is {m}x{n} with {}-QAM, experiment is {}x{} with {}-QAM",
                        path.display(),
                        net.cfg.modulation_order,
                        cfg.tx_antennas,
                        cfg.rx_antennas,
                        cfg.modulation_order
                    )));
                }
                Ok(Detector::Unfolded(Box::new(net)))
            }
            other => Err(Error::UnknownDetector(other.to_string())),
        }
    }
}

/// A ready-to-run detector.
#[derive(Clone, Debug)]
pub enum Detector {
    Mmse,
    Bp { variant: BpVariant, layers: usize },
    Unfolded(Box<UnfoldedNetwork>),
}

impl Detector {
    /// Alphabet index of every real dimension.
    pub fn detect(
        &self,
        cfg: &SystemConfig,
        ch: &ChannelInstance,
        rx: &ReceivedFrame,
        sys: &RealSystem,
    ) -> Result<Vec<usize>> {
        match self {
            Detector::Mmse => Ok(mmse_detect(cfg, ch, rx)?.decisions),
            Detector::Bp { variant, layers } => Ok(bp_detect(sys, *variant, *layers)?.decisions),
            Detector::Unfolded(net) => Ok(net.forward_system(sys)?.decisions()),
        }
    }
}
