//! Mini-batch training of the unfolded detectors with Adam, and the greedy
//! search over network depth.

mod adam;
mod depth;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use depth::{greedy_depth_search, plateau_index, DepthSearchResult, DEFAULT_PLATEAU_THRESHOLD};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autodiff::{loss_and_gradient, Tape};
use crate::bp::RealSystem;
use crate::error::{Error, Result};
use crate::mimo::{random_frame, transmit, ChannelInstance, ChannelScenario, ReceivedFrame, ScenarioChannel, SymbolFrame, SystemConfig};
use crate::rng::stream;
use crate::unfolded::{FactorInit, NetVariant, UnfoldedNetwork};

/// Raw parameters are kept inside `[-RAW_LIMIT, RAW_LIMIT]` so every factor
/// stays strictly inside `(0, 1)` in `f64`.
pub const RAW_LIMIT: f64 = 30.0;

fn default_snrs() -> Vec<f64> {
    vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0]
}

fn default_samples() -> usize {
    20
}

fn default_batch() -> usize {
    120
}

fn default_iterations() -> usize {
    5000
}

/// How training batches are drawn and how long training runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSchedule {
    #[serde(default = "default_snrs")]
    pub snr_list_db: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples_per_snr_per_batch: usize,
    /// Must equal `samples_per_snr_per_batch * snr_list_db.len()`.
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_iterations")]
    pub total_iterations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub adam: AdamConfig,
    #[serde(default)]
    pub init: FactorInit,
    #[serde(default)]
    pub channel: ChannelScenario,
    /// Iterations between checkpoints; `0` disables them.
    #[serde(default)]
    pub checkpoint_interval: usize,
}

impl Default for TrainingSchedule {
    fn default() -> Self {
        Self {
            snr_list_db: default_snrs(),
            samples_per_snr_per_batch: default_samples(),
            batch_size: default_batch(),
            total_iterations: default_iterations(),
            seed: 0,
            adam: AdamConfig::default(),
            init: FactorInit::default(),
            channel: ChannelScenario::Iid,
            checkpoint_interval: 0,
        }
    }
}

impl TrainingSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.snr_list_db.is_empty() || self.snr_list_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidConfig("training SNR list must be nonempty and finite".into()));
        }
        if self.samples_per_snr_per_batch == 0 {
            return Err(Error::InvalidConfig("samples_per_snr_per_batch must be >= 1".into()));
        }
        let expected = self.samples_per_snr_per_batch * self.snr_list_db.len();
        if self.batch_size != expected {
            return Err(Error::InvalidConfig(format!(
                "batch_size {} != {} samples x {} SNRs = {expected}",
                self.batch_size,
                self.samples_per_snr_per_batch,
                self.snr_list_db.len()
            )));
        }
        self.adam.validate()?;
        for (name, v) in [
            ("delta", self.init.delta),
            ("lambda", self.init.lambda),
            ("omega", self.init.omega),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidConfig(format!("initial {name} = {v} must lie in (0, 1)")));
            }
        }
        Ok(())
    }

    /// Total number of training samples, `batch_size * total_iterations`.
    pub fn total_samples(&self) -> usize {
        self.batch_size * self.total_iterations
    }
}

/// One labelled detection problem.
#[derive(Clone, Debug)]
pub struct TrainingSample {
    pub system: RealSystem,
    /// Alphabet index of every real dimension.
    pub labels: Vec<usize>,
}

impl TrainingSample {
    pub fn new(cfg: &SystemConfig, ch: &ChannelInstance, rx: &ReceivedFrame, frame: &SymbolFrame) -> Result<Self> {
        let system = RealSystem::new(cfg, ch, rx)?;
        if frame.labels.len() != system.symbols() {
            return Err(Error::Dimension(format!(
                "{} labels for {} real symbols",
                frame.labels.len(),
                system.symbols()
            )));
        }
        Ok(Self {
            system,
            labels: frame.labels.clone(),
        })
    }
}

/// Mean loss and its gradient over a batch.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchGradient {
    pub loss: f64,
    /// In [`CorrectionFactors::raw_params`](crate::unfolded::CorrectionFactors::raw_params) order.
    pub grad: Vec<f64>,
}

/// Gradient of the mean batch loss with respect to the raw parameters.
///
/// Samples run on the rayon pool; their contributions are summed in batch
/// order, so the result does not depend on the thread count.
pub fn gradient(net: &UnfoldedNetwork, batch: &[TrainingSample]) -> Result<BatchGradient> {
    if batch.is_empty() {
        return Err(Error::InvalidConfig("gradient needs a nonempty batch".into()));
    }
    let per_sample: Vec<Result<(f64, Vec<f64>)>> = batch
        .par_iter()
        .map_init(Tape::new, |tape, s| {
            loss_and_gradient(tape, &net.factors, &s.system, &s.labels)
        })
        .collect();
    let n = net.factors.num_params();
    let mut grad = vec![0.0; n];
    let mut loss = 0.0;
    for r in per_sample {
        let (l, g) = r?;
        loss += l;
        for (acc, v) in grad.iter_mut().zip(&g) {
            *acc += v;
        }
    }
    let scale = 1.0 / batch.len() as f64;
    loss *= scale;
    for g in &mut grad {
        *g *= scale;
    }
    if let Some(bad) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::Divergence {
            iteration: None,
            layer: Some(net.factors.layer_of_param(bad)),
            trace: Vec::new(),
        });
    }
    Ok(BatchGradient { loss, grad })
}

/// Draws the training batch of one iteration.
///
/// Each sample gets its own channel, symbols and noise from a stream keyed
/// by `(seed, iteration, snr index, sample index)`.
pub fn draw_batch(
    cfg: &SystemConfig,
    channel: &ScenarioChannel,
    schedule: &TrainingSchedule,
    iteration: usize,
) -> Result<Vec<TrainingSample>> {
    let mut batch = Vec::with_capacity(schedule.batch_size);
    for (s, &snr) in schedule.snr_list_db.iter().enumerate() {
        for n in 0..schedule.samples_per_snr_per_batch {
            let mut rng = stream(schedule.seed, &[iteration as u64, s as u64, n as u64]);
            let ch = channel.generate(snr, &mut rng)?;
            let frame = random_frame(cfg, &mut rng)?;
            let rx = transmit(&ch, &frame, &mut rng)?;
            batch.push(TrainingSample::new(cfg, &ch, &rx, &frame)?);
        }
    }
    Ok(batch)
}

/// Progress report handed to the training observer after every step.
pub struct TrainingProgress<'a> {
    /// Zero-based index of the step just taken.
    pub iteration: usize,
    pub loss: f64,
    pub network: &'a UnfoldedNetwork,
}

#[derive(Clone, Debug)]
pub struct TrainingOutcome {
    pub network: UnfoldedNetwork,
    /// Mean batch loss of every iteration, before its update.
    pub losses: Vec<f64>,
}

/// Trains a fresh network of depth `layers`.
pub fn train(
    cfg: SystemConfig,
    variant: NetVariant,
    layers: usize,
    schedule: &TrainingSchedule,
) -> Result<TrainingOutcome> {
    train_with(cfg, variant, layers, schedule, |_| Ok(()))
}

/// [`train`] with an observer called after every update, e.g. for loss
/// logging and checkpoints.
pub fn train_with<F>(
    cfg: SystemConfig,
    variant: NetVariant,
    layers: usize,
    schedule: &TrainingSchedule,
    mut observer: F,
) -> Result<TrainingOutcome>
where
    F: FnMut(TrainingProgress<'_>) -> Result<()>,
{
    schedule.validate()?;
    let channel = ScenarioChannel::new(cfg, schedule.channel)?;
    let mut network = UnfoldedNetwork::with_init(cfg, variant, layers, schedule.init)?;
    let mut params = network.factors.raw_params();
    let mut adam = AdamState::new(params.len(), schedule.adam);
    let mut losses = Vec::with_capacity(schedule.total_iterations);
    for it in 0..schedule.total_iterations {
        let batch = draw_batch(&cfg, &channel, schedule, it)?;
        let g = match gradient(&network, &batch) {
            Ok(g) => g,
            Err(Error::Divergence { layer, .. }) => {
                return Err(Error::Divergence {
                    iteration: Some(it),
                    layer,
                    trace: losses,
                })
            }
            Err(e) => return Err(e),
        };
        if !g.loss.is_finite() {
            return Err(Error::Divergence {
                iteration: Some(it),
                layer: None,
                trace: losses,
            });
        }
        losses.push(g.loss);
        adam_step(&mut adam, &mut params, &g.grad)?;
        for p in &mut params {
            *p = p.clamp(-RAW_LIMIT, RAW_LIMIT);
        }
        network.factors.set_raw_params(&params)?;
        observer(TrainingProgress {
            iteration: it,
            loss: g.loss,
            network: &network,
        })?;
    }
    Ok(TrainingOutcome { network, losses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unfolded::FactorKind;

    fn small_schedule(iterations: usize) -> TrainingSchedule {
        TrainingSchedule {
            snr_list_db: vec![5.0, 15.0],
            samples_per_snr_per_batch: 2,
            batch_size: 4,
            total_iterations: iterations,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn batch_size_must_agree() {
        let mut s = TrainingSchedule::default();
        assert!(s.validate().is_ok());
        s.batch_size = 100;
        assert!(s.validate().is_err());
        assert_eq!(TrainingSchedule::default().total_samples(), 120 * 5000);
    }

    #[test]
    fn zero_iterations_keep_initialization() {
        let cfg = SystemConfig::new(2, 4, 4);
        let out = train(cfg, NetVariant::DnnMs, 3, &small_schedule(0)).unwrap();
        assert!(out.losses.is_empty());
        for kind in [FactorKind::Delta, FactorKind::Lambda, FactorKind::Omega] {
            assert!(out.network.factors.values(kind).unwrap().iter().all(|&v| v == 0.5));
        }
    }

    #[test]
    fn duplicate_samples_average_to_single() {
        let cfg = SystemConfig::new(2, 4, 16);
        let net = UnfoldedNetwork::new(cfg, NetVariant::DnnDbp, 3).unwrap();
        let channel = ScenarioChannel::new(cfg, ChannelScenario::Iid).unwrap();
        let batch = draw_batch(&cfg, &channel, &small_schedule(1), 0).unwrap();
        let one = gradient(&net, &batch[..1]).unwrap();
        let two = gradient(&net, &[batch[0].clone(), batch[0].clone()]).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn training_is_reproducible() {
        let cfg = SystemConfig::new(2, 4, 16);
        let a = train(cfg, NetVariant::DnnDbp, 2, &small_schedule(3)).unwrap();
        let b = train(cfg, NetVariant::DnnDbp, 2, &small_schedule(3)).unwrap();
        assert_eq!(a.losses, b.losses);
        assert_eq!(a.network, b.network);
        assert!(a.losses.iter().all(|&l| l >= 0.0));
    }
}
