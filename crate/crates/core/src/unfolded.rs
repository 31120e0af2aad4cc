//! BP unrolled into a fixed-depth network with learnable correction factors.
//!
//! Layer `l` performs one full BP iteration: the observation update from
//! the priors of layer `l - 1`, the extrinsic symbol update, and then either
//! per-edge damping (DNN-dBP) or the damped normalized/offset max-sum rule
//! (DNN-MS) with that layer's factors. The network output is the per-
//! dimension softmax of the BP soft output.
//!
//! Every factor lives in `(0, 1)` through a logistic reparameterization of an
//! unconstrained raw value; raw `0` gives the factor `0.5`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bp::{
    apply_correction, bp_iteration, damp, ms_prior, softmax_in_place, softmax_prior, BeliefState, Factor,
    PriorRule, RealSystem, SoftOutput, PRIOR_FLOOR,
};
use crate::error::{Error, Result};
use crate::mimo::{ChannelInstance, ReceivedFrame, SystemConfig};
use crate::tensor::Tensor3;

/// Logistic map from raw parameters to factors.
pub fn constrain(raw: f64) -> f64 {
    if raw >= 0.0 {
        1.0 / (1.0 + (-raw).exp())
    } else {
        let e = raw.exp();
        e / (1.0 + e)
    }
}

/// Inverse of [`constrain`]; `0` and `1` map to `-inf` and `+inf`.
pub fn unconstrain(value: f64) -> f64 {
    (value / (1.0 - value)).ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NetVariant {
    #[serde(rename = "dnn-dbp")]
    DnnDbp,
    #[serde(rename = "dnn-ms")]
    DnnMs,
}

impl NetVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            NetVariant::DnnDbp => "dnn-dbp",
            NetVariant::DnnMs => "dnn-ms",
        }
    }

    /// Factor families carried by this variant, in parameter order.
    pub fn families(&self) -> &'static [FactorKind] {
        match self {
            NetVariant::DnnDbp => &[FactorKind::Delta],
            NetVariant::DnnMs => &[FactorKind::Delta, FactorKind::Lambda, FactorKind::Omega],
        }
    }
}

impl fmt::Display for NetVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NetVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dnn-dbp" => Ok(NetVariant::DnnDbp),
            "dnn-ms" => Ok(NetVariant::DnnMs),
            other => Err(Error::Format(format!("unknown network variant `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FactorKind {
    Delta,
    Lambda,
    Omega,
}

impl FactorKind {
    pub fn name(&self) -> &'static str {
        match self {
            FactorKind::Delta => "delta",
            FactorKind::Lambda => "lambda",
            FactorKind::Omega => "omega",
        }
    }
}

/// Initial factor values, in the constrained space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorInit {
    pub delta: f64,
    pub lambda: f64,
    pub omega: f64,
}

impl Default for FactorInit {
    fn default() -> Self {
        Self {
            delta: 0.5,
            lambda: 0.5,
            omega: 0.5,
        }
    }
}

impl FactorInit {
    fn value(&self, kind: FactorKind) -> f64 {
        match kind {
            FactorKind::Delta => self.delta,
            FactorKind::Lambda => self.lambda,
            FactorKind::Omega => self.omega,
        }
    }
}

/// One factor family over all layers and edges, `L x 2M x 2N` row-major.
///
/// Keeps the raw parameters and their constrained values side by side so a
/// network loaded from constrained values reproduces them bit for bit.
/// Equality looks at the constrained values only.
#[derive(Clone, Debug)]
struct FactorTensor {
    raw: Vec<f64>,
    value: Vec<f64>,
}

impl PartialEq for FactorTensor {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl FactorTensor {
    fn from_raw(raw: Vec<f64>) -> Self {
        let value = raw.iter().map(|&r| constrain(r)).collect();
        Self { raw, value }
    }

    fn from_values(value: Vec<f64>) -> Self {
        let raw = value.iter().map(|&v| unconstrain(v)).collect();
        Self { raw, value }
    }
}

/// Learnable correction factors of an unfolded detector.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrectionFactors {
    variant: NetVariant,
    layers: usize,
    sym: usize,
    obs: usize,
    families: Vec<FactorTensor>,
}

impl CorrectionFactors {
    pub fn new(variant: NetVariant, layers: usize, sym: usize, obs: usize, init: FactorInit) -> Result<Self> {
        let size = layers * sym * obs;
        let mut families = Vec::new();
        for &kind in variant.families() {
            let v = init.value(kind);
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "initial {} = {v} must lie in (0, 1)",
                    kind.name()
                )));
            }
            families.push(FactorTensor::from_raw(vec![unconstrain(v); size]));
        }
        Self::check_dims(layers, sym, obs)?;
        Ok(Self {
            variant,
            layers,
            sym,
            obs,
            families,
        })
    }

    /// Builds factors from constrained values, one `L x 2M x 2N` tensor per
    /// family of the variant. Values must lie in `[0, 1]`; the endpoints are
    /// allowed so neutral settings can be expressed exactly.
    pub fn from_values(
        variant: NetVariant,
        layers: usize,
        sym: usize,
        obs: usize,
        values: Vec<Vec<f64>>,
    ) -> Result<Self> {
        Self::check_dims(layers, sym, obs)?;
        let kinds = variant.families();
        if values.len() != kinds.len() {
            return Err(Error::Dimension(format!(
                "{variant} needs {} factor families, got {}",
                kinds.len(),
                values.len()
            )));
        }
        let size = layers * sym * obs;
        let mut families = Vec::new();
        for (kind, v) in kinds.iter().zip(values) {
            if v.len() != size {
                return Err(Error::Dimension(format!(
                    "{} has {} values, expected {size}",
                    kind.name(),
                    v.len()
                )));
            }
            if let Some(bad) = v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::InvalidConfig(format!("{} = {bad} outside [0, 1]", kind.name())));
            }
            families.push(FactorTensor::from_values(v));
        }
        Ok(Self {
            variant,
            layers,
            sym,
            obs,
            families,
        })
    }

    fn check_dims(layers: usize, sym: usize, obs: usize) -> Result<()> {
        if layers == 0 || sym == 0 || obs == 0 {
            return Err(Error::InvalidConfig("factor tensors need L, 2M, 2N >= 1".into()));
        }
        Ok(())
    }

    pub fn variant(&self) -> NetVariant {
        self.variant
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    /// `(L, 2M, 2N)`
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.layers, self.sym, self.obs)
    }

    fn per_layer(&self) -> usize {
        self.sym * self.obs
    }

    fn family(&self, kind: FactorKind) -> Option<&FactorTensor> {
        self.variant
            .families()
            .iter()
            .position(|&k| k == kind)
            .map(|p| &self.families[p])
    }

    /// Constrained values of one family, `L x 2M x 2N`.
    pub fn values(&self, kind: FactorKind) -> Option<&[f64]> {
        self.family(kind).map(|f| f.value.as_slice())
    }

    /// Constrained values of one family at one layer, `2M x 2N`.
    pub fn layer_values(&self, kind: FactorKind, layer: usize) -> Option<&[f64]> {
        let n = self.per_layer();
        self.values(kind).map(|v| &v[layer * n..(layer + 1) * n])
    }

    /// Number of raw parameters.
    pub fn num_params(&self) -> usize {
        self.families.len() * self.layers * self.per_layer()
    }

    /// Raw parameters, families concatenated in [`NetVariant::families`]
    /// order, each `L x 2M x 2N`.
    pub fn raw_params(&self) -> Vec<f64> {
        self.families.iter().flat_map(|f| f.raw.iter().copied()).collect()
    }

    pub fn set_raw_params(&mut self, raw: &[f64]) -> Result<()> {
        if raw.len() != self.num_params() {
            return Err(Error::Dimension(format!(
                "{} raw parameters, expected {}",
                raw.len(),
                self.num_params()
            )));
        }
        let size = self.layers * self.per_layer();
        for (family, chunk) in self.families.iter_mut().zip(raw.chunks_exact(size)) {
            *family = FactorTensor::from_raw(chunk.to_vec());
        }
        Ok(())
    }

    /// Layer index of a flat raw-parameter position.
    pub fn layer_of_param(&self, index: usize) -> usize {
        (index % (self.layers * self.per_layer())) / self.per_layer()
    }
}

/// Per-dimension output distribution of the network.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkOutput {
    /// `O = softmax(gamma)`, row-major `2M x K`.
    pub probs: Vec<f64>,
    /// Row-major `2M x K`.
    pub gamma: Vec<f64>,
    pub alphabet_size: usize,
}

impl NetworkOutput {
    pub fn from_soft(soft: &SoftOutput, alphabet_size: usize) -> Self {
        let mut probs = soft.gamma.clone();
        for lane in probs.chunks_exact_mut(alphabet_size) {
            softmax_in_place(lane);
        }
        Self {
            probs,
            gamma: soft.gamma.clone(),
            alphabet_size,
        }
    }

    /// Argmax of `O` per dimension, lowest index on ties.
    pub fn decisions(&self) -> Vec<usize> {
        self.probs
            .chunks_exact(self.alphabet_size)
            .map(crate::bp::argmax)
            .collect()
    }
}

/// Cross entropy `-(1/2M) sum_i sum_k x_i(s_k) log O_i(s_k)` against one-hot
/// labels, with probabilities floored at [`PRIOR_FLOOR`].
pub fn loss(out: &NetworkOutput, labels_onehot: &[f64]) -> Result<f64> {
    if labels_onehot.len() != out.probs.len() {
        return Err(Error::Dimension(format!(
            "{} labels for {} outputs",
            labels_onehot.len(),
            out.probs.len()
        )));
    }
    let dims = out.probs.len() / out.alphabet_size;
    let total: f64 = out
        .probs
        .iter()
        .zip(labels_onehot)
        .filter(|(_, &x)| x != 0.0)
        .map(|(&o, &x)| -x * o.max(PRIOR_FLOOR).ln())
        .sum();
    Ok(total / dims as f64)
}

/// DNN-dBP or DNN-MS detector for one antenna configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct UnfoldedNetwork {
    pub cfg: SystemConfig,
    pub factors: CorrectionFactors,
}

impl UnfoldedNetwork {
    pub fn new(cfg: SystemConfig, variant: NetVariant, layers: usize) -> Result<Self> {
        Self::with_init(cfg, variant, layers, FactorInit::default())
    }

    pub fn with_init(cfg: SystemConfig, variant: NetVariant, layers: usize, init: FactorInit) -> Result<Self> {
        cfg.validate()?;
        let factors = CorrectionFactors::new(variant, layers, cfg.real_tx(), cfg.real_rx(), init)?;
        Ok(Self { cfg, factors })
    }

    pub fn from_factors(cfg: SystemConfig, factors: CorrectionFactors) -> Result<Self> {
        cfg.validate()?;
        let (_, sym, obs) = factors.shape();
        if sym != cfg.real_tx() || obs != cfg.real_rx() {
            return Err(Error::Dimension(format!(
                "factors are {sym}x{obs}, configuration needs {}x{}",
                cfg.real_tx(),
                cfg.real_rx()
            )));
        }
        Ok(Self { cfg, factors })
    }

    pub fn layers(&self) -> usize {
        self.factors.layers()
    }

    pub fn variant(&self) -> NetVariant {
        self.factors.variant()
    }

    /// Prior rule applying this network's factors at the state's layer.
    pub fn rule(&self) -> NetworkRule<'_> {
        NetworkRule { factors: &self.factors }
    }

    /// Runs all layers and returns the soft output and its softmax.
    pub fn forward(&self, ch: &ChannelInstance, rx: &ReceivedFrame) -> Result<NetworkOutput> {
        let sys = RealSystem::new(&self.cfg, ch, rx)?;
        self.forward_system(&sys)
    }

    pub fn forward_system(&self, sys: &RealSystem) -> Result<NetworkOutput> {
        let state = self.run_layers(sys, BeliefState::initial(sys), self.layers())?;
        Ok(NetworkOutput::from_soft(
            &SoftOutput::from_beta(&state.beta),
            sys.alphabet_size(),
        ))
    }

    /// Continues from `state` for `count` more layers.
    pub fn run_layers(&self, sys: &RealSystem, mut state: BeliefState, count: usize) -> Result<BeliefState> {
        if state.iteration + count > self.layers() {
            return Err(Error::InvalidConfig(format!(
                "network has {} layers, asked to run up to {}",
                self.layers(),
                state.iteration + count
            )));
        }
        let mut rule = self.rule();
        for _ in 0..count {
            state = bp_iteration(sys, state, &mut rule)?;
        }
        Ok(state)
    }
}

pub struct NetworkRule<'a> {
    factors: &'a CorrectionFactors,
}

impl PriorRule for NetworkRule<'_> {
    fn prior(&mut self, layer: usize, alpha: &Tensor3, p_prev: &Tensor3) -> Result<Tensor3> {
        let f = self.factors;
        let delta = Factor::PerMessage(f.layer_values(FactorKind::Delta, layer).expect("delta family"));
        match f.variant {
            NetVariant::DnnDbp => damp(&softmax_prior(alpha), p_prev, delta),
            NetVariant::DnnMs => {
                let lambda = Factor::PerMessage(f.layer_values(FactorKind::Lambda, layer).expect("lambda family"));
                let omega = Factor::PerMessage(f.layer_values(FactorKind::Omega, layer).expect("omega family"));
                apply_correction(&ms_prior(alpha), p_prev, delta, lambda, omega)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_values() {
        assert_eq!(constrain(0.0), 0.5);
        assert!((constrain(2.0) - 0.880797).abs() < 1e-6);
        assert!((constrain(2.0) - 1.0 / (1.0 + (-2f64).exp())).abs() < 1e-16);
        assert!(constrain(50.0) > 1.0 - 1e-15);
        assert!(constrain(-50.0) < 1e-21);
        assert_eq!(constrain(f64::NEG_INFINITY), 0.0);
        assert_eq!(constrain(f64::INFINITY), 1.0);
        assert!((unconstrain(constrain(1.3)) - 1.3).abs() < 1e-12);
    }

    #[test]
    fn loss_examples() {
        let k = 4;
        let labels = vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        let perfect = NetworkOutput {
            probs: labels.clone(),
            gamma: vec![0.0; 8],
            alphabet_size: k,
        };
        assert_eq!(loss(&perfect, &labels).unwrap(), 0.0);
        let uniform = NetworkOutput {
            probs: vec![0.25; 8],
            gamma: vec![0.0; 8],
            alphabet_size: k,
        };
        assert!((loss(&uniform, &labels).unwrap() - 4f64.ln()).abs() < 1e-15);
        assert!((4f64.ln() - 1.3863).abs() < 1e-4);
    }

    #[test]
    fn factor_shapes() {
        let cfg = SystemConfig::new(2, 3, 16);
        let net = UnfoldedNetwork::new(cfg, NetVariant::DnnMs, 4).unwrap();
        assert_eq!(net.factors.shape(), (4, 4, 6));
        assert_eq!(net.factors.num_params(), 3 * 4 * 4 * 6);
        for kind in [FactorKind::Delta, FactorKind::Lambda, FactorKind::Omega] {
            assert_eq!(net.factors.values(kind).unwrap().len(), 96);
            assert!(net.factors.values(kind).unwrap().iter().all(|&v| v == 0.5));
        }
        let dbp = UnfoldedNetwork::new(cfg, NetVariant::DnnDbp, 4).unwrap();
        assert!(dbp.factors.values(FactorKind::Lambda).is_none());
        assert_eq!(dbp.factors.num_params(), 96);
        assert_eq!(dbp.factors.layer_of_param(95), 3);
        assert_eq!(net.factors.layer_of_param(96 + 24), 1);
    }

    #[test]
    fn rejects_out_of_range_values() {
        let r = CorrectionFactors::from_values(NetVariant::DnnDbp, 1, 1, 1, vec![vec![1.5]]);
        assert!(r.is_err());
        assert!(CorrectionFactors::new(NetVariant::DnnDbp, 1, 1, 1, FactorInit { delta: 1.0, ..Default::default() }).is_err());
    }
}
