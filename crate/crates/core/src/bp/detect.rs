use serde::{Deserialize, Serialize};

use super::messages::{argmax, extrinsic_sum, observation_update, soft_output, softmax_prior, RealSystem};
use super::rules::{apply_correction, damp, had_damping_factor, kl_per_message, ms_prior, Factor};
use crate::error::{Error, Result};
use crate::tensor::Tensor3;

/// Messages carried between iterations.
#[derive(Clone, Debug, PartialEq)]
pub struct BeliefState {
    /// Prior LLRs, `2M x 2N x K`.
    pub alpha: Tensor3,
    /// Posterior LLRs, `2N x 2M x K`.
    pub beta: Tensor3,
    /// Priors produced by the latest iteration, `2M x 2N x K`.
    pub p_cur: Tensor3,
    /// Priors of the iteration before.
    pub p_prev: Tensor3,
    pub iteration: usize,
}

impl BeliefState {
    pub fn initial(sys: &RealSystem) -> Self {
        let (sym, obs, k) = (sys.symbols(), sys.observations(), sys.alphabet_size());
        Self {
            alpha: Tensor3::zeros(sym, obs, k),
            beta: Tensor3::zeros(obs, sym, k),
            p_cur: sys.uniform_priors(),
            p_prev: sys.uniform_priors(),
            iteration: 0,
        }
    }
}

/// Turns the extrinsic LLRs of one iteration into the priors sent next.
pub trait PriorRule {
    /// `layer` counts from 0; `p_prev` holds the priors used by this
    /// iteration's observation update.
    fn prior(&mut self, layer: usize, alpha: &Tensor3, p_prev: &Tensor3) -> Result<Tensor3>;
}

/// Runs one full iteration: observation update from `state.p_cur`, then the
/// extrinsic symbol update, then `rule`.
pub fn bp_iteration<R: PriorRule + ?Sized>(
    sys: &RealSystem,
    state: BeliefState,
    rule: &mut R,
) -> Result<BeliefState> {
    let beta = observation_update(sys, &state.p_cur)?;
    if let Some(bad) = beta.as_slice().iter().find(|v| !v.is_finite()) {
        return Err(Error::Degenerate(format!(
            "non-finite posterior LLR {bad} in iteration {}",
            state.iteration + 1
        )));
    }
    let alpha = extrinsic_sum(&beta);
    let p_new = rule.prior(state.iteration, &alpha, &state.p_cur)?;
    Ok(BeliefState {
        alpha,
        beta,
        p_prev: state.p_cur,
        p_cur: p_new,
        iteration: state.iteration + 1,
    })
}

/// Runs `layers` iterations from the uniform initialization.
pub fn run_bp<R: PriorRule + ?Sized>(sys: &RealSystem, layers: usize, rule: &mut R) -> Result<BeliefState> {
    if layers == 0 {
        return Err(Error::InvalidConfig("BP needs at least one iteration".into()));
    }
    let mut state = BeliefState::initial(sys);
    for _ in 0..layers {
        state = bp_iteration(sys, state, rule)?;
    }
    Ok(state)
}

/// Soft output and hard decisions of a message-passing detector.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftOutput {
    /// Row-major `2M x K`.
    pub gamma: Vec<f64>,
    /// Alphabet index per real dimension.
    pub decisions: Vec<usize>,
}

impl SoftOutput {
    pub fn from_beta(beta: &Tensor3) -> Self {
        let k = beta.dims()[2];
        let gamma = soft_output(beta);
        let decisions = gamma.chunks_exact(k).map(argmax).collect();
        Self { gamma, decisions }
    }
}

/// How HAD picks its constant `c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HadConstant {
    /// `c = d^(1)`, so the first damping factor is 1/2.
    FirstIteration,
    Fixed(f64),
}

/// Fixed-factor BP variants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BpVariant {
    Plain,
    Damped { delta: f64 },
    Had { constant: HadConstant },
    MaxSum,
    /// Damped normalized/offset max-sum with one factor set for every message.
    CorrectedMaxSum { delta: f64, lambda: f64, omega: f64 },
}

struct VariantRule {
    variant: BpVariant,
    had_c: Option<f64>,
}

impl PriorRule for VariantRule {
    fn prior(&mut self, layer: usize, alpha: &Tensor3, p_prev: &Tensor3) -> Result<Tensor3> {
        match self.variant {
            BpVariant::Plain => Ok(softmax_prior(alpha)),
            BpVariant::Damped { delta } => damp(&softmax_prior(alpha), p_prev, Factor::Scalar(delta)),
            BpVariant::Had { constant } => {
                let p = softmax_prior(alpha);
                let c = match (constant, self.had_c) {
                    (_, Some(c)) => c,
                    (HadConstant::Fixed(c), None) => c,
                    (HadConstant::FirstIteration, None) => {
                        debug_assert_eq!(layer, 0);
                        let (_, d1) = kl_per_message(&p, p_prev);
                        d1.max(f64::MIN_POSITIVE)
                    }
                };
                self.had_c = Some(c);
                let step = had_damping_factor(&p, p_prev, c)?;
                damp(&p, p_prev, Factor::Scalar(step.delta))
            }
            BpVariant::MaxSum => Ok(ms_prior(alpha)),
            BpVariant::CorrectedMaxSum { delta, lambda, omega } => apply_correction(
                &ms_prior(alpha),
                p_prev,
                Factor::Scalar(delta),
                Factor::Scalar(lambda),
                Factor::Scalar(omega),
            ),
        }
    }
}

/// Runs `layers` iterations of the chosen variant and returns the soft output
/// `gamma_i(s_k) = sum_t beta_ti(s_k)` with argmax decisions.
pub fn bp_detect(sys: &RealSystem, variant: BpVariant, layers: usize) -> Result<SoftOutput> {
    let mut rule = VariantRule { variant, had_c: None };
    let state = run_bp(sys, layers, &mut rule)?;
    Ok(SoftOutput::from_beta(&state.beta))
}
