//! Belief-propagation detectors on the real-domain factor graph, their
//! fixed-factor variants (damped, HAD, max-sum, corrected max-sum) and the
//! linear MMSE baseline.

mod detect;
mod messages;
mod mmse;
mod rules;

pub use detect::{bp_detect, bp_iteration, run_bp, BeliefState, BpVariant, HadConstant, PriorRule, SoftOutput};
pub use messages::{
    argmax, extrinsic_sum, observation_update, soft_output, softmax_prior, symbol_update, RealSystem,
    PRIOR_FLOOR,
};
pub(crate) use messages::softmax_in_place;
pub use mmse::{mmse_detect, MmseOutput};
pub use rules::{apply_correction, damp, had_damping_factor, kl_divergence, ms_prior, Factor, HadStep};
