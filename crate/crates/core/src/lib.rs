//! Massive-MIMO belief-propagation detection with deep-unfolded correction
//! factors.
//!
//! The crate is organised bottom-up:
//!
//! - [`mimo`]: Gray-coded QAM, Kronecker-correlated Rayleigh channels, AWGN
//!   and the real-valued system view.
//! - [`bp`]: message-passing detectors (plain, damped, HAD, max-sum,
//!   corrected max-sum) and the MMSE baseline.
//! - [`unfolded`]: BP unrolled into an `L`-layer network whose per-edge,
//!   per-layer damping / scaling / offset factors are learnable
//!   (DNN-dBP and DNN-MS).
//! - [`autodiff`] and [`train`]: a reverse-mode tape over the unfolded
//!   forward pass, Adam, the training loop and a greedy depth search.
//! - [`harness`]: Monte-Carlo BER evaluation, CSV output, model checkpoints
//!   and the command-line front end.
//! - [`presets`]: named experiment and training configurations.
//!
//! Runnable walkthroughs live in `examples/`.

pub mod autodiff;
pub mod bp;
pub mod error;
pub mod harness;
pub mod mimo;
pub mod presets;
pub mod rng;
pub mod tensor;
pub mod train;
pub mod unfolded;

pub use error::{Error, Result};
