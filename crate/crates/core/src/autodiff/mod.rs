//! Reverse-mode differentiation of the unfolded detector.

mod graph;
mod tape;

pub use graph::{loss_and_gradient, record_loss, RecordedLoss};
pub use tape::{Tape, Var};
