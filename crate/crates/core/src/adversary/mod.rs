//! Threat models: a bounded number of corrupted executors, or a bounded
//! bribery budget.

pub mod bribery;
pub mod inject;
pub mod sybil;

pub use bribery::{bribery_budget, reputation_loss, BriberyError, BriberyParams};
pub use inject::{coalition_shares, inject_misbehavior, InjectError};
pub use sybil::{
    hypergeometric_capture, sybil_budget, sybil_capture_prob, sybil_grid_argmin, sybil_monte_carlo, sybil_optimum,
    sybil_row, MonteCarlo, SybilParams, SybilRow,
};
