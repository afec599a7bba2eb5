//! Link-level building blocks for multi-user MIMO downlinks with
//! multi-antenna users: correlated channel generation, receive combining,
//! block-diagonalization / zero-forcing / eigenmode precoding, limited
//! feedback and estimated CSI, greedy scheduling, achievable-rate
//! evaluation and closed-form performance analytics.

pub mod analytics;
pub mod channel;
pub mod combining;
pub mod csi;
pub mod error;
pub mod linalg;
pub mod precoding;
pub mod rates;
pub mod rng;
pub mod scheduling;

pub use error::{Error, Result};
