//! Misinformation propagation on a blockchain-enabled social network.
//!
//! Message confirmation is modelled as a double-spend race between dishonest
//! and honest miners. The first time the dishonest chain leads by `k` blocks
//! is the transmission time of a misinformation contact. That distribution
//! drives two SIR engines:
//!
//! * [`abm`]: an agent-based simulation on a stochastic block model graph
//!   ([`network`]), with and without the blockchain delay.
//! * [`meanfield`]: population-level difference equations where new
//!   infections are a convolution of past contacts with the transmission
//!   time distribution.
//!
//! [`metrics`] measures realised trajectories and [`estimation`] fits SIR
//! parameters to an observed infected series with Metropolis-Hastings.

// `!(x > 0.0)` is used deliberately so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abm;
pub mod doublespend;
pub mod error;
pub mod estimation;
pub mod meanfield;
pub mod metrics;
pub mod network;
pub mod oracle;
pub mod rng;
pub mod scenario;
pub mod series;

pub use error::{Error, Result};
