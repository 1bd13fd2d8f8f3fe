//! Simulation toolkit for two-parameter qubit estimation with mutually
//! orthogonal probe states and an entangling measurement.
//!
//! The crate is split by layer:
//!
//! - [`state`]: state vectors, unitaries, parameterized families and their
//!   Jacobians.
//! - [`information`]: QFIM, classical FIM, SLD operators, mean Uhlmann
//!   curvature and Cramér-Rao bound matrices.
//! - [`loem`]: orthogonal probe sets, the encoded product states, the
//!   four-port Bell-like measurement and its outcome probabilities.
//! - [`estimation`]: count sampling, maximum-likelihood estimation and the
//!   repeated-trial campaigns.
//!
//! All values are immutable and every random draw comes from a
//! counter-keyed substream (see [`rng`]), so campaigns are reproducible
//! regardless of thread count.

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimation;
pub mod information;
pub mod loem;
pub mod rng;
pub mod state;

pub use error::{Error, Result};
