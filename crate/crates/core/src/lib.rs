//! Deterministic simulator and solver for a power-control game between an
//! RF-powered backscatter user and a smart interferer.
//!
//! Layers, bottom to top:
//!
//! * [`channel`] — free-space link budget, slot physics, unit conversions;
//! * [`solve`] — deterministic one-dimensional maximizer and root finder;
//! * [`stackelberg`] — per-slot payoffs, both best responses, leader–follower
//!   equilibrium with a deviation-grid certificate, concavity audits;
//! * [`learning`] — tabular Q-learning with an epsilon-greedy policy and a
//!   warm-start trainer that transfers a pre-trained table into a live run;
//! * [`sim`] — slotted episodes pitting configurable user strategies against
//!   the best-responding interferer, plus parameter sweeps and CSV export.
//!
//! Everything is seedable and bit-reproducible: the same inputs produce the
//! same outputs, byte for byte, across runs and across machines with IEEE-754
//! doubles.

// Validation throughout uses `!(x > 0.0)`-style predicates on purpose: a NaN
// fails every comparison, so the negated form rejects NaN along with the
// out-of-range values, where `x <= 0.0` would wave NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod learning;
pub mod rng;
pub mod sim;
pub mod solve;
pub mod stackelberg;

pub use error::{Error, Result};
