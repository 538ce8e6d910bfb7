//! Simulation toolkit for codebook-based IRS reflect-beam training in a
//! multiuser mmWave downlink.
//!
//! The crate covers the full pipeline:
//!
//! - [`array_math`] — steering vectors, direction wrapping, beam gains
//!   and the Kronecker/Hadamard identities behind the cascaded channel;
//! - [`codebook`] — the single-beam codebook over `J = n_x` sampled
//!   directions and the per-sub-array multi-beam codewords sliced from
//!   it;
//! - [`sweep_plan`] — the multi-round bin schedules: the deterministic
//!   max-min-distance design and a seeded random-hashing baseline;
//! - [`channel`] — geometric Rician channel realizations with per-user
//!   ground-truth beam directions;
//! - [`training`] — the three training protocols (exhaustive
//!   single-beam, multi-beam sweep with threshold identification,
//!   random hashing with voting);
//! - [`experiment`] — the Monte Carlo driver producing success-rate and
//!   achievable-rate tables over an SNR grid, with CSV/JSON output.
//!
//! Everything is deterministic given a configuration and seed; trials
//! run on independent ChaCha substreams keyed by trial index.

pub mod array_math;
pub mod channel;
pub mod codebook;
pub mod error;
pub mod experiment;
pub mod sweep_plan;
pub mod training;

pub use error::{Error, Result};
