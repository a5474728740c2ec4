//! Max-min secrecy outage optimization over IRS phase shifts and receive vectors.
//!
//! The crate evaluates the closed-form secrecy outage probability (SOP) of
//! each user and minimizes the worst user's SOP by alternating between
//!
//! * per-user receive vectors, solved exactly as generalized Rayleigh
//!   quotients ([`receiver`]), and
//! * the IRS phase-shift vector, solved through a semidefinite relaxation
//!   ([`lift`]), a generalized Dinkelbach iteration ([`dinkelbach`]) over a
//!   primal-dual interior-point solver ([`sdp`]), and Gaussian randomization.
//!
//! A max-min SINR baseline shares the same machinery ([`ao`]).
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled; only wall-clock timing in the AO trace depends on `std`.

#![cfg_attr(not(feature = "std"), no_std)]
// NaN must fail these guards, and index loops mirror the matrix algebra
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

mod math;

pub mod ao;
pub mod channel;
pub mod dinkelbach;
pub mod error;
pub mod lift;
pub mod linalg;
pub mod metrics;
pub mod montecarlo;
pub mod receiver;
pub mod rng;
pub mod sdp;

pub use ao::{run_ao, run_baseline_mmsinr, AoConfig, AoTrace, IterationRecord, Objective};
pub use channel::{ChannelSet, EveChannelSample, PhaseShift, SystemConfig};
pub use error::Error;
pub use linalg::{CMatrix, CVector, EigResult, C64};
pub use receiver::ReceiveMatrix;

/// Crate version, recorded next to every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
