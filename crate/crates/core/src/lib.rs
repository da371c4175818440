//! Analytical model of vehicle-induced line-of-sight blockage for mmWave and
//! sub-THz vehicle-to-vehicle links on multi-lane highways.
//!
//! The crate is split bottom-up:
//!
//! * [`stats`]: Gaussian tail, Gaussian mixtures and the Poisson-binomial PMF.
//! * [`geometry`]: Fresnel clearance and occupancy-slot sizes.
//! * [`blockage`]: blocker-count distributions given the link distance, the
//!   lane-offset law and the TxV/RxV distance density.
//! * [`link_budget`]: path loss, conditional SNR, the SNR mixture, service
//!   probability and the distance-marginalised SNR law.
//! * [`sim`]: an independent geometric Monte Carlo oracle.
//! * [`cli`]: configuration loading and experiment orchestration.
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled
//! (the default) and fall back to plain iterators otherwise. Results do not
//! depend on the schedule.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blockage;
pub mod cli;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod link_budget;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
