//! Geometric Monte Carlo oracle.
//!
//! Snapshots of highway traffic are drawn from a hard-core renewal process
//! per lane, the TxV and RxV are dropped in, and blockers are counted by
//! intersecting the LoS segment with each vehicle footprint and comparing the
//! vehicle's sampled height with the Fresnel clearance along the crossed
//! chord. Nothing here uses the slot discretisation or the analytical
//! blockage probabilities.

mod blockers;
mod experiment;
mod snapshot;

pub use blockers::{count_blockers_geometric, segment_box_overlap};
pub use experiment::{
    blocker_histogram, mean_estimate, proportion, run_experiment, run_trials, sample_link_snr, sample_pair_distances,
    Curve, CurvePoint, Estimate, Experiment, ExperimentResult, LanePlacement, LinkSpec, TrialRecord, Z_95,
};
pub use snapshot::{generate_snapshot, generate_snapshot_with, place_link, renewal_rate, Vehicle, VehicleSnapshot};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG for trial `stream` under `master_seed`; independent of scheduling.
pub fn trial_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}
