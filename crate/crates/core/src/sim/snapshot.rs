use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use crate::blockage::ScenarioConfig;
use crate::error::{config, Result};
use crate::stats::GaussianDist;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vehicle {
    /// Lane index in `0..M`; lane `i` is centred at `y = i W`.
    pub lane: usize,
    pub x: f64,
    /// Body height in metres.
    pub height: f64,
}

/// One realisation of the vehicles on the highway segment.
#[derive(Clone, Debug, PartialEq)]
pub struct VehicleSnapshot {
    pub vehicles: Vec<Vehicle>,
    pub seed: u64,
}

/// Rate of the exponential part of the inter-vehicle gap, chosen so that
/// `l_v + d_s + Exp(rate)` has mean `1 / rho`: `rate = rho / (1 - rho (l_v + d_s))`.
///
/// `None` means the spacing is deterministic (`rho (l_v + d_s) = 1`).
pub fn renewal_rate(scenario: &ScenarioConfig) -> Result<Option<f64>> {
    let hard = scenario.vehicle.length + scenario.vehicle.safety_gap;
    let slack = 1.0 - scenario.density * hard;
    if slack < 0.0 {
        return config(format!(
            "density {} veh/m exceeds the hard-core limit 1/(l_v + d_s) = {} veh/m",
            scenario.density,
            1.0 / hard
        ));
    }
    Ok(if slack == 0.0 { None } else { Some(scenario.density / slack) })
}

pub(crate) fn sample_height<R: Rng + ?Sized>(law: GaussianDist, rng: &mut R) -> f64 {
    loop {
        let z: f64 = StandardNormal.sample(rng);
        let h = law.mean + law.std * z;
        if h > 0.0 {
            return h;
        }
    }
}

pub fn generate_snapshot(scenario: &ScenarioConfig, seed: u64) -> Result<VehicleSnapshot> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut snap = generate_snapshot_with(scenario, &mut rng)?;
    snap.seed = seed;
    Ok(snap)
}

/// Draws a snapshot from `rng`. Each lane is a stationary renewal process on
/// `[0, D]`: the first centre is the equilibrium forward-recurrence time and
/// later gaps are `l_v + d_s + Exp(rate)`.
pub fn generate_snapshot_with<R: Rng + ?Sized>(scenario: &ScenarioConfig, rng: &mut R) -> Result<VehicleSnapshot> {
    scenario.validate()?;
    let mut vehicles = Vec::new();
    if scenario.density == 0.0 {
        return Ok(VehicleSnapshot { vehicles, seed: 0 });
    }
    let hard = scenario.vehicle.length + scenario.vehicle.safety_gap;
    let rate = renewal_rate(scenario)?;
    let exp = rate.map(|r| Exp::new(r).expect("positive rate"));
    let mean_gap = 1.0 / scenario.density;
    let gap = |rng: &mut R| hard + exp.as_ref().map_or(0.0, |e| e.sample(rng));
    for lane in 0..scenario.lanes {
        // The residual life of G = a + E has density P(G > t) / E[G]:
        // uniform on [0, a] with probability a / E[G], else a + Exp(rate).
        let mut x = if rng.random::<f64>() < hard / mean_gap { rng.random::<f64>() * hard } else { gap(rng) };
        while x <= scenario.length {
            let height = sample_height(scenario.vehicle.blocker_height, rng);
            vehicles.push(Vehicle { lane, x, height });
            x += gap(rng);
        }
    }
    Ok(VehicleSnapshot { vehicles, seed: 0 })
}

/// Inserts the TxV and RxV into `snapshot`, removing background vehicles
/// that would violate the minimum spacing, and returns their indices.
pub fn place_link<R: Rng + ?Sized>(
    snapshot: &mut VehicleSnapshot,
    scenario: &ScenarioConfig,
    tx: (usize, f64),
    rx: (usize, f64),
    rng: &mut R,
) -> (usize, usize) {
    let hard = scenario.vehicle.length + scenario.vehicle.safety_gap;
    snapshot
        .vehicles
        .retain(|v| !((v.lane == tx.0 && (v.x - tx.1).abs() < hard) || (v.lane == rx.0 && (v.x - rx.1).abs() < hard)));
    let law = scenario.vehicle.height;
    let h_t = sample_height(law, rng);
    let h_r = sample_height(law, rng);
    snapshot.vehicles.push(Vehicle { lane: tx.0, x: tx.1, height: h_t });
    snapshot.vehicles.push(Vehicle { lane: rx.0, x: rx.1, height: h_r });
    let n = snapshot.vehicles.len();
    (n - 2, n - 1)
}
