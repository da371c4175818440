//! Analytical blocker-count model.
//!
//! Given a TxV-RxV distance, the road between the two vehicles is cut into
//! occupancy slots. A slot blocks the link when it holds a vehicle (PPP with
//! per-lane density `rho`) whose height exceeds the Fresnel clearance at that
//! point. Slot outcomes are independent, so the blocker count for a fixed
//! lane offset is Poisson-binomial over the slots; mixing over the lane
//! offset law gives the blocker PMF conditioned on the distance only.

use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};
use crate::geometry::{
    clearance_height_dist, cross_lane_slot_positions, same_lane_slot_position, slot_count, slot_length_same_lane,
    slot_lengths_cross_lane, ClearanceVariance, LinkGeometry, VehicleDims,
};
use crate::stats::{poisson_binomial, q, BlockerCountDistribution, GaussianDist};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AntennaPlacement {
    /// Antennas at roof level; endpoint heights follow the vehicle height law.
    #[default]
    Rooftop,
    /// Antennas on the bumper at a fixed height.
    Bumper,
}

/// Probability that a slot of `Γ = rho * len` expected arrivals is occupied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OccupancyLaw {
    /// Exactly one PPP arrival: `Γ e^{-Γ}`.
    #[default]
    SingleArrival,
    /// At least one PPP arrival: `1 - e^{-Γ}`.
    AtLeastOne,
}

impl OccupancyLaw {
    pub fn occupancy(self, gamma: f64) -> f64 {
        match self {
            OccupancyLaw::SingleArrival => gamma * (-gamma).exp(),
            OccupancyLaw::AtLeastOne => -(-gamma).exp_m1(),
        }
    }
}

/// Switches between the printed model and its sensitivity variants.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelOptions {
    pub occupancy: OccupancyLaw,
    pub clearance_variance: ClearanceVariance,
    /// Drop the `0.6 r̃` term (sub-THz, short range).
    pub neglect_fresnel: bool,
}

/// Highway geometry, traffic and antenna placement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Number of lanes `M`.
    pub lanes: usize,
    /// Lane width `W` in metres.
    pub lane_width: f64,
    /// Highway segment length `D` in metres.
    pub length: f64,
    /// Per-lane linear density `rho` in vehicles per metre.
    pub density: f64,
    pub vehicle: VehicleDims,
    pub antenna: AntennaPlacement,
    pub bumper_height: f64,
    pub model: ModelOptions,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            lanes: 3,
            lane_width: 4.0,
            length: 200.0,
            density: 0.01,
            vehicle: VehicleDims::default(),
            antenna: AntennaPlacement::Rooftop,
            bumper_height: 0.5,
            model: ModelOptions::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lanes == 0 {
            return config("number of lanes must be at least 1");
        }
        if !(self.lane_width > 0.0) || !(self.length > 0.0) {
            return config("lane width and scenario length must be positive");
        }
        if !(self.density >= 0.0) || !self.density.is_finite() {
            return config(format!("density {} must be non-negative", self.density));
        }
        if !(self.bumper_height > 0.0) {
            return config("bumper height must be positive");
        }
        self.vehicle.validate()
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    pub fn with_antenna(mut self, antenna: AntennaPlacement) -> Self {
        self.antenna = antenna;
        self
    }

    /// Height law of the TxV/RxV antennas.
    pub fn endpoint_height(&self) -> GaussianDist {
        match self.antenna {
            AntennaPlacement::Rooftop => self.vehicle.height,
            AntennaPlacement::Bumper => GaussianDist::point(self.bumper_height),
        }
    }

    /// Lateral displacement of lane offset `n`.
    pub fn lateral_offset(&self, n: usize) -> f64 {
        n as f64 * self.lane_width
    }
}

/// `P(h_b - h̃ > 0)` for independent Gaussian blocker and clearance heights.
pub fn single_blocker_blockage_prob(clearance: GaussianDist, blocker_height: GaussianDist) -> f64 {
    let mu_eff = blocker_height.mean - clearance.mean;
    let sigma_eff = (blocker_height.variance() + clearance.variance()).sqrt();
    if sigma_eff == 0.0 {
        return if mu_eff > 0.0 { 1.0 } else { 0.0 };
    }
    q(-mu_eff / sigma_eff)
}

/// Probability that a slot of length `slot_len` holds a blocking vehicle.
pub fn slot_occupied_blockage_prob(
    slot_len: f64,
    rho: f64,
    clearance: GaussianDist,
    blocker_height: GaussianDist,
    law: OccupancyLaw,
) -> f64 {
    single_blocker_blockage_prob(clearance, blocker_height) * law.occupancy(rho * slot_len)
}

/// Per-slot blocking probabilities for one lane offset.
///
/// For `lane_offset == 0` there is one entry per same-lane slot (`P_a`),
/// ordered from the TxV. For `lane_offset = n >= 1` the `n + 1` entries are
/// the TxV-lane slot (`P_b`), the `n - 1` intermediate-lane slots (`P_c`)
/// and the RxV-lane slot (`P_b`).
#[derive(Clone, Debug, PartialEq)]
pub struct SlotBlockageProbs {
    pub lane_offset: usize,
    pub probs: Vec<f64>,
}

fn clearance_at(d_tr: f64, n: usize, d_tb: f64, scenario: &ScenarioConfig, carrier_ghz: f64) -> Result<GaussianDist> {
    let h = scenario.endpoint_height();
    let g = LinkGeometry::new(d_tr, n, d_tb.clamp(0.0, d_tr))?;
    clearance_height_dist(&g, h, h, carrier_ghz, scenario.model.neglect_fresnel, scenario.model.clearance_variance)
}

/// Slot probabilities for lateral offset `n`. Offsets whose lateral
/// displacement reaches the link distance have no slots.
pub fn slot_blockage_probs(
    d_tr: f64,
    n: usize,
    scenario: &ScenarioConfig,
    carrier_ghz: f64,
) -> Result<SlotBlockageProbs> {
    if !(d_tr > 0.0) {
        return domain(format!("link distance {d_tr} must be positive"));
    }
    let dims = &scenario.vehicle;
    let law = scenario.model.occupancy;
    let rho = scenario.density;
    let probs = if n == 0 {
        let len = slot_length_same_lane(dims);
        (1..=slot_count(d_tr, dims))
            .map(|i| {
                let c = clearance_at(d_tr, 0, same_lane_slot_position(i, dims), scenario, carrier_ghz)?;
                Ok(slot_occupied_blockage_prob(len, rho, c, dims.blocker_height, law))
            })
            .collect::<Result<Vec<_>>>()?
    } else if d_tr <= scenario.lateral_offset(n) {
        Vec::new()
    } else {
        let slots = slot_lengths_cross_lane(d_tr, n, scenario.lane_width, dims)?;
        let positions = cross_lane_slot_positions(d_tr, n, scenario.lane_width, dims);
        positions
            .iter()
            .enumerate()
            .map(|(j, &d_tb)| {
                let len = if j == 0 || j == n { slots.endpoint } else { slots.intermediate };
                let c = clearance_at(d_tr, n, d_tb, scenario, carrier_ghz)?;
                Ok(slot_occupied_blockage_prob(len, rho, c, dims.blocker_height, law))
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok(SlotBlockageProbs { lane_offset: n, probs })
}

/// Blocker PMF conditioned on the distance and on lane offset `n`.
pub fn offset_blocker_pmf(
    d_tr: f64,
    n: usize,
    scenario: &ScenarioConfig,
    carrier_ghz: f64,
) -> Result<BlockerCountDistribution> {
    let slots = slot_blockage_probs(d_tr, n, scenario, carrier_ghz)?;
    BlockerCountDistribution::new(poisson_binomial(&slots.probs)?)
}

/// Same-lane blocker PMF over `k = 0..=N_s`.
pub fn same_lane_blocker_pmf(
    d_tr: f64,
    scenario: &ScenarioConfig,
    carrier_ghz: f64,
) -> Result<BlockerCountDistribution> {
    offset_blocker_pmf(d_tr, 0, scenario, carrier_ghz)
}

/// Probability that TxV and RxV are `n` lanes apart when both lanes are
/// uniform on `1..=M`.
pub fn lane_offset_prob(n: usize, lanes: usize) -> Result<f64> {
    Ok(lane_offset_count(n, lanes)? as f64 / (lanes * lanes) as f64)
}

/// Number of the `M^2` ordered lane pairs with offset `n`.
pub fn lane_offset_count(n: usize, lanes: usize) -> Result<usize> {
    if lanes == 0 || n >= lanes {
        return domain(format!("lane offset {n} outside 0..{lanes}"));
    }
    Ok(if n == 0 { lanes } else { 2 * (lanes - n) })
}

/// Different-lane part of the blocker PMF, weighted by the offset law.
///
/// Entry `k` is `sum_{n>=1} P(Δy = nW) P(K = k | n)` for `k = 0..=M`; the
/// entries sum to `(M - 1) / M`, not to one.
pub fn different_lane_blocker_pmf(d_tr: f64, scenario: &ScenarioConfig, carrier_ghz: f64) -> Result<Vec<f64>> {
    let m = scenario.lanes;
    let mut mass = vec![0.0; m + 1];
    for n in 1..m {
        let w = lane_offset_prob(n, m)?;
        let pmf = offset_blocker_pmf(d_tr, n, scenario, carrier_ghz)?;
        for (k, p) in pmf.probs().iter().enumerate() {
            mass[k] += w * p;
        }
    }
    Ok(mass)
}

/// Blocker PMF given the distance, `k = 0..=max(N_s, M)`.
pub fn blocker_count_pmf(d_tr: f64, scenario: &ScenarioConfig, carrier_ghz: f64) -> Result<BlockerCountDistribution> {
    if !(d_tr > 0.0) {
        return domain(format!("link distance {d_tr} must be positive"));
    }
    let m = scenario.lanes;
    let same = same_lane_blocker_pmf(d_tr, scenario, carrier_ghz)?;
    let diff = different_lane_blocker_pmf(d_tr, scenario, carrier_ghz)?;
    let max_k = same.max_blockers().max(m);
    let mut probs = vec![0.0; max_k + 1];
    let same_weight = 1.0 / m as f64;
    for (k, slot) in probs.iter_mut().enumerate().skip(1) {
        *slot = diff.get(k).copied().unwrap_or(0.0) + same_weight * same.prob(k);
    }
    let blocked: f64 = probs[1..].iter().sum();
    probs[0] = (1.0 - blocked).max(0.0);
    BlockerCountDistribution::new(probs)
}

/// Mean number of blockers given the distance.
pub fn expected_blockers(d_tr: f64, scenario: &ScenarioConfig, carrier_ghz: f64) -> Result<f64> {
    Ok(blocker_count_pmf(d_tr, scenario, carrier_ghz)?.mean())
}

/// Density of the longitudinal separation `|x_r - x_t|` of two independent
/// uniform positions on `[0, D]`.
pub fn separation_pdf(u: f64, length: f64) -> f64 {
    if (0.0..=length).contains(&u) {
        2.0 * (length - u) / (length * length)
    } else {
        0.0
    }
}

/// Density of the TxV-RxV distance `sqrt(Δx^2 + (nW)^2)` with uniform
/// positions on `[0, D]` and uniform lanes.
pub fn distance_pdf(d: f64, scenario: &ScenarioConfig) -> f64 {
    let m = scenario.lanes;
    (0..m)
        .map(|n| {
            let w = lane_offset_prob(n, m).unwrap_or(0.0);
            w * offset_distance_pdf(d, n, scenario)
        })
        .sum()
}

/// Distance density conditioned on lane offset `n`; singular (but
/// integrable) at `d = nW` for `n >= 1`.
pub fn offset_distance_pdf(d: f64, n: usize, scenario: &ScenarioConfig) -> f64 {
    let c = scenario.lateral_offset(n);
    if n == 0 {
        return separation_pdf(d, scenario.length);
    }
    if d <= c {
        return 0.0;
    }
    let u = (d * d - c * c).sqrt();
    separation_pdf(u, scenario.length) * d / u
}

/// Distribution function of the TxV-RxV distance, the integral of
/// [`distance_pdf`].
pub fn distance_cdf(d: f64, scenario: &ScenarioConfig) -> f64 {
    let m = scenario.lanes;
    let len = scenario.length;
    (0..m)
        .map(|n| {
            let c = scenario.lateral_offset(n);
            if d <= c {
                return 0.0;
            }
            let u = (d * d - c * c).sqrt().min(len);
            let tail = 1.0 - u / len;
            lane_offset_prob(n, m).unwrap_or(0.0) * (1.0 - tail * tail)
        })
        .sum()
}
