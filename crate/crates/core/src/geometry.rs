//! Fresnel clearance and occupancy-slot geometry.
//!
//! Distances are in metres and carrier frequencies in GHz throughout.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::stats::GaussianDist;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Fraction of the first Fresnel radius that must stay clear.
pub const FRESNEL_CLEARANCE_FACTOR: f64 = 0.6;

pub fn wavelength(carrier_ghz: f64) -> f64 {
    SPEED_OF_LIGHT / (carrier_ghz * 1e9)
}

/// Radius of the first Fresnel ellipsoid at `d_tb` metres from the
/// transmitter and `d_br` metres from the receiver.
pub fn fresnel_radius(d_tb: f64, d_br: f64, carrier_ghz: f64) -> Result<f64> {
    if d_tb < 0.0 || d_br < 0.0 || !(d_tb + d_br).is_finite() {
        return domain(format!("fresnel_radius: invalid distances ({d_tb}, {d_br})"));
    }
    if d_tb + d_br <= 0.0 {
        return domain("fresnel_radius: zero total distance");
    }
    if !(carrier_ghz > 0.0) {
        return domain(format!("fresnel_radius: carrier {carrier_ghz} GHz"));
    }
    Ok((wavelength(carrier_ghz) * d_tb * d_br / (d_tb + d_br)).sqrt())
}

/// A blocker position on a TxV-RxV link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkGeometry {
    pub d_tr: f64,
    /// Lateral displacement in lanes, `Δy = n W`.
    pub lane_offset: usize,
    /// Distance from the transmitter to the blocker along the LoS.
    pub d_tb: f64,
}

impl LinkGeometry {
    pub fn new(d_tr: f64, lane_offset: usize, d_tb: f64) -> Result<Self> {
        if !(d_tr > 0.0) || !d_tr.is_finite() {
            return domain(format!("link distance {d_tr} must be positive"));
        }
        if !(0.0..=d_tr).contains(&d_tb) {
            return domain(format!("blocker position {d_tb} outside [0, {d_tr}]"));
        }
        Ok(Self { d_tr, lane_offset, d_tb })
    }

    pub fn d_br(&self) -> f64 {
        self.d_tr - self.d_tb
    }
}

/// Box dimensions and height laws of the vehicles on the road.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VehicleDims {
    pub length: f64,
    pub width: f64,
    /// Height law of the TxV/RxV when their antennas sit on the roof.
    pub height: GaussianDist,
    /// Height law of potential blockers.
    pub blocker_height: GaussianDist,
    /// Minimum bumper-to-bumper gap between consecutive vehicles in a lane.
    pub safety_gap: f64,
}

impl VehicleDims {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("length", self.length),
            ("width", self.width),
            ("height mean", self.height.mean),
            ("blocker height mean", self.blocker_height.mean),
            ("safety gap", self.safety_gap),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return domain(format!("vehicle {name} must be positive, got {v}"));
            }
        }
        if self.height.std < 0.0 || self.blocker_height.std < 0.0 {
            return domain("vehicle height std must be non-negative");
        }
        Ok(())
    }
}

impl Default for VehicleDims {
    fn default() -> Self {
        let height = GaussianDist { mean: 1.5, std: 0.08 };
        Self { length: 5.0, width: 1.8, height, blocker_height: height, safety_gap: 2.5 }
    }
}

/// How the clearance variance is formed from the endpoint height laws.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClearanceVariance {
    /// The per-vehicle height variance, independent of the blocker position.
    #[default]
    Simplified,
    /// `(d_tb/d_tr)^2 σ_r^2 + (d_br/d_tr)^2 σ_t^2`.
    Exact,
}

/// Law of the effective Fresnel clearance height `h̃` at the blocker position:
/// `h_r d_tb/d_tr + h_t d_br/d_tr - 0.6 r̃`.
///
/// In [`ClearanceVariance::Simplified`] mode the std is the common endpoint
/// std (`sqrt` of the position-weighted mean of the two variances when they
/// differ, which collapses to `σ_v` when both share it).
pub fn clearance_height_dist(
    g: &LinkGeometry,
    tx_height: GaussianDist,
    rx_height: GaussianDist,
    carrier_ghz: f64,
    neglect_fresnel: bool,
    variance: ClearanceVariance,
) -> Result<GaussianDist> {
    let w_rx = g.d_tb / g.d_tr;
    let w_tx = g.d_br() / g.d_tr;
    let fresnel =
        if neglect_fresnel { 0.0 } else { FRESNEL_CLEARANCE_FACTOR * fresnel_radius(g.d_tb, g.d_br(), carrier_ghz)? };
    let mean = w_rx * rx_height.mean + w_tx * tx_height.mean - fresnel;
    let std = match variance {
        ClearanceVariance::Simplified if tx_height.std == rx_height.std => tx_height.std,
        ClearanceVariance::Simplified => (w_rx * rx_height.variance() + w_tx * tx_height.variance()).sqrt(),
        ClearanceVariance::Exact => (w_rx * w_rx * rx_height.variance() + w_tx * w_tx * tx_height.variance()).sqrt(),
    };
    GaussianDist::new(mean, std)
}

/// Same-lane occupancy slot length `d_a = l_v + d_s`.
pub fn slot_length_same_lane(dims: &VehicleDims) -> f64 {
    dims.length + dims.safety_gap
}

/// Number of same-lane slots `N_s = floor((d_tr - l_v) / d_a)`, zero when
/// the vehicles touch or overlap.
pub fn slot_count(d_tr: f64, dims: &VehicleDims) -> usize {
    let d_eff = d_tr - dims.length;
    if d_eff <= 0.0 {
        return 0;
    }
    // Guard against 45 / 7.5 landing just below an integer.
    (d_eff / slot_length_same_lane(dims) + 1e-12).floor() as usize
}

/// Distance from the transmitter to the midpoint of same-lane slot `i`
/// (1-based): `l_v/2 + (i - 1/2) d_a`.
pub fn same_lane_slot_position(i: usize, dims: &VehicleDims) -> f64 {
    dims.length / 2.0 + (i as f64 - 0.5) * slot_length_same_lane(dims)
}

/// Cross-lane occupancy slot lengths for one lateral offset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossLaneSlots {
    /// `d_b`, slots in the TxV's and RxV's own lanes.
    pub endpoint: f64,
    /// `d_c`, slots in the lanes strictly between them.
    pub intermediate: f64,
}

/// `d_b = w_v sqrt(d_tr^2 - Δy^2) / (2 Δy)` and
/// `d_c = w_v sqrt(d_tr^2 - Δy^2) / Δy + l_v`, with `Δy = n W`.
pub fn slot_lengths_cross_lane(d_tr: f64, n: usize, lane_width: f64, dims: &VehicleDims) -> Result<CrossLaneSlots> {
    if n == 0 {
        return domain("cross-lane slots need a lane offset n >= 1");
    }
    let dy = n as f64 * lane_width;
    if !(d_tr > dy) {
        return domain(format!("link distance {d_tr} m does not exceed lateral offset {dy} m"));
    }
    let dx = (d_tr * d_tr - dy * dy).sqrt();
    let endpoint = dims.width * dx / (2.0 * dy);
    Ok(CrossLaneSlots { endpoint, intermediate: 2.0 * endpoint + dims.length })
}

/// Positions (distance from the transmitter along the LoS) at which the
/// clearance of each cross-lane slot is evaluated, ordered TxV lane first.
///
/// Intermediate lane `j` uses the point where the LoS crosses that lane's
/// centreline, `d_tr j / n`. The endpoint lanes would cross at the antennas
/// themselves, so they use the middle of the stretch where the LoS stays
/// within half a vehicle width of the centreline, `d_tr w_v / (4 n W)`.
pub fn cross_lane_slot_positions(d_tr: f64, n: usize, lane_width: f64, dims: &VehicleDims) -> Vec<f64> {
    let dy = n as f64 * lane_width;
    let edge = (d_tr * dims.width / (4.0 * dy)).min(d_tr / 2.0);
    let mut pos = Vec::with_capacity(n + 1);
    pos.push(edge);
    pos.extend((1..n).map(|j| d_tr * j as f64 / n as f64));
    pos.push(d_tr - edge);
    pos
}
