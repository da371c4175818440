use crate::blockage::{AntennaPlacement, ScenarioConfig};
use crate::geometry::{wavelength, FRESNEL_CLEARANCE_FACTOR};
use crate::link_budget::RadioConfig;

use super::snapshot::{Vehicle, VehicleSnapshot};

/// Parameter interval `[t0, t1]` of the segment `a + t (b - a)`, `t ∈ [0, 1]`,
/// lying inside the axis-aligned box `[x0, x1] × [y0, y1]` (Liang-Barsky).
/// Returns `None` when the overlap is empty or a single point.
pub fn segment_box_overlap(a: (f64, f64), b: (f64, f64), x: (f64, f64), y: (f64, f64)) -> Option<(f64, f64)> {
    let d = (b.0 - a.0, b.1 - a.1);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for (p, q) in [(-d.0, a.0 - x.0), (d.0, x.1 - a.0), (-d.1, a.1 - y.0), (d.1, y.1 - a.1)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t1 > t0).then_some((t0, t1))
}

struct Link {
    a: (f64, f64),
    b: (f64, f64),
    h_t: f64,
    h_r: f64,
    /// `λ d_tr`, zero when the Fresnel term is neglected.
    lambda_d: f64,
}

impl Link {
    fn clearance(&self, t: f64) -> f64 {
        let linear = self.h_t + (self.h_r - self.h_t) * t;
        linear - FRESNEL_CLEARANCE_FACTOR * (self.lambda_d * t * (1.0 - t)).max(0.0).sqrt()
    }

    /// Lowest clearance over `[t0, t1]`. The clearance is a linear term minus
    /// a concave one, hence convex, so a ternary search finds the minimum.
    fn min_clearance(&self, mut lo: f64, mut hi: f64) -> f64 {
        if self.lambda_d == 0.0 {
            return self.clearance(lo).min(self.clearance(hi));
        }
        for _ in 0..80 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if self.clearance(m1) <= self.clearance(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        self.clearance(0.5 * (lo + hi))
    }
}

fn antenna_height(v: &Vehicle, scenario: &ScenarioConfig) -> f64 {
    match scenario.antenna {
        AntennaPlacement::Rooftop => v.height,
        AntennaPlacement::Bumper => scenario.bumper_height,
    }
}

/// Number of vehicles whose footprint crosses the TxV-RxV segment and whose
/// height exceeds the Fresnel clearance somewhere along the crossed chord.
///
/// Antennas sit at the centre of the vehicle footprint, at the sampled
/// vehicle height (rooftop) or the fixed bumper height.
pub fn count_blockers_geometric(
    snapshot: &VehicleSnapshot,
    tx: usize,
    rx: usize,
    scenario: &ScenarioConfig,
    radio: &RadioConfig,
) -> usize {
    let vt = &snapshot.vehicles[tx];
    let vr = &snapshot.vehicles[rx];
    let w = scenario.lane_width;
    let a = (vt.x, vt.lane as f64 * w);
    let b = (vr.x, vr.lane as f64 * w);
    let d_tr = (b.0 - a.0).hypot(b.1 - a.1);
    let link = Link {
        a,
        b,
        h_t: antenna_height(vt, scenario),
        h_r: antenna_height(vr, scenario),
        lambda_d: if scenario.model.neglect_fresnel { 0.0 } else { wavelength(radio.carrier_ghz) * d_tr },
    };
    let half_l = scenario.vehicle.length / 2.0;
    let half_w = scenario.vehicle.width / 2.0;
    let (x_lo, x_hi) = (a.0.min(b.0) - half_l, a.0.max(b.0) + half_l);
    let (lane_lo, lane_hi) = (vt.lane.min(vr.lane), vt.lane.max(vr.lane));
    snapshot
        .vehicles
        .iter()
        .enumerate()
        .filter(|&(i, v)| i != tx && i != rx && (lane_lo..=lane_hi).contains(&v.lane) && v.x >= x_lo && v.x <= x_hi)
        .filter(|(_, v)| {
            let y = v.lane as f64 * w;
            match segment_box_overlap(link.a, link.b, (v.x - half_l, v.x + half_l), (y - half_w, y + half_w)) {
                Some((t0, t1)) => v.height > link.min_clearance(t0, t1),
                None => false,
            }
        })
        .count()
}
