use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::blockage::ScenarioConfig;
use crate::error::{config, Result};
use crate::exec::{map_indexed, Execution};
use crate::link_budget::{conditional_snr_dist, RadioConfig};

use super::blockers::count_blockers_geometric;
use super::snapshot::{generate_snapshot_with, place_link, renewal_rate};
use super::trial_rng;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// A Monte Carlo estimate with its 95% confidence half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub half_width: f64,
    pub trials: usize,
}

/// Binomial proportion with a normal-approximation interval.
pub fn proportion(successes: usize, trials: usize) -> Estimate {
    let n = trials.max(1) as f64;
    let p = successes as f64 / n;
    Estimate { value: p, half_width: Z_95 * (p * (1.0 - p) / n).sqrt(), trials }
}

/// Sample mean with a normal-approximation interval.
pub fn mean_estimate(values: &[f64]) -> Estimate {
    let n = values.len();
    if n == 0 {
        return Estimate { value: f64::NAN, half_width: f64::NAN, trials: 0 };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = if n > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    Estimate { value: mean, half_width: Z_95 * (var / n as f64).sqrt(), trials: n }
}

/// Lane rule for the TxV/RxV pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LanePlacement {
    /// Independent uniform lanes.
    #[default]
    Random,
    SameLane,
    /// Adjacent lanes, uniform over the `2 (M - 1)` ordered pairs.
    NeighborLane,
}

/// How a trial positions the TxV and RxV.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LinkSpec {
    /// Fixed distance; lanes per `placement`, longitudinal position uniform.
    Fixed { d_tr: f64, placement: LanePlacement },
    /// Independent uniform positions on `[0, D]` and uniform lanes; same-lane
    /// pairs closer than `l_v` (overlapping boxes) are redrawn.
    RandomPair,
}

/// One Monte Carlo observation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub d_tr: f64,
    pub lane_offset: usize,
    pub k_blockers: usize,
    pub snr_db: f64,
    pub blocked: bool,
}

/// `γ = μ_γ(k) + N(0, σ_sh^2 + σ(k)^2)`.
pub fn sample_link_snr<R: Rng + ?Sized>(k: usize, d_tr: f64, radio: &RadioConfig, rng: &mut R) -> Result<f64> {
    let law = conditional_snr_dist(d_tr, k, radio)?;
    let z: f64 = StandardNormal.sample(rng);
    Ok(law.mean + law.std * z)
}

fn lane_pair<R: Rng + ?Sized>(placement: LanePlacement, lanes: usize, rng: &mut R) -> (usize, usize) {
    match placement {
        LanePlacement::Random => (rng.random_range(0..lanes), rng.random_range(0..lanes)),
        LanePlacement::SameLane => {
            let l = rng.random_range(0..lanes);
            (l, l)
        }
        LanePlacement::NeighborLane => {
            let i = rng.random_range(0..2 * (lanes - 1));
            let lo = i / 2;
            if i % 2 == 0 {
                (lo, lo + 1)
            } else {
                (lo + 1, lo)
            }
        }
    }
}

fn simulate_trial<R: Rng + ?Sized>(
    scenario: &ScenarioConfig,
    radio: &RadioConfig,
    link: LinkSpec,
    rng: &mut R,
) -> Result<TrialRecord> {
    let len = scenario.length;
    let (t_lane, r_lane, x_t, x_r) = match link {
        LinkSpec::Fixed { d_tr, placement } => {
            let (t, r) = lane_pair(placement, scenario.lanes, rng);
            let dy = scenario.lateral_offset(t.abs_diff(r));
            if d_tr <= dy {
                // no geometry with this lane pair; counted as unobstructed
                let snr_db = sample_link_snr(0, d_tr, radio, rng)?;
                return Ok(TrialRecord { d_tr, lane_offset: t.abs_diff(r), k_blockers: 0, snr_db, blocked: false });
            }
            let dx = (d_tr * d_tr - dy * dy).sqrt();
            let x_t = rng.random::<f64>() * (len - dx);
            (t, r, x_t, x_t + dx)
        }
        LinkSpec::RandomPair => loop {
            let (t, r) = lane_pair(LanePlacement::Random, scenario.lanes, rng);
            let x_t = rng.random::<f64>() * len;
            let x_r = rng.random::<f64>() * len;
            if t != r || (x_t - x_r).abs() >= scenario.vehicle.length {
                break (t, r, x_t, x_r);
            }
        },
    };
    let lane_offset = t_lane.abs_diff(r_lane);
    let d_tr = (x_r - x_t).hypot(scenario.lateral_offset(lane_offset));
    let mut snapshot = generate_snapshot_with(scenario, rng)?;
    let (tx, rx) = place_link(&mut snapshot, scenario, (t_lane, x_t), (r_lane, x_r), rng);
    let k_blockers = count_blockers_geometric(&snapshot, tx, rx, scenario, radio);
    let snr_db = sample_link_snr(k_blockers, d_tr, radio, rng)?;
    Ok(TrialRecord { d_tr, lane_offset, k_blockers, snr_db, blocked: k_blockers > 0 })
}

/// Runs `trials` independent trials. Trial `i` draws from stream
/// `stream_base + i` of `master_seed`, so the output is identical for any
/// execution strategy or thread count.
pub fn run_trials(
    scenario: &ScenarioConfig,
    radio: &RadioConfig,
    link: LinkSpec,
    trials: usize,
    master_seed: u64,
    stream_base: u64,
    exec: Execution,
) -> Result<Vec<TrialRecord>> {
    scenario.validate()?;
    radio.validate()?;
    renewal_rate(scenario)?;
    if let LinkSpec::Fixed { d_tr, placement } = link {
        if !(d_tr > 0.0) || d_tr > scenario.length {
            return config(format!("link distance {d_tr} m outside (0, {}]", scenario.length));
        }
        if placement == LanePlacement::NeighborLane && scenario.lanes < 2 {
            return config("neighbour-lane placement needs at least two lanes");
        }
    }
    map_indexed(trials, exec, |i| {
        let mut rng = trial_rng(master_seed, stream_base + i as u64);
        simulate_trial(scenario, radio, link, &mut rng)
    })
    .into_iter()
    .collect()
}

/// Monte Carlo experiments behind the blockage, SNR and service curves.
#[derive(Clone, Debug, PartialEq)]
pub enum Experiment {
    /// Blockage probability and mean blocker count per distance.
    BlockageVsDistance {
        distances: Vec<f64>,
    },
    /// SNR histogram (as a density) at a fixed distance, or over random
    /// TxV/RxV pairs when `d_tr` is `None`.
    SnrHistogram {
        d_tr: Option<f64>,
        bin_edges: Vec<f64>,
    },
    ServiceVsDensity {
        d_tr: f64,
        densities: Vec<f64>,
        gamma_th_db: f64,
    },
    ServiceVsThreshold {
        d_tr: f64,
        thresholds_db: Vec<f64>,
    },
    /// Histogram of random TxV/RxV distances (as a density).
    DistanceHistogram {
        bin_edges: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub estimate: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Curve {
    pub name: String,
    pub points: Vec<CurvePoint>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub curves: Vec<Curve>,
    /// Empirical blocker-count PMF per distance (blockage experiments only).
    pub blocker_histograms: Vec<(f64, Vec<f64>)>,
}

impl ExperimentResult {
    pub fn curve(&self, name: &str) -> Option<&Curve> {
        self.curves.iter().find(|c| c.name == name)
    }
}

fn check_grid(name: &str, grid: &[f64], min_len: usize) -> Result<()> {
    if grid.len() < min_len {
        return config(format!("{name} grid needs at least {min_len} point(s)"));
    }
    if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return config(format!("{name} grid must be finite and strictly increasing"));
    }
    Ok(())
}

fn stream(point: usize) -> u64 {
    (point as u64) << 40
}

fn histogram_density(values: impl Iterator<Item = f64>, edges: &[f64], trials: usize) -> Vec<CurvePoint> {
    let mut counts = vec![0usize; edges.len() - 1];
    for v in values {
        if v < edges[0] || v >= edges[edges.len() - 1] {
            continue;
        }
        let bin = edges.partition_point(|e| *e <= v) - 1;
        counts[bin] += 1;
    }
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let width = edges[i + 1] - edges[i];
            let p = proportion(c, trials);
            CurvePoint {
                x: 0.5 * (edges[i] + edges[i + 1]),
                estimate: Estimate { value: p.value / width, half_width: p.half_width / width, trials },
            }
        })
        .collect()
}

/// Empirical PMF of the blocker counts in `records`.
pub fn blocker_histogram(records: &[TrialRecord]) -> Vec<f64> {
    let max_k = records.iter().map(|r| r.k_blockers).max().unwrap_or(0);
    let mut counts = vec![0usize; max_k + 1];
    for r in records {
        counts[r.k_blockers] += 1;
    }
    counts.iter().map(|&c| c as f64 / records.len().max(1) as f64).collect()
}

/// Distances between TxV/RxV pairs with independent uniform positions on
/// `[0, D]` and uniform lanes.
pub fn sample_pair_distances(
    scenario: &ScenarioConfig,
    trials: usize,
    master_seed: u64,
    stream_base: u64,
    exec: Execution,
) -> Result<Vec<f64>> {
    scenario.validate()?;
    Ok(map_indexed(trials, exec, |i| {
        let mut rng = trial_rng(master_seed, stream_base + i as u64);
        let (t, r) = lane_pair(LanePlacement::Random, scenario.lanes, &mut rng);
        let dx = (rng.random::<f64>() - rng.random::<f64>()) * scenario.length;
        dx.hypot(scenario.lateral_offset(t.abs_diff(r)))
    }))
}

/// Runs one experiment. Grid point `p` uses trial streams starting at
/// `p << 40`.
pub fn run_experiment(
    scenario: &ScenarioConfig,
    radio: &RadioConfig,
    experiment: &Experiment,
    placement: LanePlacement,
    trials: usize,
    master_seed: u64,
    exec: Execution,
) -> Result<ExperimentResult> {
    if trials == 0 {
        return config("experiments need at least one trial");
    }
    let fixed = |d_tr| LinkSpec::Fixed { d_tr, placement };
    let mut result = ExperimentResult::default();
    match experiment {
        Experiment::BlockageVsDistance { distances } => {
            check_grid("distance", distances, 1)?;
            let mut blocked = Vec::new();
            let mut means = Vec::new();
            for (p, &d) in distances.iter().enumerate() {
                let records = run_trials(scenario, radio, fixed(d), trials, master_seed, stream(p), exec)?;
                let hits = records.iter().filter(|r| r.blocked).count();
                let ks: Vec<f64> = records.iter().map(|r| r.k_blockers as f64).collect();
                blocked.push(CurvePoint { x: d, estimate: proportion(hits, trials) });
                means.push(CurvePoint { x: d, estimate: mean_estimate(&ks) });
                result.blocker_histograms.push((d, blocker_histogram(&records)));
            }
            result.curves.push(Curve { name: "blockage_probability".into(), points: blocked });
            result.curves.push(Curve { name: "mean_blockers".into(), points: means });
        }
        Experiment::SnrHistogram { d_tr, bin_edges } => {
            check_grid("SNR bin", bin_edges, 2)?;
            let link = d_tr.map_or(LinkSpec::RandomPair, fixed);
            let records = run_trials(scenario, radio, link, trials, master_seed, stream(0), exec)?;
            let points = histogram_density(records.iter().map(|r| r.snr_db), bin_edges, trials);
            result.curves.push(Curve { name: "snr_density".into(), points });
        }
        Experiment::ServiceVsDensity { d_tr, densities, gamma_th_db } => {
            check_grid("density", densities, 1)?;
            let mut points = Vec::new();
            for (p, &rho) in densities.iter().enumerate() {
                let s = scenario.with_density(rho);
                let records = run_trials(&s, radio, fixed(*d_tr), trials, master_seed, stream(p), exec)?;
                let ok = records.iter().filter(|r| r.snr_db >= *gamma_th_db).count();
                points.push(CurvePoint { x: rho, estimate: proportion(ok, trials) });
            }
            result.curves.push(Curve { name: "service_probability".into(), points });
        }
        Experiment::ServiceVsThreshold { d_tr, thresholds_db } => {
            check_grid("threshold", thresholds_db, 1)?;
            let records = run_trials(scenario, radio, fixed(*d_tr), trials, master_seed, stream(0), exec)?;
            let points = thresholds_db
                .iter()
                .map(|&th| {
                    let ok = records.iter().filter(|r| r.snr_db >= th).count();
                    CurvePoint { x: th, estimate: proportion(ok, trials) }
                })
                .collect();
            result.curves.push(Curve { name: "service_probability".into(), points });
        }
        Experiment::DistanceHistogram { bin_edges } => {
            check_grid("distance bin", bin_edges, 2)?;
            let distances = sample_pair_distances(scenario, trials, master_seed, stream(0), exec)?;
            let points = histogram_density(distances.into_iter(), bin_edges, trials);
            result.curves.push(Curve { name: "distance_density".into(), points });
        }
    }
    Ok(result)
}
