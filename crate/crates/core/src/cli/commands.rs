//! Analytic and Monte Carlo tables for each subcommand.

use crate::blockage::{
    blocker_count_pmf, distance_cdf, distance_pdf, offset_blocker_pmf, same_lane_blocker_pmf, AntennaPlacement,
    ScenarioConfig,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::link_budget::{snr_mixture_from_pmf, RadioConfig, UnconditionalSnr};
use crate::sim::{
    blocker_histogram, run_experiment, run_trials, sample_pair_distances, Estimate, Experiment, LanePlacement, LinkSpec,
};
use crate::stats::{ks_statistic, BlockerCountDistribution, GaussianMixture};

use super::config::RunConfig;
use super::output::{Cell, Table};

/// Which quantity `blockage-prob` / `avg-blockers` tabulate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockerMetric {
    Probability,
    Mean,
}

/// Blocker PMF for the lane rule of the Monte Carlo counterpart.
pub fn placement_pmf(
    d_tr: f64,
    scenario: &ScenarioConfig,
    carrier_ghz: f64,
    placement: LanePlacement,
) -> Result<BlockerCountDistribution> {
    match placement {
        LanePlacement::Random => blocker_count_pmf(d_tr, scenario, carrier_ghz),
        LanePlacement::SameLane => same_lane_blocker_pmf(d_tr, scenario, carrier_ghz),
        LanePlacement::NeighborLane => offset_blocker_pmf(d_tr, 1, scenario, carrier_ghz),
    }
}

fn placement_mixture(
    d_tr: f64,
    radio: &RadioConfig,
    scenario: &ScenarioConfig,
    placement: LanePlacement,
) -> Result<GaussianMixture> {
    snr_mixture_from_pmf(d_tr, &placement_pmf(d_tr, scenario, radio.carrier_ghz, placement)?, radio)
}

fn mc_cells(e: Option<Estimate>) -> [Cell; 3] {
    match e {
        Some(e) => [e.value.into(), e.half_width.into(), e.trials.into()],
        None => [Cell::Empty, Cell::Empty, 0usize.into()],
    }
}

pub fn blockers(cfg: &RunConfig, metric: BlockerMetric, exec: Execution) -> Result<Table> {
    let value = match metric {
        BlockerMetric::Probability => "analytic_blockage_prob",
        BlockerMetric::Mean => "analytic_mean_blockers",
    };
    let mut t = Table::new(&["d_tr_m", "rho_veh_per_m", value, "mc_estimate", "mc_half_width", "trials"]);
    for &rho in &cfg.densities {
        let s = cfg.scenario.with_density(rho);
        let mc = if cfg.trials > 0 {
            let exp = Experiment::BlockageVsDistance { distances: cfg.distances.clone() };
            let res = run_experiment(&s, &cfg.radio, &exp, cfg.lane_placement, cfg.trials, cfg.seed, exec)?;
            let name = match metric {
                BlockerMetric::Probability => "blockage_probability",
                BlockerMetric::Mean => "mean_blockers",
            };
            res.curve(name).map(|c| c.points.iter().map(|p| p.estimate).collect::<Vec<_>>())
        } else {
            None
        };
        for (i, &d) in cfg.distances.iter().enumerate() {
            let pmf = placement_pmf(d, &s, cfg.radio.carrier_ghz, cfg.lane_placement)?;
            let a = match metric {
                BlockerMetric::Probability => pmf.blockage_probability(),
                BlockerMetric::Mean => pmf.mean(),
            };
            let mut row: Vec<Cell> = vec![d.into(), rho.into(), a.into()];
            row.extend(mc_cells(mc.as_ref().map(|m| m[i])));
            t.push(row);
        }
    }
    Ok(t)
}

fn snr_edges(mixture: &GaussianMixture, bin: f64) -> Vec<f64> {
    let live = mixture.components().iter().filter(|c| c.weight > 1e-12);
    let (lo, hi) = live.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
        (lo.min(c.dist.mean - 4.0 * c.dist.std), hi.max(c.dist.mean + 4.0 * c.dist.std))
    });
    edges((lo / bin).floor() * bin, (hi / bin).ceil() * bin, bin)
}

fn edges(lo: f64, hi: f64, bin: f64) -> Vec<f64> {
    let n = ((hi - lo) / bin).round().max(1.0) as usize;
    (0..=n).map(|i| lo + bin * i as f64).collect()
}

fn push_density_rows(
    t: &mut Table,
    d: Option<f64>,
    rho: f64,
    edges: &[f64],
    cdf: impl Fn(f64) -> f64,
    mc: Option<Vec<Estimate>>,
) {
    for (i, w) in edges.windows(2).enumerate() {
        let analytic = (cdf(w[1]) - cdf(w[0])) / (w[1] - w[0]);
        let mut row: Vec<Cell> = vec![d.into(), rho.into(), (0.5 * (w[0] + w[1])).into(), analytic.into()];
        row.extend(mc_cells(mc.as_ref().map(|m| m[i])));
        t.push(row);
    }
}

fn mc_density(
    cfg: &RunConfig,
    s: &ScenarioConfig,
    d: Option<f64>,
    edges: &[f64],
    exec: Execution,
) -> Result<Option<Vec<Estimate>>> {
    if cfg.trials == 0 {
        return Ok(None);
    }
    let exp = Experiment::SnrHistogram { d_tr: d, bin_edges: edges.to_vec() };
    let res = run_experiment(s, &cfg.radio, &exp, cfg.lane_placement, cfg.trials, cfg.seed, exec)?;
    Ok(res.curve("snr_density").map(|c| c.points.iter().map(|p| p.estimate).collect()))
}

pub fn snr_dist(cfg: &RunConfig, exec: Execution) -> Result<Table> {
    let mut t =
        Table::new(&["d_tr_m", "rho_veh_per_m", "snr_db", "analytic_density", "mc_density", "mc_half_width", "trials"]);
    t.notes.push("mixture components: d_tr_m rho_veh_per_m k weight mean_db std_db".into());
    for &rho in &cfg.densities {
        let s = cfg.scenario.with_density(rho);
        for &d in &cfg.distances {
            let mix = placement_mixture(d, &cfg.radio, &s, cfg.lane_placement)?;
            for (k, c) in mix.components().iter().enumerate() {
                t.notes.push(format!(
                    "component {} {} {k} {} {} {}",
                    super::output::sig6(d),
                    super::output::sig6(rho),
                    super::output::sig6(c.weight),
                    super::output::sig6(c.dist.mean),
                    super::output::sig6(c.dist.std),
                ));
            }
            let e = snr_edges(&mix, cfg.snr_bin_db);
            let mc = mc_density(cfg, &s, Some(d), &e, exec)?;
            push_density_rows(&mut t, Some(d), rho, &e, |x| mix.cdf(x), mc);
        }
        if cfg.random_pair {
            let law = UnconditionalSnr::with_default_grid(&cfg.radio, &s, exec)?;
            t.notes.push(format!(
                "random pair rho {}: mean_db {}",
                super::output::sig6(rho),
                super::output::sig6(law.mean())
            ));
            let (lo, hi) = law.default_snr_range();
            let bin = cfg.snr_bin_db;
            let e = edges((lo / bin).floor() * bin, (hi / bin).ceil() * bin, bin);
            let mc = mc_density(cfg, &s, None, &e, exec)?;
            push_density_rows(&mut t, None, rho, &e, |x| law.cdf(x), mc);
        }
    }
    Ok(t)
}

pub fn service_prob(cfg: &RunConfig, exec: Execution) -> Result<Table> {
    let mut t = Table::new(&[
        "d_tr_m",
        "rho_veh_per_m",
        "gamma_th_db",
        "analytic_service_prob",
        "mc_estimate",
        "mc_half_width",
        "trials",
    ]);
    for &rho in &cfg.densities {
        let s = cfg.scenario.with_density(rho);
        for &d in &cfg.distances {
            let mix = placement_mixture(d, &cfg.radio, &s, cfg.lane_placement)?;
            let mc = if cfg.trials > 0 {
                let exp = Experiment::ServiceVsThreshold { d_tr: d, thresholds_db: cfg.thresholds_db.clone() };
                let res = run_experiment(&s, &cfg.radio, &exp, cfg.lane_placement, cfg.trials, cfg.seed, exec)?;
                res.curve("service_probability").map(|c| c.points.iter().map(|p| p.estimate).collect::<Vec<_>>())
            } else {
                None
            };
            for (i, &th) in cfg.thresholds_db.iter().enumerate() {
                let mut row: Vec<Cell> = vec![d.into(), rho.into(), th.into(), mix.ccdf(th).into()];
                row.extend(mc_cells(mc.as_ref().map(|m| m[i])));
                t.push(row);
            }
        }
    }
    Ok(t)
}

pub fn distance_density(cfg: &RunConfig, exec: Execution) -> Result<Table> {
    let s = &cfg.scenario;
    let d_max = s.length.hypot(s.lateral_offset(s.lanes - 1));
    let bin = cfg.distance_bin_m;
    let e = edges(0.0, (d_max / bin).ceil() * bin, bin);
    let mc = if cfg.trials > 0 {
        let exp = Experiment::DistanceHistogram { bin_edges: e.clone() };
        let res = run_experiment(s, &cfg.radio, &exp, cfg.lane_placement, cfg.trials, cfg.seed, exec)?;
        res.curve("distance_density").map(|c| c.points.iter().map(|p| p.estimate).collect::<Vec<_>>())
    } else {
        None
    };
    let mut t = Table::new(&["d_m", "analytic_pdf", "analytic_bin_density", "mc_density", "mc_half_width", "trials"]);
    for (i, w) in e.windows(2).enumerate() {
        let mid = 0.5 * (w[0] + w[1]);
        let bin_density = (distance_cdf(w[1], s) - distance_cdf(w[0], s)) / (w[1] - w[0]);
        let mut row: Vec<Cell> = vec![mid.into(), distance_pdf(mid, s).into(), bin_density.into()];
        row.extend(mc_cells(mc.as_ref().map(|m| m[i])));
        t.push(row);
    }
    Ok(t)
}

/// Outcome of one consistency check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub d_tr: Option<f64>,
    pub rho: Option<f64>,
    pub antenna: Option<AntennaPlacement>,
    pub statistic: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.statistic <= self.tolerance
    }
}

/// Runs every analytic-vs-Monte Carlo consistency check.
pub fn validate_checks(cfg: &RunConfig, exec: Execution) -> Result<Vec<Check>> {
    if cfg.trials == 0 {
        return Err(Error::Config("validate needs run.trials >= 1".into()));
    }
    let v = &cfg.validate;
    let f = cfg.radio.carrier_ghz;
    let mut checks = Vec::new();
    for antenna in [AntennaPlacement::Rooftop, AntennaPlacement::Bumper] {
        for &rho in &v.densities {
            let s = cfg.scenario.with_antenna(antenna).with_density(rho);
            for (p, &d) in v.distances.iter().enumerate() {
                let pmf = blocker_count_pmf(d, &s, f)?;
                let mass: f64 = pmf.probs().iter().sum();
                checks.push(Check {
                    name: "pmf_mass",
                    d_tr: Some(d),
                    rho: Some(rho),
                    antenna: Some(antenna),
                    statistic: (mass - 1.0).abs(),
                    tolerance: 1e-9,
                });
                let link = LinkSpec::Fixed { d_tr: d, placement: LanePlacement::Random };
                let records = run_trials(&s, &cfg.radio, link, cfg.trials, cfg.seed, (p as u64) << 40, exec)?;
                checks.push(Check {
                    name: "blocker_pmf_tv",
                    d_tr: Some(d),
                    rho: Some(rho),
                    antenna: Some(antenna),
                    statistic: pmf.total_variation(&blocker_histogram(&records)),
                    tolerance: v.tv_tolerance,
                });
            }
        }
        let s = cfg.scenario.with_antenna(antenna).with_density(v.snr_density);
        let mix = placement_mixture(v.snr_distance, &cfg.radio, &s, LanePlacement::Random)?;
        let link = LinkSpec::Fixed { d_tr: v.snr_distance, placement: LanePlacement::Random };
        let records = run_trials(&s, &cfg.radio, link, cfg.trials, cfg.seed, 1 << 60, exec)?;
        let mut snr: Vec<f64> = records.iter().map(|r| r.snr_db).collect();
        checks.push(Check {
            name: "snr_ks",
            d_tr: Some(v.snr_distance),
            rho: Some(v.snr_density),
            antenna: Some(antenna),
            statistic: ks_statistic(&mut snr, |x| mix.cdf(x)),
            tolerance: v.ks_tolerance,
        });
    }
    let s = &cfg.scenario;
    let mut dist = sample_pair_distances(s, cfg.trials, cfg.seed, 1 << 61, exec)?;
    checks.push(Check {
        name: "distance_ks",
        d_tr: None,
        rho: None,
        antenna: None,
        statistic: ks_statistic(&mut dist, |x| distance_cdf(x, s)),
        // 1% critical value of the one-sample KS test
        tolerance: 1.628 / (cfg.trials as f64).sqrt(),
    });
    Ok(checks)
}

pub fn validate(cfg: &RunConfig, exec: Execution) -> Result<(Table, bool)> {
    let checks = validate_checks(cfg, exec)?;
    let mut t = Table::new(&["check", "d_tr_m", "rho_veh_per_m", "antenna", "statistic", "tolerance", "result"]);
    for c in &checks {
        let antenna = c.antenna.map(|a| match a {
            AntennaPlacement::Rooftop => "rooftop",
            AntennaPlacement::Bumper => "bumper",
        });
        t.push(vec![
            c.name.into(),
            c.d_tr.into(),
            c.rho.into(),
            antenna.into(),
            c.statistic.into(),
            c.tolerance.into(),
            (if c.passed() { "pass" } else { "fail" }).into(),
        ]);
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    t.notes.push(format!("{} of {} checks passed", checks.len() - failed, checks.len()));
    Ok((t, failed == 0))
}
