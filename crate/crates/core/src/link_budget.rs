//! Path loss, conditional SNR and the blocker-weighted SNR mixture.
//!
//! All powers and gains are in dB/dBm, distances in metres, carrier in GHz.

use serde::{Deserialize, Serialize};

use crate::blockage::{blocker_count_pmf, lane_offset_prob, separation_pdf, ScenarioConfig};
use crate::error::{config, domain, Result};
use crate::exec::{map_indexed, Execution};
use crate::stats::{mixture_ccdf, BlockerCountDistribution, GaussianDist, GaussianMixture, MixtureComponent};

/// Extra attenuation `A(k) ~ N(mu(k), sigma(k)^2)` caused by `k` blockers.
///
/// `k = 1..=table_mean_db.len()` read the explicit table; beyond it the mean
/// follows `min(base + increment (k - 1), cap)`. Likewise the std reads
/// `table_std_db` and falls back to `std_db`. `k = 0` is always `N(0, 0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockageAttenuationProfile {
    pub table_mean_db: Vec<f64>,
    pub table_std_db: Vec<f64>,
    pub base_db: f64,
    pub increment_db: f64,
    pub cap_db: f64,
    pub std_db: f64,
}

impl Default for BlockageAttenuationProfile {
    fn default() -> Self {
        Self {
            table_mean_db: Vec::new(),
            table_std_db: Vec::new(),
            base_db: 15.0,
            increment_db: 6.0,
            cap_db: 40.0,
            std_db: 4.5,
        }
    }
}

impl BlockageAttenuationProfile {
    pub fn mean_db(&self, k: usize) -> f64 {
        match k {
            0 => 0.0,
            k if k <= self.table_mean_db.len() => self.table_mean_db[k - 1],
            k => (self.base_db + self.increment_db * (k - 1) as f64).min(self.cap_db),
        }
    }

    pub fn std_db(&self, k: usize) -> f64 {
        match k {
            0 => 0.0,
            k if k <= self.table_std_db.len() => self.table_std_db[k - 1],
            _ => self.std_db,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let values = self.table_mean_db.iter().chain(&self.table_std_db).chain([
            &self.base_db,
            &self.increment_db,
            &self.cap_db,
            &self.std_db,
        ]);
        for v in values {
            if !v.is_finite() || *v < 0.0 {
                return config(format!("blockage profile value {v} must be finite and non-negative"));
            }
        }
        // the table must join the affine rule without stepping down
        let horizon = self.table_mean_db.len() + 2;
        for k in 0..horizon {
            if self.mean_db(k + 1) < self.mean_db(k) {
                return config(format!("blockage mean attenuation decreases at k = {}", k + 1));
            }
        }
        Ok(())
    }
}

/// Transmitter, receiver and channel parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    pub tx_power_dbm: f64,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
    pub noise_dbm: f64,
    pub carrier_ghz: f64,
    pub shadowing_db: f64,
    pub gamma_th_db: f64,
    pub blockage: BlockageAttenuationProfile,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            tx_power_dbm: 0.0,
            tx_gain_db: 10.0,
            rx_gain_db: 10.0,
            noise_dbm: -85.0,
            carrier_ghz: 28.0,
            shadowing_db: 3.0,
            gamma_th_db: 0.0,
            blockage: BlockageAttenuationProfile::default(),
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_ghz > 0.0) || !self.carrier_ghz.is_finite() {
            return config(format!("carrier frequency {} GHz must be positive", self.carrier_ghz));
        }
        if !(self.shadowing_db >= 0.0) || !self.shadowing_db.is_finite() {
            return config(format!("shadowing std {} dB must be non-negative", self.shadowing_db));
        }
        for v in [self.tx_power_dbm, self.tx_gain_db, self.rx_gain_db, self.noise_dbm, self.gamma_th_db] {
            if !v.is_finite() {
                return config("link budget terms must be finite");
            }
        }
        self.blockage.validate()
    }

    /// `P_t + G_t + G_r - P_n`.
    pub fn budget_db(&self) -> f64 {
        self.tx_power_dbm + self.tx_gain_db + self.rx_gain_db - self.noise_dbm
    }
}

/// Deterministic LoS path loss `32.4 + 20 log10(d) + 20 log10(f_c)`.
pub fn los_pathloss_mean(d_tr: f64, carrier_ghz: f64) -> Result<f64> {
    if !(d_tr > 0.0) || !(carrier_ghz > 0.0) {
        return domain(format!("path loss needs positive distance and carrier, got {d_tr} m, {carrier_ghz} GHz"));
    }
    Ok(32.4 + 20.0 * d_tr.log10() + 20.0 * carrier_ghz.log10())
}

/// SNR law with `k` blockers: `N(budget - mu_LoS - mu(k), sigma_sh^2 + sigma(k)^2)`.
pub fn conditional_snr_dist(d_tr: f64, k: usize, radio: &RadioConfig) -> Result<GaussianDist> {
    let pl = los_pathloss_mean(d_tr, radio.carrier_ghz)? + radio.blockage.mean_db(k);
    let std = radio.shadowing_db.hypot(radio.blockage.std_db(k));
    GaussianDist::new(radio.budget_db() - pl, std)
}

/// SNR mixture for a given blocker PMF at distance `d_tr`.
pub fn snr_mixture_from_pmf(d_tr: f64, pmf: &BlockerCountDistribution, radio: &RadioConfig) -> Result<GaussianMixture> {
    let components = pmf
        .probs()
        .iter()
        .enumerate()
        .map(|(k, &weight)| Ok(MixtureComponent { weight, dist: conditional_snr_dist(d_tr, k, radio)? }))
        .collect::<Result<Vec<_>>>()?;
    GaussianMixture::new(components)
}

/// SNR law given the distance only: the blocker PMF weighting the
/// conditional components `k = 0..=B`.
pub fn snr_mixture_conditional(d_tr: f64, radio: &RadioConfig, scenario: &ScenarioConfig) -> Result<GaussianMixture> {
    let pmf = blocker_count_pmf(d_tr, scenario, radio.carrier_ghz)?;
    snr_mixture_from_pmf(d_tr, &pmf, radio)
}

/// `P(γ >= γ_th)` given the distance.
pub fn service_probability(d_tr: f64, gamma_th_db: f64, radio: &RadioConfig, scenario: &ScenarioConfig) -> Result<f64> {
    Ok(mixture_ccdf(&snr_mixture_conditional(d_tr, radio, scenario)?, gamma_th_db))
}

/// Number of quadrature nodes per lane offset used by default.
pub const DEFAULT_GRID_POINTS: usize = 512;

/// The distance-marginalised SNR law as a quadrature mixture: each node is a
/// (lane offset, longitudinal separation) pair carrying the SNR mixture at
/// its distance.
///
/// Same-lane pairs closer than one vehicle length would overlap and are
/// excluded, so the same-lane weight is renormalised over `u >= l_v`.
#[derive(Clone, Debug)]
pub struct UnconditionalSnr {
    nodes: Vec<(f64, GaussianMixture)>,
}

/// Trapezoidal weights of `f` on an increasing grid.
fn trapezoid_weights(grid: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = grid.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { grid[i] - grid[i - 1] } else { 0.0 };
            let right = if i + 1 < n { grid[i + 1] - grid[i] } else { 0.0 };
            0.5 * (left + right) * f(grid[i])
        })
        .collect()
}

pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

impl UnconditionalSnr {
    /// Builds the quadrature over `separation_grid`, an increasing grid of
    /// longitudinal separations `|x_r - x_t|` spanning `[0, D]`. Node
    /// distances are `sqrt(u^2 + (nW)^2)`, which keeps the quadrature clear
    /// of the `1/sqrt` singularity of the distance density at `d = nW`.
    pub fn new(
        radio: &RadioConfig,
        scenario: &ScenarioConfig,
        separation_grid: &[f64],
        exec: Execution,
    ) -> Result<Self> {
        if separation_grid.len() < 2 {
            return domain("separation grid needs at least two points");
        }
        if separation_grid.windows(2).any(|w| !(w[1] > w[0])) || separation_grid[0] < 0.0 {
            return domain("separation grid must be non-negative and strictly increasing");
        }
        let m = scenario.lanes;
        let min_gap = scenario.vehicle.length;
        let same_grid: Vec<f64> = separation_grid.iter().copied().filter(|&u| u >= min_gap).collect();
        let same_grid = if same_grid.first() != Some(&min_gap) {
            std::iter::once(min_gap).chain(same_grid).collect()
        } else {
            same_grid
        };

        // Overlapping same-lane pairs are rejected, renormalise offset weights.
        let same_keep = (1.0 - min_gap / scenario.length).max(0.0).powi(2);
        let raw: Vec<f64> = (0..m)
            .map(|n| {
                let w = lane_offset_prob(n, m)?;
                Ok(if n == 0 { w * same_keep } else { w })
            })
            .collect::<Result<_>>()?;
        let total: f64 = raw.iter().sum();

        let mut jobs: Vec<(f64, f64)> = Vec::new();
        for (n, w_n) in raw.iter().enumerate() {
            let grid: &[f64] = if n == 0 { &same_grid } else { separation_grid };
            let weights = trapezoid_weights(grid, |u| separation_pdf(u, scenario.length));
            let norm: f64 = weights.iter().sum();
            if norm <= 0.0 {
                continue;
            }
            let c = scenario.lateral_offset(n);
            for (u, w) in grid.iter().zip(weights) {
                if w > 0.0 {
                    jobs.push((w_n / total * w / norm, u.hypot(c)));
                }
            }
        }
        let nodes = map_indexed(jobs.len(), exec, |i| {
            let (w, d) = jobs[i];
            snr_mixture_conditional(d, radio, scenario).map(|mix| (w, mix))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Ok(Self { nodes })
    }

    /// Default quadrature: [`DEFAULT_GRID_POINTS`] separations over `[0, D]`.
    pub fn with_default_grid(radio: &RadioConfig, scenario: &ScenarioConfig, exec: Execution) -> Result<Self> {
        let grid = uniform_grid(0.0, scenario.length, DEFAULT_GRID_POINTS);
        Self::new(radio, scenario, &grid, exec)
    }

    pub fn nodes(&self) -> &[(f64, GaussianMixture)] {
        &self.nodes
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.nodes.iter().map(|(w, m)| w * m.pdf(x)).sum()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.nodes.iter().map(|(w, m)| w * m.cdf(x)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.nodes.iter().map(|(w, m)| w * m.mean()).sum()
    }

    /// `[min mean - 5 sigma, max mean + 5 sigma]` over all components.
    pub fn default_snr_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut sigma: f64 = 0.0;
        for (_, m) in &self.nodes {
            for c in m.components().iter().filter(|c| c.weight > 0.0) {
                lo = lo.min(c.dist.mean);
                hi = hi.max(c.dist.mean);
                sigma = sigma.max(c.dist.std);
            }
        }
        (lo - 5.0 * sigma, hi + 5.0 * sigma)
    }

    /// Density tabulated on `snr_grid`.
    pub fn density(&self, snr_grid: &[f64], exec: Execution) -> SnrDensity {
        let density = map_indexed(snr_grid.len(), exec, |i| self.pdf(snr_grid[i]));
        SnrDensity { snr_db: snr_grid.to_vec(), density }
    }
}

/// A density tabulated on an SNR grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SnrDensity {
    pub snr_db: Vec<f64>,
    pub density: Vec<f64>,
}

impl SnrDensity {
    /// Trapezoidal integral of the tabulated density.
    pub fn integral(&self) -> f64 {
        self.snr_db.windows(2).zip(self.density.windows(2)).map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1])).sum()
    }
}

/// Distance-marginalised SNR density on the default grids (512 separations,
/// 512 SNR points over the mixture's ±5σ range).
pub fn unconditional_snr_dist(
    radio: &RadioConfig,
    scenario: &ScenarioConfig,
    separation_grid: &[f64],
    exec: Execution,
) -> Result<SnrDensity> {
    let law = UnconditionalSnr::new(radio, scenario, separation_grid, exec)?;
    let (lo, hi) = law.default_snr_range();
    Ok(law.density(&uniform_grid(lo, hi, DEFAULT_GRID_POINTS), exec))
}
