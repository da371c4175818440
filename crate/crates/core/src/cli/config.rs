//! TOML run configuration with defaults and an echo of every resolved key.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::blockage::{AntennaPlacement, ModelOptions, OccupancyLaw, ScenarioConfig};
use crate::error::{Error, Result};
use crate::geometry::{ClearanceVariance, VehicleDims};
use crate::link_budget::{BlockageAttenuationProfile, RadioConfig};
use crate::sim::{renewal_rate, LanePlacement};
use crate::stats::GaussianDist;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    scenario: RawScenario,
    model: RawModel,
    radio: RawRadio,
    run: RawRun,
    validate: RawValidate,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawScenario {
    lanes: Option<usize>,
    lane_width: Option<f64>,
    length: Option<f64>,
    density: Option<f64>,
    antenna: Option<AntennaPlacement>,
    bumper_height: Option<f64>,
    vehicle: RawVehicle,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawVehicle {
    length: Option<f64>,
    width: Option<f64>,
    height_mean: Option<f64>,
    height_std: Option<f64>,
    blocker_height_mean: Option<f64>,
    blocker_height_std: Option<f64>,
    safety_gap: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawModel {
    occupancy: Option<OccupancyLaw>,
    clearance_variance: Option<ClearanceVariance>,
    neglect_fresnel: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawRadio {
    tx_power_dbm: Option<f64>,
    tx_gain_db: Option<f64>,
    rx_gain_db: Option<f64>,
    noise_dbm: Option<f64>,
    carrier_ghz: Option<f64>,
    shadowing_db: Option<f64>,
    gamma_th_db: Option<f64>,
    blockage: RawProfile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawProfile {
    table_mean_db: Option<Vec<f64>>,
    table_std_db: Option<Vec<f64>>,
    base_db: Option<f64>,
    increment_db: Option<f64>,
    cap_db: Option<f64>,
    std_db: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawRun {
    trials: Option<usize>,
    seed: Option<u64>,
    distances: Option<Vec<f64>>,
    densities: Option<Vec<f64>>,
    thresholds_db: Option<Vec<f64>>,
    lane_placement: Option<LanePlacement>,
    snr_bin_db: Option<f64>,
    distance_bin_m: Option<f64>,
    random_pair: Option<bool>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawValidate {
    distances: Option<Vec<f64>>,
    densities: Option<Vec<f64>>,
    snr_distance: Option<f64>,
    snr_density: Option<f64>,
    tv_tolerance: Option<f64>,
    ks_tolerance: Option<f64>,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub distances: Option<Vec<f64>>,
    pub densities: Option<Vec<f64>>,
    pub thresholds_db: Option<Vec<f64>>,
    pub antenna: Option<AntennaPlacement>,
    pub lane_placement: Option<LanePlacement>,
}

/// One resolved key as echoed in output headers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EchoEntry {
    pub key: String,
    pub value: String,
    pub default: bool,
}

/// Tolerances and grid for the `validate` command.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidateConfig {
    pub distances: Vec<f64>,
    pub densities: Vec<f64>,
    pub snr_distance: f64,
    pub snr_density: f64,
    pub tv_tolerance: f64,
    pub ks_tolerance: f64,
}

/// A fully resolved and validated run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub radio: RadioConfig,
    pub distances: Vec<f64>,
    pub densities: Vec<f64>,
    pub thresholds_db: Vec<f64>,
    pub lane_placement: LanePlacement,
    pub snr_bin_db: f64,
    pub distance_bin_m: f64,
    /// Add a random TxV/RxV pair block to `snr-dist`.
    pub random_pair: bool,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub validate: ValidateConfig,
    pub echo: Vec<EchoEntry>,
}

#[derive(Default)]
struct Resolver {
    echo: Vec<EchoEntry>,
}

impl Resolver {
    fn take<T: Serialize>(&mut self, key: &str, given: Option<T>, default: T) -> T {
        let is_default = given.is_none();
        let value = given.unwrap_or(default);
        let text = toml::Value::try_from(&value).map(|v| v.to_string()).unwrap_or_else(|_| "?".into());
        self.echo.push(EchoEntry { key: key.into(), value: text, default: is_default });
        value
    }
}

/// Reads and resolves a TOML configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    load_config_with(Some(path), &Overrides::default())
}

/// Reads `path` (or nothing, giving all defaults) and applies `overrides`.
pub fn load_config_with(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display()))))?,
        None => String::new(),
    };
    RunConfig::from_toml_with(&text, overrides)
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with(text, &Overrides::default())
    }

    pub fn from_toml_with(text: &str, overrides: &Overrides) -> Result<Self> {
        let mut raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        apply_overrides(&mut raw, overrides);
        resolve(raw)
    }

    /// The echo as TOML comment lines; stripping the leading `# ` yields a
    /// loadable configuration.
    pub fn echo_lines(&self) -> Vec<String> {
        self.echo
            .iter()
            .map(|e| {
                let tag = if e.default { " # default" } else { "" };
                format!("# {} = {}{tag}", e.key, e.value)
            })
            .collect()
    }
}

fn apply_overrides(raw: &mut RawConfig, o: &Overrides) {
    let run = &mut raw.run;
    run.trials = o.trials.or(run.trials);
    run.seed = o.seed.or(run.seed);
    run.out = o.out.clone().or(run.out.take());
    run.format = o.format.or(run.format);
    run.distances = o.distances.clone().or(run.distances.take());
    run.densities = o.densities.clone().or(run.densities.take());
    run.thresholds_db = o.thresholds_db.clone().or(run.thresholds_db.take());
    run.lane_placement = o.lane_placement.or(run.lane_placement);
    raw.scenario.antenna = o.antenna.or(raw.scenario.antenna);
}

fn resolve(raw: RawConfig) -> Result<RunConfig> {
    let mut r = Resolver::default();
    let d = ScenarioConfig::default();
    let dv = VehicleDims::default();
    let sc = raw.scenario;
    let v = sc.vehicle;
    let vehicle = VehicleDims {
        length: r.take("scenario.vehicle.length", v.length, dv.length),
        width: r.take("scenario.vehicle.width", v.width, dv.width),
        height: GaussianDist {
            mean: r.take("scenario.vehicle.height_mean", v.height_mean, dv.height.mean),
            std: r.take("scenario.vehicle.height_std", v.height_std, dv.height.std),
        },
        blocker_height: GaussianDist {
            mean: r.take("scenario.vehicle.blocker_height_mean", v.blocker_height_mean, dv.blocker_height.mean),
            std: r.take("scenario.vehicle.blocker_height_std", v.blocker_height_std, dv.blocker_height.std),
        },
        safety_gap: r.take("scenario.vehicle.safety_gap", v.safety_gap, dv.safety_gap),
    };
    let dm = ModelOptions::default();
    let model = ModelOptions {
        occupancy: r.take("model.occupancy", raw.model.occupancy, dm.occupancy),
        clearance_variance: r.take("model.clearance_variance", raw.model.clearance_variance, dm.clearance_variance),
        neglect_fresnel: r.take("model.neglect_fresnel", raw.model.neglect_fresnel, dm.neglect_fresnel),
    };
    let scenario = ScenarioConfig {
        lanes: r.take("scenario.lanes", sc.lanes, d.lanes),
        lane_width: r.take("scenario.lane_width", sc.lane_width, d.lane_width),
        length: r.take("scenario.length", sc.length, d.length),
        density: r.take("scenario.density", sc.density, d.density),
        antenna: r.take("scenario.antenna", sc.antenna, d.antenna),
        bumper_height: r.take("scenario.bumper_height", sc.bumper_height, d.bumper_height),
        vehicle,
        model,
    };

    let dr = RadioConfig::default();
    let rr = raw.radio;
    let bp = rr.blockage;
    let dp = BlockageAttenuationProfile::default();
    let blockage = BlockageAttenuationProfile {
        table_mean_db: r.take("radio.blockage.table_mean_db", bp.table_mean_db, dp.table_mean_db),
        table_std_db: r.take("radio.blockage.table_std_db", bp.table_std_db, dp.table_std_db),
        base_db: r.take("radio.blockage.base_db", bp.base_db, dp.base_db),
        increment_db: r.take("radio.blockage.increment_db", bp.increment_db, dp.increment_db),
        cap_db: r.take("radio.blockage.cap_db", bp.cap_db, dp.cap_db),
        std_db: r.take("radio.blockage.std_db", bp.std_db, dp.std_db),
    };
    let radio = RadioConfig {
        tx_power_dbm: r.take("radio.tx_power_dbm", rr.tx_power_dbm, dr.tx_power_dbm),
        tx_gain_db: r.take("radio.tx_gain_db", rr.tx_gain_db, dr.tx_gain_db),
        rx_gain_db: r.take("radio.rx_gain_db", rr.rx_gain_db, dr.rx_gain_db),
        noise_dbm: r.take("radio.noise_dbm", rr.noise_dbm, dr.noise_dbm),
        carrier_ghz: r.take("radio.carrier_ghz", rr.carrier_ghz, dr.carrier_ghz),
        shadowing_db: r.take("radio.shadowing_db", rr.shadowing_db, dr.shadowing_db),
        gamma_th_db: r.take("radio.gamma_th_db", rr.gamma_th_db, dr.gamma_th_db),
        blockage,
    };

    let run = raw.run;
    let default_distances: Vec<f64> = (1..=20).map(|i| 10.0 * i as f64).collect();
    let distances = r.take("run.distances", run.distances, default_distances);
    let densities = r.take("run.densities", run.densities, vec![scenario.density]);
    let thresholds_db = r.take("run.thresholds_db", run.thresholds_db, vec![radio.gamma_th_db]);
    let lane_placement = r.take("run.lane_placement", run.lane_placement, LanePlacement::Random);
    let snr_bin_db = r.take("run.snr_bin_db", run.snr_bin_db, 1.0);
    let distance_bin_m = r.take("run.distance_bin_m", run.distance_bin_m, 5.0);
    let random_pair = r.take("run.random_pair", run.random_pair, false);
    let trials = r.take("run.trials", run.trials, 10_000);
    let seed = r.take("run.seed", run.seed, 1);
    // the destination does not affect results and is not echoed
    let out = run.out;
    let format = r.take("run.format", run.format, OutputFormat::Csv);

    let rv = raw.validate;
    let validate = ValidateConfig {
        distances: r.take("validate.distances", rv.distances, vec![50.0, 100.0, 200.0]),
        densities: r.take("validate.densities", rv.densities, vec![0.01, 0.03, 0.05]),
        snr_distance: r.take("validate.snr_distance", rv.snr_distance, 50.0),
        snr_density: r.take("validate.snr_density", rv.snr_density, 0.03),
        tv_tolerance: r.take("validate.tv_tolerance", rv.tv_tolerance, 0.05),
        ks_tolerance: r.take("validate.ks_tolerance", rv.ks_tolerance, 0.03),
    };

    let cfg = RunConfig {
        scenario,
        radio,
        distances,
        densities,
        thresholds_db,
        lane_placement,
        snr_bin_db,
        distance_bin_m,
        random_pair,
        trials,
        seed,
        out,
        format,
        validate,
        echo: r.echo,
    };
    check(&cfg)?;
    Ok(cfg)
}

fn field_err<T>(key: &str, msg: impl std::fmt::Display) -> Result<T> {
    Err(Error::Config(format!("{key}: {msg}")))
}

fn nested<T>(key: &str, e: Error) -> Result<T> {
    match e {
        Error::Config(m) | Error::Domain(m) => field_err(key, m),
        other => Err(other),
    }
}

fn check_grid(key: &str, grid: &[f64], ok: impl Fn(f64) -> bool, range: &str) -> Result<()> {
    if grid.is_empty() {
        return field_err(key, "grid must not be empty");
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return field_err(key, "grid must be strictly increasing");
    }
    if let Some(v) = grid.iter().find(|v| !v.is_finite() || !ok(**v)) {
        return field_err(key, format!("value {v} outside {range}"));
    }
    Ok(())
}

fn check_density(key: &str, scenario: &ScenarioConfig, rho: f64) -> Result<()> {
    renewal_rate(&scenario.with_density(rho)).map(|_| ()).or_else(|e| nested(key, e))
}

fn check(cfg: &RunConfig) -> Result<()> {
    let s = &cfg.scenario;
    s.validate().or_else(|e| nested("scenario", e))?;
    cfg.radio.validate().or_else(|e| nested("radio", e))?;
    check_density("scenario.density", s, s.density)?;
    let len = s.length;
    let in_road = |v: f64| v > 0.0 && v <= len;
    let road = format!("(0, {len}] m");
    check_grid("run.distances", &cfg.distances, in_road, &road)?;
    check_grid("validate.distances", &cfg.validate.distances, in_road, &road)?;
    check_grid("run.densities", &cfg.densities, |v| v >= 0.0, "[0, inf)")?;
    check_grid("validate.densities", &cfg.validate.densities, |v| v >= 0.0, "[0, inf)")?;
    check_grid("run.thresholds_db", &cfg.thresholds_db, |_| true, "the reals")?;
    for (key, grid) in [("run.densities", &cfg.densities), ("validate.densities", &cfg.validate.densities)] {
        for &rho in grid.iter() {
            check_density(key, s, rho)?;
        }
    }
    let v = &cfg.validate;
    if !in_road(v.snr_distance) {
        return field_err("validate.snr_distance", format!("{} outside {road}", v.snr_distance));
    }
    if !(v.snr_density >= 0.0) {
        return field_err("validate.snr_density", "must be non-negative");
    }
    check_density("validate.snr_density", s, v.snr_density)?;
    for (key, x) in [
        ("run.snr_bin_db", cfg.snr_bin_db),
        ("run.distance_bin_m", cfg.distance_bin_m),
        ("validate.tv_tolerance", v.tv_tolerance),
        ("validate.ks_tolerance", v.ks_tolerance),
    ] {
        if !(x > 0.0) || !x.is_finite() {
            return field_err(key, format!("{x} must be positive"));
        }
    }
    if cfg.lane_placement == LanePlacement::NeighborLane && s.lanes < 2 {
        return field_err("run.lane_placement", "neighbor-lane needs at least two lanes");
    }
    Ok(())
}
