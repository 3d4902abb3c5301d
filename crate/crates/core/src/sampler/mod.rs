//! Airy-process samples from TASEP height functions under KPZ 1:2:3 rescaling.
//!
//! Flat initial data (particles on even sites) gives Airy1 and step initial data
//! (particles on `x <= 0`) gives Airy2. Heights follow `h(x+1) - h(x) = 1 - 2 eta(x+1)`
//! with `h(0)` raised by 2 per jump across the bond `(0, 1)`.

mod rescale;
mod tasep;

pub use rescale::{fan_coordinate, fan_slope, rescale_to_airy1, rescale_to_airy2, Airy2Map, MAX_FAN_SLOPE};
pub use tasep::{initial_heights, simulate_tasep, HeightSnapshot, FRONT_GUARD};

use crate::stats::ks_distance;
use crate::tracy_widom::{Family, TracyWidom, TwError};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error("horizon T={0} must be finite and at least 100")]
    InvalidHorizon(f64),
    #[error("window margin {margin} is below the horizon {horizon}; the light cone would reach the reported sites")]
    WindowTooSmall { margin: i64, horizon: f64 },
    #[error("contamination fronts {fronts:?} reached the reported sites {reported:?}")]
    LightCone { fronts: (i64, i64), reported: (i64, i64) },
    #[error("reported sites must contain the origin")]
    OriginOutsideWindow,
    #[error("grid point {x} maps outside the simulated sites {sites:?}")]
    GridOutsideWindow { x: f64, sites: (i64, i64) },
    #[error("grid point {u} needs slope |x/T| = {slope:.3} beyond the supported {max}")]
    GridOutsideFan { u: f64, slope: f64, max: f64 },
    #[error("{rescaling:?} rescaling does not apply to {ic:?} initial data")]
    WrongInitialCondition { ic: InitialCondition, rescaling: Rescaling },
    #[error("empty or unsorted spatial grid")]
    BadGrid,
    #[error("calibration needs at least 5000 replicas, got {0}")]
    TooFewReplicas(usize),
    #[error("calibration failed: KS {ks:.4} (threshold {threshold}), c0 drift {drift:.4}")]
    CalibrationFailed { ks: f64, threshold: f64, drift: f64 },
    #[error(transparent)]
    TracyWidom(#[from] TwError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    /// Particles on even sites.
    Flat,
    /// Particles on `x <= 0`.
    Step,
}

/// `value = (h + offset - height_rate T) / (-fluct T^{1/3})` at site `space v T^{2/3}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingConstants {
    pub height_rate: f64,
    pub fluct: f64,
    pub space: f64,
    /// Order-one shift of the microscopic height.
    pub height_offset: f64,
}

impl ScalingConstants {
    /// Calibrated defaults. For step data the offset of one height unit removes the
    /// finite-`T` bias of the mean (fitted 1.01 +- 0.07 at T = 500, 0.98 +- 0.09 at T = 1000).
    pub fn for_ic(ic: InitialCondition) -> Self {
        match ic {
            InitialCondition::Flat => Self { height_rate: 0.5, fluct: 1.0, space: 2.0, height_offset: 0.0 },
            InitialCondition::Step => Self {
                height_rate: 0.5,
                fluct: 2f64.powf(-1.0 / 3.0),
                space: 2f64.powf(1.0 / 3.0),
                height_offset: 1.0,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rescaling {
    Airy1,
    Airy2(Airy2Map),
}

impl Rescaling {
    pub fn default_for(ic: InitialCondition) -> Self {
        match ic {
            InitialCondition::Flat => Self::Airy1,
            InitialCondition::Step => Self::Airy2(Airy2Map::Characteristic),
        }
    }

    /// One-point law of the rescaled process: `F1(2s)` or `F2(s)`.
    pub fn one_point_cdf(&self, tw: &TracyWidom, s: f64) -> Result<f64, TwError> {
        match self {
            Self::Airy1 => tw.cdf(Family::Goe, 2.0 * s),
            Self::Airy2(_) => tw.cdf(Family::Gue, s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TasepConfig {
    pub ic: InitialCondition,
    pub horizon: f64,
    /// Reported microscopic sites, inclusive.
    pub sites: (i64, i64),
    /// Extra sites simulated on each side of the reported ones.
    pub margin: i64,
    pub seed: u64,
    pub scaling: ScalingConstants,
}

/// `T + 8 sqrt(T) + 8`: the contamination fronts move as rate-1 Poisson walks.
pub fn default_margin(horizon: f64) -> i64 {
    (horizon + 8.0 * horizon.sqrt() + 8.0).ceil() as i64
}

impl TasepConfig {
    pub fn new(ic: InitialCondition, horizon: f64, sites: (i64, i64), seed: u64, scaling: ScalingConstants) -> Self {
        Self { ic, horizon, sites, margin: default_margin(horizon), seed, scaling }
    }

    /// Config whose reported sites cover `grid` under `rescaling`.
    pub fn for_grid(
        ic: InitialCondition,
        horizon: f64,
        grid: &[f64],
        rescaling: Rescaling,
        seed: u64,
        scaling: ScalingConstants,
    ) -> Result<Self, SamplerError> {
        check_grid(grid)?;
        let (lo, hi) = (grid[0], grid[grid.len() - 1]);
        let to_site = |v: f64| -> Result<f64, SamplerError> {
            Ok(match rescaling {
                Rescaling::Airy1 | Rescaling::Airy2(Airy2Map::Parabolic) => scaling.space * v * horizon.powf(2.0 / 3.0),
                Rescaling::Airy2(Airy2Map::Characteristic) => fan_slope(v, horizon, &scaling)? * horizon,
            })
        };
        let sites = ((to_site(lo)?.floor() as i64).min(0), (to_site(hi)?.ceil() as i64 + 1).max(1));
        Ok(Self::new(ic, horizon, sites, seed, scaling))
    }

    /// Simulated sites including both margins.
    pub fn window(&self) -> usize {
        (self.sites.1 - self.sites.0 + 1 + 2 * self.margin) as usize
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        if !(self.horizon.is_finite() && self.horizon >= 100.0) {
            return Err(SamplerError::InvalidHorizon(self.horizon));
        }
        if (self.margin as f64) < self.horizon {
            return Err(SamplerError::WindowTooSmall { margin: self.margin, horizon: self.horizon });
        }
        if self.sites.0 > 0 || self.sites.1 < 1 {
            return Err(SamplerError::OriginOutsideWindow);
        }
        Ok(())
    }
}

fn check_grid(grid: &[f64]) -> Result<(), SamplerError> {
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SamplerError::BadGrid);
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleMeta {
    pub seed: u64,
    pub horizon: f64,
    pub ic: InitialCondition,
    pub scaling: ScalingConstants,
    pub rescaling: Rescaling,
    pub attempts: u64,
    /// Excluded from written data so that repeated runs stay byte-identical.
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl PartialEq for SampleMeta {
    /// Wall time is not part of the sample.
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed
            && self.horizon == other.horizon
            && self.ic == other.ic
            && self.scaling == other.scaling
            && self.rescaling == other.rescaling
            && self.attempts == other.attempts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub x_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: SampleMeta,
}

/// SplitMix64 finaliser applied to `master + (r + 1) * golden`.
pub fn replica_seed(master: u64, replica: u64) -> u64 {
    let mut z = master.wrapping_add(replica.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One replica: simulate from `config.seed`, draw an independent dequantisation
/// jitter `U(-1, 1)` per grid point, rescale onto `grid`.
pub fn sample_one(config: &TasepConfig, grid: &[f64], rescaling: Rescaling) -> Result<PathSample, SamplerError> {
    config.validate()?;
    let start = Instant::now();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(config.seed);
    let snap = tasep::simulate_with(config, &mut rng)?;
    let jitter: Vec<f64> = grid.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
    let values = match rescaling {
        Rescaling::Airy1 => rescale_to_airy1(&snap, config, grid, &jitter)?,
        Rescaling::Airy2(map) => rescale_to_airy2(&snap, config, grid, map, &jitter)?,
    };
    Ok(PathSample {
        x_grid: grid.to_vec(),
        values,
        meta: SampleMeta {
            seed: config.seed,
            horizon: config.horizon,
            ic: config.ic,
            scaling: config.scaling,
            rescaling,
            attempts: snap.attempts,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    })
}

/// `n_replicas` independent paths; replica `r` uses `replica_seed(config.seed, r)`.
pub fn sample_paths(
    config: &TasepConfig,
    n_replicas: usize,
    grid: &[f64],
    rescaling: Rescaling,
) -> Result<Vec<PathSample>, SamplerError> {
    check_grid(grid)?;
    (0..n_replicas as u64)
        .map(|r| {
            let replica = TasepConfig { seed: replica_seed(config.seed, r), ..*config };
            sample_one(&replica, grid, rescaling)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub ic: InitialCondition,
    pub horizon: f64,
    pub replicas: usize,
    pub ks: f64,
    pub ks_threshold: f64,
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub law_mean: f64,
    pub law_variance: f64,
    /// `c0` implied by the sample mean once the law's mean is accounted for.
    pub height_rate_fit: f64,
    pub height_rate_drift: f64,
    pub passed: bool,
}

pub const KS_THRESHOLD: f64 = 0.03;
pub const MAX_HEIGHT_RATE_DRIFT: f64 = 0.02;

/// Checks one-point values at the origin against the limiting law.
pub fn calibration_from_values(
    values: &[f64],
    config: &TasepConfig,
    rescaling: Rescaling,
) -> Result<CalibrationReport, SamplerError> {
    let tw = TracyWidom::shared()?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let ks = ks_distance(&sorted, |s| rescaling.one_point_cdf(tw, s).unwrap_or(if s > 0.0 { 1.0 } else { 0.0 }));
    let (law_mean, law_variance) = match rescaling {
        Rescaling::Airy1 => {
            let (m, v) = tw.moments(Family::Goe);
            (0.5 * m, 0.25 * v)
        }
        Rescaling::Airy2(_) => tw.moments(Family::Gue),
    };
    let n = values.len() as f64;
    let sample_mean = values.iter().sum::<f64>() / n;
    let sample_variance = values.iter().map(|v| (v - sample_mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sc = &config.scaling;
    let height_rate_fit = sc.height_rate - sc.fluct * config.horizon.powf(-2.0 / 3.0) * (sample_mean - law_mean);
    let height_rate_drift = (height_rate_fit / sc.height_rate - 1.0).abs();
    Ok(CalibrationReport {
        ic: config.ic,
        horizon: config.horizon,
        replicas: values.len(),
        ks,
        ks_threshold: KS_THRESHOLD,
        sample_mean,
        sample_variance,
        law_mean,
        law_variance,
        height_rate_fit,
        height_rate_drift,
        passed: ks < KS_THRESHOLD && height_rate_drift <= MAX_HEIGHT_RATE_DRIFT,
    })
}

/// Samples `n` replicas at the origin and checks them against the one-point law.
pub fn calibrate(config: &TasepConfig, n: usize) -> Result<CalibrationReport, SamplerError> {
    if n < 5000 {
        return Err(SamplerError::TooFewReplicas(n));
    }
    let rescaling = Rescaling::default_for(config.ic);
    let base = TasepConfig { sites: (0, 1), ..*config };
    let paths = sample_paths(&base, n, &[0.0], rescaling)?;
    let values: Vec<f64> = paths.iter().map(|p| p.values[0]).collect();
    calibration_from_values(&values, config, rescaling)
}

/// As [`calibrate`], but a failing report is an error.
pub fn require_calibration(config: &TasepConfig, n: usize) -> Result<CalibrationReport, SamplerError> {
    let report = calibrate(config, n)?;
    if !report.passed {
        return Err(SamplerError::CalibrationFailed {
            ks: report.ks,
            threshold: report.ks_threshold,
            drift: report.height_rate_drift,
        });
    }
    Ok(report)
}
