//! KPZ 1:2:3 rescaling of TASEP heights.
//!
//! Step data has a curved macroscopic profile `h ~ T(1 + a^2)/2` at `x = aT`.
//! The parabolic map measures fluctuations against the Taylor expansion of that
//! profile and adds `v^2` back; the characteristic map uses the exact local
//! profile, local fluctuation scale `(1-a^2)^{2/3}` and the arclength-like
//! spatial coordinate `int_0^a (1-b^2)^{-1/3} db`, which removes the `O(v^4 T^{-2/3})`
//! bias the parabolic map carries at moderate `v`.

use super::{InitialCondition, SamplerError, ScalingConstants, TasepConfig};
use super::tasep::HeightSnapshot;
use serde::{Deserialize, Serialize};

/// Largest `|x/T|` the characteristic map is used for.
pub const MAX_FAN_SLOPE: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Airy2Map {
    Parabolic,
    Characteristic,
}

/// `int_0^a (1-b^2)^{-1/3} db` by its binomial series.
pub fn fan_coordinate(a: f64) -> f64 {
    let a2 = a * a;
    let mut coeff = 1.0;
    let mut power = a;
    let mut sum = 0.0;
    for k in 0..200 {
        let term = coeff * power / (2 * k + 1) as f64;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        coeff *= (1.0 / 3.0 + k as f64) / (k + 1) as f64;
        power *= a2;
    }
    sum
}

/// Slope `a = x/T` whose fan coordinate is `c2 v T^{-1/3}`.
pub fn fan_slope(v: f64, horizon: f64, scaling: &ScalingConstants) -> Result<f64, SamplerError> {
    let target = v * scaling.space * horizon.powf(-1.0 / 3.0);
    let limit = fan_coordinate(MAX_FAN_SLOPE);
    if target.abs() > limit {
        return Err(SamplerError::GridOutsideFan { u: v, slope: target.abs(), max: MAX_FAN_SLOPE });
    }
    let mut a = target;
    for _ in 0..50 {
        let step = (fan_coordinate(a) - target) * (1.0 - a * a).powf(1.0 / 3.0);
        a -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    Ok(a)
}

fn check_jitter(grid: &[f64], jitter: &[f64]) -> Result<(), SamplerError> {
    if jitter.len() == grid.len() { Ok(()) } else { Err(SamplerError::BadGrid) }
}

fn height(snap: &HeightSnapshot, config: &TasepConfig, x: f64) -> Result<f64, SamplerError> {
    snap.height_interp(x).ok_or(SamplerError::GridOutsideWindow { x, sites: config.sites })
}

/// `(h(c2 v T^{2/3}) + offset + jitter - c0 T) / (-c1 T^{1/3})` on `grid`, one jitter per point.
pub fn rescale_to_airy1(
    snap: &HeightSnapshot,
    config: &TasepConfig,
    grid: &[f64],
    jitter: &[f64],
) -> Result<Vec<f64>, SamplerError> {
    if config.ic != InitialCondition::Flat {
        return Err(SamplerError::WrongInitialCondition { ic: config.ic, rescaling: super::Rescaling::Airy1 });
    }
    let sc = &config.scaling;
    let t = config.horizon;
    check_jitter(grid, jitter)?;
    grid.iter()
        .zip(jitter)
        .map(|(&v, &jitter)| {
            let h = height(snap, config, sc.space * v * t.powf(2.0 / 3.0))?;
            Ok((h + sc.height_offset + jitter - sc.height_rate * t) / (-sc.fluct * t.cbrt()))
        })
        .collect()
}

/// Step-data rescaling; see the module docs for the two maps.
pub fn rescale_to_airy2(
    snap: &HeightSnapshot,
    config: &TasepConfig,
    grid: &[f64],
    map: Airy2Map,
    jitter: &[f64],
) -> Result<Vec<f64>, SamplerError> {
    if config.ic != InitialCondition::Step {
        return Err(SamplerError::WrongInitialCondition { ic: config.ic, rescaling: super::Rescaling::Airy2(map) });
    }
    let sc = &config.scaling;
    let t = config.horizon;
    check_jitter(grid, jitter)?;
    grid.iter()
        .zip(jitter)
        .map(|(&v, &jitter)| {
            let shifted = |h: f64| h + sc.height_offset + jitter;
            match map {
                Airy2Map::Parabolic => {
                    let h = height(snap, config, sc.space * v * t.powf(2.0 / 3.0))?;
                    Ok((shifted(h) - sc.height_rate * t) / (-sc.fluct * t.cbrt()) + v * v)
                }
                Airy2Map::Characteristic => {
                    let a = fan_slope(v, t, sc)?;
                    let h = height(snap, config, a * t)?;
                    let profile = sc.height_rate * t * (1.0 + a * a);
                    let scale = sc.fluct * (1.0 - a * a).powf(2.0 / 3.0) * t.cbrt();
                    Ok((shifted(h) - profile) / (-scale))
                }
            }
        })
        .collect()
}
