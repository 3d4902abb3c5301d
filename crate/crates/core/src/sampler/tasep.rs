//! Continuous-time TASEP on a finite window with closed ends.
//!
//! Every bond `(b, b+1)` carries a rate-1 Poisson clock. Over time `T` the window
//! sees `Poisson((W-1) T)` clock rings, each at a uniformly chosen bond, so the
//! dynamics reduce to that many uniform bond attempts. A ring moves a particle
//! when `b` is occupied and `b+1` is empty.
//!
//! Closed ends differ from the infinite system, and the difference spreads one
//! site per ring of the bond just inside the contaminated zone. Both fronts are
//! tracked exactly and a run whose fronts reach the reported sites is rejected.

use super::{InitialCondition, SamplerError, TasepConfig};
use rand::{Rng, RngCore, SeedableRng};
use rand_distr::{Distribution, Poisson};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};

/// Sites closer than this to a contamination front are not reported.
pub const FRONT_GUARD: i64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct HeightSnapshot {
    /// Microscopic coordinate of `heights[0]`.
    pub first_site: i64,
    pub heights: Vec<i64>,
    /// Successful jumps.
    pub jumps: u64,
    /// Clock rings (jump attempts).
    pub attempts: u64,
    /// Jumps across the bond `(0, 1)`.
    pub origin_crossings: u64,
    /// Innermost contaminated sites at the end of the run.
    pub fronts: (i64, i64),
    pub particles: u64,
}

impl HeightSnapshot {
    pub fn height_at(&self, site: i64) -> Option<i64> {
        let i = usize::try_from(site - self.first_site).ok()?;
        self.heights.get(i).copied()
    }

    /// Linear interpolation between neighbouring sites.
    pub fn height_interp(&self, x: f64) -> Option<f64> {
        let left = x.floor() as i64;
        let frac = x - left as f64;
        let a = self.height_at(left)? as f64;
        if frac == 0.0 {
            return Some(a);
        }
        let b = self.height_at(left + 1)? as f64;
        Some(a + frac * (b - a))
    }

    pub fn last_site(&self) -> i64 {
        self.first_site + self.heights.len() as i64 - 1
    }
}

fn initial_occupation(ic: InitialCondition, first_site: i64, width: usize) -> Vec<u8> {
    (0..width as i64)
        .map(|i| {
            let x = first_site + i;
            let occupied = match ic {
                InitialCondition::Flat => x.rem_euclid(2) == 0,
                InitialCondition::Step => x <= 0,
            };
            occupied as u8
        })
        .collect()
}

/// `h(x+1) - h(x) = 1 - 2 eta(x+1)`, anchored at `h(origin) = h0`.
fn heights_from_occupation(eta: &[u8], origin: usize, h0: i64) -> Vec<i64> {
    let mut h = vec![0i64; eta.len()];
    h[origin] = h0;
    for i in origin..eta.len() - 1 {
        h[i + 1] = h[i] + 1 - 2 * eta[i + 1] as i64;
    }
    for i in (1..=origin).rev() {
        h[i - 1] = h[i] - (1 - 2 * eta[i] as i64);
    }
    h
}

/// Runs `attempts` uniform bond attempts; returns (jumps, origin crossings).
fn run_attempts(eta: &mut [u8], attempts: u64, stream: &mut SplitMix64, origin: usize, fronts: &mut (usize, usize)) -> (u64, u64) {
    let bonds = (eta.len() - 1) as u64;
    let (mut left, mut right) = *fronts;
    let mut jumps = 0u64;
    let mut crossings = 0u64;
    let mut step = |b: usize, eta: &mut [u8]| {
        let t = eta[b] & (1 - eta[b + 1]);
        eta[b] -= t;
        eta[b + 1] += t;
        jumps += t as u64;
        crossings += (t as u64) & (b == origin) as u64;
        left += (b == left) as usize;
        right -= (b + 1 == right) as usize;
    };
    for _ in 0..attempts / 2 {
        let z = stream.next_u64();
        step((((z >> 32) * bonds) >> 32) as usize, eta);
        step((((z & 0xFFFF_FFFF) * bonds) >> 32) as usize, eta);
    }
    if attempts % 2 == 1 {
        let z = stream.next_u64();
        step((((z >> 32) * bonds) >> 32) as usize, eta);
    }
    *fronts = (left, right);
    (jumps, crossings)
}

/// Simulates one replica to time `config.horizon` from the replica's own seed.
pub fn simulate_tasep(config: &TasepConfig) -> Result<HeightSnapshot, SamplerError> {
    config.validate()?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(config.seed);
    simulate_with(config, &mut rng)
}

pub(crate) fn simulate_with(config: &TasepConfig, rng: &mut Xoshiro256PlusPlus) -> Result<HeightSnapshot, SamplerError> {
    let first_site = config.sites.0 - config.margin;
    let width = config.window();
    let origin = usize::try_from(-first_site).map_err(|_| SamplerError::OriginOutsideWindow)?;
    if origin + 1 >= width {
        return Err(SamplerError::OriginOutsideWindow);
    }
    let mut eta = initial_occupation(config.ic, first_site, width);
    let particles: u64 = eta.iter().map(|&v| v as u64).sum();

    let mean = (width - 1) as f64 * config.horizon;
    let attempts = Poisson::new(mean).map_err(|_| SamplerError::InvalidHorizon(config.horizon))?.sample(rng) as u64;
    let mut stream = SplitMix64::seed_from_u64(rng.random());
    let mut fronts = (0usize, width - 1);
    let (jumps, crossings) = run_attempts(&mut eta, attempts, &mut stream, origin, &mut fronts);

    debug_assert_eq!(eta.iter().map(|&v| v as u64).sum::<u64>(), particles);
    let front_sites = (first_site + fronts.0 as i64, first_site + fronts.1 as i64);
    if front_sites.0 + FRONT_GUARD >= config.sites.0 || front_sites.1 - FRONT_GUARD <= config.sites.1 {
        return Err(SamplerError::LightCone { fronts: front_sites, reported: config.sites });
    }

    let heights = heights_from_occupation(&eta, origin, 2 * crossings as i64);
    // report only the requested sites
    let lo = (config.sites.0 - first_site) as usize;
    let hi = (config.sites.1 - first_site) as usize;
    Ok(HeightSnapshot {
        first_site: config.sites.0,
        heights: heights[lo..=hi].to_vec(),
        jumps,
        attempts,
        origin_crossings: crossings,
        fronts: front_sites,
        particles,
    })
}

/// Height profile at time zero on the reported sites.
pub fn initial_heights(config: &TasepConfig) -> HeightSnapshot {
    let (lo, hi) = config.sites;
    let heights = (lo..=hi)
        .map(|x| match config.ic {
            InitialCondition::Flat => x.rem_euclid(2),
            InitialCondition::Step => x.abs(),
        })
        .collect();
    HeightSnapshot {
        first_site: lo,
        heights,
        jumps: 0,
        attempts: 0,
        origin_crossings: 0,
        fronts: (lo - config.margin, hi + config.margin),
        particles: 0,
    }
}
