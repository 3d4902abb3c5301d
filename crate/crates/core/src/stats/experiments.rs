//! Ergodicity, CLT, Poisson, exceedance and maximum experiments on sampled paths.

use super::descriptive::{linear_fit, mean, skewness, std_error, trapezoid, variance_estimate, Estimate};
use super::inequalities::{MIN_REPLICAS, VIOLATION_SE};
use super::report::{Comparison, ExperimentReport};
use super::{ks_distance, PathSet, StatsError};
use crate::tracy_widom::TracyWidom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Discrete, Normal, Poisson};

/// `1/2 (3/2)^{2/3}`, the almost-sure limit of `max_{[0,N]} A1 / (log N)^{2/3}`.
pub const AIRY1_MAX_LIMIT: f64 = 0.655_185_348_552_224_1;
/// `(1/4)^{2/3}` and `(3/4)^{2/3}`, the liminf and limsup window for Airy2.
pub const AIRY2_MAX_WINDOW: (f64, f64) = (0.396_850_262_992_049_9, 0.825_481_812_223_656_7);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trig {
    Cos,
    Sin,
}

impl Trig {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Self::Cos => x.cos(),
            Self::Sin => x.sin(),
        }
    }
}

/// Grid indices of `x0 + offset` for each offset, with `x0 + offset + length` also on the grid.
fn window_indices(paths: &PathSet, x0: f64, offsets: &[f64], length: f64) -> Result<Vec<usize>, StatsError> {
    let last = offsets.iter().copied().fold(0.0, f64::max);
    paths.require_extent(x0 - paths.grid()[0] + last + length)?;
    offsets.iter().map(|&z| paths.index_of(x0 + z)).collect()
}

/// `Var(int_0^N G(sum_j b_j A(x + zeta_j)) dx) / N^2` over `N`, with its log-log slope.
pub fn ergodicity_decay(
    paths: &PathSet,
    x0: f64,
    n_grid: &[f64],
    trig: Trig,
    b: &[f64],
    zeta: &[f64],
) -> Result<ExperimentReport, StatsError> {
    if b.is_empty() || b.len() != zeta.len() || b.len() > 3 {
        return Err(StatsError::BadParameter { name: "ergodicity coefficients", value: b.len() as f64 });
    }
    let mut report = ExperimentReport::new(format!("ergodicity_{trig:?}").to_lowercase(), paths.provenance());
    let step = paths.step();
    let (mut log_n, mut log_ratio) = (Vec::new(), Vec::new());
    let mut ratios: Vec<(f64, Estimate)> = Vec::new();
    for &n in n_grid {
        let starts = window_indices(paths, x0, zeta, n)?;
        let steps = paths.steps_for(n);
        let integrals: Vec<f64> = paths
            .rows()
            .iter()
            .map(|row| {
                let vals: Vec<f64> = (0..=steps)
                    .map(|k| trig.apply(b.iter().zip(&starts).map(|(bj, &s)| bj * row[s + k]).sum()))
                    .collect();
                trapezoid(&vals, step)
            })
            .collect();
        let var = variance_estimate(&integrals);
        let ratio = Estimate { value: var.value / (n * n), se: var.se / (n * n) };
        report.stat(format!("N{n}.var"), var.value).stat(format!("N{n}.var_over_n2"), ratio.value);
        report.stat(format!("N{n}.var_over_n2.se"), ratio.se);
        log_n.push(n.ln());
        log_ratio.push(ratio.value.ln());
        ratios.push((n, ratio));
    }
    let (slope, _) = linear_fit(&log_n, &log_ratio);
    report.stat("slope", slope);
    report.check("log-log slope of Var/N^2 <= -0.8", "slope", Comparison::AtMost, -0.8);
    let find = |n: f64| ratios.iter().find(|(m, _)| (*m - n).abs() < 1e-9).map(|(_, e)| *e);
    if let (Some(small), Some(large)) = (find(2.0), find(32.0)) {
        let q = small.value / large.value;
        // relative errors of the two variance estimates added in quadrature
        let rel = (small.se / small.value).hypot(large.se / large.value);
        report.stat("ratio_2_32", q).stat("ratio_2_32.upper", q * (1.0 + VIOLATION_SE * rel));
        report.check("Var/N^2 at N=2 over N=32 >= 8 within 3 SE", "ratio_2_32.upper", Comparison::AtLeast, 8.0);
    }
    Ok(report)
}

/// Pooled stationary covariance `C(k step)` for `k = 0..=max_lag_steps` over positions
/// `[i0, i0 + span]`, centred at `centre`.
fn pooled_covariance(paths: &PathSet, i0: usize, span: usize, max_lag_steps: usize, centre: f64) -> Vec<f64> {
    (0..=max_lag_steps)
        .map(|lag| {
            let (mut sum, mut count) = (0.0, 0usize);
            for row in paths.rows() {
                for i in i0..=i0 + span - lag {
                    sum += (row[i] - centre) * (row[i + lag] - centre);
                    count += 1;
                }
            }
            sum / count as f64
        })
        .collect()
}

fn normal_ks(values: &[f64], variance: f64) -> f64 {
    let normal = Normal::new(0.0, variance.sqrt()).expect("positive variance");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    ks_distance(&sorted, |x| normal.cdf(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltConfig {
    pub x0: f64,
    pub length: f64,
    /// Covariance lags beyond this are treated as zero.
    pub lag_cut: f64,
    /// `E[A(0)]` from the one-point law.
    pub law_mean: f64,
}

/// `(1/sqrt N) int_0^N (A(x) - E A) dx` against `Normal(0, sigma^2)` with
/// `sigma^2 = int_R Cov(A(x), A(0)) dx` from the pooled empirical covariance.
pub fn clt_experiment(paths: &PathSet, config: &CltConfig) -> Result<ExperimentReport, StatsError> {
    let CltConfig { x0, length, lag_cut, law_mean } = *config;
    if !(10.0..=50.0).contains(&length) {
        return Err(StatsError::BadParameter { name: "CLT length", value: length });
    }
    paths.require_replicas(MIN_REPLICAS)?;
    let i0 = window_indices(paths, x0, &[0.0], length)?[0];
    let step = paths.step();
    let steps = paths.steps_for(length);
    let root_n = length.sqrt();
    let stat_with = |stride: usize| -> Vec<f64> {
        paths
            .rows()
            .iter()
            .map(|row| {
                let vals: Vec<f64> = (0..=steps).step_by(stride).map(|k| row[i0 + k] - law_mean).collect();
                trapezoid(&vals, step * stride as f64) / root_n
            })
            .collect()
    };
    let stats = stat_with(1);

    let cut_steps = paths.steps_for(lag_cut);
    let cov = pooled_covariance(paths, i0, steps, cut_steps, law_mean);
    let sigma2_at = |lag: f64| 2.0 * trapezoid(&cov[..=paths.steps_for(lag)], step);
    let sigma2 = sigma2_at(lag_cut);
    if !(sigma2 > 0.0) {
        return Err(StatsError::NonPositiveVariance(sigma2));
    }
    let sigma2_short = sigma2_at(lag_cut - 1.0);

    let mut report = ExperimentReport::new("clt", paths.provenance());
    let m = Estimate::of_mean(&stats);
    let skew = skewness(&stats);
    report
        .stat("sigma2", sigma2)
        .stat("sigma2.lag_cut_minus_1", sigma2_short)
        .stat("sigma2.truncation_sensitivity", (sigma2 - sigma2_short).abs() / sigma2)
        .stat("statistic.variance", variance_estimate(&stats).value)
        .stat("ks", normal_ks(&stats, sigma2))
        .stat("mean", m.value)
        .stat("mean.z", m.value.abs() / m.se)
        .stat("skewness", skew.value)
        .stat("skewness.z", skew.value.abs() / skew.se);
    report.check("KS vs Normal(0, sigma^2) < 0.05", "ks", Comparison::Below, 0.05);
    report.check("skewness within 3 SE of 0", "skewness.z", Comparison::AtMost, VIOLATION_SE);
    report.check("mean within 3 SE of 0", "mean.z", Comparison::AtMost, VIOLATION_SE);
    report.check("sigma^2 lag-truncation sensitivity < 1%", "sigma2.truncation_sensitivity", Comparison::Below, 0.01);

    if steps % 2 == 0 {
        let coarse = stat_with(2);
        let diff = stats.iter().zip(&coarse).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        report.stat("grid_halving.max_abs_change", diff);
    }

    // discrete variant over integer points
    let unit = paths.steps_for(1.0);
    if ((unit as f64) * step - 1.0).abs() < 1e-9 {
        let count = length.floor() as usize;
        let discrete: Vec<f64> = paths
            .rows()
            .iter()
            .map(|row| (1..=count).map(|k| row[i0 + k * unit] - law_mean).sum::<f64>() / (count as f64).sqrt())
            .collect();
        let lags = lag_cut.floor() as usize;
        let tau2 = cov[0] + 2.0 * (1..=lags).map(|k| cov[k * unit]).sum::<f64>();
        report.stat("discrete.tau2", tau2).stat("discrete.ks", normal_ks(&discrete, tau2));
        report.check("discrete KS vs Normal(0, tau^2) < 0.05", "discrete.ks", Comparison::Below, 0.05);
    }
    Ok(report)
}

/// `g_N(z) = min(1, (z - level)_+ / width)` with `level = T(lambda/N)/2` and
/// `width = (T(lambda/(N+1)) - T(lambda/N))/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothedIndicator {
    pub level: f64,
    pub width: f64,
}

impl SmoothedIndicator {
    pub fn new(tw: &TracyWidom, lambda: f64, n: usize) -> Result<Self, StatsError> {
        let t_n = tw.quantile_t(lambda / n as f64)?;
        let t_next = tw.quantile_t(lambda / (n + 1) as f64)?;
        Ok(Self { level: 0.5 * t_n, width: 0.5 * (t_next - t_n) })
    }

    pub fn eval(&self, z: f64) -> f64 {
        ((z - self.level).max(0.0) / self.width).min(1.0)
    }

    pub fn lipschitz(&self) -> f64 {
        1.0 / self.width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonConfig {
    pub lambda: f64,
    pub points: usize,
    /// Spacing in units of `(3 log N)^{1/3}`; must exceed 1.
    pub spacing_multiplier: f64,
    pub x0: f64,
    /// Seed for the deterministic sandwich check points.
    pub check_seed: u64,
}

/// Total-variation distance between an integer histogram and `Poisson(lambda)`.
pub fn poisson_tv(counts: &[usize], lambda: f64) -> f64 {
    let n = counts.len() as f64;
    let top = counts.iter().copied().max().unwrap_or(0);
    let law = Poisson::new(lambda).expect("positive rate");
    let mut hist = vec![0usize; top + 1];
    counts.iter().for_each(|&c| hist[c] += 1);
    let inside: f64 = hist.iter().enumerate().map(|(k, &h)| (h as f64 / n - law.pmf(k as u64)).abs()).sum();
    let covered: f64 = (0..=top as u64).map(|k| law.pmf(k)).sum();
    0.5 * (inside + (1.0 - covered).max(0.0))
}

/// Exceedance counts of `A(x_k) > T(lambda/N)/2` at `N` equally spaced points.
pub fn poisson_experiment(paths: &PathSet, tw: &TracyWidom, config: &PoissonConfig) -> Result<ExperimentReport, StatsError> {
    let PoissonConfig { lambda, points, spacing_multiplier, x0, check_seed } = *config;
    if spacing_multiplier <= 1.0 {
        return Err(StatsError::SpacingTooSmall { multiplier: spacing_multiplier });
    }
    if !(lambda > 0.0) || points < 3 || lambda >= points as f64 {
        return Err(StatsError::BadParameter { name: "lambda", value: lambda });
    }
    let min_spacing = (3.0 * (points as f64).ln()).cbrt();
    // round onto the grid without dropping below the required separation
    let raw = spacing_multiplier * min_spacing;
    let mut spacing_steps = paths.steps_for(raw);
    if spacing_steps as f64 * paths.step() <= min_spacing {
        spacing_steps += 1;
    }
    let spacing = spacing_steps as f64 * paths.step();
    let i0 = window_indices(paths, x0, &[0.0], (points - 1) as f64 * spacing)?[0];

    let g_n = SmoothedIndicator::new(tw, lambda, points)?;
    let g_prev = SmoothedIndicator::new(tw, lambda, points - 1)?;
    let level = g_n.level;
    let counts: Vec<usize> = paths
        .rows()
        .iter()
        .map(|row| (0..points).filter(|k| row[i0 + k * spacing_steps] > level).count())
        .collect();
    let smooth: Vec<f64> =
        paths.rows().iter().map(|row| (0..points).map(|k| g_n.eval(row[i0 + k * spacing_steps])).sum()).collect();
    let as_f64: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let count_mean = Estimate::of_mean(&as_f64);
    let count_var = variance_estimate(&as_f64);

    let mut report = ExperimentReport::new("poisson", paths.provenance());
    report
        .stat("spacing", spacing)
        .stat("threshold", level)
        .stat("tv", poisson_tv(&counts, lambda))
        .stat("mean", count_mean.value)
        .stat("mean.z", (count_mean.value - lambda).abs() / count_mean.se)
        .stat("variance", count_var.value)
        .stat("variance.z", (count_var.value - lambda).abs() / count_var.se)
        .stat("smoothed_mean", mean(&smooth))
        .stat("smoothed_mean.se", std_error(&smooth));
    report.check("TV to Poisson(lambda) < 0.1", "tv", Comparison::Below, 0.1);
    report.check("mean count within 3 SE of lambda", "mean.z", Comparison::AtMost, VIOLATION_SE);
    report.check("count variance within 3 SE of lambda", "variance.z", Comparison::AtMost, VIOLATION_SE);

    // deterministic sandwich g_N <= 1(z > level) <= g_{N-1} and the Lipschitz constant
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(check_seed);
    let span = 4.0 * g_n.width.max(g_prev.width) + 1.0;
    let violations = (0..1000)
        .filter(|_| {
            let z = level + rng.random_range(-span..span);
            let ind = (z > level) as u8 as f64;
            !(g_n.eval(z) <= ind && ind <= g_prev.eval(z))
        })
        .count();
    report.stat("sandwich_violations", violations as f64);
    report.check("g_N sandwich at 1000 points", "sandwich_violations", Comparison::AtMost, 0.0);
    let t_n = tw.quantile_t(lambda / points as f64)?;
    let t_next = tw.quantile_t(lambda / (points + 1) as f64)?;
    let lip_formula = 2.0 / (t_next - t_n);
    let h = g_n.width * 1e-3;
    let lip_measured = (0..2000)
        .map(|i| level - g_n.width + 3.0 * g_n.width * i as f64 / 2000.0)
        .map(|z| (g_n.eval(z + h) - g_n.eval(z)).abs() / h)
        .fold(0.0, f64::max);
    report.stat("lipschitz", lip_formula).stat("lipschitz.measured", lip_measured);
    report.stat("lipschitz.rel_error", (lip_measured / lip_formula - 1.0).abs());
    report.check("Lip(g_N) = 2/(T(l/(N+1)) - T(l/N))", "lipschitz.rel_error", Comparison::Below, 1e-9);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceConfig {
    pub alpha: f64,
    pub x0: f64,
}

/// `log(|{x in [0,N] : A(x) > (alpha log N)^{2/3}/2}|) / log N` against `1 - 2 alpha/3`.
pub fn exceedance_measure(paths: &PathSet, config: &ExceedanceConfig, n_grid: &[f64]) -> Result<ExperimentReport, StatsError> {
    let ExceedanceConfig { alpha, x0 } = *config;
    if !(alpha > 0.0 && alpha < 0.75) {
        return Err(StatsError::BadParameter { name: "alpha", value: alpha });
    }
    let target = 1.0 - 2.0 * alpha / 3.0;
    let mut report = ExperimentReport::new(format!("exceedance_alpha{alpha}"), paths.provenance());
    report.stat("target", target);
    let step = paths.step();
    let mut medians = Vec::new();
    for &n in n_grid {
        let i0 = window_indices(paths, x0, &[0.0], n)?[0];
        let steps = paths.steps_for(n);
        let level = 0.5 * (alpha * n.ln()).powf(2.0 / 3.0);
        let mut finite: Vec<f64> = Vec::new();
        let mut empty = 0usize;
        for row in paths.rows() {
            let ind: Vec<f64> = row[i0..=i0 + steps].iter().map(|&v| (v > level) as u8 as f64).collect();
            let measure = trapezoid(&ind, step);
            if measure > 0.0 {
                finite.push(measure.ln() / n.ln());
            } else {
                empty += 1;
            }
        }
        report.stat(format!("N{n}.empty"), empty as f64);
        if finite.is_empty() {
            report.note(format!("N={n}: every replica has an empty exceedance set"));
            continue;
        }
        finite.sort_by(f64::total_cmp);
        let median = finite[finite.len() / 2];
        let q = |p: f64| finite[((p * finite.len() as f64) as usize).min(finite.len() - 1)];
        report.stat(format!("N{n}.median"), median).interval(format!("N{n}.median"), (q(0.25), q(0.75)));
        medians.push(median);
    }
    if let (Some(first), Some(last)) = (medians.first(), medians.last()) {
        report.stat("last.distance", (last - target).abs());
        report.stat("distance_change", (last - target).abs() - (first - target).abs());
        report.check("median within 0.35 of target at the largest N", "last.distance", Comparison::AtMost, 0.35);
        report.check("median moves toward target", "distance_change", Comparison::AtMost, 0.0);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxProcess {
    Airy1,
    Airy2,
}

/// Replica mean of `max_{[x0, x0+N]} A / (log N)^{2/3}` over `N`.
pub fn max_growth(paths: &PathSet, process: MaxProcess, x0: f64, n_grid: &[f64]) -> Result<ExperimentReport, StatsError> {
    let i0 = paths.index_of(x0)?;
    let mut report = ExperimentReport::new(format!("max_growth_{process:?}").to_lowercase(), paths.provenance());
    let mut running: Vec<f64> = paths.rows().iter().map(|r| r[i0]).collect();
    let mut covered = 0usize;
    let mut monotone = true;
    let mut values: Vec<Estimate> = Vec::new();
    for &n in n_grid {
        window_indices(paths, x0, &[0.0], n)?;
        let steps = paths.steps_for(n);
        if steps < covered {
            return Err(StatsError::BadParameter { name: "max growth N grid must increase", value: n });
        }
        for (m, row) in running.iter_mut().zip(paths.rows()) {
            let next = row[i0 + covered..=i0 + steps].iter().copied().fold(*m, f64::max);
            monotone &= next >= *m;
            *m = next;
        }
        covered = steps;
        let scaled: Vec<f64> = running.iter().map(|m| m / n.ln().powf(2.0 / 3.0)).collect();
        let e = Estimate::of_mean(&scaled);
        report.stat(format!("N{n}.mean"), e.value).stat(format!("N{n}.se"), e.se);
        values.push(e);
    }
    report.stat("max_nondecreasing", monotone as u8 as f64);
    report.check("per-replica max nondecreasing in N", "max_nondecreasing", Comparison::AtLeast, 1.0);
    let (first, last) = (values[0], *values.last().expect("nonempty N grid"));
    report.stat("last", last.value);
    match process {
        MaxProcess::Airy1 => {
            report.stat("limit", AIRY1_MAX_LIMIT);
            report.check("Airy1 statistic at largest N >= 0.40", "last", Comparison::AtLeast, 0.40);
            report.check("Airy1 statistic at largest N <= 0.95", "last", Comparison::AtMost, 0.95);
            let drift = (last.value - AIRY1_MAX_LIMIT).abs() - (first.value - AIRY1_MAX_LIMIT).abs();
            report.stat("distance_change", drift - VIOLATION_SE * last.se.hypot(first.se));
            report.check("sequence does not move away from the limit", "distance_change", Comparison::AtMost, 0.0);
        }
        MaxProcess::Airy2 => {
            report.stat("window.low", AIRY2_MAX_WINDOW.0).stat("window.high", AIRY2_MAX_WINDOW.1);
            report.check("Airy2 statistic at largest N >= 0.35", "last", Comparison::AtLeast, 0.35);
            report.check("Airy2 statistic at largest N <= 1.0", "last", Comparison::AtMost, 1.0);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_match_their_closed_forms() {
        assert!((AIRY1_MAX_LIMIT - 0.5 * 1.5f64.powf(2.0 / 3.0)).abs() < 1e-15);
        assert!((AIRY2_MAX_WINDOW.0 - 0.25f64.powf(2.0 / 3.0)).abs() < 1e-15);
        assert!((AIRY2_MAX_WINDOW.1 - 0.75f64.powf(2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn tv_of_an_exact_histogram_is_small() {
        let law = Poisson::new(1.0).unwrap();
        let mut counts = Vec::new();
        for k in 0..8u64 {
            let reps = (law.pmf(k) * 100_000.0).round() as usize;
            counts.extend(std::iter::repeat_n(k as usize, reps));
        }
        assert!(poisson_tv(&counts, 1.0) < 1e-4);
        assert!(poisson_tv(&[0; 10], 1.0) > 0.6);
    }

    #[test]
    fn smoothed_indicator_sandwich() {
        let tw = TracyWidom::shared().unwrap();
        let g50 = SmoothedIndicator::new(tw, 1.0, 50).unwrap();
        let g49 = SmoothedIndicator::new(tw, 1.0, 49).unwrap();
        // g_49 reaches 1 exactly where g_50 starts
        assert!((g49.level + g49.width - g50.level).abs() < 1e-12);
        for i in 0..=400 {
            let z = g50.level - 1.0 + i as f64 / 200.0;
            let ind = (z > g50.level) as u8 as f64;
            assert!(g50.eval(z) <= ind);
            if (z - g50.level).abs() > 1e-9 {
                assert!(ind <= g49.eval(z), "{z}");
            }
        }
    }
}
