//! Monte Carlo checks of association-type inequalities.
//!
//! One-sided inequalities `lhs <= rhs` are accepted unless `lhs - rhs` exceeds
//! three standard errors of the difference; the error comes from the delta
//! method applied to all the empirical means involved.

use super::descriptive::{covariance, delta_method, proportion};
use super::functional::MonotoneFunctional;
use super::report::{Comparison, ExperimentReport, Z99};
use super::{PathSet, StatsError};
use serde::{Deserialize, Serialize};

pub const MIN_REPLICAS: usize = 2000;
/// Standard errors allowed before a one-sided inequality counts as violated.
pub const VIOLATION_SE: f64 = 3.0;

fn values_at(paths: &PathSet, points: &[f64]) -> Result<Vec<Vec<f64>>, StatsError> {
    points.iter().map(|&x| paths.index_of(x).map(|k| paths.column(k))).collect()
}

fn evaluate(paths: &PathSet, f: &MonotoneFunctional) -> Result<Vec<f64>, StatsError> {
    let idx: Vec<usize> = f.points.iter().map(|&x| paths.index_of(x)).collect::<Result<_, _>>()?;
    let mut y = vec![0.0; idx.len()];
    Ok(paths
        .rows()
        .iter()
        .map(|row| {
            y.iter_mut().zip(&idx).for_each(|(v, &k)| *v = row[k]);
            f.eval(&y)
        })
        .collect())
}

/// `Cov[h1, h2] >= 0` for every pair, tested at the 99% level.
pub fn association_suite(
    paths: &PathSet,
    pairs: &[(MonotoneFunctional, MonotoneFunctional)],
) -> Result<ExperimentReport, StatsError> {
    paths.require_replicas(MIN_REPLICAS)?;
    let mut report = ExperimentReport::new("association", paths.provenance());
    for (h1, h2) in pairs {
        let key = format!("cov[{},{}]", h1.id, h2.id);
        let cov = covariance(&evaluate(paths, h1)?, &evaluate(paths, h2)?);
        report.stat(&key, cov.value).stat(format!("{key}.se"), cov.se).interval(&key, cov.interval(Z99));
        let margin = format!("{key}.upper");
        report.stat(&margin, cov.value + Z99 * cov.se);
        report.check(format!("{key} not below -CI"), &margin, Comparison::AtLeast, 0.0);
    }
    Ok(report)
}

/// Pairs of monotone functionals on points in `[x0, x0 + 4]`.
pub fn association_catalogue(x0: f64, median: f64) -> Result<Vec<(MonotoneFunctional, MonotoneFunctional)>, StatsError> {
    use super::functional::Shape::*;
    let at = |dx: f64| x0 + dx;
    let coord = |dx: f64| MonotoneFunctional::new(format!("A({dx})"), vec![at(dx)], Coordinate);
    Ok(vec![
        (coord(0.0)?, coord(0.0)?),
        (coord(0.0)?, coord(1.0)?),
        (coord(0.0)?, coord(2.0)?),
        (
            MonotoneFunctional::new("max(A(0),A(2))", vec![at(0.0), at(2.0)], Max)?,
            MonotoneFunctional::new("A(1)+A(3)", vec![at(1.0), at(3.0)], WeightedSum(vec![1.0, 1.0]))?,
        ),
        (
            MonotoneFunctional::new("ramp(A(0))", vec![at(0.0)], Ramp { level: median, width: 0.5 })?,
            MonotoneFunctional::new("tanh(A(1))", vec![at(1.0)], Tanh { scale: 1.0 })?,
        ),
        (
            MonotoneFunctional::new("max(A(0),A(1),A(2))", vec![at(0.0), at(1.0), at(2.0)], Max)?,
            coord(4.0)?,
        ),
        (
            MonotoneFunctional::new("0.5A(0)+2A(0.5)", vec![at(0.0), at(0.5)], WeightedSum(vec![0.5, 2.0]))?,
            MonotoneFunctional::new("ramp(A(3))", vec![at(3.0)], Ramp { level: median, width: 0.25 })?,
        ),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FkgCase {
    pub id: String,
    pub points: Vec<f64>,
    /// `+inf` is allowed and makes the coordinate's event certain.
    pub thresholds: Vec<f64>,
}

/// Threshold cases on points in `[x0, x0 + 4]`, with thresholds at the one-point `median`
/// unless stated.
pub fn fkg_catalogue(x0: f64, median: f64) -> Vec<FkgCase> {
    let case = |id: &str, offsets: &[f64], thresholds: Vec<f64>| FkgCase {
        id: id.into(),
        points: offsets.iter().map(|dx| x0 + dx).collect(),
        thresholds,
    };
    vec![
        case("pair-certain", &[0.0, 1.0], vec![f64::INFINITY, f64::INFINITY]),
        case("pair-lag1", &[0.0, 1.0], vec![median; 2]),
        case("pair-lag0.5-shifted", &[0.0, 0.5], vec![median - 0.5, median + 0.5]),
        case("triple-lag2", &[0.0, 2.0, 4.0], vec![median; 3]),
        case("triple-lag1-mixed", &[0.0, 1.0, 2.0], vec![median, median - 0.5, f64::INFINITY]),
        case("five-lag1", &[0.0, 1.0, 2.0, 3.0, 4.0], vec![median + 0.5; 5]),
    ]
}

/// Joint-CDF inequality over all coordinates plus pairwise positive quadrant dependence.
pub fn fkg_suite(paths: &PathSet, cases: &[FkgCase]) -> Result<ExperimentReport, StatsError> {
    paths.require_replicas(MIN_REPLICAS)?;
    let mut report = ExperimentReport::new("fkg", paths.provenance());
    for case in cases {
        let m = case.points.len();
        if !(2..=5).contains(&m) || case.thresholds.len() != m {
            return Err(StatsError::BadParameter { name: "fkg coordinates", value: m as f64 });
        }
        let ys = values_at(paths, &case.points)?;
        let ind: Vec<Vec<f64>> = ys
            .iter()
            .zip(&case.thresholds)
            .map(|(col, &t)| col.iter().map(|&v| (v <= t) as u8 as f64).collect())
            .collect();
        let n = paths.replicas();
        let all: Vec<f64> = (0..n).map(|i| ind.iter().map(|c| c[i]).product()).collect();
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|j| (j + 1..m).map(move |k| (j, k))).collect();
        let mut columns = ind.clone();
        columns.push(all);
        for &(j, k) in &pairs {
            columns.push((0..n).map(|i| ind[j][i] * ind[k][i]).collect());
        }
        let lhs = |mu: &[f64]| mu[m] - mu[..m].iter().product::<f64>();
        let rhs = |mu: &[f64]| -> f64 {
            pairs.iter().enumerate().map(|(p, &(j, k))| mu[m + 1 + p] - mu[j] * mu[k]).sum()
        };
        let gap = delta_method(&columns, |mu| rhs(mu) - lhs(mu));
        let id = &case.id;
        let l = delta_method(&columns, lhs);
        report
            .stat(format!("{id}.lhs"), l.value)
            .stat(format!("{id}.rhs"), gap.value + l.value)
            .stat(format!("{id}.rhs_minus_lhs.se"), gap.se)
            .stat(format!("{id}.slack"), gap.value + VIOLATION_SE * gap.se);
        report.check(format!("{id}: lhs <= rhs + 3 SE"), &format!("{id}.slack"), Comparison::AtLeast, 0.0);
        for (p, &(j, k)) in pairs.iter().enumerate() {
            let pqd = delta_method(&columns, |mu| mu[m + 1 + p] - mu[j] * mu[k]);
            let key = format!("{id}.pqd[{j},{k}]");
            report.stat(&key, pqd.value).stat(format!("{key}.slack"), pqd.value + VIOLATION_SE * pqd.se);
            report.check(format!("{key} >= -3 SE"), &format!("{key}.slack"), Comparison::AtLeast, 0.0);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NewmanCase {
    /// `|Cov(f, g)| <= sum_jl Lip_j(f) Lip_l(g) Cov(Y_j, Y_l)`; with one coordinate
    /// each this is the univariate form `||f'|| ||g'|| Cov(X, Y)`.
    Lipschitz { id: String, f: MonotoneFunctional, g: MonotoneFunctional },
    /// `|E e^{i sum r_j Y_j} - prod E e^{i r_j Y_j}| <= 1/2 sum_{j != l} |r_j||r_l| Cov(Y_j, Y_l)`.
    CharacteristicFunction { id: String, points: Vec<f64>, r: Vec<f64> },
}

/// Lhs, rhs and the delta-method standard error of `rhs - lhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewmanSides {
    pub lhs: f64,
    pub rhs: f64,
    pub se: f64,
}

fn cov_columns(ys: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<(usize, usize)>) {
    let m = ys.len();
    let n = ys[0].len();
    let mut cols = ys.to_vec();
    let mut pairs = Vec::new();
    for j in 0..m {
        for l in j..m {
            cols.push((0..n).map(|i| ys[j][i] * ys[l][i]).collect());
            pairs.push((j, l));
        }
    }
    (cols, pairs)
}

fn cov_from_means(mu: &[f64], offset: usize, m: usize, pairs: &[(usize, usize)], j: usize, l: usize) -> f64 {
    let (a, b) = (j.min(l), j.max(l));
    let p = pairs.iter().position(|&q| q == (a, b)).expect("pair present");
    mu[offset + m + p] - mu[offset + a] * mu[offset + b]
}

pub fn newman_sides(paths: &PathSet, case: &NewmanCase) -> Result<NewmanSides, StatsError> {
    match case {
        NewmanCase::Lipschitz { f, g, .. } => {
            let mut points: Vec<f64> = f.points.iter().chain(&g.points).copied().collect();
            points.sort_by(f64::total_cmp);
            points.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            let lip_on = |h: &MonotoneFunctional| -> Vec<f64> {
                points
                    .iter()
                    .map(|&x| {
                        h.points.iter().zip(&h.lipschitz_per_coord).filter(|(p, _)| (**p - x).abs() < 1e-9).map(|(_, l)| l).sum()
                    })
                    .collect()
            };
            let (lf, lg) = (lip_on(f), lip_on(g));
            let fv = evaluate(paths, f)?;
            let gv = evaluate(paths, g)?;
            let fg: Vec<f64> = fv.iter().zip(&gv).map(|(a, b)| a * b).collect();
            let (ycols, pairs) = cov_columns(&values_at(paths, &points)?);
            let m = points.len();
            let mut columns = vec![fv, gv, fg];
            columns.extend(ycols);
            let lhs = |mu: &[f64]| (mu[2] - mu[0] * mu[1]).abs();
            let rhs = |mu: &[f64]| -> f64 {
                (0..m)
                    .flat_map(|j| (0..m).map(move |l| (j, l)))
                    .map(|(j, l)| lf[j] * lg[l] * cov_from_means(mu, 3, m, &pairs, j, l))
                    .sum()
            };
            let d = delta_method(&columns, |mu| rhs(mu) - lhs(mu));
            let l = delta_method(&columns, lhs).value;
            Ok(NewmanSides { lhs: l, rhs: d.value + l, se: d.se })
        }
        NewmanCase::CharacteristicFunction { points, r, .. } => {
            let m = points.len();
            if r.len() != m || m < 2 {
                return Err(StatsError::BadParameter { name: "characteristic-function coordinates", value: m as f64 });
            }
            let ys = values_at(paths, points)?;
            let n = paths.replicas();
            let total: Vec<f64> = (0..n).map(|i| (0..m).map(|j| r[j] * ys[j][i]).sum()).collect();
            let mut columns = vec![total.iter().map(|s| s.cos()).collect::<Vec<_>>(), total.iter().map(|s| s.sin()).collect()];
            for j in 0..m {
                columns.push(ys[j].iter().map(|y| (r[j] * y).cos()).collect());
                columns.push(ys[j].iter().map(|y| (r[j] * y).sin()).collect());
            }
            let (ycols, pairs) = cov_columns(&ys);
            columns.extend(ycols);
            let offset = 2 + 2 * m;
            let lhs = |mu: &[f64]| {
                let (mut re, mut im) = (1.0, 0.0);
                for j in 0..m {
                    let (c, s) = (mu[2 + 2 * j], mu[3 + 2 * j]);
                    (re, im) = (re * c - im * s, re * s + im * c);
                }
                (mu[0] - re).hypot(mu[1] - im)
            };
            let rhs = |mu: &[f64]| -> f64 {
                let mut sum = 0.0;
                for j in 0..m {
                    for l in 0..m {
                        if j != l {
                            sum += r[j].abs() * r[l].abs() * cov_from_means(mu, offset, m, &pairs, j, l);
                        }
                    }
                }
                0.5 * sum
            };
            let d = delta_method(&columns, |mu| rhs(mu) - lhs(mu));
            let l = delta_method(&columns, lhs).value;
            Ok(NewmanSides { lhs: l, rhs: d.value + l, se: d.se })
        }
    }
}

pub fn newman_suite(paths: &PathSet, cases: &[NewmanCase]) -> Result<ExperimentReport, StatsError> {
    paths.require_replicas(MIN_REPLICAS)?;
    let mut report = ExperimentReport::new("newman", paths.provenance());
    for case in cases {
        let id = match case {
            NewmanCase::Lipschitz { id, .. } | NewmanCase::CharacteristicFunction { id, .. } => id,
        };
        let sides = newman_sides(paths, case)?;
        report
            .stat(format!("{id}.lhs"), sides.lhs)
            .stat(format!("{id}.rhs"), sides.rhs)
            .stat(format!("{id}.se"), sides.se)
            .stat(format!("{id}.slack"), sides.rhs - sides.lhs + VIOLATION_SE * sides.se);
        report.check(format!("{id}: lhs <= rhs + 3 SE"), &format!("{id}.slack"), Comparison::AtLeast, 0.0);
    }
    Ok(report)
}

/// Standard catalogue of Newman-type cases on points in `[x0, x0 + 3]`.
pub fn newman_catalogue(x0: f64, median: f64) -> Result<Vec<NewmanCase>, StatsError> {
    use super::functional::Shape::*;
    let at = |dx: f64| x0 + dx;
    let mf = MonotoneFunctional::new;
    let lip = |id: &str, f: MonotoneFunctional, g: MonotoneFunctional| NewmanCase::Lipschitz { id: id.into(), f, g };
    Ok(vec![
        lip("identity", mf("A(0)", vec![at(0.0)], Coordinate)?, mf("A(0)", vec![at(0.0)], Coordinate)?),
        lip("tanh-lag1", mf("tanh", vec![at(0.0)], Tanh { scale: 1.0 })?, mf("tanh", vec![at(1.0)], Tanh { scale: 1.0 })?),
        lip(
            "ramp1-lag1",
            mf("ramp", vec![at(0.0)], Ramp { level: median, width: 1.0 })?,
            mf("A(1)", vec![at(1.0)], Coordinate)?,
        ),
        lip(
            "ramp-half-lag1",
            mf("ramp", vec![at(0.0)], Ramp { level: median, width: 2.0 })?,
            mf("A(1)", vec![at(1.0)], Coordinate)?,
        ),
        lip(
            "multi",
            mf("max", vec![at(0.0), at(1.0)], Max)?,
            mf("sum", vec![at(1.0), at(2.0), at(3.0)], WeightedSum(vec![1.0, 0.5, 0.25]))?,
        ),
        NewmanCase::CharacteristicFunction { id: "cf-lag1".into(), points: vec![at(0.0), at(1.0)], r: vec![1.0, 1.0] },
        NewmanCase::CharacteristicFunction {
            id: "cf-three".into(),
            points: vec![at(0.0), at(0.5), at(1.5)],
            r: vec![2.0, -1.0, 0.5],
        },
    ])
}

/// Joint-CDF gap against `Cov^{1/3}` over lags and threshold pairs.
///
/// The constant is fitted as the largest ratio at the first lag; later lags must
/// respect it within three standard errors. Lags whose covariance is within
/// two standard errors of zero are excluded and noted.
pub fn covariance_probability_bound(
    paths: &PathSet,
    x0: f64,
    lags: &[f64],
    quantile_levels: &[f64],
) -> Result<ExperimentReport, StatsError> {
    paths.require_replicas(MIN_REPLICAS)?;
    let mut report = ExperimentReport::new("covariance_probability_bound", paths.provenance());
    let base = paths.column(paths.index_of(x0)?);
    let mut sorted = base.clone();
    sorted.sort_by(f64::total_cmp);
    let thresholds: Vec<f64> =
        quantile_levels.iter().map(|&q| sorted[((q * sorted.len() as f64) as usize).min(sorted.len() - 1)]).collect();
    let mut fitted: Option<f64> = None;
    for &lag in lags {
        let other = paths.column(paths.index_of(x0 + lag)?);
        let cov = covariance(&base, &other);
        let cov_key = format!("lag{lag}.cov");
        report.stat(&cov_key, cov.value);
        // worst threshold pair
        let mut worst: Option<(f64, Vec<Vec<f64>>)> = None;
        for &s in &thresholds {
            for &t in &thresholds {
                let a: Vec<f64> = base.iter().map(|&v| (v <= s) as u8 as f64).collect();
                let b: Vec<f64> = other.iter().map(|&v| (v <= t) as u8 as f64).collect();
                let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
                let cols = vec![a, b, ab];
                let gap = delta_method(&cols, |mu| mu[2] - mu[0] * mu[1]);
                let key = format!("lag{lag}.pqd[{s:.3},{t:.3}]");
                report.stat(&key, gap.value + VIOLATION_SE * gap.se);
                report.check(format!("{key} >= -3 SE"), &key, Comparison::AtLeast, 0.0);
                if worst.as_ref().map_or(true, |(g, _)| gap.value > *g) {
                    worst = Some((gap.value, cols));
                }
            }
        }
        let (gap_max, cols) = worst.expect("at least one threshold");
        report.stat(format!("lag{lag}.gap"), gap_max);
        if cov.value < 2.0 * cov.se {
            report.note(format!("lag {lag}: covariance {:.2e} within 2 SE of zero, excluded from the constant", cov.value));
            continue;
        }
        let ratio = gap_max / cov.value.cbrt();
        report.stat(format!("lag{lag}.constant"), ratio);
        match fitted {
            None => {
                fitted = Some(ratio);
                report.stat("fitted_constant", ratio);
            }
            Some(k) => {
                // gap <= K cov^{1/3} with the joint uncertainty of gap and cov
                let mut with_cov = cols;
                with_cov.push(base.clone());
                with_cov.push(other.clone());
                with_cov.push(base.iter().zip(&other).map(|(x, y)| x * y).collect());
                let d = delta_method(&with_cov, |mu| k * (mu[5] - mu[3] * mu[4]).max(0.0).cbrt() - (mu[2] - mu[0] * mu[1]));
                let key = format!("lag{lag}.slack");
                report.stat(&key, d.value + VIOLATION_SE * d.se);
                report.check(format!("lag {lag}: gap <= K cov^(1/3) + 3 SE"), &key, Comparison::AtLeast, 0.0);
            }
        }
    }
    Ok(report)
}

/// `sup_{0<=y<=2} |A(x+y) - A(x)|` tail against `exp(-s^2/16)` at each start `x`.
pub fn a2_modulus_tail(paths: &PathSet, starts: &[f64], s_grid: &[f64]) -> Result<ExperimentReport, StatsError> {
    const MAX_STEP: f64 = 0.1;
    if paths.step() > MAX_STEP + 1e-9 {
        return Err(StatsError::GridTooCoarse { step: paths.step(), max: MAX_STEP });
    }
    let mut report = ExperimentReport::new("airy2_modulus_tail", paths.provenance());
    let width = paths.steps_for(2.0);
    for &x in starts {
        let k0 = paths.index_of(x)?;
        paths.index_of(x + 2.0)?;
        let sups: Vec<f64> = paths
            .rows()
            .iter()
            .map(|row| row[k0..=k0 + width].iter().map(|v| (v - row[k0]).abs()).fold(0.0, f64::max))
            .collect();
        let mut prev = 1.0;
        let mut monotone = true;
        for &s in s_grid {
            let tail = proportion(sups.iter().filter(|&&v| v >= s).count(), sups.len());
            let bound = (-s * s / 16.0).exp();
            monotone &= tail.value <= prev;
            prev = tail.value;
            let key = format!("x{x}.s{s}");
            report.stat(format!("{key}.tail"), tail.value).stat(format!("{key}.bound"), bound);
            if s >= 4.0 {
                report.stat(format!("{key}.slack"), bound + VIOLATION_SE * tail.se - tail.value);
                report.check(format!("x={x}, s={s}: tail <= bound + 3 SE"), &format!("{key}.slack"), Comparison::AtLeast, 0.0);
            }
        }
        report.stat(format!("x{x}.tail_nonincreasing"), monotone as u8 as f64);
        report.check(format!("x={x}: tail nonincreasing"), &format!("x{x}.tail_nonincreasing"), Comparison::AtLeast, 1.0);
    }
    Ok(report)
}
