//! Sample summaries with standard errors.

/// Kolmogorov-Smirnov distance between the empirical law of `sorted` and `cdf`.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn of_mean(xs: &[f64]) -> Self {
        Self { value: mean(xs), se: std_error(xs) }
    }

    /// Difference of two independent estimates.
    pub fn minus(self, other: Self) -> Self {
        Self { value: self.value - other.value, se: self.se.hypot(other.se) }
    }

    pub fn interval(self, z: f64) -> (f64, f64) {
        (self.value - z * self.se, self.value + z * self.se)
    }
}

/// Sample covariance with a delta-method standard error from the centred products.
pub fn covariance(xs: &[f64], ys: &[f64]) -> Estimate {
    assert_eq!(xs.len(), ys.len());
    let (mx, my) = (mean(xs), mean(ys));
    let n = xs.len() as f64;
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let value = prods.iter().sum::<f64>() / (n - 1.0);
    Estimate { value, se: std_error(&prods) }
}

/// Sample skewness with its large-sample standard error `sqrt(6/n)`.
pub fn skewness(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let m = mean(xs);
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
    Estimate { value: m3 / m2.powf(1.5), se: (6.0 / n).sqrt() }
}

/// Empirical probability with its binomial standard error.
pub fn proportion(hits: usize, n: usize) -> Estimate {
    let p = hits as f64 / n as f64;
    Estimate { value: p, se: (p * (1.0 - p) / n as f64).sqrt() }
}

/// Sample variance with a standard error from the fourth central moment.
pub fn variance_estimate(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let m = mean(xs);
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    Estimate { value: variance(xs), se: ((m4 - m2 * m2 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt() }
}

/// Delta-method estimate of `g(E[Z_1], ..., E[Z_k])` from per-replica columns `Z_j`.
///
/// The per-replica linearisation `sum_j dg/dmu_j (Z_ij - mu_j)` is formed with
/// central-difference gradients and its standard error is returned.
pub fn delta_method(columns: &[Vec<f64>], g: impl Fn(&[f64]) -> f64) -> Estimate {
    let n = columns[0].len();
    let mut mu: Vec<f64> = columns.iter().map(|c| mean(c)).collect();
    let value = g(&mu);
    let grad: Vec<f64> = (0..mu.len())
        .map(|j| {
            let h = 1e-6 * mu[j].abs().max(1e-3);
            let base = mu[j];
            mu[j] = base + h;
            let up = g(&mu);
            mu[j] = base - h;
            let down = g(&mu);
            mu[j] = base;
            (up - down) / (2.0 * h)
        })
        .collect();
    let linear: Vec<f64> = (0..n)
        .map(|i| columns.iter().zip(&grad).zip(&mu).map(|((c, d), m)| d * (c[i] - m)).sum())
        .collect();
    Estimate { value, se: std_error(&linear) }
}

/// Ordinary least squares slope and intercept.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let (mx, my) = (mean(xs), mean(ys));
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Trapezoid integral of equally spaced samples.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, .., last] => step * (values.iter().sum::<f64>() - 0.5 * (first + last)),
    }
}
