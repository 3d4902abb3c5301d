//! Quadrature rules: fixed Gauss-Legendre rules for Nystrom discretizations and an
//! adaptive Gauss-Kronrod integrator with log-scale stabilization.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("invalid rule: {0}")]
    InvalidRule(String),
    #[error("adaptive quadrature on [{a}, {b}] did not reach tolerance {tol:e} (estimate {estimate:e}, error {error:e})")]
    NotConverged { a: f64, b: f64, tol: f64, estimate: f64, error: f64 },
    #[error("integrand returned a non-finite value at {x}")]
    NonFinite { x: f64 },
}

/// How reference nodes on `[-1, 1]` were mapped onto the working domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Transform {
    Affine { a: f64, b: f64 },
    /// Independent affine panels between consecutive breakpoints.
    Panels { breakpoints: Vec<f64>, nodes_per_panel: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    transform: Transform,
}

impl QuadratureRule {
    /// `n`-point Gauss-Legendre rule on `[a, b]`.
    pub fn gauss_legendre(a: f64, b: f64, n: usize) -> Result<Self, QuadError> {
        Self::panels(&[a, b], &[n])
    }

    /// Gauss-Legendre panels between consecutive breakpoints.
    pub fn panels(breakpoints: &[f64], nodes_per_panel: &[usize]) -> Result<Self, QuadError> {
        if breakpoints.len() < 2 || nodes_per_panel.len() != breakpoints.len() - 1 {
            return Err(QuadError::InvalidRule("need one node count per panel".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0]) || !w[0].is_finite() || !w[1].is_finite()) {
            return Err(QuadError::InvalidRule("breakpoints must be finite and strictly increasing".into()));
        }
        if nodes_per_panel.contains(&0) {
            return Err(QuadError::InvalidRule("empty panel".into()));
        }
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (w, &n) in breakpoints.windows(2).zip(nodes_per_panel) {
            let (x, wt) = legendre_nodes(n);
            let half = 0.5 * (w[1] - w[0]);
            let mid = 0.5 * (w[1] + w[0]);
            nodes.extend(x.iter().map(|t| mid + half * t));
            weights.extend(wt.iter().map(|v| half * v));
        }
        let transform = if breakpoints.len() == 2 {
            Transform::Affine { a: breakpoints[0], b: breakpoints[1] }
        } else {
            Transform::Panels { breakpoints: breakpoints.to_vec(), nodes_per_panel: nodes_per_panel.to_vec() }
        };
        Ok(Self { nodes, weights, transform })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn domain_length(&self) -> f64 {
        match &self.transform {
            Transform::Affine { a, b } => b - a,
            Transform::Panels { breakpoints, .. } => breakpoints[breakpoints.len() - 1] - breakpoints[0],
        }
    }

    /// Same breakpoints, twice the nodes in every panel.
    pub fn doubled(&self) -> Self {
        let (bp, np) = match &self.transform {
            Transform::Affine { a, b } => (vec![*a, *b], vec![self.nodes.len()]),
            Transform::Panels { breakpoints, nodes_per_panel } => (breakpoints.clone(), nodes_per_panel.clone()),
        };
        let np: Vec<usize> = np.iter().map(|n| 2 * n).collect();
        Self::panels(&bp, &np).expect("doubling a valid rule")
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss-Legendre nodes (increasing) and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root
        let theta = std::f64::consts::PI * (4.0 * i as f64 + 3.0) / (4.0 * nf + 2.0);
        let mut z = (1.0 - (nf - 1.0) / (8.0 * nf.powi(3))) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_eval(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_eval(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        x[n - 1 - i] = z;
        x[i] = -z;
        w[n - 1 - i] = wt;
        w[i] = wt;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_eval(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

// Gauss-Kronrod 7-15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 0.0, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel, QuadError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite { x: c });
    }
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let (x1, x2) = (c - dx, c + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(QuadError::NonFinite { x: x1 });
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite { x: x2 });
        }
        kron += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kron * h;
    let error = ((kron - gauss) * h).abs();
    Ok(Panel { a, b, value, error })
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]`, starting from the given
/// interior breakpoints (e.g. known peaks or kinks of the integrand).
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: AdaptiveOptions,
) -> Result<Integral, QuadError> {
    if !(b > a) {
        return Ok(Integral { value: 0.0, error: 0.0, intervals: 0 });
    }
    let mut cuts = vec![a];
    cuts.extend(breakpoints.iter().copied().filter(|&p| p > a && p < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut panels = Vec::with_capacity(64);
    for w in cuts.windows(2) {
        panels.push(gk15(&f, w[0], w[1])?);
    }
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target {
            return Ok(Integral { value, error, intervals: panels.len() });
        }
        if panels.len() >= opts.max_intervals {
            return Err(QuadError::NotConverged { a, b, tol: opts.rel_tol, estimate: value, error });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            return Err(QuadError::NotConverged { a, b, tol: opts.rel_tol, estimate: value, error });
        }
        panels.push(gk15(&f, p.a, mid)?);
        panels.push(gk15(&f, mid, p.b)?);
    }
}

/// Logarithm of `int_a^b exp(log_f(x)) dx`, with `log_f` shifted by `log_peak`
/// (an upper estimate of `max log_f`) so that no exponent overflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogIntegral {
    pub log_value: f64,
    pub rel_error: f64,
}

pub fn integrate_log<F: Fn(f64) -> f64>(
    log_f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    log_peak: f64,
    opts: AdaptiveOptions,
) -> Result<LogIntegral, QuadError> {
    let r = integrate_adaptive(|x| (log_f(x) - log_peak).exp(), a, b, breakpoints, opts)?;
    Ok(LogIntegral { log_value: log_peak + r.value.ln(), rel_error: r.error / r.value })
}
