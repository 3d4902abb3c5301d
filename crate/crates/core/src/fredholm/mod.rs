//! Fredholm determinants on Gauss-Legendre discretisations.
//!
//! `P(max_{0<=x<=1} A1(x) <= M) = det(I - VW)` with the conjugated kernels of
//! [`kernels`]; the Airy-kernel determinant gives an independent route to `F2`.

pub mod kernels;

pub use kernels::{airy_kernel, bridge_hitting, kernel_v, kernel_w, phi};

use crate::quadrature::{QuadError, QuadratureRule};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FredholmError {
    #[error("level M={0} below the supported minimum 2")]
    LevelTooLow(f64),
    #[error("{0} quadrature nodes requested, at least 40 needed")]
    TooFewNodes(usize),
    #[error("s={0} outside [-10, 8]")]
    ArgumentOutOfRange(f64),
    #[error("node doubling moved the determinant by {change:e} (tolerance {tol:e})")]
    Resolution { change: f64, tol: f64 },
    #[error("determinant {0} outside [-1e-9, 1 + 1e-9]")]
    DeterminantRange(f64),
    #[error("non-finite kernel entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Tolerance of the node-doubling self-convergence check.
pub const DOUBLING_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelId {
    Vw { level: f64 },
    Airy { s: f64 },
}

/// `sqrt(w_i) K(x_i, x_j) sqrt(w_j)` on a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub entries: DMatrix<f64>,
    pub rule: QuadratureRule,
    pub kernel: KernelId,
}

/// `det(I - K)` together with `1 - det(I - K)` evaluated without cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Determinant {
    pub det: f64,
    pub one_minus: f64,
}

impl KernelMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// Sum of singular values, a proxy for the trace norm of the operator.
    pub fn nuclear_norm(&self) -> f64 {
        self.entries.clone().svd(false, false).singular_values.sum()
    }

    /// Frobenius norm, the discrete Hilbert-Schmidt norm.
    pub fn hs_norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn fredholm_det(&self) -> Result<Determinant, FredholmError> {
        fredholm_det(&self.entries)
    }
}

/// `det(I - K)` by LU of the deviation `E = -K` from the identity.
///
/// Pivots are `1 + e_ii` and `log det = sum log1p(e_ii)`, so `1 - det` keeps full
/// relative accuracy when `K` is small. If a pivot drops below 1/2 the routine
/// switches to partial-pivoting LU of `I - K`.
pub fn fredholm_det(k: &DMatrix<f64>) -> Result<Determinant, FredholmError> {
    let n = k.nrows();
    for j in 0..n {
        for i in 0..n {
            if !k[(i, j)].is_finite() {
                return Err(FredholmError::NonFinite(i, j));
            }
        }
    }
    let mut e = -k.clone();
    let mut log_det = 0.0;
    let mut stable = true;
    for i in 0..n {
        let piv = 1.0 + e[(i, i)];
        if piv.abs() < 0.5 {
            stable = false;
            break;
        }
        log_det += e[(i, i)].ln_1p();
        for r in (i + 1)..n {
            let l = e[(r, i)] / piv;
            if l == 0.0 {
                continue;
            }
            for c in (i + 1)..n {
                let v = e[(i, c)];
                e[(r, c)] -= l * v;
            }
        }
    }
    if stable {
        return Ok(Determinant { det: log_det.exp(), one_minus: -log_det.exp_m1() });
    }
    let a = DMatrix::identity(n, n) - k;
    let det = a.lu().determinant();
    Ok(Determinant { det, one_minus: 1.0 - det })
}

fn check_level(level: f64) -> Result<(), FredholmError> {
    if !(level >= 2.0) {
        return Err(FredholmError::LevelTooLow(level));
    }
    Ok(())
}

/// Working rule for level `M`: Gauss-Legendre panels on
/// `[-8/sqrt(2M) - 4, M]` and `[M, M + 12/sqrt(2M) + 4]`.
///
/// The bridge-hitting factor in `V` has a kink along `x = M`, `z = M`, so the
/// split keeps each panel smooth.
pub fn vw_rule(level: f64, n_nodes: usize) -> Result<QuadratureRule, FredholmError> {
    let root = (2.0 * level).sqrt();
    let lo = -8.0 / root - 4.0;
    let hi = level + 12.0 / root + 4.0;
    let left = n_nodes / 2;
    Ok(QuadratureRule::panels(&[lo, level, hi], &[left, n_nodes - left])?)
}

/// Discretised `VW`, composing over the rule's own nodes.
pub fn compose_vw(level: f64, rule: &QuadratureRule) -> Result<KernelMatrix, FredholmError> {
    check_level(level)?;
    let x = rule.nodes();
    let w = rule.weights();
    let n = x.len();
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    // left factor sqrt(w_i) V(x_i, z_k) w_k, right factor W(z_k, y_j) sqrt(w_j)
    let v = DMatrix::from_fn(n, n, |i, k| sw[i] * kernel_v(x[i], x[k], level) * w[k]);
    let wm = DMatrix::from_fn(n, n, |k, j| kernel_w(x[k], x[j], level) * sw[j]);
    let entries = v * wm;
    Ok(KernelMatrix { entries, rule: rule.clone(), kernel: KernelId::Vw { level } })
}

/// Change of `det(I - VW)` when every panel's node count is doubled.
pub fn vw_doubling_change(level: f64, rule: &QuadratureRule) -> Result<f64, FredholmError> {
    let a = compose_vw(level, rule)?.fredholm_det()?;
    let b = compose_vw(level, &rule.doubled())?.fredholm_det()?;
    Ok((a.det - b.det).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxDistribution {
    pub level: f64,
    /// `P(max A1 <= M)`
    pub cdf: f64,
    /// `P(max A1 > M)`, accurate relative to itself
    pub tail: f64,
    pub n_nodes: usize,
    pub doubling_change: f64,
}

/// `P(max_{0<=x<=1} A1(x) <= M) = det(I - VW)`, self-checked by node doubling.
pub fn max_cdf_airy1(level: f64, n_nodes: usize) -> Result<MaxDistribution, FredholmError> {
    check_level(level)?;
    if n_nodes < 40 {
        return Err(FredholmError::TooFewNodes(n_nodes));
    }
    let rule = vw_rule(level, n_nodes)?;
    let base = compose_vw(level, &rule)?.fredholm_det()?;
    let fine = compose_vw(level, &rule.doubled())?.fredholm_det()?;
    let change = (base.det - fine.det).abs();
    if change > DOUBLING_TOL {
        return Err(FredholmError::Resolution { change, tol: DOUBLING_TOL });
    }
    if !(-1e-9..=1.0 + 1e-9).contains(&fine.det) {
        return Err(FredholmError::DeterminantRange(fine.det));
    }
    Ok(MaxDistribution { level, cdf: fine.det, tail: fine.one_minus, n_nodes, doubling_change: change })
}

/// Airy-kernel matrix on `[s, max(s, 0) + 16]`.
pub fn airy_kernel_matrix(s: f64, n_nodes: usize) -> Result<KernelMatrix, FredholmError> {
    let rule = QuadratureRule::gauss_legendre(s, s.max(0.0) + 16.0, n_nodes)?;
    Ok(airy_matrix_on(s, rule))
}

fn airy_matrix_on(s: f64, rule: QuadratureRule) -> KernelMatrix {
    let x = rule.nodes();
    let sw: Vec<f64> = rule.weights().iter().map(|v| v.sqrt()).collect();
    let n = x.len();
    let entries = DMatrix::from_fn(n, n, |i, j| sw[i] * airy_kernel(x[i], x[j]) * sw[j]);
    KernelMatrix { entries, rule, kernel: KernelId::Airy { s } }
}

/// `F2(s) = det(I - K_Airy)` on `L^2(s, inf)`, self-checked by node doubling.
pub fn gue_cdf_fredholm(s: f64, n_nodes: usize) -> Result<f64, FredholmError> {
    if !(-10.0..=8.0).contains(&s) {
        return Err(FredholmError::ArgumentOutOfRange(s));
    }
    if n_nodes < 40 {
        return Err(FredholmError::TooFewNodes(n_nodes));
    }
    let coarse = airy_kernel_matrix(s, n_nodes)?;
    let fine = airy_matrix_on(s, coarse.rule.doubled());
    let a = coarse.fredholm_det()?.det;
    let b = fine.fredholm_det()?.det;
    let change = (a - b).abs();
    if change > DOUBLING_TOL {
        return Err(FredholmError::Resolution { change, tol: DOUBLING_TOL });
    }
    Ok(b)
}

/// `-(4/3) sqrt(2)`, the limit of `log P(max A1 > M) / M^{3/2}`.
pub const MAX_TAIL_EXPONENT: f64 = -1.885_618_083_164_126_7;

/// Shape `M^{7/4} exp((2 - sqrt 2) M + sqrt(2M)) exp(-(4/3) sqrt(2) M^{3/2})` of the tail bound.
pub fn max_tail_bound_shape(level: f64) -> f64 {
    let m = level;
    let log = 1.75 * m.ln() + (2.0 - std::f64::consts::SQRT_2) * m + (2.0 * m).sqrt() + MAX_TAIL_EXPONENT * m.powf(1.5);
    log.exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxTailRow {
    pub level: f64,
    pub tail: f64,
    /// `log p(M) / M^{3/2}`
    pub log_ratio: f64,
    /// `p(M) / (C * shape(M))`
    pub bound_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxTailReport {
    pub rows: Vec<MaxTailRow>,
    /// `C` fitted so that the bound is tight at the smallest level.
    pub fit_constant: f64,
    pub limit: f64,
    pub n_nodes: usize,
}

impl MaxTailReport {
    pub fn log_ratio_strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].log_ratio < w[0].log_ratio)
    }

    pub fn bound_holds(&self) -> bool {
        self.rows.iter().all(|r| r.bound_ratio <= 1.0 + 1e-12)
    }
}

pub fn maxtail_asymptotics(levels: &[f64], n_nodes: usize) -> Result<MaxTailReport, FredholmError> {
    let mut levels = levels.to_vec();
    levels.sort_by(f64::total_cmp);
    let tails = levels
        .iter()
        .map(|&m| max_cdf_airy1(m, n_nodes).map(|d| (m, d.tail)))
        .collect::<Result<Vec<_>, _>>()?;
    let fit_constant = match tails.first() {
        Some(&(m, p)) => p / max_tail_bound_shape(m),
        None => f64::NAN,
    };
    let rows = tails
        .iter()
        .map(|&(m, p)| MaxTailRow {
            level: m,
            tail: p,
            log_ratio: p.ln() / m.powf(1.5),
            bound_ratio: p / (fit_constant * max_tail_bound_shape(m)),
        })
        .collect();
    Ok(MaxTailReport { rows, fit_constant, limit: MAX_TAIL_EXPONENT, n_nodes })
}

/// Hilbert-Schmidt norms of `V` and `W` on the whole plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsNorms {
    pub v: f64,
    pub w: f64,
}

/// `||V||_2` by tensor Gauss-Legendre over a box split at `M` in both variables.
pub fn hs_norm_v(level: f64, nodes_per_panel: usize) -> Result<f64, FredholmError> {
    check_level(level)?;
    let root = (2.0 * level).sqrt();
    let rule = QuadratureRule::panels(
        &[-8.0 / root - 10.0, level, level + 12.0 / root + 10.0],
        &[nodes_per_panel, nodes_per_panel],
    )?;
    let (x, w) = (rule.nodes(), rule.weights());
    let mut sum = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            let v = kernel_v(x[i], x[j], level);
            sum += w[i] * w[j] * v * v;
        }
    }
    Ok(sum.sqrt())
}

/// `||W||_2` by 2-d quadrature: `z = tan(theta)` over the line and, for each `z`,
/// Gauss-Legendre in `y` over the window where `Ai(z + y + 1)` times the exponential is non-negligible.
pub fn hs_norm_w(level: f64, nodes: usize) -> Result<f64, FredholmError> {
    check_level(level)?;
    let theta = QuadratureRule::panels(
        &[-std::f64::consts::FRAC_PI_2, 0.0, std::f64::consts::FRAC_PI_2],
        &[nodes, nodes],
    )?;
    let (u_lo, u_hi) = w_window(level);
    let inner = QuadratureRule::panels(&[u_lo, -1.0, u_hi], &[4 * nodes, 2 * nodes])?;
    let mut sum = 0.0;
    for (&t, &wt) in theta.nodes().iter().zip(theta.weights()) {
        let z = t.tan();
        let jac = 1.0 / t.cos().powi(2);
        let mut row = 0.0;
        for (&u, &wu) in inner.nodes().iter().zip(inner.weights()) {
            let k = kernel_w(z, u - z, level);
            row += wu * k * k;
        }
        sum += wt * jac * row;
    }
    Ok(sum.sqrt())
}

/// Window in `u = z + y` outside which `exp(2(sqrt(2M)-1)u) Ai(u+1)^2` is below `e^{-60}`
/// of its peak: the exponential takes over below, and above `(3(sqrt(2M)-1)/2)^2` the Airy decay wins.
fn w_window(level: f64) -> (f64, f64) {
    let a = (2.0 * level).sqrt() - 1.0;
    (-30.0 / a, 2.0 * (1.5 * a).powi(2) + 12.0)
}

/// `||W||_2^2 = ||1/phi||_2^2 e^{-4/3 - 2(sqrt(2M)-1)} int e^{2(sqrt(2M)-1) y} Ai(y)^2 dy`.
pub fn hs_norm_w_reduced(level: f64) -> Result<f64, FredholmError> {
    check_level(level)?;
    let a = (2.0 * level).sqrt() - 1.0;
    let (u_lo, u_hi) = w_window(level);
    let integral = crate::quadrature::integrate_adaptive(
        |y| {
            let ai = crate::special::airy_fn(y).map(|v| v.ai).unwrap_or(0.0);
            (2.0 * a * y).exp() * ai * ai
        },
        u_lo + 1.0,
        u_hi + 1.0,
        &[-10.0, -2.0, 0.0, 4.0, (1.5 * a).powi(2)],
        crate::quadrature::AdaptiveOptions { rel_tol: 1e-12, ..Default::default() },
    )?
    .value;
    // ||1/phi||^2 = int dz / (1 + z^2) = pi
    Ok((std::f64::consts::PI * (-4.0 / 3.0 - 2.0 * a).exp() * integral).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deviation_lu_matches_plain_determinant() {
        let k = DMatrix::from_fn(6, 6, |i, j| 0.05 / (1.0 + (i + 2 * j) as f64));
        let d = fredholm_det(&k).unwrap();
        let plain = (DMatrix::identity(6, 6) - &k).determinant();
        assert!((d.det - plain).abs() < 1e-15);
        assert!((d.one_minus - (1.0 - plain)).abs() < 1e-15);
    }

    #[test]
    fn tiny_kernels_keep_relative_accuracy() {
        let k = DMatrix::from_fn(3, 3, |i, j| if i == j { 1e-20 * (i + 1) as f64 } else { 0.0 });
        let d = fredholm_det(&k).unwrap();
        assert!((d.one_minus / 6e-20 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_kernels_fall_back_to_pivoting() {
        let k = DMatrix::from_row_slice(2, 2, &[0.9, 0.3, 0.2, 0.8]);
        let d = fredholm_det(&k).unwrap();
        let expected = 0.1 * 0.2 - 0.3 * 0.2;
        assert!((d.det - expected).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(max_cdf_airy1(1.5, 120), Err(FredholmError::LevelTooLow(_))));
        assert!(matches!(max_cdf_airy1(3.0, 20), Err(FredholmError::TooFewNodes(20))));
        assert!(matches!(gue_cdf_fredholm(9.0, 80), Err(FredholmError::ArgumentOutOfRange(_))));
        let k = DMatrix::from_element(2, 2, f64::NAN);
        assert!(matches!(fredholm_det(&k), Err(FredholmError::NonFinite(..))));
    }

    #[test]
    fn limit_constant() {
        assert!((MAX_TAIL_EXPONENT + 4.0 / 3.0 * std::f64::consts::SQRT_2).abs() < 1e-15);
    }
}
