//! Numerical certification of the steepest-descent integral bounds, the
//! quantile-spacing bound for `T`, and the Hilbert-Schmidt bound shapes of the
//! max-of-Airy1 kernels.
//!
//! An inequality with an unspecified constant is checked by computing the
//! left side on a grid, fitting the constant as the envelope of
//! `lhs / shape`, and comparing that constant across refinements. Every
//! left side is also computed by an independent change of variables.

mod hs;
mod regions;

pub use hs::{check_hs_shapes, HsResolution, HsTerm};

use crate::fredholm::FredholmError;
use crate::quadrature::{integrate_log, AdaptiveOptions, QuadError};
use crate::tracy_widom::{Family, TracyWidom, TwError};
use regions::{
    first_quadrant, log_integral, lower_quadrant, quadrant_complement, reflected_mixed_quadrant, second_quadrant,
    upper_quadrant,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const THETA_RANGE: (f64, f64) = (1.0, 6.0);
pub const LEVEL_RANGE: (f64, f64) = (2.0, 8.0);
pub const Z_RANGE: (f64, f64) = (20.0, 1e4);
/// Loosest accepted relative quadrature tolerance.
pub const MAX_QUAD_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("grid is empty or not strictly increasing")]
    BadGrid,
    #[error("grid point {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("quadrature tolerance {0} is looser than {MAX_QUAD_TOL}")]
    LooseTolerance(f64),
    #[error("invalid {name} = {value}")]
    BadParameter { name: &'static str, value: f64 },
    #[error("integral underflowed or overflowed after shifting by e^{log_peak}: {value}")]
    Degenerate { log_peak: f64, value: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Fredholm(#[from] FredholmError),
    #[error(transparent)]
    TracyWidom(#[from] TwError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LemmaId {
    Sd1,
    Sd2,
    Sd3,
    Sd4,
    Sd5,
    Tdiff,
    Hsw,
}

impl LemmaId {
    pub const STEEPEST_DESCENT: [LemmaId; 5] = [LemmaId::Sd1, LemmaId::Sd2, LemmaId::Sd3, LemmaId::Sd4, LemmaId::Sd5];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::Sd1 => "SD1",
            LemmaId::Sd2 => "SD2",
            LemmaId::Sd3 => "SD3",
            LemmaId::Sd4 => "SD4",
            LemmaId::Sd5 => "SD5",
            LemmaId::Tdiff => "TDIFF",
            LemmaId::Hsw => "HSW",
        }
    }
}

/// Whether the bound is `lhs <= C shape` or `lhs >= C shape`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundDirection {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub lemma_id: LemmaId,
    /// `SD1`..`SD5`, `TDIFF`, or the Hilbert-Schmidt term (`W`, `I1`..`I4`, `VW`).
    pub term: String,
    pub direction: BoundDirection,
    pub grid: Vec<f64>,
    pub log_lhs: Vec<f64>,
    /// The bound with its constant factored out.
    pub log_rhs_shape: Vec<f64>,
    /// Relative disagreement between `lhs` and its independent second route.
    pub identity_rel_error: Vec<f64>,
    /// Supremum (upper bounds) or infimum (lower bounds) of `lhs / shape` over the grid.
    pub fitted_constant: f64,
}

impl BoundCheck {
    fn new(
        lemma_id: LemmaId,
        term: impl Into<String>,
        direction: BoundDirection,
        grid: Vec<f64>,
        log_lhs: Vec<f64>,
        log_rhs_shape: Vec<f64>,
        log_identity: &[f64],
    ) -> Self {
        let identity_rel_error = log_lhs.iter().zip(log_identity).map(|(a, b)| (b - a).exp_m1().abs()).collect();
        let ratios = log_lhs.iter().zip(&log_rhs_shape).map(|(l, r)| l - r);
        let log_c = match direction {
            BoundDirection::Upper => ratios.fold(f64::NEG_INFINITY, f64::max),
            BoundDirection::Lower => ratios.fold(f64::INFINITY, f64::min),
        };
        Self {
            lemma_id,
            term: term.into(),
            direction,
            grid,
            log_lhs,
            log_rhs_shape,
            identity_rel_error,
            fitted_constant: log_c.exp(),
        }
    }

    /// `log(lhs) - log(shape)` per grid point.
    pub fn log_ratios(&self) -> Vec<f64> {
        self.log_lhs.iter().zip(&self.log_rhs_shape).map(|(l, r)| l - r).collect()
    }

    pub fn max_identity_error(&self) -> f64 {
        self.identity_rel_error.iter().copied().fold(0.0, f64::max)
    }

    /// The fitted constant is finite and positive and the bound holds with it at every point.
    pub fn bound_holds(&self) -> bool {
        let c = self.fitted_constant.ln();
        c.is_finite()
            && self.log_ratios().iter().all(|r| match self.direction {
                BoundDirection::Upper => *r <= c + 1e-12,
                BoundDirection::Lower => *r >= c - 1e-12,
            })
    }

    /// Relative change of the fitted constant against a refined computation.
    pub fn constant_drift(&self, refined: &BoundCheck) -> f64 {
        (refined.fitted_constant / self.fitted_constant - 1.0).abs()
    }
}

fn check_grid(grid: &[f64], (lo, hi): (f64, f64)) -> Result<(), BoundError> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(BoundError::BadGrid);
    }
    match grid.iter().find(|&&v| !(lo..=hi).contains(&v)) {
        Some(&value) => Err(BoundError::OutOfRange { value, lo, hi }),
        None => Ok(()),
    }
}

fn check_tol(tol: f64) -> Result<(), BoundError> {
    if !(tol > 0.0 && tol <= MAX_QUAD_TOL) {
        return Err(BoundError::LooseTolerance(tol));
    }
    Ok(())
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

/// `log int_0^inf exp(2 theta y - 4/3 y^{3/2}) dy`, split at the peak `y = theta^2`.
fn sd1_direct(theta: f64, tol: f64) -> Result<f64, BoundError> {
    let opts = AdaptiveOptions { rel_tol: tol, ..Default::default() };
    let upper = (1.5 * theta + 8.0).powi(2);
    let peak = 2.0 / 3.0 * theta.powi(3);
    let r = integrate_log(|y| 2.0 * theta * y - 4.0 / 3.0 * y.powf(1.5), 0.0, upper, &[theta * theta], peak, opts)?;
    Ok(r.log_value)
}

/// The same after `y = theta^2 u`: `theta^2 int_0^inf exp(theta^3 h(u)) du` with
/// `h(u) = 2u - 4/3 u^{3/2}` maximal at `u = 1`, `h(1) = 2/3`.
fn sd1_substituted(theta: f64, tol: f64) -> Result<f64, BoundError> {
    let opts = AdaptiveOptions { rel_tol: tol, ..Default::default() };
    let cube = theta.powi(3);
    let upper = (1.5 + 8.0 / theta).powi(2);
    let h = |u: f64| 2.0 * u - 4.0 / 3.0 * u.powf(1.5);
    let r = integrate_log(|u| cube * h(u), 0.0, upper, &[1.0], 2.0 / 3.0 * cube, opts)?;
    Ok(2.0 * theta.ln() + r.log_value)
}

/// `log int_{(-inf,0]^2} w(y) exp(-(x+y)^2/2 - 2 theta(x+y))`.
fn lower_quadrant_direct(theta: f64, weight: &dyn Fn(f64) -> f64, tol: f64) -> Result<f64, BoundError> {
    let log_f = |x: f64, y: f64| -0.5 * (x + y).powi(2) - 2.0 * theta * (x + y);
    log_integral(&lower_quadrant(0.0, theta, 1.0), &log_f, &|_, y| weight(y), 2.0 * theta * theta, tol)
}

/// The lower-quadrant integral after `(x, y) -> -theta (x, y)`:
/// `theta^2 int_{[0,inf)^2} w(-theta y) exp(theta^2(-(x+y)^2/2 + 2(x+y)))`.
pub(crate) fn lower_quadrant_substituted(
    theta: f64,
    weight: &dyn Fn(f64) -> f64,
    tol: f64,
) -> Result<f64, BoundError> {
    let kappa = theta * theta;
    let log_f = |x: f64, y: f64| kappa * (-0.5 * (x + y).powi(2) + 2.0 * (x + y));
    let w = |_: f64, y: f64| weight(-theta * y);
    Ok(kappa.ln() + log_integral(&upper_quadrant(1.0, kappa), &log_f, &w, 2.0 * kappa, tol)?)
}

/// `log int_{R^2 \ (-inf,0]^2} w(y) exp(-(x-y)^2/2 - 2 theta(x+y))`.
fn complement_direct(theta: f64, weight: &dyn Fn(f64) -> f64, tol: f64) -> Result<f64, BoundError> {
    let log_f = |x: f64, y: f64| -0.5 * (x - y).powi(2) - 2.0 * theta * (x + y);
    log_integral(&quadrant_complement(0.0, theta, 1.0), &log_f, &|_, y| weight(y), 2.0 * theta * theta, tol)
}

/// The complement integral after `(x, y) -> theta (x, y)`, as the first quadrant,
/// the fourth quadrant reflected by `y -> -y`, and the second quadrant.
pub(crate) fn complement_substituted(
    theta: f64,
    weight: &dyn Fn(f64) -> f64,
    tol: f64,
) -> Result<f64, BoundError> {
    let kappa = theta * theta;
    let peak = 2.0 * kappa;
    let plain = |x: f64, y: f64| kappa * (-0.5 * (x - y).powi(2) - 2.0 * (x + y));
    let reflected = |x: f64, y: f64| kappa * (-0.5 * (x + y).powi(2) - 2.0 * (x - y));
    let up = |_: f64, y: f64| weight(theta * y);
    let down = |_: f64, y: f64| weight(-theta * y);
    let parts = [
        log_integral(&[first_quadrant(0.0, 1.0, kappa)], &plain, &up, peak, tol)?,
        log_integral(&[reflected_mixed_quadrant(1.0, kappa)], &reflected, &down, peak, tol)?,
        log_integral(&[second_quadrant(0.0, 1.0, kappa)], &plain, &up, peak, tol)?,
    ];
    Ok(kappa.ln() + log_sum_exp(&parts))
}

fn sd_log_shape(lemma: LemmaId, theta: f64) -> f64 {
    let ln = theta.ln();
    match lemma {
        LemmaId::Sd1 => 2.0 * ln + 2.0 / 3.0 * theta.powi(3),
        LemmaId::Sd2 => 4.0 * theta * theta,
        LemmaId::Sd3 => 2.0 * ln + 4.0 * theta * theta,
        LemmaId::Sd4 => ln + 2.0 * theta * theta,
        LemmaId::Sd5 => 3.0 * ln + 2.0 * theta * theta,
        LemmaId::Tdiff | LemmaId::Hsw => f64::NAN,
    }
}

/// Checks one steepest-descent bound on `theta_grid`, computing each left side
/// directly and through the scaling substitution `theta^2` (or `theta^4` with a
/// `y^2` weight) times an integral with exponent proportional to `theta^2` or `theta^3`.
pub fn check_sd(lemma: LemmaId, theta_grid: &[f64], quad_tol: f64) -> Result<BoundCheck, BoundError> {
    if !LemmaId::STEEPEST_DESCENT.contains(&lemma) {
        return Err(BoundError::BadParameter { name: "lemma", value: f64::NAN });
    }
    check_grid(theta_grid, THETA_RANGE)?;
    check_tol(quad_tol)?;
    let unit = |_: f64| 1.0;
    let square = |y: f64| y * y;
    let mut log_lhs = Vec::with_capacity(theta_grid.len());
    let mut log_identity = Vec::with_capacity(theta_grid.len());
    for &theta in theta_grid {
        let (direct, identity) = match lemma {
            LemmaId::Sd1 => (sd1_direct(theta, quad_tol)?, sd1_substituted(theta, quad_tol)?),
            LemmaId::Sd2 => {
                (lower_quadrant_direct(theta, &unit, quad_tol)?, lower_quadrant_substituted(theta, &unit, quad_tol)?)
            }
            LemmaId::Sd3 => (
                lower_quadrant_direct(theta, &square, quad_tol)?,
                lower_quadrant_substituted(theta, &square, quad_tol)?,
            ),
            LemmaId::Sd4 => (complement_direct(theta, &unit, quad_tol)?, complement_substituted(theta, &unit, quad_tol)?),
            LemmaId::Sd5 => {
                (complement_direct(theta, &square, quad_tol)?, complement_substituted(theta, &square, quad_tol)?)
            }
            LemmaId::Tdiff | LemmaId::Hsw => unreachable!("filtered above"),
        };
        log_lhs.push(direct);
        log_identity.push(identity);
    }
    let shape = theta_grid.iter().map(|&t| sd_log_shape(lemma, t)).collect();
    Ok(BoundCheck::new(lemma, lemma.name(), BoundDirection::Upper, theta_grid.to_vec(), log_lhs, shape, &log_identity))
}

/// Secant slopes of `log(lhs)` against `theta^3` between consecutive grid points,
/// which approach the peak value `h(1) = 2/3` for SD1.
pub fn log_slope_in_cube(check: &BoundCheck) -> Vec<f64> {
    check
        .grid
        .windows(2)
        .zip(check.log_lhs.windows(2))
        .map(|(t, l)| (l[1] - l[0]) / (t[1].powi(3) - t[0].powi(3)))
        .collect()
}

/// `lhs / (sqrt(theta) e^{2/3 theta^3})` for SD1, the ratio to the Laplace
/// asymptotic, which tends to `sqrt(2 pi)`.
pub fn sd1_laplace_ratio(check: &BoundCheck) -> Vec<f64> {
    check
        .grid
        .iter()
        .zip(&check.log_lhs)
        .map(|(t, l)| (l - 0.5 * t.ln() - 2.0 / 3.0 * t.powi(3)).exp())
        .collect()
}

/// Exponent of the spacing shape `z^{-(2+6 eps)/(2+3 eps)}`.
pub fn tdiff_exponent(eps: f64) -> f64 {
    (2.0 + 6.0 * eps) / (2.0 + 3.0 * eps)
}

/// Checks `T(lambda/z) - T(lambda/(z-1)) >= C z^{-(2+6 eps)/(2+3 eps)}` on `z_grid`.
///
/// The second route is the derivative identity
/// `d/dz T(lambda/z) = lambda / (z^2 F1'(T(lambda/z)))` against a central difference.
pub fn check_tdiff(tw: &TracyWidom, lambda: f64, eps: f64, z_grid: &[f64]) -> Result<BoundCheck, BoundError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(BoundError::BadParameter { name: "lambda", value: lambda });
    }
    if !(eps > 0.0 && eps < 2.0 / 3.0) {
        return Err(BoundError::BadParameter { name: "eps", value: eps });
    }
    check_grid(z_grid, Z_RANGE)?;
    if z_grid[0] - 1.0 <= lambda {
        return Err(BoundError::BadParameter { name: "lambda", value: lambda });
    }
    let exponent = tdiff_exponent(eps);
    let t_of = |z: f64| tw.quantile_t(lambda / z);
    let mut log_lhs = Vec::with_capacity(z_grid.len());
    let mut identity_rel_error = Vec::with_capacity(z_grid.len());
    for &z in z_grid {
        let t = t_of(z)?;
        log_lhs.push((t - t_of(z - 1.0)?).ln());
        let h = 1e-3 * z;
        let difference = (t_of(z + h)? - t_of(z - h)?) / (2.0 * h);
        let closed = lambda / (z * z * tw.pdf(Family::Goe, t)?);
        identity_rel_error.push((difference / closed - 1.0).abs());
    }
    let shape = z_grid.iter().map(|z| -exponent * z.ln()).collect();
    let mut check = BoundCheck::new(
        LemmaId::Tdiff,
        "TDIFF",
        BoundDirection::Lower,
        z_grid.to_vec(),
        log_lhs,
        shape,
        &[],
    );
    check.identity_rel_error = identity_rel_error;
    Ok(check)
}

/// Smallest grid point from which the spacing bound holds with `constant` at
/// every larger grid point; `None` if it fails at the last point.
pub fn tdiff_onset(check: &BoundCheck, constant: f64) -> Option<f64> {
    let log_c = constant.ln();
    let ratios = check.log_ratios();
    let mut onset = None;
    for (z, r) in check.grid.iter().zip(&ratios).rev() {
        if *r < log_c - 1e-12 {
            break;
        }
        onset = Some(*z);
    }
    onset
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitted_constant_envelopes_the_ratios() {
        let c = BoundCheck::new(
            LemmaId::Sd2,
            "SD2",
            BoundDirection::Upper,
            vec![1.0, 2.0],
            vec![1.0, 0.5],
            vec![0.0, 0.0],
            &[1.0, 0.5],
        );
        assert!((c.fitted_constant - 1f64.exp()).abs() < 1e-12);
        assert!(c.bound_holds());
        assert_eq!(c.max_identity_error(), 0.0);
        let low = BoundCheck { direction: BoundDirection::Lower, fitted_constant: 0.5f64.exp(), ..c };
        assert!(low.bound_holds());
    }

    #[test]
    fn onset_scans_from_the_right() {
        let c = BoundCheck::new(
            LemmaId::Tdiff,
            "TDIFF",
            BoundDirection::Lower,
            vec![1.0, 2.0, 3.0, 4.0],
            vec![0.0, -2.0, 0.5, 0.4],
            vec![0.0; 4],
            &[],
        );
        assert_eq!(tdiff_onset(&c, 1.0), Some(3.0));
        assert_eq!(tdiff_onset(&c, 2.0), None);
    }

    #[test]
    fn grids_and_tolerances_are_validated() {
        assert!(matches!(check_sd(LemmaId::Sd1, &[0.5], 1e-9), Err(BoundError::OutOfRange { .. })));
        assert!(matches!(check_sd(LemmaId::Sd1, &[2.0, 1.0], 1e-9), Err(BoundError::BadGrid)));
        assert!(matches!(check_sd(LemmaId::Sd1, &[2.0], 1e-6), Err(BoundError::LooseTolerance(_))));
        assert!(matches!(check_sd(LemmaId::Tdiff, &[2.0], 1e-9), Err(BoundError::BadParameter { .. })));
    }

    #[test]
    fn sd1_routes_agree_at_theta_one() {
        let c = check_sd(LemmaId::Sd1, &[1.0], 1e-10).unwrap();
        assert!(c.max_identity_error() < 1e-9, "{:?}", c.identity_rel_error);
    }
}
