//! Nested adaptive quadrature over the unbounded planar regions that appear in
//! the Gaussian-ridge integrals: quadrants and quadrant complements, truncated
//! where the integrand has fallen far below its peak.

use super::BoundError;
use crate::quadrature::{integrate_adaptive, AdaptiveOptions, QuadError};
use std::cell::RefCell;

/// Half-width of a ridge window, in units of the Gaussian width `1/sqrt(kappa)`.
/// At 14 widths the exponent is 98 below the ridge.
const RIDGE_WIDTHS: f64 = 14.0;
/// Decay budget along the ridge direction before truncation.
const DECAY_BUDGET: f64 = 80.0;

/// Inner integration window `[lo, hi]` with a breakpoint at the ridge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Window {
    pub lo: f64,
    pub hi: f64,
    pub ridge: f64,
}

impl Window {
    fn clipped(ridge: f64, half: f64, lo: f64, hi: f64) -> Option<Self> {
        let (a, b) = ((ridge - half).max(lo), (ridge + half).min(hi));
        (b > a).then_some(Self { lo: a, hi: b, ridge })
    }
}

/// One iterated integral `int dx int dy weight(x, y) exp(log_f(x, y) - log_peak)`.
pub(crate) struct Piece<'a> {
    pub outer: (f64, f64),
    pub outer_breaks: Vec<f64>,
    pub inner: Box<dyn Fn(f64) -> Option<Window> + 'a>,
    /// The outer variable is `y` and the inner one `x`.
    pub transposed: bool,
}

/// Integrates `weight * exp(log_f - log_peak)` over the union of `pieces` and
/// returns the logarithm of the integral.
pub(crate) fn log_integral(
    pieces: &[Piece<'_>],
    log_f: &dyn Fn(f64, f64) -> f64,
    weight: &dyn Fn(f64, f64) -> f64,
    log_peak: f64,
    tol: f64,
) -> Result<f64, BoundError> {
    let inner_opts = AdaptiveOptions { rel_tol: 0.1 * tol, abs_tol: 0.0, max_intervals: 2000 };
    let outer_opts = AdaptiveOptions { rel_tol: tol, abs_tol: 0.0, max_intervals: 2000 };
    let failure: RefCell<Option<QuadError>> = RefCell::new(None);
    let mut total = 0.0;
    for piece in pieces {
        let row = |x: f64| -> f64 {
            let Some(w) = (piece.inner)(x) else {
                return 0.0;
            };
            let g = |y: f64| {
                let (a, b) = if piece.transposed { (y, x) } else { (x, y) };
                weight(a, b) * (log_f(a, b) - log_peak).exp()
            };
            match integrate_adaptive(g, w.lo, w.hi, &[w.ridge], inner_opts) {
                Ok(r) => r.value,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            }
        };
        let result = integrate_adaptive(row, piece.outer.0, piece.outer.1, &piece.outer_breaks, outer_opts);
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e.into());
        }
        total += result?.value;
    }
    if !(total > 0.0 && total.is_finite()) {
        return Err(BoundError::Degenerate { log_peak, value: total });
    }
    Ok(log_peak + total.ln())
}

/// `(-inf, c]^2` for integrands peaked on the line `x + y = 2c - 2 beta`
/// with width `1/sqrt(kappa)` across it.
pub(crate) fn lower_quadrant<'a>(corner: f64, beta: f64, kappa: f64) -> Vec<Piece<'a>> {
    let half = RIDGE_WIDTHS / kappa.sqrt();
    let reach = 2.0 * beta + half;
    vec![Piece {
        outer: (corner - reach, corner),
        outer_breaks: vec![corner - 2.0 * beta],
        transposed: false,
        inner: Box::new(move |x| Window::clipped(2.0 * corner - 2.0 * beta - x, half, corner - reach, corner)),
    }]
}

/// `[0, inf)^2` for integrands peaked on the line `x + y = 2 beta`.
pub(crate) fn upper_quadrant<'a>(beta: f64, kappa: f64) -> Vec<Piece<'a>> {
    let half = RIDGE_WIDTHS / kappa.sqrt();
    let reach = 2.0 * beta + half;
    vec![Piece {
        outer: (0.0, reach),
        outer_breaks: vec![2.0 * beta],
        transposed: false,
        inner: Box::new(move |x| Window::clipped(2.0 * beta - x, half, 0.0, reach)),
    }]
}

/// Distance along the ridge after which `exp(kappa(-(x-y)^2/2 - 2 beta(x+y)))`
/// has decayed by `DECAY_BUDGET` from its peak `2 kappa beta^2`.
fn ridge_length(beta: f64, kappa: f64) -> f64 {
    DECAY_BUDGET / (4.0 * kappa * beta)
}

/// `x, y >= c`, for `exp(kappa(-(x-y)^2/2 - 2 beta(x+y)))` in coordinates
/// shifted by `c`; the mass sits at the corner.
pub(crate) fn first_quadrant<'a>(corner: f64, beta: f64, kappa: f64) -> Piece<'a> {
    let half = RIDGE_WIDTHS / kappa.sqrt();
    let c = corner;
    Piece {
        outer: (c, c + ridge_length(beta, kappa)),
        outer_breaks: vec![],
        transposed: false,
        inner: Box::new(move |x| {
            let ridge = (x - 2.0 * beta).max(c);
            Window::clipped(ridge, half, c, f64::INFINITY).map(|w| Window { lo: c, ..w })
        }),
    }
}

/// `x >= c, y <= c` for the same integrand, peaked at `(c, c - 2 beta)`.
pub(crate) fn fourth_quadrant<'a>(corner: f64, beta: f64, kappa: f64) -> Piece<'a> {
    let half = RIDGE_WIDTHS / kappa.sqrt();
    let c = corner;
    Piece {
        outer: (c, c + ridge_length(beta, kappa)),
        outer_breaks: vec![],
        transposed: false,
        inner: Box::new(move |x| Window::clipped(x - 2.0 * beta, half, f64::NEG_INFINITY, c)),
    }
}

/// `x <= c, y >= c` for the same integrand, peaked at `(c - 2 beta, c)`.
pub(crate) fn second_quadrant<'a>(corner: f64, beta: f64, kappa: f64) -> Piece<'a> {
    Piece { transposed: true, ..fourth_quadrant(corner, beta, kappa) }
}

/// `R^2 \ (-inf, c]^2` as the union of the first, fourth and second quadrants at `c`.
pub(crate) fn quadrant_complement<'a>(corner: f64, beta: f64, kappa: f64) -> Vec<Piece<'a>> {
    vec![
        first_quadrant(corner, beta, kappa),
        fourth_quadrant(corner, beta, kappa),
        second_quadrant(corner, beta, kappa),
    ]
}

/// The mixed quadrant `x >= 0, y <= 0` reflected to `x, y >= 0`, i.e. the region
/// of `exp(kappa(-(x+y)^2/2 - 2 beta(x-y)))`, peaked at `x = 0, y = 2 beta`.
pub(crate) fn reflected_mixed_quadrant<'a>(beta: f64, kappa: f64) -> Piece<'a> {
    let half = RIDGE_WIDTHS / kappa.sqrt();
    Piece {
        outer: (0.0, ridge_length(beta, kappa)),
        outer_breaks: vec![],
        transposed: false,
        inner: Box::new(move |x| {
            let ridge = (2.0 * beta - x).max(0.0);
            Window::clipped(ridge, half, 0.0, f64::INFINITY)
        }),
    }
}
