//! Right-tail accumulators where `q` is indistinguishable from `Ai`.
//!
//! For `s >= 8` the Hastings-McLeod solution differs from `Ai(s)` by a relative
//! amount of order `Ai(s)^2 < 1e-14`, so `R`, `int q` and `int R` are Airy integrals.

use super::TwError;
use crate::quadrature::{integrate_adaptive, AdaptiveOptions};
use crate::special::airy_fn;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailValues {
    pub q: f64,
    pub q_prime: f64,
    /// `int_s^inf Ai^2 = Ai'(s)^2 - s Ai(s)^2`
    pub r: f64,
    /// `int_s^inf Ai`
    pub int_q: f64,
    /// `int_s^inf (r - s) Ai(r)^2 dr`
    pub int_r: f64,
}

pub fn airy_tail(s: f64) -> Result<TailValues, TwError> {
    let a = airy_fn(s)?;
    let r = (a.ai_prime * a.ai_prime - s * a.ai * a.ai).max(0.0);
    if a.ai == 0.0 {
        return Ok(TailValues { q: 0.0, q_prime: 0.0, r: 0.0, int_q: 0.0, int_r: 0.0 });
    }
    // Ai decays like exp(-sqrt(s) x) past s; 50/sqrt(s) e-folds leave < 1e-21
    let upper = s + 50.0 / s.max(1.0).sqrt();
    let opts = AdaptiveOptions { rel_tol: 1e-13, abs_tol: 0.0, max_intervals: 400 };
    let ai = |x: f64| airy_fn(x).map(|v| v.ai).unwrap_or(f64::NAN);
    let int_q = integrate_adaptive(ai, s, upper, &[], opts)?.value;
    let int_r = integrate_adaptive(
        |x| {
            let v = ai(x);
            (x - s) * v * v
        },
        s,
        upper,
        &[],
        opts,
    )?
    .value;
    Ok(TailValues { q: a.ai, q_prime: a.ai_prime, r, int_q, int_r })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_r_matches_quadrature() {
        for &s in &[2.0, 8.0, 10.0, 14.0] {
            let t = airy_tail(s).unwrap();
            let upper = s + 50.0 / f64::sqrt(s);
            let quad = integrate_adaptive(
                |x| airy_fn(x).unwrap().ai.powi(2),
                s,
                upper,
                &[],
                AdaptiveOptions { rel_tol: 1e-13, ..Default::default() },
            )
            .unwrap()
            .value;
            assert!(((t.r - quad) / quad).abs() < 1e-11, "s={s}");
        }
    }

    #[test]
    fn int_r_matches_closed_form() {
        // int_s^inf R = (2 s^2 Ai^2 - 2 s Ai'^2 - Ai Ai') / 3, accurate for moderate s
        for &s in &[0.5, 2.0, 4.0] {
            let a = airy_fn(s).unwrap();
            let closed = (2.0 * s * s * a.ai * a.ai - 2.0 * s * a.ai_prime * a.ai_prime - a.ai * a.ai_prime) / 3.0;
            let t = airy_tail(s).unwrap();
            assert!(((t.int_r - closed) / closed).abs() < 1e-10, "s={s}");
        }
    }

    #[test]
    fn far_tail_is_zero_not_nan() {
        let t = airy_tail(150.0).unwrap();
        assert!(t.int_q >= 0.0 && t.int_r >= 0.0 && t.r >= 0.0);
        assert!(t.int_q < 1e-200);
    }
}
