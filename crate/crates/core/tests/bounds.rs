//! The bound checks against closed forms obtained by rotating to `u = x + y`,
//! `v = x - y` and integrating out the Gaussian direction exactly.

use airylab_core::bounds::{
    check_hs_shapes, check_sd, check_tdiff, log_slope_in_cube, sd1_laplace_ratio, tdiff_onset, BoundDirection,
    HsResolution, HsTerm, LemmaId,
};
use airylab_core::fredholm::hs_norm_v;
use airylab_core::quadrature::{integrate_adaptive, AdaptiveOptions};
use airylab_core::tracy_widom::TracyWidom;
use statrs::function::erf::erfc;
use std::f64::consts::{PI, SQRT_2};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

fn normal_cdf(c: f64) -> f64 {
    0.5 * erfc(-c / SQRT_2)
}

fn upper_tail(s: f64) -> f64 {
    0.5 * erfc(s / SQRT_2)
}

fn theta_grid(step: f64) -> Vec<f64> {
    let n = (5.0 / step).round() as usize;
    (0..=n).map(|k| 1.0 + step * k as f64).collect()
}

/// Quadrant integrals reduce to `int_0^inf p(u) e^{-u^2/2 + 2 theta u} du` with
/// `p(u) = u` (length of the segment `x + y = -u`) or `u^3/3` (its `y^2` moment).
/// With `w = u - c`, `c = 2 theta`, these are truncated Gaussian moments.
fn quadrant_closed_form(theta: f64, squared: bool) -> f64 {
    let c = 2.0 * theta;
    let g = (-0.5 * c * c).exp();
    let m0 = SQRT_2PI * normal_cdf(c);
    let m1 = g;
    let m2 = -c * g + m0;
    let m3 = (c * c + 2.0) * g;
    let moments = if squared {
        (m3 + 3.0 * c * m2 + 3.0 * c * c * m1 + c.powi(3) * m0) / 3.0
    } else {
        m1 + c * m0
    };
    moments * (0.5 * c * c).exp()
}

/// Complement integrals: the half-plane `u >= 0` in closed form plus a one-dimensional
/// integral over `s = -u > 0` of the Gaussian tails `|v| > s`.
fn complement_closed_form(theta: f64, squared: bool) -> f64 {
    let opts = AdaptiveOptions { rel_tol: 1e-13, ..Default::default() };
    let peak = 2.0 * theta * theta;
    let (half_plane, tail_weight): (f64, Box<dyn Fn(f64) -> f64>) = if squared {
        (
            SQRT_2PI / 8.0 * (1.0 / (4.0 * theta.powi(3)) + 1.0 / (2.0 * theta)),
            Box::new(|s: f64| 0.25 * (SQRT_2PI * (s * s + 1.0) * upper_tail(s) + s * (-0.5 * s * s).exp())),
        )
    } else {
        (SQRT_2PI / (4.0 * theta), Box::new(|s: f64| SQRT_2PI * upper_tail(s)))
    };
    let tail = integrate_adaptive(
        |s| (2.0 * theta * s - peak).exp() * tail_weight(s),
        0.0,
        2.0 * theta + 30.0,
        &[2.0 * theta],
        opts,
    )
    .unwrap()
    .value;
    half_plane + peak.exp() * tail
}

/// Composite Simpson on `[0, (1.5 theta + 8)^2]`, shifted by the peak.
fn sd1_simpson(theta: f64) -> f64 {
    let peak = 2.0 / 3.0 * theta.powi(3);
    let upper = (1.5 * theta + 8.0).powi(2);
    let n = 400_000;
    let h = upper / n as f64;
    let f = |y: f64| (2.0 * theta * y - 4.0 / 3.0 * y.powf(1.5) - peak).exp();
    let mut sum = f(0.0) + f(upper);
    for k in 1..n {
        sum += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    peak + (sum * h / 3.0).ln()
}

#[test]
fn sd_integrals_match_rotated_closed_forms() {
    let grid = [1.0, 2.0, 3.5, 6.0];
    for lemma in LemmaId::STEEPEST_DESCENT {
        let check = check_sd(lemma, &grid, 1e-10).unwrap();
        assert!(check.max_identity_error() < 1e-6, "{lemma:?}: {:?}", check.identity_rel_error);
        for (&theta, &log_lhs) in grid.iter().zip(&check.log_lhs) {
            let oracle = match lemma {
                LemmaId::Sd1 => sd1_simpson(theta),
                LemmaId::Sd2 => quadrant_closed_form(theta, false).ln(),
                LemmaId::Sd3 => quadrant_closed_form(theta, true).ln(),
                LemmaId::Sd4 => complement_closed_form(theta, false).ln(),
                LemmaId::Sd5 => complement_closed_form(theta, true).ln(),
                _ => unreachable!(),
            };
            assert!((log_lhs - oracle).exp_m1().abs() < 1e-8, "{lemma:?} theta={theta}: {log_lhs} vs {oracle}");
        }
    }
}

#[test]
fn sd_constants_are_stable_under_refinement() {
    for lemma in LemmaId::STEEPEST_DESCENT {
        let coarse = check_sd(lemma, &theta_grid(0.25), 1e-9).unwrap();
        let fine = check_sd(lemma, &theta_grid(0.125), 1e-11).unwrap();
        assert!(coarse.bound_holds() && fine.bound_holds());
        assert!(coarse.fitted_constant > 0.0);
        assert!(coarse.constant_drift(&fine) < 0.05, "{lemma:?}: {} vs {}", coarse.fitted_constant, fine.fitted_constant);
        assert!(coarse.log_ratios().iter().all(|r| r.is_finite()));
    }
}

#[test]
fn sd1_log_slope_approaches_the_peak_value() {
    let check = check_sd(LemmaId::Sd1, &theta_grid(0.25), 1e-10).unwrap();
    let slopes = log_slope_in_cube(&check);
    let excess: Vec<f64> = slopes.iter().map(|s| s - 2.0 / 3.0).collect();
    assert!(excess.iter().all(|&e| e > 0.0));
    assert!(excess.windows(2).all(|w| w[1] < w[0]));
    assert!(excess.last().unwrap() < &1e-3, "{slopes:?}");
}

#[test]
fn sd1_ratio_to_the_stated_shape_decays_like_theta_to_minus_three_halves() {
    // lhs ~ sqrt(2 pi theta) e^{2/3 theta^3}, so lhs / (theta^2 e^{2/3 theta^3}) -> 0
    let check = check_sd(LemmaId::Sd1, &theta_grid(0.25), 1e-10).unwrap();
    let ratios = check.log_ratios();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]));
    let laplace = sd1_laplace_ratio(&check);
    assert!((laplace.last().unwrap() / SQRT_2PI - 1.0).abs() < 1e-3, "{laplace:?}");
}

#[test]
fn hs_terms_match_closed_forms_and_the_tensor_norm_of_v() {
    let grid = [2.0, 4.0, 8.0];
    let checks = check_hs_shapes(&grid, HsResolution::default()).unwrap();
    assert_eq!(checks.len(), HsTerm::ALL.len());
    for check in &checks {
        assert!(check.max_identity_error() < 1e-6, "{}: {:?}", check.term, check.identity_rel_error);
        assert!(check.bound_holds() && check.fitted_constant > 0.0);
    }
    let term = |name: &str| checks.iter().find(|c| c.term == name).unwrap();
    for (k, &m) in grid.iter().enumerate() {
        let theta = (2.0 * m).sqrt();
        let prefactor = -4.0 * theta * m - (4.0 * PI).ln();
        let i1 = prefactor + quadrant_closed_form(theta, false).ln();
        let i3 = prefactor + complement_closed_form(theta, false).ln();
        assert!((term("I1").log_lhs[k] - i1).abs() < 1e-8);
        assert!((term("I3").log_lhs[k] - i3).abs() < 1e-8);
        let v_squared: f64 = ["I1", "I2", "I3", "I4"].iter().map(|t| term(t).log_lhs[k].exp()).sum();
        let tensor = hs_norm_v(m, 120).unwrap().powi(2);
        assert!((v_squared / tensor - 1.0).abs() < 1e-6, "M={m}: {v_squared} vs {tensor}");
    }
}

#[test]
fn hs_constants_are_stable_under_node_doubling() {
    let grid: Vec<f64> = (0..=12).map(|k| 2.0 + 0.5 * k as f64).collect();
    let base = check_hs_shapes(&grid, HsResolution::default()).unwrap();
    let refined = check_hs_shapes(&grid, HsResolution::default().refined()).unwrap();
    for (a, b) in base.iter().zip(&refined) {
        assert_eq!(a.term, b.term);
        assert!(a.constant_drift(b) < 0.02, "{}: {} vs {}", a.term, a.fitted_constant, b.fitted_constant);
        assert!(a.log_ratios().iter().all(|r| r.is_finite()));
    }
}

#[test]
fn quantile_spacing_and_its_derivative_identity() {
    let tw = TracyWidom::shared().unwrap();
    let at_100 = check_tdiff(tw, 1.0, 0.1, &[100.0]).unwrap();
    assert!(at_100.log_lhs[0].is_finite());
    assert_eq!(at_100.direction, BoundDirection::Lower);

    let density = check_tdiff(tw, 1.0, 0.1, &[50.0, 100.0, 500.0]).unwrap();
    assert!(density.identity_rel_error.iter().all(|&e| e < 0.01), "{:?}", density.identity_rel_error);

    let log_grid = |lo: f64, hi: f64| -> Vec<f64> { (0..=20).map(|k| lo * (hi / lo).powf(k as f64 / 20.0)).collect() };
    let short = check_tdiff(tw, 1.0, 0.1, &log_grid(20.0, 1e3)).unwrap();
    let long = check_tdiff(tw, 1.0, 0.1, &log_grid(1e2, 1e4)).unwrap();
    assert!(short.bound_holds() && long.bound_holds());
    assert!(short.constant_drift(&long) < 0.05, "{} vs {}", short.fitted_constant, long.fitted_constant);
    // with the constant from the upper decade the bound holds from the start of that decade on
    assert!(tdiff_onset(&long, long.fitted_constant) == Some(long.grid[0]));
}
