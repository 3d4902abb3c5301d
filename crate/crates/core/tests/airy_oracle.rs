use airylab_core::special::airy_fn;
use std::f64::consts::PI;

/// Ai and Ai' from the contour integral shifted to Im t = eta, summed by the
/// trapezoid rule (exponentially convergent for this entire, Gaussian-damped integrand).
fn contour_airy(x: f64) -> (f64, f64) {
    let eta = x.max(1.0).sqrt();
    let h = 2e-3;
    let tmax = (60.0 / eta).sqrt() + 1.0;
    let n = (tmax / h) as i64;
    let (mut ai, mut aip) = (0.0, 0.0);
    for k in -n..=n {
        let t = k as f64 * h;
        let amp = (-eta * t * t + eta.powi(3) / 3.0 - x * eta).exp();
        let phase = t.powi(3) / 3.0 - t * eta * eta + x * t;
        let (s, c) = phase.sin_cos();
        ai += amp * c;
        aip += amp * (-eta * c - t * s);
    }
    (ai * h / (2.0 * PI), aip * h / (2.0 * PI))
}

/// RK4 integration of y'' = x y from the origin, where Ai(0), Ai'(0) come from Gamma values.
fn ode_airy_negative(target: f64) -> (f64, f64) {
    use statrs::function::gamma::gamma;
    let mut y = 3f64.powf(-2.0 / 3.0) / gamma(2.0 / 3.0);
    let mut yp = -(3f64.powf(-1.0 / 3.0)) / gamma(1.0 / 3.0);
    let steps = ((-target) / 2e-4).round() as usize;
    let h = target / steps as f64;
    let mut x = 0.0;
    for _ in 0..steps {
        let f = |x: f64, y: f64, yp: f64| (yp, x * y);
        let (k1y, k1p) = f(x, y, yp);
        let (k2y, k2p) = f(x + h / 2.0, y + h / 2.0 * k1y, yp + h / 2.0 * k1p);
        let (k3y, k3p) = f(x + h / 2.0, y + h / 2.0 * k2y, yp + h / 2.0 * k2p);
        let (k4y, k4p) = f(x + h, y + h * k3y, yp + h * k3p);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        yp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        x += h;
    }
    (y, yp)
}

#[test]
fn positive_axis_matches_contour_quadrature() {
    for &x in &[0.0, 0.5, 1.0, 2.0, 3.7, 5.0, 7.9, 8.1, 10.0, 12.5, 15.0, 20.0] {
        let a = airy_fn(x).unwrap();
        let (ai, aip) = contour_airy(x);
        assert!(((a.ai - ai) / ai).abs() < 1e-10, "Ai({x}) = {} vs {ai}", a.ai);
        assert!(((a.ai_prime - aip) / aip).abs() < 1e-10, "Ai'({x}) = {} vs {aip}", a.ai_prime);
    }
}

#[test]
fn beyond_twenty_is_absolutely_tiny_and_accurate() {
    for &x in &[25.0, 30.0, 60.0] {
        let a = airy_fn(x).unwrap();
        let (ai, aip) = contour_airy(x);
        assert!((a.ai - ai).abs() < 1e-14);
        assert!((a.ai_prime - aip).abs() < 1e-14);
        assert!(((a.ai - ai) / ai).abs() < 1e-10);
    }
}

#[test]
fn negative_axis_matches_ode_integration() {
    for &x in &[-0.5, -1.0, -2.3, -5.0, -7.9, -8.1, -10.0, -15.0, -20.0] {
        let a = airy_fn(x).unwrap();
        let (ai, aip) = ode_airy_negative(x);
        // relative to the oscillation envelope, since zeros make pointwise relative error meaningless
        let env = x.abs().max(1.0).powf(-0.25) / PI.sqrt();
        assert!((a.ai - ai).abs() < 1e-10 * env, "Ai({x}) = {} vs {ai}", a.ai);
        assert!((a.ai_prime - aip).abs() < 1e-10 * env * x.abs().max(1.0).sqrt(), "Ai'({x})");
    }
}
