//! Closed-form kernels: the conjugated pair `V`, `W` whose product is the
//! max-of-Airy1 operator on `[0, 1]` at level `M`, and the Airy kernel.

use crate::special::{airy_fn, AIRY_DOMAIN};

const FRAC_1_SQRT_4PI: f64 = 0.282_094_791_773_878_14;

/// `sqrt(1 + z^2)`, the conjugation weight.
pub fn phi(z: f64) -> f64 {
    z.hypot(1.0)
}

/// Probability that a Brownian bridge with diffusion constant 2 from `x` to `y`
/// over unit time reaches `level`.
pub fn bridge_hitting(x: f64, y: f64, level: f64) -> f64 {
    if x <= level && y <= level {
        (-(x - level) * (y - level)).exp()
    } else {
        1.0
    }
}

/// `V(x, z) = phi(z)/sqrt(4 pi) exp(-(x-z)^2/4 - sqrt(2M)(x+z)) P(bridge x -> z hits M)`.
pub fn kernel_v(x: f64, z: f64, level: f64) -> f64 {
    let root = (2.0 * level).sqrt();
    let mut exponent = -0.25 * (x - z) * (x - z) - root * (x + z);
    if x <= level && z <= level {
        exponent -= (x - level) * (z - level);
    }
    phi(z) * FRAC_1_SQRT_4PI * exponent.exp()
}

/// `W(z, y) = exp(-2/3 - (z+y)) Ai(z+y+1) / phi(z) * exp(sqrt(2M)(z+y))`.
pub fn kernel_w(z: f64, y: f64, level: f64) -> f64 {
    let u = z + y;
    if (u + 1.0).abs() > AIRY_DOMAIN {
        // far left the exponential factor is below e^{-200}; far right Ai underflows
        return 0.0;
    }
    let root = (2.0 * level).sqrt();
    let ai = airy_fn(u + 1.0).map(|a| a.ai).unwrap_or(0.0);
    (-2.0 / 3.0 + (root - 1.0) * u).exp() * ai / phi(z)
}

/// `(Ai(x) Ai'(y) - Ai'(x) Ai(y)) / (x - y)`, with the diagonal limit `Ai'(x)^2 - x Ai(x)^2`.
pub fn airy_kernel(x: f64, y: f64) -> f64 {
    let (a, b) = match (airy_fn(x), airy_fn(y)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return 0.0,
    };
    let d = x - y;
    if d.abs() < 1e-7 * (1.0 + x.abs()) {
        // diagonal limit at the midpoint; the O(d^2) correction is below rounding here
        let m = 0.5 * (x + y);
        let c = airy_fn(m).unwrap_or(a);
        c.ai_prime * c.ai_prime - m * c.ai * c.ai
    } else {
        (a.ai * b.ai_prime - a.ai_prime * b.ai) / d
    }
}
