//! Airy function `Ai` and its derivative on `[-200, 200]`.
//!
//! Inside `|x| <= SERIES_LIMIT` the Maclaurin series is summed in double-double
//! arithmetic, which absorbs the cancellation between the two power series on
//! the positive axis. Outside, the classical asymptotic expansions in
//! `zeta = (2/3)|x|^{3/2}` are truncated at their smallest term.

use super::ddouble::DoubleDouble as DD;
use super::SpecialError;

/// Largest `|x|` accepted by [`airy_fn`].
pub const AIRY_DOMAIN: f64 = 200.0;

/// Branch point between the series and the asymptotic expansions.
pub const SERIES_LIMIT: f64 = 8.0;

// Ai(0) and -Ai'(0) to double-double precision.
const AI0: DD = DD::new(0.3550280538878172, 2.05233632436212e-17);
const MINUS_AIP0: DD = DD::new(0.2588194037928068, -2.522243111610832e-17);

const FRAC_1_SQRT_PI: f64 = 0.5641895835477563;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Airy {
    pub ai: f64,
    pub ai_prime: f64,
}

/// `Ai(s)` and `Ai'(s)`.
///
/// Values below the smallest subnormal underflow to zero; `|s| > 200` is rejected.
pub fn airy_fn(s: f64) -> Result<Airy, SpecialError> {
    if !s.is_finite() {
        return Err(SpecialError::NotFinite);
    }
    if s.abs() > AIRY_DOMAIN {
        return Err(SpecialError::OutOfRange { s, limit: AIRY_DOMAIN });
    }
    Ok(if s.abs() <= SERIES_LIMIT {
        airy_series(s)
    } else {
        airy_asymptotic(s)
    })
}

/// Maclaurin branch, usable on its own for overlap checks. Loses accuracy past `|x| ~ 10`.
pub fn airy_series(x: f64) -> Airy {
    let (ai, aip) = airy_series_dd(x);
    Airy { ai: ai.to_f64(), ai_prime: aip.to_f64() }
}

/// `(Ai, Ai')` in double-double from the two power series
/// `f = sum a_k x^{3k}` and `g = sum b_k x^{3k+1}` with `Ai = Ai(0) f + Ai'(0) g`.
fn airy_series_dd(x: f64) -> (DD, DD) {
    let xd = DD::from(x);
    let x2 = DD::mul_f64_f64(x, x);
    let x3 = x2 * x;

    // f and f'
    let mut f = DD::ONE;
    let mut fp = DD::ZERO;
    // g and g'
    let mut g = xd;
    let mut gp = DD::ONE;

    let mut a = DD::ONE; // a_k x^{3k}
    let mut b = xd; // b_k x^{3k+1}
    let mut k = 1u32;
    loop {
        let k3 = 3.0 * k as f64;
        a = a * x3 / (k3 * (k3 - 1.0));
        b = b * x3 / ((k3 + 1.0) * k3);
        f += a;
        g += b;
        // derivative terms 3k a_k x^{3k-1} and (3k+1) b_k x^{3k}
        if x != 0.0 {
            fp += a * k3 / x;
            gp += b * (k3 + 1.0) / x;
        }
        let scale = f.abs().hi.max(g.abs().hi).max(1.0);
        if a.abs().hi.max(b.abs().hi) < 1e-34 * scale && k > 2 {
            break;
        }
        if x == 0.0 {
            break;
        }
        k += 1;
    }
    let ai = AI0 * f - MINUS_AIP0 * g;
    let aip = AI0 * fp - MINUS_AIP0 * gp;
    (ai, aip)
}

/// Asymptotic branch for `|x| >= SERIES_LIMIT` (also evaluable below it for overlap checks).
pub fn airy_asymptotic(x: f64) -> Airy {
    let r = x.abs();
    let zeta = 2.0 / 3.0 * r * r.sqrt();
    let (u, v) = expansion_coefficients(zeta);
    if x > 0.0 {
        // alternating sums in 1/zeta, truncated at the smallest term
        let (mut su, mut sv) = (0.0, 0.0);
        let mut zpow = 1.0;
        for k in 0..u.len() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            su += sign * u[k] * zpow;
            sv += sign * v[k] * zpow;
            zpow /= zeta;
        }
        let e = (-zeta).exp();
        let pref = 0.5 * FRAC_1_SQRT_PI * e;
        let q = r.powf(0.25);
        Airy { ai: pref / q * su, ai_prime: -pref * q * sv }
    } else {
        let (mut pu, mut qu, mut pv, mut qv) = (0.0, 0.0, 0.0, 0.0);
        let mut zpow = 1.0;
        for k in 0..u.len() {
            // k even -> P series, k odd -> Q series, each with sign (-1)^{floor(k/2)}
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                pu += sign * u[k] * zpow;
                pv += sign * v[k] * zpow;
            } else {
                qu += sign * u[k] * zpow;
                qv += sign * v[k] * zpow;
            }
            zpow /= zeta;
        }
        let phase = zeta - std::f64::consts::FRAC_PI_4;
        let (sn, cs) = phase.sin_cos();
        let q = r.powf(0.25);
        Airy {
            ai: FRAC_1_SQRT_PI / q * (cs * pu + sn * qu),
            ai_prime: FRAC_1_SQRT_PI * q * (sn * pv - cs * qv),
        }
    }
}

/// Smallest argument at which [`airy_dd`] reaches double-double accuracy.
pub const DD_ASYMPTOTIC_MIN: f64 = 16.0;

const FRAC_1_SQRT_PI_DD: DD = DD::new(0.5641895835477563, 7.66772980658294e-18);

/// `(Ai, Ai')` in double-double for `x >= DD_ASYMPTOTIC_MIN`, from the positive-axis
/// asymptotic expansion whose truncation error `~exp(-2 zeta)` is below `1e-37` there.
pub fn airy_dd(x: f64) -> Result<(DD, DD), SpecialError> {
    if !x.is_finite() {
        return Err(SpecialError::NotFinite);
    }
    if !(DD_ASYMPTOTIC_MIN..=AIRY_DOMAIN).contains(&x) {
        return Err(SpecialError::OutOfRange { s: x, limit: DD_ASYMPTOTIC_MIN });
    }
    let xd = DD::from(x);
    let root = xd.sqrt();
    let quarter = root.sqrt();
    let zeta = xd * root * 2.0 / 3.0;
    let inv_zeta = DD::ONE / zeta;
    let (mut su, mut sv) = (DD::ONE, DD::ONE);
    let mut uk = DD::ONE;
    let mut zpow = DD::ONE;
    let mut last = f64::INFINITY;
    for k in 1..200u32 {
        let kf = k as f64;
        uk = uk * ((6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let vk = -(uk * (6.0 * kf + 1.0)) / (6.0 * kf - 1.0);
        zpow = -(zpow * inv_zeta);
        let tu = uk * zpow;
        su += tu;
        sv += vk * zpow;
        let mag = tu.hi.abs();
        if mag < 1e-34 || mag >= last {
            break;
        }
        last = mag;
    }
    let pref = (-zeta).exp() * FRAC_1_SQRT_PI_DD * 0.5;
    Ok((pref / quarter * su, -(pref * quarter * sv)))
}

/// Coefficients `u_k`, `v_k` up to the index where `u_k / zeta^k` stops decreasing.
fn expansion_coefficients(zeta: f64) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    let mut uk = 1.0f64;
    let mut last = 1.0f64;
    for k in 1..200usize {
        let kf = k as f64;
        uk *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let vk = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk;
        let mag = uk.abs() / zeta.powi(k as i32);
        if mag >= last || mag < 1e-17 {
            if mag < 1e-17 {
                u.push(uk);
                v.push(vk);
            }
            break;
        }
        last = mag;
        u.push(uk);
        v.push(vk);
    }
    (u, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_values_match_gamma_closed_forms() {
        use statrs::function::gamma::gamma;
        let a = airy_fn(0.0).unwrap();
        let ai0 = 3f64.powf(-2.0 / 3.0) / gamma(2.0 / 3.0);
        let aip0 = -(3f64.powf(-1.0 / 3.0)) / gamma(1.0 / 3.0);
        assert!((a.ai - ai0).abs() < 1e-15);
        assert!((a.ai_prime - aip0).abs() < 1e-15);
        assert!((a.ai - 0.3550280538).abs() < 1e-10);
        assert!((a.ai_prime + 0.2588194037).abs() < 1e-10);
    }

    #[test]
    fn leading_asymptotic_at_fifteen() {
        let s = 15.0f64;
        let a = airy_fn(s).unwrap();
        let lead = a.ai * 2.0 * std::f64::consts::PI.sqrt() * s.powf(0.25) * (2.0 / 3.0 * s.powf(1.5)).exp();
        assert!((lead - 1.0).abs() < 0.01, "{lead}");
    }

    #[test]
    fn branches_agree_on_overlap() {
        for &x in &[7.0, 7.5, 8.0, 8.5, 9.0] {
            let s = airy_series(x);
            let a = airy_asymptotic(x);
            assert!(((s.ai - a.ai) / a.ai).abs() < 1e-11, "x={x}");
            assert!(((s.ai_prime - a.ai_prime) / a.ai_prime).abs() < 1e-11, "x={x}");
            // oscillatory side: compare against the envelope
            let s = airy_series(-x);
            let a = airy_asymptotic(-x);
            let env = FRAC_1_SQRT_PI * x.powf(-0.25);
            assert!((s.ai - a.ai).abs() < 1e-11 * env, "x={}", -x);
            assert!((s.ai_prime - a.ai_prime).abs() < 1e-11 * env * x.sqrt(), "x={}", -x);
        }
    }

    #[test]
    fn double_double_branch_matches_double_branch() {
        for &x in &[16.0, 20.0, 35.0] {
            let (ai, aip) = airy_dd(x).unwrap();
            let a = airy_fn(x).unwrap();
            assert!(((ai.to_f64() - a.ai) / a.ai).abs() < 1e-14, "x={x}");
            assert!(((aip.to_f64() - a.ai_prime) / a.ai_prime).abs() < 1e-14, "x={x}");
        }
        assert!(airy_dd(10.0).is_err());
    }

    #[test]
    fn out_of_range_is_an_error() {
        assert!(matches!(airy_fn(200.5), Err(SpecialError::OutOfRange { .. })));
        assert!(matches!(airy_fn(-201.0), Err(SpecialError::OutOfRange { .. })));
        assert!(matches!(airy_fn(f64::NAN), Err(SpecialError::NotFinite)));
    }

    #[test]
    fn far_right_underflows_to_zero() {
        let a = airy_fn(200.0).unwrap();
        assert_eq!(a.ai, 0.0);
        assert_eq!(a.ai_prime, 0.0);
        let b = airy_fn(100.0).unwrap();
        assert!(b.ai >= 0.0 && b.ai.is_finite() && b.ai < 1e-14);
    }
}
