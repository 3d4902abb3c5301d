//! Tracy-Widom tables against Fredholm determinants computed here from scratch,
//! plus the identities, normalisation and inverse-map properties of the tables.

use airylab_core::quadrature::legendre_nodes;
use airylab_core::special::airy_fn;
use airylab_core::tracy_widom::{
    airy1_onepoint_cdf, airy_tail, check_tw_tails, quantile_t, solve_painleve2, tw_cdf, tw_pdf, Family, TracyWidom,
    GRID_STEP,
};
use nalgebra::DMatrix;

fn ai(x: f64) -> f64 {
    airy_fn(x).unwrap().ai
}

/// `det(I - K)` on `[a, a + len]` by Gauss-Legendre Nyström discretisation.
fn nystrom_det(kernel: impl Fn(f64, f64) -> f64, a: f64, len: f64, n: usize) -> f64 {
    let (x, w) = legendre_nodes(n);
    let nodes: Vec<f64> = x.iter().map(|t| a + 0.5 * len * (t + 1.0)).collect();
    let sw: Vec<f64> = w.iter().map(|v| (0.5 * len * v).sqrt()).collect();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - sw[i] * kernel(nodes[i], nodes[j]) * sw[j]
    });
    m.determinant()
}

/// GUE distribution as the Airy-kernel determinant on `(s, inf)`.
fn gue_oracle(s: f64) -> f64 {
    let kernel = |x: f64, y: f64| {
        let (a, b) = (airy_fn(x).unwrap(), airy_fn(y).unwrap());
        if (x - y).abs() < 1e-12 {
            a.ai_prime * a.ai_prime - x * a.ai * a.ai
        } else {
            (a.ai * b.ai_prime - a.ai_prime * b.ai) / (x - y)
        }
    };
    nystrom_det(kernel, s, 16.0, 80)
}

/// GOE distribution as `det(I - B)` on `(0, inf)` with `B(x, y) = Ai((x + y)/2 + s) / 2`.
fn goe_oracle(s: f64) -> f64 {
    nystrom_det(|x, y| 0.5 * ai(0.5 * (x + y) + s), 0.0, 48.0, 120)
}

#[test]
fn gue_agrees_with_airy_kernel_determinant() {
    for &s in &[-6.0, -4.0, -2.0, 0.0, 2.0, 4.0] {
        let table = tw_cdf(Family::Gue, s).unwrap();
        let det = gue_oracle(s);
        assert!((table - det).abs() <= 1e-6, "s={s}: {table} vs {det}");
        assert!((table - det).abs() <= 1e-11 * det.max(1e-3) + 1e-13, "s={s}: {table} vs {det}");
    }
}

#[test]
fn goe_agrees_with_ferrari_spohn_determinant() {
    for &s in &[-5.0, -3.0, -1.3, 0.0, 0.77, 2.0, 3.5] {
        let table = tw_cdf(Family::Goe, s).unwrap();
        let det = goe_oracle(s);
        assert!((table - det).abs() <= 1e-10, "s={s}: {table} vs {det}");
    }
}

#[test]
fn factor_identities_on_the_grid() {
    let tw = TracyWidom::shared().unwrap();
    let f1 = tw.table(Family::Goe);
    let f2 = tw.table(Family::Gue);
    let f = tw.table(Family::AuxF);
    let e = tw.table(Family::AuxE);
    let mut checked = 0;
    for i in 0..f1.s_grid.len() {
        let s = f1.s_grid[i];
        if !(-10.0..=6.0).contains(&s) {
            continue;
        }
        assert!((f1.cdf[i] - f.cdf[i] * e.cdf[i]).abs() <= 1e-10, "s={s}");
        assert!((f2.cdf[i] - f.cdf[i] * f.cdf[i]).abs() <= 1e-10, "s={s}");
        // relative form, which is informative where the values are tiny
        assert!((f1.cdf[i] / (f.cdf[i] * e.cdf[i]) - 1.0).abs() <= 1e-12, "s={s}");
        checked += 1;
    }
    assert_eq!(checked, 16 * 128 + 1);
}

#[test]
fn tables_are_monotone_normalised_distributions() {
    let tw = TracyWidom::shared().unwrap();
    for family in [Family::Goe, Family::Gue, Family::AuxF] {
        let t = tw.table(family);
        assert!(t.cdf.windows(2).all(|w| w[1] >= w[0]), "{family:?}");
        assert!(t.cdf.iter().all(|&c| (0.0..=1.0).contains(&c)));
        assert!(t.pdf.iter().all(|&f| f >= 0.0));
        assert!(t.cdf[0] < 1e-12, "{family:?}");
        assert!((t.pdf_mass() - 1.0).abs() < 1e-6, "{family:?}: {}", t.pdf_mass());
    }
    // E also increases, but its right end is 1 only as s -> inf
    let e = tw.table(Family::AuxE);
    assert!(e.cdf.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn right_end_of_the_tables() {
    let tw = TracyWidom::shared().unwrap();
    let (_, hi) = tw.domain();
    assert!(1.0 - tw.cdf(Family::Gue, hi).unwrap() < 1e-12);
    assert!(1.0 - tw.cdf(Family::Goe, hi).unwrap() < 1e-12);
    // 1 - F1(10) is about 1.8e-11, dominated by int_10^inf Ai / 2
    let s10 = tw.survival(Family::Goe, 10.0).unwrap();
    let t = airy_tail(10.0).unwrap();
    assert!((s10 / (0.5 * t.int_q) - 1.0).abs() < 1e-6);
    assert!(s10 > 1e-12 && s10 < 1e-10, "{s10}");
}

#[test]
fn density_matches_central_difference() {
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    let mut s = -8.0;
    while s <= 6.0 {
        let fd = (tw_cdf(Family::Goe, s + h).unwrap() - tw_cdf(Family::Goe, s - h).unwrap()) / (2.0 * h);
        worst = worst.max((fd - tw_pdf(Family::Goe, s).unwrap()).abs());
        s += 0.0137;
    }
    assert!(worst <= 1e-5, "{worst}");
}

#[test]
fn density_far_tail_bound() {
    let f = tw_pdf(Family::Goe, 12.0).unwrap();
    assert!(f > 0.0 && f <= (-(2.0 / 3.0) * 12f64.powf(1.5)).exp());
}

#[test]
fn gue_moments_from_the_table() {
    let t = TracyWidom::shared().unwrap().table(Family::Gue);
    let trap = |g: &dyn Fn(f64, f64) -> f64| -> f64 {
        t.s_grid
            .windows(2)
            .zip(t.pdf.windows(2))
            .map(|(s, f)| 0.5 * (s[1] - s[0]) * (g(s[0], f[0]) + g(s[1], f[1])))
            .sum()
    };
    let mean = trap(&|s, f| s * f);
    let var = trap(&|s, f| (s - mean).powi(2) * f);
    assert!((mean + 1.7710868074).abs() < 1e-6, "{mean}");
    assert!((var - 0.8131947928).abs() < 1e-5, "{var}");
}

#[test]
fn quantile_inverts_the_survival_function() {
    let tw = TracyWidom::shared().unwrap();
    for k in 0..=90 {
        let s = -4.0 + k as f64 * 0.1;
        let p = tw.survival(Family::Goe, s).unwrap();
        let back = quantile_t(p).unwrap();
        assert!((back - s).abs() <= 1e-8, "s={s}: {back}");
    }
    let t = quantile_t(0.01).unwrap();
    assert!((tw.survival(Family::Goe, t).unwrap() - 0.01).abs() <= 1e-10);
    let (a, b, c) = (quantile_t(1e-4).unwrap(), quantile_t(1e-3).unwrap(), quantile_t(1e-2).unwrap());
    assert!(a > b && b > c);
    // beyond the table the Airy tail takes over
    let deep = quantile_t(1e-20).unwrap();
    assert!(deep > 12.0 && (tw.survival(Family::Goe, deep).unwrap() / 1e-20 - 1.0).abs() < 1e-8);
    assert!(quantile_t(0.0).is_err() && quantile_t(1.0).is_err() && quantile_t(1e-300).is_err());
}

#[test]
fn one_point_airy1_is_rescaled_goe() {
    for &s in &[-1.5, -0.3, 0.0, 0.4, 1.2] {
        assert_eq!(airy1_onepoint_cdf(s).unwrap(), tw_cdf(Family::Goe, 2.0 * s).unwrap());
    }
    assert!((airy1_onepoint_cdf(15.0).unwrap() - 1.0).abs() < 1e-15);
    // median
    let m = 0.5 * quantile_t(0.5).unwrap();
    assert!((airy1_onepoint_cdf(m).unwrap() - 0.5).abs() < 1e-10);
}

#[test]
fn tail_sandwich_report() {
    let grid: Vec<f64> = (0..=64).map(|k| 2.0 + k as f64 * 0.25).collect();
    let loose = check_tw_tails(0.6, &grid).unwrap();
    let at4 = loose.rows.iter().find(|r| r.s == 4.0).unwrap();
    assert!(at4.holds && at4.lower <= at4.survival && at4.survival <= at4.upper);
    let mut prev = f64::INFINITY;
    for &eps in &[0.1, 0.2, 0.3, 0.45, 0.6] {
        let onset = check_tw_tails(eps, &grid).unwrap().onset.unwrap();
        assert!(onset <= prev, "eps={eps}");
        prev = onset;
    }
    // with eps = 0.1 the polynomial prefactor of 1 - F1 keeps it below the lower bound until s ~ 11
    let tight = check_tw_tails(0.1, &grid).unwrap();
    assert!(!tight.rows.iter().find(|r| r.s == 6.0).unwrap().holds);
    assert!(tight.onset.unwrap() > 10.0);
    assert!(check_tw_tails(0.7, &grid).is_err());
}

#[test]
fn r_at_left_end_matches_requadrature_of_samples() {
    let tol = 1e-10;
    let sol = solve_painleve2(-10.0, 10.0, tol).unwrap();
    // Euler-Maclaurin corrected trapezoid of q^2 from s_init down to s_min
    let f: Vec<f64> = sol.q.iter().map(|q| q * q).collect();
    let df = |i: usize| 2.0 * sol.q[i] * sol.q_prime[i];
    let n = f.len() - 1;
    let h = GRID_STEP;
    let trap = h * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[n]));
    // the grid runs downward, so the integral over [s_min, s_init] is trap with endpoint slopes swapped
    let corrected = trap - h * h / 12.0 * (df(0) - df(n));
    let r = sol.r[0] + corrected;
    assert!((r - sol.r[n]).abs() <= 10.0 * tol, "{r} vs {}", sol.r[n]);
}

#[test]
fn hastings_mcleod_value_at_origin() {
    let sol = solve_painleve2(-1.0, 10.0, 1e-10).unwrap();
    let q0 = sol.q_at(0.0).unwrap();
    assert!((q0 - 0.3670615515).abs() < 1e-9, "{q0}");
}
