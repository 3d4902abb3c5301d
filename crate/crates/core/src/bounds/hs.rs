use super::regions::{log_integral, lower_quadrant, quadrant_complement};
use super::{
    check_grid, check_tol, complement_substituted, log_sum_exp, lower_quadrant_substituted, BoundCheck,
    BoundDirection, BoundError, LemmaId, LEVEL_RANGE,
};
use crate::fredholm::{hs_norm_v, hs_norm_w, hs_norm_w_reduced};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HsTerm {
    W,
    I1,
    I2,
    I3,
    I4,
    VW,
}

impl HsTerm {
    pub const ALL: [HsTerm; 6] = [HsTerm::W, HsTerm::I1, HsTerm::I2, HsTerm::I3, HsTerm::I4, HsTerm::VW];

    pub fn name(self) -> &'static str {
        match self {
            HsTerm::W => "W",
            HsTerm::I1 => "I1",
            HsTerm::I2 => "I2",
            HsTerm::I3 => "I3",
            HsTerm::I4 => "I4",
            HsTerm::VW => "VW",
        }
    }

    /// Logarithm of the bound shape at level `m`; `W` is `||W||_2^2`, `VW` is `||V||_2 ||W||_2`.
    pub fn log_shape(self, m: f64) -> f64 {
        let root = (2.0 * m).sqrt();
        let a = root - 1.0;
        let decay = -4.0 * std::f64::consts::SQRT_2 * m.powf(1.5);
        match self {
            HsTerm::W => 2.0 * a.ln() - 2.0 * a + 2.0 / 3.0 * a.powi(3),
            HsTerm::I1 => 8.0 * m + decay,
            HsTerm::I2 => 2.0 * m.ln() + 8.0 * m + decay,
            HsTerm::I3 => 0.5 * m.ln() + 4.0 * m + decay,
            HsTerm::I4 => 2.5 * m.ln() + 4.0 * m + decay,
            HsTerm::VW => 1.75 * m.ln() + (2.0 - std::f64::consts::SQRT_2) * m + root + decay / 3.0,
        }
    }
}

/// Node counts for the tensor rules of `||W||_2` and `||V||_2`, and the adaptive
/// tolerance of the `I` integrals; refinement doubles the nodes and tightens the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsResolution {
    pub w_nodes: usize,
    pub v_nodes: usize,
    pub quad_tol: f64,
}

impl Default for HsResolution {
    fn default() -> Self {
        Self { w_nodes: 60, v_nodes: 80, quad_tol: 1e-9 }
    }
}

impl HsResolution {
    pub fn refined(self) -> Self {
        Self { w_nodes: 2 * self.w_nodes, v_nodes: 2 * self.v_nodes, quad_tol: 0.1 * self.quad_tol }
    }
}

const LN_4PI: f64 = 2.531_024_246_969_290_7;

/// The four pieces of `||V||_2^2` in the original coordinates, each over
/// `(-inf, M]^2` or its complement.
fn v_pieces_direct(m: f64, tol: f64) -> Result<[f64; 4], BoundError> {
    let root = (2.0 * m).sqrt();
    let peak = 2.0 * root * root - 4.0 * root * m;
    let inside = |x: f64, y: f64| -0.5 * (x - y).powi(2) - 2.0 * root * (x + y) - 2.0 * (x - m) * (y - m);
    let outside = |x: f64, y: f64| -0.5 * (x - y).powi(2) - 2.0 * root * (x + y);
    let unit = |_: f64, _: f64| 1.0;
    let square = |_: f64, y: f64| y * y;
    Ok([
        log_integral(&lower_quadrant(m, root, 1.0), &inside, &unit, peak, tol)? - LN_4PI,
        log_integral(&lower_quadrant(m, root, 1.0), &inside, &square, peak, tol)? - LN_4PI,
        log_integral(&quadrant_complement(m, root, 1.0), &outside, &unit, peak, tol)? - LN_4PI,
        log_integral(&quadrant_complement(m, root, 1.0), &outside, &square, peak, tol)? - LN_4PI,
    ])
}

/// The same pieces through the shift `(x, y) -> (x + M, y + M)`, which pulls out
/// `e^{-4 sqrt(2) M^{3/2}}`, followed by the scaling substitution of the quadrant integrals.
fn v_pieces_shifted(m: f64, tol: f64) -> Result<[f64; 4], BoundError> {
    let root = (2.0 * m).sqrt();
    let prefactor = -4.0 * root * m - LN_4PI;
    let unit = |_: f64| 1.0;
    let shifted_square = |y: f64| (y + m) * (y + m);
    Ok([
        prefactor + lower_quadrant_substituted(root, &unit, tol)?,
        prefactor + lower_quadrant_substituted(root, &shifted_square, tol)?,
        prefactor + complement_substituted(root, &unit, tol)?,
        prefactor + complement_substituted(root, &shifted_square, tol)?,
    ])
}

/// Checks the bound shapes of `||W||_2^2`, `I1`..`I4` and `||V||_2 ||W||_2` on `m_grid`.
///
/// Second routes: `||W||_2^2` by its one-dimensional reduction, the `I` terms by the
/// shift to the corner, and `||V||_2 ||W||_2` by the tensor rule for `||V||_2`
/// times the reduced `||W||_2`.
pub fn check_hs_shapes(m_grid: &[f64], resolution: HsResolution) -> Result<Vec<BoundCheck>, BoundError> {
    check_grid(m_grid, LEVEL_RANGE)?;
    check_tol(resolution.quad_tol)?;
    let n = m_grid.len();
    let mut direct = vec![Vec::with_capacity(n); HsTerm::ALL.len()];
    let mut second = vec![Vec::with_capacity(n); HsTerm::ALL.len()];
    for &m in m_grid {
        let w_direct = 2.0 * hs_norm_w(m, resolution.w_nodes)?.ln();
        let w_reduced = 2.0 * hs_norm_w_reduced(m)?.ln();
        let pieces = v_pieces_direct(m, resolution.quad_tol)?;
        let shifted = v_pieces_shifted(m, resolution.quad_tol)?;
        let v_squared = log_sum_exp(&pieces);
        let v_tensor = hs_norm_v(m, resolution.v_nodes)?.ln();
        let row_direct = [w_direct, pieces[0], pieces[1], pieces[2], pieces[3], 0.5 * (v_squared + w_direct)];
        let row_second = [w_reduced, shifted[0], shifted[1], shifted[2], shifted[3], v_tensor + 0.5 * w_reduced];
        for k in 0..HsTerm::ALL.len() {
            direct[k].push(row_direct[k]);
            second[k].push(row_second[k]);
        }
    }
    Ok(HsTerm::ALL
        .iter()
        .zip(direct.into_iter().zip(second))
        .map(|(term, (lhs, identity))| {
            let shape = m_grid.iter().map(|&m| term.log_shape(m)).collect();
            BoundCheck::new(LemmaId::Hsw, term.name(), BoundDirection::Upper, m_grid.to_vec(), lhs, shape, &identity)
        })
        .collect())
}
