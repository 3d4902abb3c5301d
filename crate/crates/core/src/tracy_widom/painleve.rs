//! Hastings-McLeod solution of `q'' = 2 q^3 + s q`, integrated backward from Airy data
//! by double-double Taylor series.
//!
//! Alongside `q` the integrator carries the accumulators
//! `R(s) = int_s^inf q^2`, `I(s) = int_s^inf q`, `L(s) = int_s^inf R`, and two
//! independently summed logarithms `log F1 = -(L + I)/2` and `log F2 = -L`.

use super::tail::airy_tail;
use super::TwError;
use crate::special::ddouble::DoubleDouble as DD;
use crate::special::{airy_dd, DD_ASYMPTOTIC_MIN};

/// `|q|` above which backward integration is declared to have left the
/// Hastings-McLeod manifold.
pub const BLOW_UP: f64 = 1e6;

/// Output spacing of the dense grid.
pub const GRID_STEP: f64 = 1.0 / 128.0;

const MAX_ORDER: usize = 48;

// Growth exponent of perturbations for s < 0: exp(BACKWARD_GROWTH * |s|^{3/2}).
const BACKWARD_GROWTH: f64 = 0.942_809_041_582_063_4; // 2 sqrt(2) / 3

#[derive(Debug, Clone, PartialEq)]
pub struct PainleveSolution {
    /// Decreasing from `s_init` to `s_min`.
    pub s_grid: Vec<f64>,
    pub q: Vec<f64>,
    pub q_prime: Vec<f64>,
    /// `int_s^inf q(r)^2 dr`
    pub r: Vec<f64>,
    /// `int_s^inf q(r) dr`
    pub int_q: Vec<f64>,
    /// `int_s^inf R(r) dr`
    pub int_r: Vec<f64>,
    pub log_f1: Vec<f64>,
    pub log_f2: Vec<f64>,
    pub tol: f64,
}

/// Integration state at one point, all in double-double.
#[derive(Debug, Clone, Copy)]
struct State {
    q: DD,
    dq: DD,
    r: DD,
    int_q: DD,
    int_r: DD,
    log_f1: DD,
    log_f2: DD,
}

pub fn solve_painleve2(s_min: f64, s_init: f64, tol: f64) -> Result<PainleveSolution, TwError> {
    if !(s_init >= 8.0) || !(s_min >= -12.0) || !(s_min < s_init) {
        return Err(TwError::InvalidRange { s_min, s_init });
    }
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(TwError::InvalidTolerance(tol));
    }
    // Ai(s_init) carries an f64 rounding error along the Ai direction that the backward
    // instability amplifies by up to exp(39) at s = -12, so the run starts further right
    // from double-double Airy data and reaches s_init on the full equation.
    let start_at = s_init.max(DD_ASYMPTOTIC_MIN);
    let (ai, aip) = airy_dd(start_at)?;
    let tail = airy_tail(start_at)?;
    let mut start = State {
        q: ai,
        dq: aip,
        r: DD::from(tail.r),
        int_q: DD::from(tail.int_q),
        int_r: DD::from(tail.int_r),
        log_f1: DD::from(-0.5 * (tail.int_r + tail.int_q)),
        log_f2: DD::from(-tail.int_r),
    };
    let mut s = start_at;
    while s > s_init {
        let next = (s - GRID_STEP).max(s_init);
        start = advance(start, s, next, 1e-31)?;
        s = next;
    }
    integrate_from(start, s_min, s_init, tol)
}

/// Backward integration from arbitrary data at `s_init`; used for stability checks.
pub fn integrate_backward(
    s_init: f64,
    q0: f64,
    dq0: f64,
    s_min: f64,
    tol: f64,
) -> Result<PainleveSolution, TwError> {
    let tail = airy_tail(s_init)?;
    let start = State {
        q: DD::from(q0),
        dq: DD::from(dq0),
        r: DD::from(tail.r),
        int_q: DD::from(tail.int_q),
        int_r: DD::from(tail.int_r),
        log_f1: DD::from(-0.5 * (tail.int_r + tail.int_q)),
        log_f2: DD::from(-tail.int_r),
    };
    integrate_from(start, s_min, s_init, tol)
}

fn integrate_from(start: State, s_min: f64, s_init: f64, tol: f64) -> Result<PainleveSolution, TwError> {
    let n_steps = ((s_init - s_min) / GRID_STEP).ceil() as usize;
    let mut sol = PainleveSolution {
        s_grid: Vec::with_capacity(n_steps + 1),
        q: Vec::with_capacity(n_steps + 1),
        q_prime: Vec::with_capacity(n_steps + 1),
        r: Vec::with_capacity(n_steps + 1),
        int_q: Vec::with_capacity(n_steps + 1),
        int_r: Vec::with_capacity(n_steps + 1),
        log_f1: Vec::with_capacity(n_steps + 1),
        log_f2: Vec::with_capacity(n_steps + 1),
        tol,
    };
    let growth_at_end = BACKWARD_GROWTH * (-s_min).max(0.0).powf(1.5);
    let mut state = start;
    let mut s = s_init;
    sol.push(s, &state);
    for k in 1..=n_steps {
        let target = (s_init - k as f64 * GRID_STEP).max(s_min);
        // local budget: errors committed at s are amplified by exp(growth(s_min) - growth(s))
        let growth_here = BACKWARD_GROWTH * (-s).max(0.0).powf(1.5);
        let budget = (tol * (growth_here - growth_at_end).exp() * GRID_STEP / (s_init - s_min)).max(1e-31);
        state = advance(state, s, target, budget)?;
        s = target;
        if !(state.q.hi.abs() < BLOW_UP) || !state.q.is_finite() {
            return Err(TwError::BlowUp { s, q: state.q.hi });
        }
        sol.push(s, &state);
    }
    Ok(sol)
}

impl PainleveSolution {
    fn push(&mut self, s: f64, st: &State) {
        self.s_grid.push(s);
        self.q.push(st.q.to_f64());
        self.q_prime.push(st.dq.to_f64());
        self.r.push(st.r.to_f64());
        self.int_q.push(st.int_q.to_f64());
        self.int_r.push(st.int_r.to_f64());
        self.log_f1.push(st.log_f1.to_f64());
        self.log_f2.push(st.log_f2.to_f64());
    }

    pub fn len(&self) -> usize {
        self.s_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_grid.is_empty()
    }

    /// Linear lookup of `q` at a grid point (exact match only).
    pub fn q_at(&self, s: f64) -> Option<f64> {
        self.index_of(s).map(|i| self.q[i])
    }

    pub fn index_of(&self, s: f64) -> Option<usize> {
        let s0 = self.s_grid[0];
        let k = ((s0 - s) / GRID_STEP).round();
        if k < 0.0 {
            return None;
        }
        let i = k as usize;
        (i < self.len() && (self.s_grid[i] - s).abs() < 1e-12).then_some(i)
    }
}

/// Taylor-step from `s0` to `s1`, splitting the interval when the series has not
/// converged to `budget` by `MAX_ORDER`.
fn advance(state: State, s0: f64, s1: f64, budget: f64) -> Result<State, TwError> {
    match taylor_step(&state, s0, s1 - s0, budget) {
        Some(next) => Ok(next),
        None => {
            let mid = 0.5 * (s0 + s1);
            if (s1 - s0).abs() < 1e-9 {
                return Err(TwError::BlowUp { s: s0, q: state.q.hi });
            }
            let half = advance(state, s0, mid, 0.5 * budget)?;
            advance(half, mid, s1, 0.5 * budget)
        }
    }
}

fn taylor_step(st: &State, s0: f64, h: f64, budget: f64) -> Option<State> {
    let mut a = [DD::ZERO; MAX_ORDER + 3]; // q
    let mut p = [DD::ZERO; MAX_ORDER + 3]; // q^2
    let mut c = [DD::ZERO; MAX_ORDER + 3]; // q^3
    let mut rr = [DD::ZERO; MAX_ORDER + 3]; // R
    a[0] = st.q;
    a[1] = st.dq;
    rr[0] = st.r;

    let hd = DD::from(h);
    // running sums, Horner is not used so that term sizes are visible
    let mut q = st.q;
    let mut dq = st.dq;
    let mut r = st.r;
    let mut int_q = st.int_q;
    let mut int_r = st.int_r;
    let mut log_f1 = st.log_f1;
    let mut log_f2 = st.log_f2;

    let scale_q = st.q.hi.abs().max(st.dq.hi.abs()).max(1e-300);
    let scale_acc = st.r.hi.abs().max(st.int_q.hi.abs()).max(1e-300);
    let scale_log = st.log_f1.hi.abs().max(st.log_f2.hi.abs()).max(1e-300);

    let mut hpow = DD::ONE; // h^k
    let mut small_run = 0;
    for k in 0..=MAX_ORDER {
        // coefficients of q^2 and q^3 at order k need a_0..a_k
        let mut pk = DD::ZERO;
        for i in 0..=k {
            pk += a[i] * a[k - i];
        }
        p[k] = pk;
        let mut ck = DD::ZERO;
        for i in 0..=k {
            ck += p[i] * a[k - i];
        }
        c[k] = ck;
        // q'' = 2 q^3 + (s0 + h) q
        let prev = if k >= 1 { a[k - 1] } else { DD::ZERO };
        a[k + 2] = (c[k] * 2.0 + a[k] * s0 + prev) / (((k + 1) * (k + 2)) as f64);
        // R' = -q^2
        rr[k + 1] = -p[k] / ((k + 1) as f64);

        let hk1 = hpow * hd; // h^{k+1}
        let kp1 = (k + 1) as f64;
        // contributions of order k+1 to every component
        let tq = a[k + 1] * hk1;
        let tdq = a[k + 2] * hk1 * (k + 2) as f64;
        let tr = rr[k + 1] * hk1;
        let tiq = -(a[k] * hk1) / kp1;
        let tir = -(rr[k] * hk1) / kp1;
        let tl1 = (rr[k] + a[k]) * hk1 / (2.0 * kp1);
        let tl2 = rr[k] * hk1 / kp1;
        q += tq;
        dq += tdq;
        r += tr;
        int_q += tiq;
        int_r += tir;
        log_f1 += tl1;
        log_f2 += tl2;
        hpow = hk1;

        let err_q = tq.hi.abs().max(tdq.hi.abs()) / scale_q;
        let err_acc = tr.hi.abs().max(tiq.hi.abs()).max(tir.hi.abs()) / scale_acc;
        let err_log = tl1.hi.abs().max(tl2.hi.abs()) / scale_log;
        if k >= 4 && err_q.max(err_acc).max(err_log) < budget {
            small_run += 1;
            if small_run >= 2 {
                return Some(State { q, dq, r, int_q, int_r, log_f1, log_f2 });
            }
        } else {
            small_run = 0;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_on_airy_data() {
        let sol = solve_painleve2(-2.0, 10.0, 1e-10).unwrap();
        let a = crate::special::airy_fn(10.0).unwrap();
        // the stored value is the Hastings-McLeod q, within Ai(10)^2 relative of Ai
        assert!(((sol.q[0] - a.ai) / a.ai).abs() < 1e-14);
        assert!(((sol.q_prime[0] - a.ai_prime) / a.ai_prime).abs() < 1e-14);
        assert!((sol.q[0] - a.ai).abs() <= 10.0 * sol.tol);
        assert_eq!(sol.s_grid[0], 10.0);
        assert_eq!(*sol.s_grid.last().unwrap(), -2.0);
    }

    #[test]
    fn positivity_and_monotone_accumulators() {
        let sol = solve_painleve2(-12.0, 10.0, 1e-10).unwrap();
        assert!(sol.q.iter().all(|&q| q > 0.0));
        // s decreases along the grid, so R and int_q must not decrease
        assert!(sol.r.windows(2).all(|w| w[1] >= w[0]));
        assert!(sol.int_q.windows(2).all(|w| w[1] >= w[0]));
        assert!(sol.r.iter().chain(&sol.int_q).all(|&v| v >= 0.0));
    }

    #[test]
    fn q_at_origin_is_self_convergent() {
        let tol = 1e-10;
        let coarse = solve_painleve2(-1.0, 10.0, tol).unwrap();
        let fine = solve_painleve2(-1.0, 10.0, tol / 10.0).unwrap();
        let (a, b) = (coarse.q_at(0.0).unwrap(), fine.q_at(0.0).unwrap());
        assert!((a - b).abs() <= 10.0 * tol);
        assert!((b - 0.367061).abs() < 1e-6, "{b}");
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(solve_painleve2(-13.0, 10.0, 1e-10), Err(TwError::InvalidRange { .. })));
        assert!(matches!(solve_painleve2(-2.0, 7.0, 1e-10), Err(TwError::InvalidRange { .. })));
        assert!(matches!(solve_painleve2(-2.0, 10.0, 1e-3), Err(TwError::InvalidTolerance(_))));
    }

    #[test]
    fn off_manifold_data_blows_up_and_is_reported() {
        let a = crate::special::airy_fn(10.0).unwrap();
        let r = integrate_backward(10.0, a.ai * 1.001, a.ai_prime * 1.001, -12.0, 1e-10);
        match r {
            Err(TwError::BlowUp { s, .. }) => assert!(s < 0.0 && s > -12.0, "{s}"),
            other => panic!("expected blow-up, got {:?}", other.map(|s| s.len())),
        }
    }
}
