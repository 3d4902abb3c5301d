//! Tracy-Widom distributions from the Hastings-McLeod Painlevé II transcendent.
//!
//! With `R(s) = int_s^inf q^2`:
//! `F(s) = exp(-1/2 int_s^inf R)`, `E(s) = exp(-1/2 int_s^inf q)`,
//! `F1 = F E` (GOE) and `F2 = F^2` (GUE).
//!
//! Tables are built once on a uniform grid of spacing 1/128 and evaluated by
//! monotone cubic Hermite interpolation in log space with exact slopes.

mod interp;
mod painleve;
mod tail;

pub use interp::HermiteCubic;
pub use painleve::{integrate_backward, solve_painleve2, PainleveSolution, BLOW_UP, GRID_STEP};
pub use tail::{airy_tail, TailValues};

use crate::quadrature::QuadError;
use crate::special::SpecialError;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TwError {
    #[error("invalid integration range: s_min={s_min}, s_init={s_init} (need s_init >= 8, s_min >= -12, s_min < s_init)")]
    InvalidRange { s_min: f64, s_init: f64 },
    #[error("tolerance {0} outside [1e-12, 1e-6]")]
    InvalidTolerance(f64),
    #[error("backward integration left the Hastings-McLeod solution near s={s} (q={q}); retry with a larger s_init or tighter tol")]
    BlowUp { s: f64, q: f64 },
    #[error("s={s} outside the tabulated range [{lo}, {hi}]")]
    OutOfTable { s: f64, lo: f64, hi: f64 },
    #[error("probability {0} outside (0, 1)")]
    Domain(f64),
    #[error("tail probability {p} is below what the tail extension resolves ({floor:e})")]
    TailExtension { p: f64, floor: f64 },
    #[error("eps {0} outside (0, 2/3)")]
    InvalidEps(f64),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `F1`
    Goe,
    /// `F2`
    Gue,
    /// `F`
    AuxF,
    /// `E`
    AuxE,
}

/// What to do for arguments outside `[s_min, s_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutOfRange {
    /// Right of the table, evaluate the Airy tail directly; left of it, return 0.
    Extend,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwConfig {
    pub s_min: f64,
    pub s_init: f64,
    pub s_max: f64,
    pub tol: f64,
    pub out_of_range: OutOfRange,
}

impl Default for TwConfig {
    fn default() -> Self {
        Self { s_min: -12.0, s_init: 10.0, s_max: 12.0, tol: 1e-10, out_of_range: OutOfRange::Extend }
    }
}

/// Largest argument the tail extension accepts; `1 - F1(40)` is about `1e-74`.
pub const TAIL_LIMIT: f64 = 40.0;

/// Raw accumulators on the increasing grid.
#[derive(Debug, Clone, PartialEq)]
struct Accumulators {
    s: Vec<f64>,
    q: Vec<f64>,
    q_prime: Vec<f64>,
    r: Vec<f64>,
    int_q: Vec<f64>,
    int_r: Vec<f64>,
    log_f1: Vec<f64>,
    log_f2: Vec<f64>,
}

impl Accumulators {
    fn push_tail(&mut self, s: f64, t: &TailValues) {
        self.s.push(s);
        self.q.push(t.q);
        self.q_prime.push(t.q_prime);
        self.r.push(t.r);
        self.int_q.push(t.int_q);
        self.int_r.push(t.int_r);
        self.log_f1.push(-0.5 * (t.int_r + t.int_q));
        self.log_f2.push(-t.int_r);
    }
}

/// A monotone CDF table with its density, for one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedCdf {
    pub family: Family,
    pub s_grid: Vec<f64>,
    pub cdf: Vec<f64>,
    pub pdf: Vec<f64>,
}

impl TabulatedCdf {
    /// Trapezoid integral of the density over the grid.
    pub fn pdf_mass(&self) -> f64 {
        self.s_grid
            .windows(2)
            .zip(self.pdf.windows(2))
            .map(|(s, f)| 0.5 * (s[1] - s[0]) * (f[0] + f[1]))
            .sum()
    }

    /// Mean and variance by trapezoid quadrature of the density over the grid.
    pub fn moments(&self) -> (f64, f64) {
        let integrate = |g: &dyn Fn(f64) -> f64| -> f64 {
            self.s_grid
                .windows(2)
                .zip(self.pdf.windows(2))
                .map(|(s, f)| 0.5 * (s[1] - s[0]) * (g(s[0]) * f[0] + g(s[1]) * f[1]))
                .sum()
        };
        let mass = integrate(&|_| 1.0);
        let mean = integrate(&|s| s) / mass;
        let var = integrate(&|s| (s - mean) * (s - mean)) / mass;
        (mean, var)
    }
}

/// One row of the exported table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub s: f64,
    pub f: f64,
    pub e: f64,
    pub f1: f64,
    pub f2: f64,
    pub f1_pdf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub s: f64,
    pub lower: f64,
    pub survival: f64,
    pub upper: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub eps: f64,
    pub rows: Vec<TailRow>,
    /// Smallest grid point from which the sandwich holds at every larger grid point.
    pub onset: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TracyWidom {
    config: TwConfig,
    acc: Accumulators,
    log_f1: HermiteCubic,
    log_f2: HermiteCubic,
    log_f: HermiteCubic,
    log_e: HermiteCubic,
    log_sf1: HermiteCubic,
    log_sf2: HermiteCubic,
    log_pdf1: HermiteCubic,
    log_pdf2: HermiteCubic,
}

impl TracyWidom {
    pub fn build(config: TwConfig) -> Result<Self, TwError> {
        if !(config.s_max >= config.s_init) || config.s_max > TAIL_LIMIT {
            return Err(TwError::OutOfTable { s: config.s_max, lo: config.s_init, hi: TAIL_LIMIT });
        }
        let sol = solve_painleve2(config.s_min, config.s_init, config.tol)?;
        let n = sol.len();
        let mut acc = Accumulators {
            s: sol.s_grid.iter().rev().copied().collect(),
            q: sol.q.iter().rev().copied().collect(),
            q_prime: sol.q_prime.iter().rev().copied().collect(),
            r: sol.r.iter().rev().copied().collect(),
            int_q: sol.int_q.iter().rev().copied().collect(),
            int_r: sol.int_r.iter().rev().copied().collect(),
            log_f1: sol.log_f1.iter().rev().copied().collect(),
            log_f2: sol.log_f2.iter().rev().copied().collect(),
        };
        debug_assert_eq!(acc.s.len(), n);
        let extra = ((config.s_max - config.s_init) / GRID_STEP).round() as usize;
        for k in 1..=extra {
            let s = (config.s_init + k as f64 * GRID_STEP).min(config.s_max);
            acc.push_tail(s, &airy_tail(s)?);
        }
        Ok(Self::from_accumulators(config, acc))
    }

    /// Shared table with default configuration, built on first use.
    pub fn shared() -> Result<&'static Self, TwError> {
        static TABLE: OnceLock<Result<TracyWidom, TwError>> = OnceLock::new();
        TABLE.get_or_init(|| Self::build(TwConfig::default())).as_ref().map_err(Clone::clone)
    }

    fn from_accumulators(config: TwConfig, acc: Accumulators) -> Self {
        let n = acc.s.len();
        let x = acc.s.clone();
        let map = |f: &dyn Fn(usize) -> f64| (0..n).map(f).collect::<Vec<f64>>();

        let log_f1 = HermiteCubic::monotone(x.clone(), acc.log_f1.clone(), map(&|i| 0.5 * (acc.r[i] + acc.q[i])));
        let log_f2 = HermiteCubic::monotone(x.clone(), acc.log_f2.clone(), acc.r.clone());
        let log_f = HermiteCubic::monotone(x.clone(), map(&|i| -0.5 * acc.int_r[i]), map(&|i| 0.5 * acc.r[i]));
        let log_e = HermiteCubic::monotone(x.clone(), map(&|i| -0.5 * acc.int_q[i]), map(&|i| 0.5 * acc.q[i]));

        let pdf1 = |i: usize| 0.5 * acc.log_f1[i].exp() * (acc.r[i] + acc.q[i]);
        let pdf2 = |i: usize| acc.log_f2[i].exp() * acc.r[i];
        let sf1 = |i: usize| -acc.log_f1[i].exp_m1();
        let sf2 = |i: usize| -acc.log_f2[i].exp_m1();
        // log S is decreasing; its slope is -pdf/S
        let log_sf1 = HermiteCubic::monotone(
            x.clone(),
            map(&|i| sf1(i).ln()).iter().map(|v| -v).collect(),
            map(&|i| pdf1(i) / sf1(i)),
        );
        let log_sf2 = HermiteCubic::monotone(
            x.clone(),
            map(&|i| sf2(i).ln()).iter().map(|v| -v).collect(),
            map(&|i| pdf2(i) / sf2(i)),
        );
        // (log f1)' = (R+q)/2 + (q' - q^2)/(R+q); (log f2)' = R - q^2/R
        let log_pdf1 = HermiteCubic::new(
            x.clone(),
            map(&|i| pdf1(i).ln()),
            map(&|i| {
                let rq = acc.r[i] + acc.q[i];
                0.5 * rq + (acc.q_prime[i] - acc.q[i] * acc.q[i]) / rq
            }),
        );
        let log_pdf2 = HermiteCubic::new(
            x,
            map(&|i| pdf2(i).ln()),
            map(&|i| acc.r[i] - acc.q[i] * acc.q[i] / acc.r[i]),
        );
        Self { config, acc, log_f1, log_f2, log_f, log_e, log_sf1, log_sf2, log_pdf1, log_pdf2 }
    }

    pub fn config(&self) -> &TwConfig {
        &self.config
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.acc.s[0], self.acc.s[self.acc.s.len() - 1])
    }

    pub fn grid(&self) -> &[f64] {
        &self.acc.s
    }

    fn check(&self, s: f64) -> Result<Where, TwError> {
        let (lo, hi) = self.domain();
        if !s.is_finite() {
            return Err(TwError::Special(SpecialError::NotFinite));
        }
        if s >= lo && s <= hi {
            return Ok(Where::Table);
        }
        match self.config.out_of_range {
            OutOfRange::Fail => Err(TwError::OutOfTable { s, lo, hi }),
            OutOfRange::Extend if s < lo => Ok(Where::Left),
            OutOfRange::Extend if s <= TAIL_LIMIT => Ok(Where::Right),
            OutOfRange::Extend => Err(TwError::OutOfTable { s, lo, hi: TAIL_LIMIT }),
        }
    }

    /// `1 - F1(s)` for GOE, `1 - F2(s)` for GUE, `1 - F`, `1 - E` for the auxiliary factors.
    pub fn survival(&self, family: Family, s: f64) -> Result<f64, TwError> {
        Ok(match self.check(s)? {
            Where::Left => 1.0,
            Where::Right => {
                let t = airy_tail(s)?;
                let log_cdf = match family {
                    Family::Goe => -0.5 * (t.int_r + t.int_q),
                    Family::Gue => -t.int_r,
                    Family::AuxF => -0.5 * t.int_r,
                    Family::AuxE => -0.5 * t.int_q,
                };
                -log_cdf.exp_m1()
            }
            Where::Table => match family {
                Family::Goe => self.survival_from(&self.log_f1, &self.log_sf1, s),
                Family::Gue => self.survival_from(&self.log_f2, &self.log_sf2, s),
                Family::AuxF => -self.log_f.eval(s).exp_m1(),
                Family::AuxE => -self.log_e.eval(s).exp_m1(),
            },
        })
    }

    fn survival_from(&self, log_cdf: &HermiteCubic, neg_log_sf: &HermiteCubic, s: f64) -> f64 {
        let l = log_cdf.eval(s);
        if l > -std::f64::consts::LN_2 {
            (-neg_log_sf.eval(s)).exp()
        } else {
            -l.exp_m1()
        }
    }

    pub fn cdf(&self, family: Family, s: f64) -> Result<f64, TwError> {
        Ok(match self.check(s)? {
            Where::Left => 0.0,
            Where::Right => 1.0 - self.survival(family, s)?,
            Where::Table => match family {
                Family::Goe => self.cdf_from(&self.log_f1, &self.log_sf1, s),
                Family::Gue => self.cdf_from(&self.log_f2, &self.log_sf2, s),
                Family::AuxF => self.log_f.eval(s).exp(),
                Family::AuxE => self.log_e.eval(s).exp(),
            },
        })
    }

    fn cdf_from(&self, log_cdf: &HermiteCubic, neg_log_sf: &HermiteCubic, s: f64) -> f64 {
        let l = log_cdf.eval(s);
        if l > -std::f64::consts::LN_2 {
            1.0 - (-neg_log_sf.eval(s)).exp()
        } else {
            l.exp()
        }
    }

    /// Density of `F1` (GOE) or `F2` (GUE); the auxiliary factors have densities `F R/2` and `E q/2`.
    pub fn pdf(&self, family: Family, s: f64) -> Result<f64, TwError> {
        Ok(match self.check(s)? {
            Where::Left => 0.0,
            Where::Right => {
                let t = airy_tail(s)?;
                match family {
                    Family::Goe => 0.5 * (-0.5 * (t.int_r + t.int_q)).exp() * (t.r + t.q),
                    Family::Gue => (-t.int_r).exp() * t.r,
                    Family::AuxF => 0.5 * (-0.5 * t.int_r).exp() * t.r,
                    Family::AuxE => 0.5 * (-0.5 * t.int_q).exp() * t.q,
                }
            }
            Where::Table => match family {
                Family::Goe => self.log_pdf1.eval(s).exp(),
                Family::Gue => self.log_pdf2.eval(s).exp(),
                Family::AuxF => self.log_f.eval(s).exp() * self.log_f.eval_with_slope(s).1,
                Family::AuxE => self.log_e.eval(s).exp() * self.log_e.eval_with_slope(s).1,
            },
        })
    }

    /// `T(p)`, the inverse of `s -> 1 - F1(s)`.
    pub fn quantile_t(&self, p: f64) -> Result<f64, TwError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(TwError::Domain(p));
        }
        let (lo, hi) = self.domain();
        if p >= self.survival(Family::Goe, lo)? {
            return Err(TwError::OutOfTable { s: f64::NEG_INFINITY, lo, hi });
        }
        let (mut a, mut b) = if p > self.survival(Family::Goe, hi)? {
            // bracket from the grid: survival is decreasing along it
            let k = self.acc.log_f1.partition_point(|&l| -l.exp_m1() > p);
            (self.acc.s[k - 1], self.acc.s[k])
        } else {
            if self.config.out_of_range == OutOfRange::Fail {
                return Err(TwError::TailExtension { p, floor: self.survival(Family::Goe, hi)? });
            }
            let floor = self.survival(Family::Goe, TAIL_LIMIT)?;
            if !(p > floor) {
                return Err(TwError::TailExtension { p, floor });
            }
            (hi, TAIL_LIMIT)
        };
        // safeguarded Newton on log S(s) - log p
        let lp = p.ln();
        let g = |s: f64| -> Result<f64, TwError> { Ok(self.survival(Family::Goe, s)?.ln() - lp) };
        let mut s = 0.5 * (a + b);
        for _ in 0..200 {
            let gs = g(s)?;
            if gs > 0.0 {
                a = s;
            } else {
                b = s;
            }
            let slope = -self.pdf(Family::Goe, s)? / self.survival(Family::Goe, s)?;
            let mut next = s - gs / slope;
            if !(next > a && next < b) || !next.is_finite() {
                next = 0.5 * (a + b);
            }
            if (next - s).abs() <= 1e-15 * s.abs().max(1.0) || b - a <= 1e-15 * s.abs().max(1.0) {
                return Ok(next);
            }
            s = next;
        }
        Ok(s)
    }

    /// Tabulated values of one family on the native grid.
    pub fn table(&self, family: Family) -> TabulatedCdf {
        let a = &self.acc;
        let n = a.s.len();
        let (cdf, pdf): (Vec<f64>, Vec<f64>) = (0..n)
            .map(|i| match family {
                Family::Goe => {
                    let c = a.log_f1[i].exp();
                    (c, 0.5 * c * (a.r[i] + a.q[i]))
                }
                Family::Gue => {
                    let c = a.log_f2[i].exp();
                    (c, c * a.r[i])
                }
                Family::AuxF => {
                    let c = (-0.5 * a.int_r[i]).exp();
                    (c, 0.5 * c * a.r[i])
                }
                Family::AuxE => {
                    let c = (-0.5 * a.int_q[i]).exp();
                    (c, 0.5 * c * a.q[i])
                }
            })
            .unzip();
        TabulatedCdf { family, s_grid: a.s.clone(), cdf, pdf }
    }

    /// Mean and variance of one family.
    pub fn moments(&self, family: Family) -> (f64, f64) {
        self.table(family).moments()
    }

    /// Rows of `F, E, F1, F2, F1'` on `[from, to]` with spacing `step`.
    pub fn rows(&self, from: f64, to: f64, step: f64) -> Result<Vec<TableRow>, TwError> {
        if !(step > 0.0) || !(to >= from) {
            return Err(TwError::OutOfTable { s: from, lo: from, hi: to });
        }
        let n = ((to - from) / step + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| {
                let s = from + k as f64 * step;
                Ok(TableRow {
                    s,
                    f: self.cdf(Family::AuxF, s)?,
                    e: self.cdf(Family::AuxE, s)?,
                    f1: self.cdf(Family::Goe, s)?,
                    f2: self.cdf(Family::Gue, s)?,
                    f1_pdf: self.pdf(Family::Goe, s)?,
                })
            })
            .collect()
    }

    /// Evaluates `exp(-(2/3 + eps) s^{3/2}) <= 1 - F1(s) <= exp(-(2/3 - eps) s^{3/2})` on a grid.
    pub fn check_tails(&self, eps: f64, s_grid: &[f64]) -> Result<TailReport, TwError> {
        if !(eps > 0.0 && eps < 2.0 / 3.0) {
            return Err(TwError::InvalidEps(eps));
        }
        let rows = s_grid
            .iter()
            .map(|&s| {
                let e = s.max(0.0).powf(1.5);
                let lower = (-(2.0 / 3.0 + eps) * e).exp();
                let upper = (-(2.0 / 3.0 - eps) * e).exp();
                let survival = self.survival(Family::Goe, s)?;
                Ok(TailRow { s, lower, survival, upper, holds: lower <= survival && survival <= upper })
            })
            .collect::<Result<Vec<_>, TwError>>()?;
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by(|&i, &j| rows[i].s.total_cmp(&rows[j].s));
        let mut onset = None;
        for &i in order.iter().rev() {
            if !rows[i].holds {
                break;
            }
            onset = Some(rows[i].s);
        }
        Ok(TailReport { eps, rows, onset })
    }

    /// Accumulator values at the grid point nearest `s`: `(q, R, int q, int R)`.
    pub fn accumulators_near(&self, s: f64) -> (f64, f64, f64, f64) {
        let i = self.acc.s.partition_point(|&v| v < s).min(self.acc.s.len() - 1);
        (self.acc.q[i], self.acc.r[i], self.acc.int_q[i], self.acc.int_r[i])
    }
}

enum Where {
    Table,
    Left,
    Right,
}

pub fn tw_cdf(family: Family, s: f64) -> Result<f64, TwError> {
    TracyWidom::shared()?.cdf(family, s)
}

pub fn tw_pdf(family: Family, s: f64) -> Result<f64, TwError> {
    TracyWidom::shared()?.pdf(family, s)
}

/// `P(A1(0) <= s) = F1(2s)`.
pub fn airy1_onepoint_cdf(s: f64) -> Result<f64, TwError> {
    tw_cdf(Family::Goe, 2.0 * s)
}

pub fn quantile_t(p: f64) -> Result<f64, TwError> {
    TracyWidom::shared()?.quantile_t(p)
}

pub fn check_tw_tails(eps: f64, s_grid: &[f64]) -> Result<TailReport, TwError> {
    TracyWidom::shared()?.check_tails(eps, s_grid)
}
