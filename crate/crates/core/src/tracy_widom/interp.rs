//! Cubic Hermite interpolation with supplied slopes, optionally limited to preserve monotonicity.

#[derive(Debug, Clone, PartialEq)]
pub struct HermiteCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl HermiteCubic {
    /// `x` strictly increasing; `d` are the slopes at the knots.
    pub fn new(x: Vec<f64>, y: Vec<f64>, d: Vec<f64>) -> Self {
        assert!(x.len() >= 2 && x.len() == y.len() && y.len() == d.len());
        Self { x, y, d }
    }

    /// As [`HermiteCubic::new`] for monotone data.
    ///
    /// Slopes are scaled down (Fritsch-Carlson) on any interval where they would
    /// let the cubic overshoot monotone data, and zeroed where the data are flat.
    pub fn monotone(x: Vec<f64>, y: Vec<f64>, mut d: Vec<f64>) -> Self {
        assert!(x.len() >= 2 && x.len() == y.len() && y.len() == d.len());
        for i in 0..x.len() - 1 {
            let secant = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
            if secant == 0.0 {
                d[i] = 0.0;
                d[i + 1] = 0.0;
                continue;
            }
            let alpha = d[i] / secant;
            let beta = d[i + 1] / secant;
            if alpha < 0.0 {
                d[i] = 0.0;
            }
            if beta < 0.0 {
                d[i + 1] = 0.0;
            }
            let norm = alpha * alpha + beta * beta;
            if norm > 9.0 {
                let tau = 3.0 / norm.sqrt();
                d[i] = tau * alpha * secant;
                d[i + 1] = tau * beta * secant;
            }
        }
        Self { x, y, d }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    fn locate(&self, t: f64) -> usize {
        let i = self.x.partition_point(|&v| v <= t);
        i.clamp(1, self.x.len() - 1) - 1
    }

    /// Value and first derivative at `t` (clamped to the domain).
    pub fn eval_with_slope(&self, t: f64) -> (f64, f64) {
        let (lo, hi) = self.domain();
        let t = t.clamp(lo, hi);
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let u = (t - self.x[i]) / h;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.d[i] * h, self.d[i + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        let v = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
        let dv = ((6.0 * u2 - 6.0 * u) * (y0 - y1) + (3.0 * u2 - 4.0 * u + 1.0) * m0 + (3.0 * u2 - 2.0 * u) * m1) / h;
        (v, dv)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with_slope(t).0
    }
}
