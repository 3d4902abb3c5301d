use super::StatsError;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// The single coordinate.
    Coordinate,
    Max,
    /// Nonnegative weighted sum.
    WeightedSum(Vec<f64>),
    /// `clamp((z - level) / width, 0, 1)` of a single coordinate.
    Ramp { level: f64, width: f64 },
    /// `tanh(scale z)` of a single coordinate.
    Tanh { scale: f64 },
}

/// A coordinatewise nondecreasing map of the process values at `points`,
/// with its per-coordinate Lipschitz constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneFunctional {
    pub id: String,
    pub points: Vec<f64>,
    pub shape: Shape,
    pub lipschitz_per_coord: Vec<f64>,
}

const SPOT_CHECKS: usize = 64;

impl MonotoneFunctional {
    /// Builds the functional and spot-checks monotonicity and the Lipschitz
    /// constants on random coordinate perturbations.
    pub fn new(id: impl Into<String>, points: Vec<f64>, shape: Shape) -> Result<Self, StatsError> {
        let id = id.into();
        let m = points.len();
        let single = matches!(shape, Shape::Coordinate | Shape::Ramp { .. } | Shape::Tanh { .. });
        if m == 0 || (single && m != 1) {
            return Err(StatsError::BadFunctional { id, reason: "wrong arity".into() });
        }
        let lipschitz_per_coord = match &shape {
            Shape::Coordinate => vec![1.0],
            Shape::Max => vec![1.0; m],
            Shape::WeightedSum(w) => {
                if w.len() != m {
                    return Err(StatsError::BadFunctional { id, reason: "weight count".into() });
                }
                w.iter().map(|v| v.abs()).collect()
            }
            Shape::Ramp { width, .. } => vec![1.0 / width.abs()],
            Shape::Tanh { scale } => vec![scale.abs()],
        };
        let f = Self { id, points, shape, lipschitz_per_coord };
        f.spot_check()?;
        Ok(f)
    }

    pub fn arity(&self) -> usize {
        self.points.len()
    }

    /// Value at the coordinates `y` (process values at `self.points`).
    pub fn eval(&self, y: &[f64]) -> f64 {
        match &self.shape {
            Shape::Coordinate => y[0],
            Shape::Max => y.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Shape::WeightedSum(w) => w.iter().zip(y).map(|(a, b)| a * b).sum(),
            Shape::Ramp { level, width } => ((y[0] - level) / width).clamp(0.0, 1.0),
            Shape::Tanh { scale } => (scale * y[0]).tanh(),
        }
    }

    fn spot_check(&self) -> Result<(), StatsError> {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(0x6d6f_6e6f);
        let m = self.arity();
        for _ in 0..SPOT_CHECKS {
            let base: Vec<f64> = (0..m).map(|_| rng.random_range(-5.0..5.0)).collect();
            let j = rng.random_range(0..m);
            let delta = rng.random_range(1e-3..2.0);
            let mut up = base.clone();
            up[j] += delta;
            let change = self.eval(&up) - self.eval(&base);
            if change < -1e-12 {
                return Err(StatsError::BadFunctional { id: self.id.clone(), reason: format!("decreasing in coordinate {j}") });
            }
            if change > self.lipschitz_per_coord[j] * delta * (1.0 + 1e-12) + 1e-15 {
                return Err(StatsError::BadFunctional { id: self.id.clone(), reason: format!("Lipschitz bound fails in coordinate {j}") });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_shapes_pass_their_spot_checks() {
        assert!(MonotoneFunctional::new("max", vec![0.0, 2.0], Shape::Max).is_ok());
        let ramp = MonotoneFunctional::new("ramp", vec![0.0], Shape::Ramp { level: -0.6, width: 0.5 }).unwrap();
        assert_eq!(ramp.lipschitz_per_coord, vec![2.0]);
        assert_eq!(ramp.eval(&[0.0]), 1.0);
        let sum = MonotoneFunctional::new("sum", vec![1.0, 3.0], Shape::WeightedSum(vec![1.0, 0.5])).unwrap();
        assert_eq!(sum.eval(&[2.0, 2.0]), 3.0);
    }

    #[test]
    fn non_monotone_or_misdeclared_maps_are_rejected() {
        let neg = MonotoneFunctional::new("neg", vec![1.0, 3.0], Shape::WeightedSum(vec![1.0, -1.0]));
        assert!(matches!(neg, Err(StatsError::BadFunctional { .. })));
        let arity = MonotoneFunctional::new("bad", vec![0.0, 1.0], Shape::Coordinate);
        assert!(matches!(arity, Err(StatsError::BadFunctional { .. })));
    }
}
