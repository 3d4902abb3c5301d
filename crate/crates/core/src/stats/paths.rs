use super::StatsError;
use crate::sampler::PathSample;

/// Replicas of one process on a common uniform grid, as consumed by the experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    grid: Vec<f64>,
    rows: Vec<Vec<f64>>,
    provenance: Vec<String>,
}

impl PathSet {
    /// `rows[r][k]` is replica `r` at `grid[k]`; the grid must be uniform.
    pub fn new(grid: Vec<f64>, rows: Vec<Vec<f64>>, provenance: Vec<String>) -> Result<Self, StatsError> {
        if grid.len() < 2 || rows.is_empty() {
            return Err(StatsError::EmptySample);
        }
        let step = grid[1] - grid[0];
        let uniform = step > 0.0
            && grid.windows(2).all(|w| ((w[1] - w[0]) / step - 1.0).abs() < 1e-6);
        if !uniform {
            return Err(StatsError::NonUniformGrid);
        }
        if rows.iter().any(|r| r.len() != grid.len() || r.iter().any(|v| !v.is_finite())) {
            return Err(StatsError::RaggedSample);
        }
        Ok(Self { grid, rows, provenance })
    }

    pub fn from_samples(samples: &[PathSample], provenance: Vec<String>) -> Result<Self, StatsError> {
        let grid = samples.first().ok_or(StatsError::EmptySample)?.x_grid.clone();
        if samples.iter().any(|s| s.x_grid != grid) {
            return Err(StatsError::RaggedSample);
        }
        Self::new(grid, samples.iter().map(|s| s.values.clone()).collect(), provenance)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    pub fn replicas(&self) -> usize {
        self.rows.len()
    }

    pub fn step(&self) -> f64 {
        (self.grid[self.grid.len() - 1] - self.grid[0]) / (self.grid.len() - 1) as f64
    }

    pub fn extent(&self) -> f64 {
        self.grid[self.grid.len() - 1] - self.grid[0]
    }

    /// Grid index of `x`, which must lie on the grid.
    pub fn index_of(&self, x: f64) -> Result<usize, StatsError> {
        let k = ((x - self.grid[0]) / self.step()).round();
        if k < 0.0 || k as usize >= self.grid.len() || (self.grid[k as usize] - x).abs() > 1e-6 * self.step().max(1.0) {
            return Err(StatsError::OffGrid { x });
        }
        Ok(k as usize)
    }

    /// Number of grid steps closest to `length`.
    pub fn steps_for(&self, length: f64) -> usize {
        (length / self.step()).round() as usize
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[k]).collect()
    }

    pub fn require_replicas(&self, need: usize) -> Result<(), StatsError> {
        if self.replicas() < need {
            return Err(StatsError::InsufficientReplicas { need, got: self.replicas() });
        }
        Ok(())
    }

    pub fn require_extent(&self, need: f64) -> Result<(), StatsError> {
        if need > self.extent() + 1e-9 {
            return Err(StatsError::ExtentExceedsSample { need, have: self.extent() });
        }
        Ok(())
    }
}
