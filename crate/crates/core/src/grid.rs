use crate::error::{CoreError, Result};
use std::sync::Arc;

/// Uniform radial grid on [1, r_max].
///
/// All fields in the crate live on one of these. Immutable after
/// construction; shared via `Arc` so fields stay cheap to clone.
#[derive(Debug, PartialEq)]
pub struct RadialGrid {
    r_max: f64,
    nodes: Vec<f64>,
    dr: f64,
}

impl RadialGrid {
    /// Build a uniform grid with `n_points` nodes, `nodes[0] = 1`,
    /// nodes[n_points-1] = r_max.
    pub fn new(r_max: f64, n_points: usize) -> Result<Arc<Self>> {
        if n_points < 3 {
            return Err(CoreError::GridTooSmall {
                needed: 3,
                got: n_points,
            });
        }
        if !(r_max > 1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "r_max = {r_max} must exceed the inner radius 1"
            )));
        }
        let dr = (r_max - 1.0) / (n_points - 1) as f64;
        let nodes = (0..n_points)
            .map(|i| {
                if i + 1 == n_points {
                    r_max
                } else {
                    1.0 + dr * i as f64
                }
            })
            .collect();
        Ok(Arc::new(RadialGrid { r_max, nodes, dr }))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn r(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
}

/// A scalar field sampled on a [`RadialGrid`].
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(CoreError::GridMismatch {
                left: grid.len(),
                right: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(CoreError::Domain(format!("non-finite field value {bad}")));
        }
        Ok(RadialField { grid, values })
    }

    /// Sample a function of r on the grid.
    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        RadialField { grid, values }
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let values = vec![0.0; grid.len()];
        RadialField { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Largest absolute value over the grid.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// sup_r r^w |f(r)| over the grid.
    pub fn weighted_sup(&self, w: f64) -> f64 {
        self.values
            .iter()
            .zip(self.grid.nodes())
            .fold(0.0, |m, (v, r)| m.max(r.powf(w) * v.abs()))
    }
}
