//! Uniform sample grids over a working interval.
//!
//! All "nonvanishing on the interval" checks in the crate are grid based:
//! the working interval and its resolution are explicit inputs, never an
//! implicit global.

use thiserror::Error;

/// A uniform grid of `points >= 2` samples on `[x0, x1]`, `x0 < x1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x0: f64,
    x1: f64,
    points: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid range is degenerate or not finite: [{x0}, {x1}]")]
    BadRange { x0: f64, x1: f64 },
    #[error("grid needs at least 2 points, got {points}")]
    TooFewPoints { points: usize },
}

impl Grid {
    pub fn new(x0: f64, x1: f64, points: usize) -> Result<Grid, GridError> {
        if !x0.is_finite() || !x1.is_finite() || x0 >= x1 {
            return Err(GridError::BadRange { x0, x1 });
        }
        if points < 2 {
            return Err(GridError::TooFewPoints { points });
        }
        Ok(Grid { x0, x1, points })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn step(&self) -> f64 {
        (self.x1 - self.x0) / (self.points - 1) as f64
    }

    /// The k-th node; the last node is exactly `x1`.
    pub fn node(&self, k: usize) -> f64 {
        if k + 1 == self.points {
            self.x1
        } else {
            self.x0 + self.step() * k as f64
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|k| self.node(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_span_the_interval() {
        let g = Grid::new(0.0, 1.0, 5).unwrap();
        let xs: Vec<f64> = g.iter().collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(g.step(), 0.25);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Grid::new(1.0, 1.0, 5).is_err());
        assert!(Grid::new(2.0, 1.0, 5).is_err());
        assert!(Grid::new(0.0, f64::NAN, 5).is_err());
        assert!(Grid::new(0.0, 1.0, 1).is_err());
    }
}
