//! Poisson point processes on the window and grid-backed spatial queries.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::config::{Boundary, NetworkConfig};
use crate::geometry::{Metric, Point};
use crate::grid::Grid;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PointSetError {
    #[error("lambda must be finite and > 0 (got {0})")]
    Lambda(f64),
    #[error("window half-side must be finite and > 0 (got {0})")]
    WindowHalf(f64),
    #[error("point {index} at ({x}, {y}) lies outside [-{half}, {half}]^2")]
    OutOfWindow { index: usize, x: f64, y: f64, half: f64 },
    #[error("nearest-neighbour query needs at least 2 points (have {0})")]
    TooFewPoints(usize),
    #[error("point index {index} out of range for {count} points")]
    BadIndex { index: usize, count: usize },
    #[error("Poisson mean {0} cannot be sampled")]
    Count(f64),
}

/// Grid cell size: `max(eta, 1/sqrt(lambda))`, clamped to the window side.
pub fn default_cell_size(lambda: f64, eta: f64, window_half: f64) -> f64 {
    let spacing = 1.0 / libm::sqrt(lambda);
    let c = if eta.is_finite() { eta.max(spacing) } else { spacing };
    c.min(2.0 * window_half)
}

/// Node positions together with their spatial index. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    positions: Vec<Point>,
    grid: Grid,
    metric: Metric,
}

impl PointSet {
    pub fn from_positions(
        positions: Vec<Point>,
        window_half: f64,
        boundary: Boundary,
        cell_size: f64,
    ) -> Result<Self, PointSetError> {
        if !(window_half.is_finite() && window_half > 0.0) {
            return Err(PointSetError::WindowHalf(window_half));
        }
        for (index, p) in positions.iter().enumerate() {
            let inside = |v: f64| v.is_finite() && v >= -window_half && v <= window_half;
            if !(inside(p.x) && inside(p.y)) {
                return Err(PointSetError::OutOfWindow { index, x: p.x, y: p.y, half: window_half });
            }
        }
        let metric = Metric::new(window_half, boundary);
        let grid = Grid::build(&positions, metric, cell_size);
        Ok(Self { positions, grid, metric })
    }

    /// Samples a homogeneous PPP of intensity `config.lambda` on the window.
    ///
    /// Stream order: one Poisson draw for the count, then `x, y` uniforms for
    /// each point in index order.
    pub fn sample<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> Result<Self, PointSetError> {
        let (lambda, half) = (config.lambda, config.window_half);
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(PointSetError::Lambda(lambda));
        }
        if !(half.is_finite() && half > 0.0) {
            return Err(PointSetError::WindowHalf(half));
        }
        let side = 2.0 * half;
        let mean = lambda * side * side;
        let poisson = Poisson::new(mean).map_err(|_| PointSetError::Count(mean))?;
        let count = poisson.sample(rng) as usize;
        let mut positions = Vec::with_capacity(count);
        for _ in 0..count {
            let x = -half + side * rng.random::<f64>();
            let y = -half + side * rng.random::<f64>();
            positions.push(Point::new(x, y));
        }
        Self::from_positions(positions, half, config.boundary, default_cell_size(lambda, config.eta, half))
    }

    /// Copy of this set with `extra` appended as the last index.
    pub fn with_point(&self, extra: Point) -> Result<Self, PointSetError> {
        let mut positions = self.positions.clone();
        positions.push(extra);
        Self::from_positions(positions, self.metric.half, self.metric.boundary, self.grid.cell_width())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position(&self, i: usize) -> Point {
        self.positions[i]
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.metric.distance(self.positions[a], self.positions[b])
    }

    /// Indices with `distance(centre, point) < radius`, ascending.
    pub fn range_query(&self, centre: Point, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.grid.for_each_within(&self.positions, centre, radius, |i, _| out.push(i));
        out.sort_unstable();
        out
    }

    pub fn for_each_within<F: FnMut(usize, f64)>(&self, centre: Point, radius: f64, f: F) {
        self.grid.for_each_within(&self.positions, centre, radius, f)
    }

    pub fn any_within<P: FnMut(usize) -> bool>(&self, centre: Point, radius: f64, pred: P) -> bool {
        self.grid.any_within(&self.positions, centre, radius, pred)
    }

    /// Closest point to `centre` accepted by `pred` (smallest index on ties).
    pub fn nearest_where<P: FnMut(usize) -> bool>(&self, centre: Point, pred: P) -> Option<(usize, f64)> {
        self.grid.nearest_where(&self.positions, centre, pred)
    }

    /// Node closest to an arbitrary coordinate.
    pub fn closest_node(&self, centre: Point) -> Option<(usize, f64)> {
        self.nearest_where(centre, |_| true)
    }

    /// Nearest other node to `origin`.
    pub fn nearest_neighbor(&self, origin: usize) -> Result<(usize, f64), PointSetError> {
        if self.len() < 2 {
            return Err(PointSetError::TooFewPoints(self.len()));
        }
        if origin >= self.len() {
            return Err(PointSetError::BadIndex { index: origin, count: self.len() });
        }
        let centre = self.positions[origin];
        Ok(self.nearest_where(centre, |j| j != origin).expect("at least one other point exists"))
    }
}
