//! Uniform bucket grid over the square window.
//!
//! Points are bucketed into `n x n` square cells stored in compressed rows
//! (`starts` / `items`), each bucket holding ascending point indices. Queries
//! visit the cells overlapping the query disc and filter by exact distance,
//! so results always equal a brute-force scan.

use alloc::vec;
use alloc::vec::Vec;

use crate::config::Boundary;
use crate::geometry::{Metric, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    metric: Metric,
    side: usize,
    width: f64,
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl Grid {
    /// Builds the index with cells at least `cell_size` wide. On a torus the
    /// cell count divides the side exactly so that wrapped neighbours line up.
    pub fn build(points: &[Point], metric: Metric, cell_size: f64) -> Self {
        let span = 2.0 * metric.half;
        let cell_size = if cell_size.is_finite() && cell_size > 0.0 { cell_size.min(span) } else { span };
        let side = libm::floor(span / cell_size).max(1.0) as usize;
        let width = span / side as f64;
        let mut grid = Grid { metric, side, width, starts: vec![0; side * side + 1], items: Vec::new() };

        let cells: Vec<usize> = points.iter().map(|&p| grid.cell_of(p)).collect();
        for &c in &cells {
            grid.starts[c + 1] += 1;
        }
        for c in 0..side * side {
            grid.starts[c + 1] += grid.starts[c];
        }
        let mut fill = grid.starts.clone();
        grid.items = vec![0; points.len()];
        for (i, &c) in cells.iter().enumerate() {
            grid.items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        grid
    }

    pub fn cells_per_side(&self) -> usize {
        self.side
    }

    pub fn cell_width(&self) -> f64 {
        self.width
    }

    #[inline]
    fn axis_cell(&self, v: f64) -> usize {
        let c = libm::floor((v + self.metric.half) / self.width);
        if c < 0.0 {
            0
        } else {
            (c as usize).min(self.side - 1)
        }
    }

    #[inline]
    fn cell_of(&self, p: Point) -> usize {
        self.axis_cell(p.y) * self.side + self.axis_cell(p.x)
    }

    #[inline]
    fn bucket(&self, cx: usize, cy: usize) -> &[u32] {
        let c = cy * self.side + cx;
        &self.items[self.starts[c] as usize..self.starts[c + 1] as usize]
    }

    /// Distinct offset range along one axis: minimal images on a torus, the
    /// in-bounds range in window mode.
    #[inline]
    fn offset_bounds(&self, centre_cell: usize) -> (isize, isize) {
        let n = self.side as isize;
        match self.metric.boundary {
            Boundary::Torus => (-((n - 1) / 2), n / 2),
            Boundary::Window => (-(centre_cell as isize), n - 1 - centre_cell as isize),
        }
    }

    #[inline]
    fn wrap(&self, centre_cell: usize, offset: isize) -> usize {
        let n = self.side as isize;
        (centre_cell as isize + offset).rem_euclid(n) as usize
    }

    /// Calls `f(index, distance_sq)` for every point with `distance < radius`.
    /// Visit order is by cell, not by index.
    pub fn for_each_within<F: FnMut(usize, f64)>(&self, points: &[Point], centre: Point, radius: f64, mut f: F) {
        if !(radius > 0.0) {
            return;
        }
        let r_sq = radius * radius;
        let reach = if radius.is_finite() {
            (libm::ceil(radius / self.width) as usize).min(self.side) as isize
        } else {
            self.side as isize
        };
        let (cx, cy) = (self.axis_cell(centre.x), self.axis_cell(centre.y));
        let (xlo, xhi) = self.offset_bounds(cx);
        let (ylo, yhi) = self.offset_bounds(cy);
        for dy in (-reach).max(ylo)..=reach.min(yhi) {
            let by = self.wrap(cy, dy);
            for dx in (-reach).max(xlo)..=reach.min(xhi) {
                let bx = self.wrap(cx, dx);
                for &i in self.bucket(bx, by) {
                    let d_sq = self.metric.distance_sq(centre, points[i as usize]);
                    if d_sq < r_sq {
                        f(i as usize, d_sq);
                    }
                }
            }
        }
    }

    /// True when some point with `distance < radius` satisfies `pred`.
    pub fn any_within<P: FnMut(usize) -> bool>(
        &self,
        points: &[Point],
        centre: Point,
        radius: f64,
        mut pred: P,
    ) -> bool {
        if !(radius > 0.0) {
            return false;
        }
        let r_sq = radius * radius;
        let reach = if radius.is_finite() {
            (libm::ceil(radius / self.width) as usize).min(self.side) as isize
        } else {
            self.side as isize
        };
        let (cx, cy) = (self.axis_cell(centre.x), self.axis_cell(centre.y));
        let (xlo, xhi) = self.offset_bounds(cx);
        let (ylo, yhi) = self.offset_bounds(cy);
        for dy in (-reach).max(ylo)..=reach.min(yhi) {
            let by = self.wrap(cy, dy);
            for dx in (-reach).max(xlo)..=reach.min(xhi) {
                let bx = self.wrap(cx, dx);
                for &i in self.bucket(bx, by) {
                    let i = i as usize;
                    if self.metric.distance_sq(centre, points[i]) < r_sq && pred(i) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Closest point satisfying `pred`, ties to the smaller index. Expanding
    /// ring search: after ring `k` every unvisited point is at least
    /// `k * width` away.
    pub fn nearest_where<P: FnMut(usize) -> bool>(
        &self,
        points: &[Point],
        centre: Point,
        mut pred: P,
    ) -> Option<(usize, f64)> {
        let (cx, cy) = (self.axis_cell(centre.x), self.axis_cell(centre.y));
        let (xlo, xhi) = self.offset_bounds(cx);
        let (ylo, yhi) = self.offset_bounds(cy);
        let max_ring = (-xlo).max(xhi).max(-ylo).max(yhi);
        let mut best: Option<(usize, f64)> = None;
        let mut visit = |bx: usize, by: usize, best: &mut Option<(usize, f64)>| {
            for &i in self.bucket(bx, by) {
                let i = i as usize;
                let d_sq = self.metric.distance_sq(centre, points[i]);
                let better = match *best {
                    None => true,
                    Some((j, b)) => d_sq < b || (d_sq == b && i < j),
                };
                if better && pred(i) {
                    *best = Some((i, d_sq));
                }
            }
        };
        for k in 0..=max_ring {
            for dy in (-k).max(ylo)..=k.min(yhi) {
                let by = self.wrap(cy, dy);
                if dy.abs() == k {
                    for dx in (-k).max(xlo)..=k.min(xhi) {
                        visit(self.wrap(cx, dx), by, &mut best);
                    }
                } else {
                    if -k >= xlo {
                        visit(self.wrap(cx, -k), by, &mut best);
                    }
                    if k <= xhi && k != 0 {
                        visit(self.wrap(cx, k), by, &mut best);
                    }
                }
            }
            if let Some((_, b)) = best {
                let clear = k as f64 * self.width;
                if b < clear * clear {
                    break;
                }
            }
        }
        best.map(|(i, d_sq)| (i, libm::sqrt(d_sq)))
    }
}
