use crate::config::Boundary;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }
}

/// Distance on the window `[-half, half]^2`, optionally wrapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric {
    pub half: f64,
    pub boundary: Boundary,
}

impl Metric {
    pub fn new(half: f64, boundary: Boundary) -> Self {
        Self { half, boundary }
    }

    #[inline]
    fn axis(&self, a: f64, b: f64) -> f64 {
        let d = libm::fabs(a - b);
        match self.boundary {
            Boundary::Window => d,
            Boundary::Torus => {
                let side = 2.0 * self.half;
                let d = d % side;
                if d > self.half {
                    side - d
                } else {
                    d
                }
            }
        }
    }

    #[inline]
    pub fn distance_sq(&self, a: Point, b: Point) -> f64 {
        let dx = self.axis(a.x, b.x);
        let dy = self.axis(a.y, b.y);
        dx * dx + dy * dy
    }

    #[inline]
    pub fn distance(&self, a: Point, b: Point) -> f64 {
        libm::sqrt(self.distance_sq(a, b))
    }

    /// Distance from `p` to the nearest window edge (infinite on a torus).
    pub fn edge_clearance(&self, p: Point) -> f64 {
        match self.boundary {
            Boundary::Torus => f64::INFINITY,
            Boundary::Window => {
                let cx = self.half - libm::fabs(p.x);
                let cy = self.half - libm::fabs(p.y);
                cx.min(cy)
            }
        }
    }
}
