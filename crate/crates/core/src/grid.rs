//! Sample grids: closed uniform lattices over a domain box, minus excluded
//! sub-boxes. Point order is fixed (x fastest, then y, then z is slowest
//! varying? no: x outermost) so reports reduce deterministically.

use crate::expr::Point;

/// Closed axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBox {
    pub lo: Point,
    pub hi: Point,
}

impl DomainBox {
    pub fn new(lo: Point, hi: Point) -> Self {
        DomainBox { lo, hi }
    }

    pub fn center(&self) -> Point {
        [
            0.5 * (self.lo[0] + self.hi[0]),
            0.5 * (self.lo[1] + self.hi[1]),
            0.5 * (self.lo[2] + self.hi[2]),
        ]
    }

    pub fn contains(&self, p: Point) -> bool {
        (0..3).all(|i| p[i] >= self.lo[i] - 1e-12 && p[i] <= self.hi[i] + 1e-12)
    }

    pub fn is_degenerate(&self) -> bool {
        (0..3).any(|i| !(self.hi[i] > self.lo[i]))
    }
}

/// Deterministic sample lattice.
#[derive(Debug, Clone)]
pub struct Grid {
    pub points: Vec<Point>,
    pub domain: DomainBox,
}

impl Grid {
    /// Uniform closed lattice with `n` points per axis, dropping points that
    /// fall inside any excluded sub-box.
    pub fn uniform(domain: DomainBox, n: usize, excluded: &[DomainBox]) -> Grid {
        assert!(n >= 2, "grid needs at least 2 points per axis");
        let coordv = |axis: usize, k: usize| {
            domain.lo[axis] + (domain.hi[axis] - domain.lo[axis]) * (k as f64) / ((n - 1) as f64)
        };
        let mut points = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let p = [coordv(0, i), coordv(1, j), coordv(2, k)];
                    if excluded.iter().any(|b| b.contains(p)) {
                        continue;
                    }
                    points.push(p);
                }
            }
        }
        Grid { points, domain }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
