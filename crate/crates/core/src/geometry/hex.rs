//! Triangular lattice `a·i + b·j` with `i = (√3, 0)`, `j = (√3/2, 3/2)` and its
//! hexagonal Voronoi cells (circumradius 1, inradius √3/2 at unit scale).

use super::Point;
use serde::{Deserialize, Serialize};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Slack on the half-plane tests so that boundary points computed through
/// trigonometry still count as inside the closed hexagon.
const BOUNDARY_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HexLattice {
    /// Multiplies both basis vectors (and hence every cell).
    pub scale: f64,
}

impl Default for HexLattice {
    fn default() -> Self {
        HexLattice { scale: 1.0 }
    }
}

impl HexLattice {
    pub fn new(scale: f64) -> Self {
        assert!(scale > 0.0, "lattice scale must be positive");
        HexLattice { scale }
    }

    pub fn basis_i(&self) -> Point {
        Point::new(SQRT3 * self.scale, 0.0)
    }

    pub fn basis_j(&self) -> Point {
        Point::new(0.5 * SQRT3 * self.scale, 1.5 * self.scale)
    }

    pub fn center(&self, a: i64, b: i64) -> Point {
        self.basis_i() * a as f64 + self.basis_j() * b as f64
    }

    pub fn circumradius(&self) -> f64 {
        self.scale
    }

    pub fn inradius(&self) -> f64 {
        0.5 * SQRT3 * self.scale
    }

    /// Outward unit normals of the six edges, at angles `kπ/3`.
    pub fn edge_normals() -> [Point; 6] {
        std::array::from_fn(|k| Point::from_angle(k as f64 * std::f64::consts::FRAC_PI_3))
    }

    /// Vertices counter-clockwise starting at angle π/6.
    pub fn vertices(&self, center: Point) -> [Point; 6] {
        std::array::from_fn(|k| {
            center
                + Point::from_angle(std::f64::consts::FRAC_PI_6 + k as f64 * std::f64::consts::FRAC_PI_3)
                    * self.scale
        })
    }

    /// Is `p` in the hexagon of this lattice centred at `center`, shrunk by
    /// `eps ∈ (0,1]` about its centre? Closed.
    pub fn hexagon_contains(&self, p: Point, center: Point, eps: f64) -> bool {
        let r = eps * self.inradius();
        let d = p - center;
        Self::edge_normals()
            .iter()
            .all(|n| d.dot(*n) <= r + BOUNDARY_SLACK * self.scale)
    }

    /// Lattice coordinates of the cell containing `p`: the nearest lattice
    /// point, ties broken by the lexicographically smallest `(a, b)`.
    pub fn cell_of(&self, p: Point) -> (i64, i64) {
        let bf = p.y / (1.5 * self.scale);
        let af = (p.x - bf * 0.5 * SQRT3 * self.scale) / (SQRT3 * self.scale);
        let (a0, b0) = (af.floor() as i64, bf.floor() as i64);
        let mut best = (i64::MAX, i64::MAX);
        let mut best_d = f64::INFINITY;
        for da in -1..=2 {
            for db in -1..=2 {
                let cand = (a0 + da, b0 + db);
                let d = p.dist(self.center(cand.0, cand.1));
                if d < best_d || (d == best_d && cand < best) {
                    best = cand;
                    best_d = d;
                }
            }
        }
        best
    }
}

/// Unit-scale [`HexLattice::cell_of`].
pub fn hex_cell_of(p: Point, lattice: &HexLattice) -> (i64, i64) {
    lattice.cell_of(p)
}

/// Unit-scale hexagon test: `p ∈ eps·Hex(z)`.
pub fn hexagon_contains(p: Point, z: Point, eps: f64) -> bool {
    HexLattice::default().hexagon_contains(p, z, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_6;

    #[test]
    fn cell_examples() {
        let l = HexLattice::default();
        assert_eq!(l.cell_of(Point::new(0.0, 0.0)), (0, 0));
        assert_eq!(l.cell_of(Point::new(SQRT3, 0.0)), (1, 0));
        assert_eq!(l.cell_of(Point::new(SQRT3 / 2.0 + 1e-6, 0.0)), (1, 0));
        assert_eq!(l.cell_of(Point::new(SQRT3 / 2.0 - 1e-6, 0.0)), (0, 0));
        assert_eq!(l.cell_of(l.center(-3, 5) + Point::new(0.1, -0.2)), (-3, 5));
    }

    #[test]
    fn containment_examples() {
        let z = Point::new(0.4, -1.0);
        assert!(hexagon_contains(z, z, 0.3));
        let vertex = z + Point::from_angle(FRAC_PI_6);
        assert!(hexagon_contains(vertex, z, 1.0));
        assert!(!hexagon_contains(vertex, z, 0.99));
        let edge_mid = z + Point::new(SQRT3 / 2.0, 0.0);
        assert!(hexagon_contains(edge_mid, z, 1.0));
        assert!(!hexagon_contains(edge_mid + Point::new(1e-9, 0.0), z, 1.0));
    }

    #[test]
    fn mapped_center_is_nearest_lattice_point() {
        let l = HexLattice::new(2.5);
        let mut state = 12345u64;
        for _ in 0..2000 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x = ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 40.0;
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let y = ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 40.0;
            let p = Point::new(x, y);
            let (a, b) = l.cell_of(p);
            let c = l.center(a, b);
            assert!(l.hexagon_contains(p, c, 1.0));
            for da in -2..=2 {
                for db in -2..=2 {
                    assert!(p.dist(c) <= p.dist(l.center(a + da, b + db)));
                }
            }
        }
    }
}
