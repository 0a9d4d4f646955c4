//! Ball-overlap graph between alive grains over one time step.

use serde::{Deserialize, Serialize};

use crate::geometry::{Aabb, GridIndex, Point};
use crate::union_find::UnionFind;

/// Particles of one alive grain and the common radius of their balls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrainBalls {
    pub grain: usize,
    pub centers: Vec<Point>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenealogicalGraph {
    /// Grain ids of the vertices, in input order.
    pub vertices: Vec<usize>,
    /// Edges as sorted pairs of grain ids, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Components as sorted grain-id lists, ordered by smallest member.
    pub components: Vec<Vec<usize>>,
}

impl GenealogicalGraph {
    pub fn max_component(&self) -> usize {
        self.components.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Two grains are adjacent iff some pair of their closed balls intersects.
pub fn build_genealogical_graph(grains: &[GrainBalls]) -> GenealogicalGraph {
    let vertices: Vec<usize> = grains.iter().map(|g| g.grain).collect();
    let mut balls = Vec::new();
    for (v, g) in grains.iter().enumerate() {
        for c in &g.centers {
            balls.push((v, *c, g.radius));
        }
    }
    let mean_r = if balls.is_empty() {
        1.0
    } else {
        balls.iter().map(|b| b.2).sum::<f64>() / balls.len() as f64
    };
    let cell = (2.0 * mean_r).max(1e-9);
    let grid = GridIndex::build(
        balls.iter().enumerate().map(|(i, (_, c, r))| (i, Aabb::of_point(*c).dilate(*r))),
        cell,
    );
    let mut uf = UnionFind::new(grains.len());
    let mut edges = Vec::new();
    let mut cands = Vec::new();
    for (i, &(vi, ci, ri)) in balls.iter().enumerate() {
        grid.query_into(&Aabb::of_point(ci).dilate(ri), &mut cands);
        for &j in &cands {
            let (vj, cj, rj) = balls[j];
            if j <= i || vj == vi {
                continue;
            }
            if ci.dist(cj) <= ri + rj {
                uf.union(vi, vj);
                let (a, b) = (vertices[vi].min(vertices[vj]), vertices[vi].max(vertices[vj]));
                edges.push((a, b));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let mut components: Vec<Vec<usize>> = uf
        .components()
        .into_iter()
        .map(|c| {
            let mut ids: Vec<usize> = c.into_iter().map(|v| vertices[v]).collect();
            ids.sort_unstable();
            ids
        })
        .collect();
    components.sort_by_key(|c| c[0]);
    GenealogicalGraph { vertices, edges, components }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(grain: usize, x: f64, y: f64, r: f64) -> GrainBalls {
        GrainBalls { grain, centers: vec![Point::new(x, y)], radius: r }
    }

    #[test]
    fn tangency_counts() {
        let g = build_genealogical_graph(&[ball(0, 0.0, 0.0, 1.0), ball(1, 3.0, 0.0, 1.0)]);
        assert!(g.edges.is_empty());
        let g = build_genealogical_graph(&[ball(0, 0.0, 0.0, 1.0), ball(1, 2.0, 0.0, 1.0)]);
        assert_eq!(g.edges, vec![(0, 1)]);
    }

    #[test]
    fn chain_cluster_without_stopped_grain() {
        // x4 is stopped and therefore not a vertex.
        let g = build_genealogical_graph(&[
            ball(1, 0.0, 0.0, 0.6),
            ball(2, 1.0, 0.0, 0.6),
            ball(3, 2.0, 0.0, 0.6),
        ]);
        assert_eq!(g.components, vec![vec![1, 2, 3]]);
        assert_eq!(g.max_component(), 3);
    }

    #[test]
    fn multi_branch_balls() {
        let a = GrainBalls { grain: 0, centers: vec![Point::new(0.0, 0.0), Point::new(10.0, 0.0)], radius: 0.5 };
        let b = ball(1, 10.9, 0.0, 0.5);
        assert_eq!(build_genealogical_graph(&[a, b]).edges, vec![(0, 1)]);
    }
}
