//! The outdegree-one graph `x → h(x)` of a stopped exploration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exploration::StoppedExploration;
use crate::geometry::{Aabb, Point};
use crate::point_process::{MarkedConfiguration, Window};
use crate::segment_engine::verify_hardcore;
use crate::union_find::UnionFind;

/// Partial map from each node to its stopper.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalGraph {
    next: Vec<Option<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// The orbit closed on a cycle.
    Loop,
    /// The orbit reached a node without out-edge.
    Unstopped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForwardSet {
    pub nodes: Vec<usize>,
    pub end: Termination,
}

impl FunctionalGraph {
    pub fn new(next: Vec<Option<usize>>) -> Result<Self> {
        let n = next.len();
        for (x, h) in next.iter().enumerate() {
            match h {
                Some(y) if *y == x => return Err(Error::Precondition(format!("self-loop at {x}"))),
                Some(y) if *y >= n => return Err(Error::Precondition(format!("edge {x} -> {y} out of range"))),
                _ => {}
            }
        }
        Ok(FunctionalGraph { next })
    }

    pub fn from_exploration(expl: &StoppedExploration) -> Result<Self> {
        FunctionalGraph::new(expl.stopper_map())
    }

    pub fn len(&self) -> usize {
        self.next.len()
    }

    pub fn is_empty(&self) -> bool {
        self.next.is_empty()
    }

    pub fn out(&self, x: usize) -> Option<usize> {
        self.next[x]
    }

    pub fn reversed(&self) -> Vec<Vec<usize>> {
        let mut rev = vec![Vec::new(); self.len()];
        for (x, h) in self.next.iter().enumerate() {
            if let Some(y) = h {
                rev[*y].push(x);
            }
        }
        rev
    }

    /// Weak component label of every node (dense, by first appearance).
    pub fn weak_components(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.len());
        for (x, h) in self.next.iter().enumerate() {
            if let Some(y) = h {
                uf.union(x, *y);
            }
        }
        uf.labels()
    }
}

/// Orbit of `x` under `h` up to the first repeated node or a node without
/// out-edge.
pub fn forward_set(g: &FunctionalGraph, x: usize) -> ForwardSet {
    let mut seen = std::collections::HashSet::new();
    let mut nodes = vec![x];
    seen.insert(x);
    let mut cur = x;
    loop {
        match g.out(cur) {
            None => return ForwardSet { nodes, end: Termination::Unstopped },
            Some(y) if seen.contains(&y) => return ForwardSet { nodes, end: Termination::Loop },
            Some(y) => {
                seen.insert(y);
                nodes.push(y);
                cur = y;
            }
        }
    }
}

/// Every cycle once, rotated to start at its smallest node, sorted by that
/// node. Linear time.
pub fn find_loops(g: &FunctionalGraph) -> Vec<Vec<usize>> {
    const WHITE: u8 = 0;
    const ACTIVE: u8 = 1;
    const DONE: u8 = 2;
    let n = g.len();
    let mut color = vec![WHITE; n];
    let mut loops = Vec::new();
    let mut path = Vec::new();
    for start in 0..n {
        if color[start] != WHITE {
            continue;
        }
        path.clear();
        let mut cur = Some(start);
        while let Some(x) = cur {
            match color[x] {
                WHITE => {
                    color[x] = ACTIVE;
                    path.push(x);
                    cur = g.out(x);
                }
                ACTIVE => {
                    let pos = path.iter().position(|&p| p == x).expect("active node on path");
                    let mut cyc = path[pos..].to_vec();
                    let min_at = cyc.iter().enumerate().min_by_key(|(_, v)| **v).map(|(i, _)| i).unwrap_or(0);
                    cyc.rotate_left(min_at);
                    loops.push(cyc);
                    cur = None;
                }
                _ => cur = None,
            }
        }
        for &p in &path {
            color[p] = DONE;
        }
    }
    loops.sort_by_key(|c| c[0]);
    loops
}

/// `{y : x ∈ forward_set(y)}`, sorted.
pub fn backward_set(g: &FunctionalGraph, x: usize) -> Vec<usize> {
    backward_with(&g.reversed(), x)
}

fn backward_with(rev: &[Vec<usize>], x: usize) -> Vec<usize> {
    let mut seen = vec![false; rev.len()];
    let mut stack = vec![x];
    seen[x] = true;
    let mut out = Vec::new();
    while let Some(y) = stack.pop() {
        out.push(y);
        for &z in &rev[y] {
            if !seen[z] {
                seen[z] = true;
                stack.push(z);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Forward set union backward set, sorted.
pub fn cluster(g: &FunctionalGraph, x: usize) -> Vec<usize> {
    let mut c = backward_set(g, x);
    c.extend(forward_set(g, x).nodes);
    c.sort_unstable();
    c.dedup();
    c
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub members: Vec<usize>,
    /// The unique cycle of a fully stopped component.
    pub cycle: Option<Vec<usize>>,
    /// Number of cycles found (must be 1 when fully stopped, 0 otherwise).
    pub cycles: usize,
    pub fully_stopped: bool,
    /// Longest distance from a member to the cycle or to the unstopped root.
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub components: Vec<ComponentReport>,
    pub size_histogram: BTreeMap<usize, usize>,
    pub loop_size_histogram: BTreeMap<usize, usize>,
}

pub fn cluster_report(g: &FunctionalGraph) -> ClusterReport {
    let labels = g.weak_components();
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut members = vec![Vec::new(); k];
    for (x, &l) in labels.iter().enumerate() {
        members[l].push(x);
    }
    let loops = find_loops(g);
    let mut cycles: Vec<Vec<Vec<usize>>> = vec![Vec::new(); k];
    for c in loops {
        cycles[labels[c[0]]].push(c);
    }
    // Distance to the terminal set (cycle nodes or unstopped nodes).
    let mut on_cycle = vec![false; g.len()];
    for cs in &cycles {
        for c in cs {
            for &x in c {
                on_cycle[x] = true;
            }
        }
    }
    let rev = g.reversed();
    let mut depth = vec![usize::MAX; g.len()];
    let mut frontier: Vec<usize> = (0..g.len()).filter(|&x| on_cycle[x] || g.out(x).is_none()).collect();
    for &x in &frontier {
        depth[x] = 0;
    }
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &y in &frontier {
            for &z in &rev[y] {
                if depth[z] == usize::MAX {
                    depth[z] = depth[y] + 1;
                    next.push(z);
                }
            }
        }
        frontier = next;
    }
    let mut size_histogram = BTreeMap::new();
    let mut loop_size_histogram = BTreeMap::new();
    let components = members
        .into_iter()
        .zip(cycles)
        .map(|(m, cs)| {
            *size_histogram.entry(m.len()).or_insert(0) += 1;
            for c in &cs {
                *loop_size_histogram.entry(c.len()).or_insert(0) += 1;
            }
            ComponentReport {
                fully_stopped: m.iter().all(|&x| g.out(x).is_some()),
                depth: m.iter().map(|&x| depth[x]).max().unwrap_or(0),
                cycles: cs.len(),
                cycle: cs.into_iter().next(),
                members: m,
            }
        })
        .collect();
    ClusterReport { components, size_histogram, loop_size_histogram }
}

/// Structural facts every outdegree-one graph of an exploration must satisfy.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StructureCheck {
    pub self_loops: usize,
    /// Fully stopped components without exactly one cycle, plus components
    /// with an unstopped node that still contain a cycle.
    pub bad_components: usize,
    pub min_loop_len: Option<usize>,
}

impl StructureCheck {
    pub fn ok(&self) -> bool {
        self.self_loops == 0 && self.bad_components == 0 && self.min_loop_len.is_none_or(|l| l >= 2)
    }
}

pub fn check_structure(next: &[Option<usize>]) -> StructureCheck {
    let self_loops = next.iter().enumerate().filter(|(x, h)| **h == Some(*x)).count();
    let cleaned: Vec<Option<usize>> = next
        .iter()
        .enumerate()
        .map(|(x, h)| h.filter(|y| *y != x && *y < next.len()))
        .collect();
    let g = FunctionalGraph { next: cleaned };
    let r = cluster_report(&g);
    let bad_components = r
        .components
        .iter()
        .filter(|c| if c.fully_stopped { c.cycles != 1 } else { c.cycles != 0 })
        .count();
    let min_loop_len = if self_loops > 0 {
        Some(1)
    } else {
        r.loop_size_histogram.keys().next().copied()
    };
    StructureCheck { self_loops, bad_components, min_loop_len }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricComponents {
    pub labels: Vec<usize>,
    pub count: usize,
    /// Contacts between realized grains not explained by a recorded stop.
    pub contact_violations: usize,
    /// False when the grains are not rays and no geometric check ran.
    pub cross_checked: bool,
}

/// Components of the union of realized grains. Grains meet only at stop
/// impacts, so these are the weak components of the stopper graph; for ray
/// grains the claim is re-checked geometrically.
pub fn geometric_components(expl: &StoppedExploration, config: &MarkedConfiguration, tol: f64) -> Result<GeometricComponents> {
    let g = FunctionalGraph::from_exploration(expl)?;
    let labels = g.weak_components();
    let count = labels.iter().copied().max().map_or(0, |m| m + 1);
    let (contact_violations, cross_checked) = if config.marks.model.is_ray() {
        let rep = verify_hardcore(expl, config, tol);
        if !rep.ok() {
            log::warn!("{} grain contacts without a recorded stop", rep.violations.len());
        }
        (rep.violations.len(), true)
    } else {
        (0, false)
    };
    Ok(GeometricComponents { labels, count, contact_violations, cross_checked })
}

/// Liang-Barsky clipping of segment `a-b` to `bx`.
pub fn clip_segment(a: Point, b: Point, bx: &Aabb) -> Option<(Point, Point)> {
    let d = b - a;
    let (mut u0, mut u1) = (0.0f64, 1.0f64);
    for (p, q) in [
        (-d.x, a.x - bx.min.x),
        (d.x, bx.max.x - a.x),
        (-d.y, a.y - bx.min.y),
        (d.y, bx.max.y - a.y),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                u0 = u0.max(r);
            } else {
                u1 = u1.min(r);
            }
        }
    }
    (u0 <= u1).then(|| (a + d * u0, a + d * u1))
}

/// Bounding box of each ray grain's realized geometry inside the window.
pub fn ray_extents(expl: &StoppedExploration, config: &MarkedConfiguration) -> Vec<Aabb> {
    let bx = config.window.aabb();
    let clip = bx.diagonal() + 1.0;
    config
        .points
        .iter()
        .map(|p| {
            let mut e = Aabb::empty();
            if bx.contains(p.germ) {
                e.include(p.germ);
            }
            for (b, m) in p.branches.iter().enumerate() {
                let end = expl.ray_end(config, p.id, b, clip / m.speed);
                if let Some((u, v)) = clip_segment(p.germ, end, &bx) {
                    e.include(u);
                    e.include(v);
                }
            }
            e
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub size: usize,
    pub loop_size: Option<usize>,
    pub spans: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PercolationStats {
    pub components: Vec<ComponentSummary>,
    /// Largest share of core points held by a single component.
    pub largest_core_fraction: f64,
    pub spanning: bool,
    pub n_loops: usize,
    pub size_histogram: BTreeMap<usize, usize>,
    pub loop_size_histogram: BTreeMap<usize, usize>,
}

/// A component spans when its realized geometry reaches two opposite sides
/// of the core; it is connected, so it then crosses the whole core.
pub fn percolation_stats(
    g: &FunctionalGraph,
    extents: &[Aabb],
    germs: &[Point],
    window: &Window,
) -> PercolationStats {
    let core = window.core();
    let report = cluster_report(g);
    let core_total = germs.iter().filter(|p| core.contains(**p)).count();
    let mut largest = 0usize;
    let mut spanning = false;
    let components: Vec<ComponentSummary> = report
        .components
        .iter()
        .map(|c| {
            let in_core = c.members.iter().filter(|&&x| core.contains(germs[x])).count();
            largest = largest.max(in_core);
            let mut e = Aabb::empty();
            for &x in &c.members {
                e = e.union(&extents[x]);
            }
            let spans = !e.is_empty()
                && ((e.min.x <= core.xmin && e.max.x >= core.xmax) || (e.min.y <= core.ymin && e.max.y >= core.ymax));
            spanning |= spans;
            ComponentSummary {
                size: c.members.len(),
                loop_size: c.cycle.as_ref().map(Vec::len),
                spans,
            }
        })
        .collect();
    PercolationStats {
        n_loops: report.loop_size_histogram.values().sum(),
        components,
        largest_core_fraction: if core_total == 0 { 0.0 } else { largest as f64 / core_total as f64 },
        spanning,
        size_histogram: report.size_histogram,
        loop_size_histogram: report.loop_size_histogram,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(next: &[Option<usize>]) -> FunctionalGraph {
        FunctionalGraph::new(next.to_vec()).unwrap()
    }

    #[test]
    fn forward_and_backward() {
        let h = g(&[Some(1), Some(2), Some(0), Some(0)]);
        let f = forward_set(&h, 3);
        assert_eq!(f.nodes, vec![3, 0, 1, 2]);
        assert_eq!(f.end, Termination::Loop);
        assert_eq!(forward_set(&h, 1).nodes, vec![1, 2, 0]);
        assert_eq!(backward_set(&h, 0), vec![0, 1, 2, 3]);
        assert_eq!(backward_set(&h, 3), vec![3]);
        let single = g(&[None]);
        assert_eq!(forward_set(&single, 0), ForwardSet { nodes: vec![0], end: Termination::Unstopped });
    }

    #[test]
    fn loops() {
        assert_eq!(find_loops(&g(&[Some(1), Some(0)])), vec![vec![0, 1]]);
        assert!(find_loops(&g(&[Some(1), Some(2), None])).is_empty());
        // Two trees hanging on one 3-cycle.
        let h = g(&[Some(1), Some(2), Some(0), Some(0), Some(3), Some(2), Some(5)]);
        assert_eq!(find_loops(&h), vec![vec![0, 1, 2]]);
        let rotated = g(&[None, Some(3), Some(1), Some(2)]);
        assert_eq!(find_loops(&rotated), vec![vec![1, 3, 2]]);
        assert!(FunctionalGraph::new(vec![Some(0)]).is_err());
    }

    #[test]
    fn structure() {
        let r = check_structure(&[Some(1), Some(0), Some(0), None, Some(3)]);
        assert!(r.ok(), "{r:?}");
        assert_eq!(r.min_loop_len, Some(2));
        assert!(!check_structure(&[Some(0)]).ok());
    }

    #[test]
    fn clipping() {
        let bx = Aabb::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        let (u, v) = clip_segment(Point::new(0.5, 0.5), Point::new(3.0, 0.5), &bx).unwrap();
        assert_eq!(u, Point::new(0.5, 0.5));
        assert_eq!(v, Point::new(1.0, 0.5));
        assert!(clip_segment(Point::new(2.0, 2.0), Point::new(3.0, 2.0), &bx).is_none());
    }
}
