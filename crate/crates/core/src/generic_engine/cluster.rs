//! Advancing one genealogical cluster through a time step.

use crate::exploration::{GrainRecord, Outcome, Stop};
use crate::geometry::{capsule_first_contact, Aabb, GridIndex, Point};

use super::GrainState;

/// A run of consecutive trace pieces `k0..k1` of one branch, deposited before
/// the current step.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Chunk {
    pub grain: usize,
    pub branch: usize,
    pub k0: usize,
    pub k1: usize,
}

/// Read-only view shared by all clusters of a step.
pub(crate) struct StepView<'a> {
    pub grains: &'a [GrainState],
    pub records: &'a [GrainRecord],
    pub chunks: &'a [Chunk],
    pub static_grid: &'a GridIndex,
    pub dt: f64,
    pub eps: f64,
    /// Vertex index at the start of the step.
    pub k_start: usize,
    /// Vertex index at the end of the step.
    pub k_end: usize,
    pub dynamic_cell: f64,
}

/// Piece `k` of a path (from vertex `k` to `k + 1`) cut at `life`, with the
/// deposit times of its ends.
pub(crate) fn piece(path: &[Point], k: usize, dt: f64, life: f64) -> Option<(Point, Point, f64, f64)> {
    let s0 = k as f64 * dt;
    if s0 >= life || k + 1 >= path.len() {
        return None;
    }
    let s1 = (k + 1) as f64 * dt;
    if s1 > life {
        let u = (life - s0) / dt;
        return Some((path[k], path[k].lerp(path[k + 1], u), s0, life));
    }
    Some((path[k], path[k + 1], s0, s1))
}

#[derive(Clone, Copy, Debug)]
struct Contact {
    t: f64,
    branch: usize,
    blocker: usize,
    blocker_branch: usize,
    impact: Point,
    s: f64,
}

impl Contact {
    fn key(&self) -> (f64, usize, usize, usize) {
        (self.t, self.blocker, self.blocker_branch, self.branch)
    }

    fn before(&self, o: &Contact) -> bool {
        let (a, b) = (self.key(), o.key());
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)).then(a.3.cmp(&b.3)).is_lt()
    }
}

/// Earliest contact of the moving head `p0 → p1` (substep starting at `t0`)
/// with the piece `q0 → q1` deposited over `[s0, s1]`; the touched point
/// must have been deposited strictly before the contact.
#[allow(clippy::too_many_arguments)]
fn test_piece(p0: Point, p1: Point, t0: f64, dt: f64, eps: f64, q: (Point, Point, f64, f64)) -> Option<(f64, Point, f64)> {
    let (q0, q1, s0, s1) = q;
    let d = p1 - p0;
    let u = capsule_first_contact(p0, d, q0, q1, eps)?;
    let t = t0 + u * dt;
    let c = p0 + d * u;
    let axis = q1 - q0;
    let len2 = axis.norm2();
    let w = if len2 > 0.0 { ((c - q0).dot(axis) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let s = s0 + w * (s1 - s0);
    (t > 0.0 && s < t).then_some((t, q0 + axis * w, s))
}

struct Local<'a> {
    view: &'a StepView<'a>,
    members: &'a [usize],
    /// Current lifetime of each member (infinite while growing).
    life: Vec<f64>,
    /// Dynamic pieces `(member index, branch, k)`.
    pieces: Vec<(usize, usize, usize)>,
    grid: GridIndex,
}

impl Local<'_> {
    fn contact(&self, m: usize, branch: usize, k: usize, scratch: &mut Vec<usize>) -> Option<Contact> {
        let v = self.view;
        let x = self.members[m];
        let path = &v.grains[x].paths[branch];
        let (p0, p1) = (path[k], path[k + 1]);
        let t0 = k as f64 * v.dt;
        let region = Aabb::of_segment(p0, p1).dilate(v.eps);
        let mut best: Option<Contact> = None;
        let mut consider = |c: Contact| {
            if best.as_ref().is_none_or(|b| c.before(b)) {
                best = Some(c);
            }
        };
        v.static_grid.query_into(&region, scratch);
        for &ci in scratch.iter() {
            let ch = v.chunks[ci];
            if ch.grain == x {
                continue;
            }
            let owner_path = &v.grains[ch.grain].paths[ch.branch];
            let life = v.records[ch.grain].lifetime;
            for j in ch.k0..ch.k1 {
                if let Some(q) = piece(owner_path, j, v.dt, life) {
                    if let Some((t, impact, s)) = test_piece(p0, p1, t0, v.dt, v.eps, q) {
                        consider(Contact { t, branch, blocker: ch.grain, blocker_branch: ch.branch, impact, s });
                    }
                }
            }
        }
        self.grid.query_into(&region, scratch);
        for &pi in scratch.iter() {
            let (my, bb, j) = self.pieces[pi];
            if my == m {
                continue;
            }
            let y = self.members[my];
            if let Some(q) = piece(&v.grains[y].paths[bb], j, v.dt, self.life[my]) {
                if let Some((t, impact, s)) = test_piece(p0, p1, t0, v.dt, v.eps, q) {
                    consider(Contact { t, branch, blocker: y, blocker_branch: bb, impact, s });
                }
            }
        }
        best
    }

    fn head_contact(&self, m: usize, k: usize, scratch: &mut Vec<usize>) -> Option<Contact> {
        let x = self.members[m];
        let mut best: Option<Contact> = None;
        for b in 0..self.view.grains[x].paths.len() {
            if let Some(c) = self.contact(m, b, k, scratch) {
                if best.as_ref().is_none_or(|o| c.before(o)) {
                    best = Some(c);
                }
            }
        }
        best
    }
}

/// Runs the heads of `members` (sorted grain ids) through the step and
/// returns the stops that occur, in member order.
pub(crate) fn advance_cluster(view: &StepView<'_>, members: &[usize]) -> Vec<(usize, GrainRecord)> {
    let mut local = Local {
        view,
        members,
        life: vec![f64::INFINITY; members.len()],
        pieces: Vec::new(),
        grid: GridIndex::new(view.dynamic_cell),
    };
    let mut scratch = Vec::new();
    let mut stops: Vec<Option<GrainRecord>> = vec![None; members.len()];
    for k in view.k_start..view.k_end {
        let t0 = k as f64 * view.dt;
        for (m, &x) in members.iter().enumerate() {
            if local.life[m] <= t0 {
                continue;
            }
            for (b, path) in view.grains[x].paths.iter().enumerate() {
                let id = local.pieces.len();
                local.pieces.push((m, b, k));
                local.grid.insert(id, Aabb::of_segment(path[k], path[k + 1]));
            }
        }
        let mut cands: Vec<Option<Contact>> = (0..members.len())
            .map(|m| {
                if local.life[m] <= t0 {
                    None
                } else {
                    local.head_contact(m, k, &mut scratch)
                }
            })
            .collect();
        // Stop the earliest head, then repair candidates that relied on the
        // part of its trace that is no longer deposited.
        loop {
            let mut first: Option<(usize, Contact)> = None;
            for (m, c) in cands.iter().enumerate() {
                if let Some(c) = c {
                    let earlier = match &first {
                        None => true,
                        Some((fm, fc)) => c.t.total_cmp(&fc.t).then(members[m].cmp(&members[*fm])).then(c.blocker.cmp(&fc.blocker)).is_lt(),
                    };
                    if earlier {
                        first = Some((m, *c));
                    }
                }
            }
            let Some((m, c)) = first else { break };
            local.life[m] = c.t;
            cands[m] = None;
            stops[m] = Some(GrainRecord {
                lifetime: c.t,
                outcome: Outcome::Stopped(Stop {
                    stopper: c.blocker,
                    attacker_branch: c.branch,
                    blocker_branch: c.blocker_branch,
                    impact: c.impact,
                    blocker_s: c.s,
                }),
            });
            let x = members[m];
            for other in 0..members.len() {
                if let Some(oc) = cands[other] {
                    if oc.blocker == x && oc.s >= c.t {
                        cands[other] = local.head_contact(other, k, &mut scratch);
                    }
                }
            }
        }
    }
    members
        .iter()
        .zip(stops)
        .filter_map(|(&g, r)| r.map(|r| (g, r)))
        .collect()
}
