//! First crossing of two growing straight branches.

use super::{Point, Tolerances};
use serde::{Deserialize, Serialize};

/// A ray branch `origin + t·speed·dir`, `t ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowingBranch {
    pub origin: Point,
    /// Unit direction.
    pub dir: Point,
    pub speed: f64,
    pub owner: usize,
    pub branch: usize,
}

impl GrowingBranch {
    pub fn new(origin: Point, theta: f64, speed: f64, owner: usize, branch: usize) -> Self {
        GrowingBranch {
            origin,
            dir: Point::from_angle(theta),
            speed,
            owner,
            branch,
        }
    }

    /// Head position after growing for time `t`.
    pub fn head(&self, t: f64) -> Point {
        self.origin + self.dir * (self.speed * t)
    }

    pub fn velocity(&self) -> Point {
        self.dir * self.speed
    }
}

/// The attacker's head reaches a point of the blocker's track.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HitCandidate {
    pub attacker: usize,
    pub attacker_branch: usize,
    pub blocker: usize,
    pub blocker_branch: usize,
    /// Attacker growth time at the impact.
    pub t: f64,
    /// Blocker growth time at which the impact point was deposited.
    pub s: f64,
    pub point: Point,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HitOutcome {
    Hit(HitCandidate),
    Miss,
    /// Parallel tracks on a common line; treated as a miss.
    DegenerateCollinear,
}

/// Solves `t·v_a·u_a − s·v_b·u_b = ξ_b − ξ_a` and keeps the solution only when the
/// blocker deposited the crossing point strictly before the attacker gets
/// there (`0 ≤ s < t`).
pub fn solve_hit(attacker: &GrowingBranch, blocker: &GrowingBranch, tol: &Tolerances) -> HitOutcome {
    let a = attacker.velocity();
    let b = blocker.velocity();
    let d = blocker.origin - attacker.origin;
    let sin = attacker.dir.cross(blocker.dir);
    if sin.abs() < tol.determinant {
        let offset = d.cross(attacker.dir).abs();
        if offset <= tol.coincidence {
            return HitOutcome::DegenerateCollinear;
        }
        return HitOutcome::Miss;
    }
    let det = a.cross(b);
    let t = d.cross(b) / det;
    let s = d.cross(a) / det;
    if t > 0.0 && s >= 0.0 && s < t {
        HitOutcome::Hit(HitCandidate {
            attacker: attacker.owner,
            attacker_branch: attacker.branch,
            blocker: blocker.owner,
            blocker_branch: blocker.branch,
            t,
            s,
            point: attacker.head(t),
        })
    } else {
        HitOutcome::Miss
    }
}

/// Convenience wrapper: `Some` only for a genuine hit. Degenerate collinear
/// pairs are logged.
pub fn hit_time(attacker: &GrowingBranch, blocker: &GrowingBranch) -> Option<HitCandidate> {
    match solve_hit(attacker, blocker, &Tolerances::default()) {
        HitOutcome::Hit(c) => Some(c),
        HitOutcome::Miss => None,
        HitOutcome::DegenerateCollinear => {
            log::warn!(
                "degenerate collinear tracks ({}:{}) vs ({}:{}) treated as a miss",
                attacker.owner,
                attacker.branch,
                blocker.owner,
                blocker.branch
            );
            None
        }
    }
}
