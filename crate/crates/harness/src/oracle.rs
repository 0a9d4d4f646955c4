//! Brute-force time-stepping resolution of ray models, kept independent of
//! the event-driven engine so the two can check each other.
//!
//! Every head advances synchronously in steps of `dt`. Within a step, each
//! alive head's swept piece is intersected with every other grain's deposit
//! and the earliest causal contact in the whole system is applied, repeatedly,
//! until none is left. Steps in which no contact is geometrically possible
//! are skipped in whole multiples of `dt`.

use serde::{Deserialize, Serialize};
use stopped_grains::exploration::{GrainRecord, Outcome, Stop, StoppedExploration};
use stopped_grains::geometry::Point;
use stopped_grains::MarkedConfiguration;

use crate::error::{HarnessError, Result};

pub const ORACLE_MAX_POINTS: usize = 200;

/// Hard bound on processed steps.
const MAX_STEPS: u64 = 50_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRun {
    pub exploration: StoppedExploration,
    /// Steps actually processed (skipped stretches count once).
    pub steps: u64,
    /// Points whose stopping contact had a rival with a different blocker
    /// within the step tolerance.
    pub near_ties: Vec<usize>,
}

#[derive(Clone, Copy)]
struct Arm {
    grain: usize,
    branch: usize,
    origin: Point,
    /// Velocity vector.
    vel: Point,
    speed: f64,
}

impl Arm {
    fn at(&self, t: f64) -> Point {
        Point::new(self.origin.x + self.vel.x * t, self.origin.y + self.vel.y * t)
    }
}

fn cross(a: Point, b: Point) -> f64 {
    a.x * b.y - a.y * b.x
}

fn sub(a: Point, b: Point) -> Point {
    Point::new(a.x - b.x, a.y - b.y)
}

/// Parameters `(a, b)` with `p + a·d = q + b·e`, or `None` when parallel.
fn line_params(p: Point, d: Point, q: Point, e: Point) -> Option<(f64, f64)> {
    let den = cross(d, e);
    if den == 0.0 {
        return None;
    }
    let w = sub(q, p);
    Some((cross(w, e) / den, cross(w, d) / den))
}

fn dist_point_segment(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let l2 = ab.x * ab.x + ab.y * ab.y;
    let u = if l2 > 0.0 {
        (((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / l2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let c = Point::new(a.x + ab.x * u, a.y + ab.y * u);
    ((p.x - c.x).powi(2) + (p.y - c.y).powi(2)).sqrt()
}

struct State<'a> {
    arms: &'a [Arm],
    life: Vec<f64>,
    records: Vec<GrainRecord>,
}

impl State<'_> {
    fn alive(&self, g: usize) -> bool {
        self.life[g].is_infinite()
    }

    /// Can the head of `x` at time `t` still meet the full trajectory of `y`?
    fn may_meet(&self, x: &Arm, y: &Arm, t: f64) -> bool {
        let head = x.at(t);
        let reach = self.life[y.grain];
        match line_params(head, x.vel, y.origin, y.vel) {
            Some((a, b)) => a >= 0.0 && b >= 0.0 && b <= reach,
            None => {
                // parallel: only a collinear deposit ahead of the head matters
                if cross(sub(y.origin, head), x.vel) != 0.0 {
                    return false;
                }
                let ahead = |p: Point| (p.x - head.x) * x.vel.x + (p.y - head.y) * x.vel.y >= 0.0;
                if ahead(y.origin) {
                    return true;
                }
                if reach.is_finite() {
                    ahead(y.at(reach))
                } else {
                    y.vel.x * x.vel.x + y.vel.y * x.vel.y > 0.0
                }
            }
        }
    }

    /// Time before which no head can touch any deposit, or `None` when no
    /// alive head can ever be stopped again.
    fn safe_gap(&self, t: f64) -> Option<f64> {
        let mut gap: Option<f64> = None;
        for x in self.arms.iter().filter(|a| self.alive(a.grain)) {
            let head = x.at(t);
            for y in self.arms.iter().filter(|a| a.grain != x.grain) {
                if !self.may_meet(x, y, t) {
                    continue;
                }
                let end = y.at(self.life[y.grain].min(t));
                let d_body = dist_point_segment(head, y.origin, end);
                let bound = if self.alive(y.grain) {
                    let d_head = ((head.x - end.x).powi(2) + (head.y - end.y).powi(2)).sqrt();
                    (d_body / x.speed).min(d_head / (x.speed + y.speed))
                } else {
                    d_body / x.speed
                };
                gap = Some(gap.map_or(bound, |g: f64| g.min(bound)));
            }
        }
        gap
    }

    /// Earliest causal contact in `[t, t + dt]` over all alive heads, plus
    /// whether it has a rival with another blocker within `dt·(v_x + v_y)`.
    fn earliest(&self, t: f64, dt: f64) -> Option<(f64, usize, Arm, Arm, Point, f64, bool)> {
        let t1 = t + dt;
        let mut best: Option<(f64, usize, Arm, Arm, Point, f64)> = None;
        let mut contacts: Vec<(usize, f64, usize)> = Vec::new();
        for x in self.arms.iter().filter(|a| self.alive(a.grain)) {
            let p0 = x.at(t);
            let sweep = sub(x.at(t1), p0);
            for y in self.arms.iter().filter(|a| a.grain != x.grain) {
                let reach = self.life[y.grain].min(t1);
                let Some((a, b)) = line_params(p0, sweep, y.origin, y.vel) else { continue };
                if !(0.0..=1.0).contains(&a) || b < 0.0 || b > reach {
                    continue;
                }
                let tc = t + a * dt;
                // deposit time of the touched point is b itself
                if !(tc > 0.0 && b < tc && b < self.life[y.grain]) {
                    continue;
                }
                contacts.push((x.grain, tc, y.grain));
                let better = match &best {
                    None => true,
                    Some((bt, bg, ..)) => tc < *bt || (tc == *bt && x.grain < *bg),
                };
                if better {
                    best = Some((tc, x.grain, *x, *y, x.at(tc), b));
                }
            }
        }
        best.map(|(tc, g, x, y, c, s)| {
            let tol = dt * (x.speed + y.speed);
            let tie = contacts
                .iter()
                .any(|&(xg, t2, yg)| xg == g && yg != y.grain && (t2 - tc).abs() <= tol);
            (tc, g, x, y, c, s, tie)
        })
    }
}

/// Resolves a ray configuration of at most [`ORACLE_MAX_POINTS`] points.
pub fn oracle_resolve(config: &MarkedConfiguration, dt: f64) -> Result<OracleRun> {
    if config.len() > ORACLE_MAX_POINTS {
        return Err(HarnessError::OracleRefused(format!(
            "{} points exceed the oracle cap of {ORACLE_MAX_POINTS}",
            config.len()
        )));
    }
    if !config.marks.model.is_ray() {
        return Err(HarnessError::OracleRefused("the oracle handles ray models only".into()));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(HarnessError::Validation(format!("oracle dt must be positive, got {dt}")));
    }
    let arms: Vec<Arm> = config
        .points
        .iter()
        .flat_map(|p| {
            p.branches.iter().enumerate().map(move |(b, m)| Arm {
                grain: p.id,
                branch: b,
                origin: p.germ,
                vel: Point::new(m.theta.cos() * m.speed, m.theta.sin() * m.speed),
                speed: m.speed,
            })
        })
        .collect();
    let n = config.len();
    let mut st = State {
        arms: &arms,
        life: vec![f64::INFINITY; n],
        records: vec![GrainRecord::UNSTOPPED; n],
    };
    let mut near_ties = Vec::new();
    let mut k: u64 = 0;
    let mut steps: u64 = 0;
    while st.life.iter().any(|l| l.is_infinite()) {
        let t = k as f64 * dt;
        let Some(gap) = st.safe_gap(t) else { break };
        let skip = (gap / dt).floor();
        if skip >= 1.0 {
            k += skip as u64;
        }
        let t = k as f64 * dt;
        while let Some((tc, g, x, y, c, s, tie)) = st.earliest(t, dt) {
            st.life[g] = tc;
            st.records[g] = GrainRecord {
                lifetime: tc,
                outcome: Outcome::Stopped(Stop {
                    stopper: y.grain,
                    attacker_branch: x.branch,
                    blocker_branch: y.branch,
                    impact: c,
                    blocker_s: s,
                }),
            };
            if tie {
                near_ties.push(g);
            }
        }
        k += 1;
        steps += 1;
        if steps > MAX_STEPS {
            return Err(HarnessError::OracleRefused(format!("no convergence after {MAX_STEPS} steps")));
        }
    }
    near_ties.sort_unstable();
    near_ties.dedup();
    Ok(OracleRun {
        exploration: StoppedExploration { records: st.records },
        steps,
        near_ties,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use stopped_grains::Window;

    #[test]
    fn three_point_chain() {
        let w = Window::new(-10.0, 10.0, -10.0, 10.0, 0.0).unwrap();
        let c = MarkedConfiguration::unilateral(
            w,
            &[(0.0, 0.0, 0.0, 1.0), (2.0, -1.0, PI / 2.0, 1.0), (5.0, 3.0, PI, 1.0)],
        );
        let r = oracle_resolve(&c, 1e-3).unwrap();
        let f: Vec<f64> = (0..3).map(|i| r.exploration.lifetime(i)).collect();
        assert!((f[0] - 2.0).abs() <= 2e-3 && (f[1] - 4.0).abs() <= 2e-3 && f[2].is_infinite(), "{f:?}");
        assert_eq!(r.exploration.stopper(0), Some(1));
        assert_eq!(r.exploration.stopper(1), Some(2));
    }

    #[test]
    fn single_point_and_cap() {
        let w = Window::square(1.0, 0.0).unwrap();
        let c = MarkedConfiguration::unilateral(w, &[(0.5, 0.5, 1.0, 1.0)]);
        assert!(oracle_resolve(&c, 1e-3).unwrap().exploration.lifetime(0).is_infinite());
        let rows: Vec<_> = (0..201).map(|i| (i as f64 * 0.001, 0.5, 0.3, 1.0)).collect();
        let big = MarkedConfiguration::unilateral(w, &rows);
        assert!(matches!(oracle_resolve(&big, 1e-3), Err(HarnessError::OracleRefused(_))));
    }
}
