//! The result of a resolution: per-point lifetimes, stoppers and impacts.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::point_process::MarkedConfiguration;

/// How a grain stopped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub stopper: usize,
    pub attacker_branch: usize,
    pub blocker_branch: usize,
    pub impact: Point,
    /// Blocker growth time at which the impact point was deposited.
    pub blocker_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Outcome {
    /// Never stopped by this configuration.
    Unstopped,
    Stopped(Stop),
    /// Cut at an externally imposed horizon without being stopped.
    Truncated,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrainRecord {
    /// `None` in serialized form means an infinite lifetime.
    #[serde(with = "lifetime_serde")]
    pub lifetime: f64,
    pub outcome: Outcome,
}

impl GrainRecord {
    pub const UNSTOPPED: GrainRecord = GrainRecord {
        lifetime: f64::INFINITY,
        outcome: Outcome::Unstopped,
    };

    pub fn stop(&self) -> Option<&Stop> {
        match &self.outcome {
            Outcome::Stopped(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_stopped(&self) -> bool {
        matches!(self.outcome, Outcome::Stopped(_))
    }

    pub fn is_unstopped(&self) -> bool {
        matches!(self.outcome, Outcome::Unstopped)
    }
}

mod lifetime_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StoppedExploration {
    pub records: Vec<GrainRecord>,
}

pub const CSV_HEADER: &str =
    "id,x,y,branch_count,theta0,v0,lifetime,stopper_id,attacker_branch,blocker_branch,impact_x,impact_y,blocker_s";

impl StoppedExploration {
    pub fn unstopped(n: usize) -> Self {
        StoppedExploration {
            records: vec![GrainRecord::UNSTOPPED; n],
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn lifetime(&self, id: usize) -> f64 {
        self.records[id].lifetime
    }

    pub fn stopper(&self, id: usize) -> Option<usize> {
        self.records[id].stop().map(|s| s.stopper)
    }

    /// `h(x)` for every point.
    pub fn stopper_map(&self) -> Vec<Option<usize>> {
        (0..self.len()).map(|i| self.stopper(i)).collect()
    }

    pub fn stopped_count(&self) -> usize {
        self.records.iter().filter(|r| r.is_stopped()).count()
    }

    pub fn unstopped_count(&self) -> usize {
        self.records.iter().filter(|r| r.is_unstopped()).count()
    }

    /// Head of ray branch `branch` of point `id` at the end of its life, or at
    /// time `clip` if the grain never stops.
    pub fn ray_end(&self, config: &MarkedConfiguration, id: usize, branch: usize, clip: f64) -> Point {
        let p = &config.points[id];
        let m = &p.branches[branch];
        let t = self.records[id].lifetime.min(clip);
        p.germ + Point::from_angle(m.theta) * (m.speed * t)
    }

    /// One row per point in the contractual column order.
    pub fn to_csv(&self, config: &MarkedConfiguration) -> String {
        let mut out = String::with_capacity(64 * (self.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for (rec, p) in self.records.iter().zip(&config.points) {
            let (theta0, v0) = match p.branches.first() {
                Some(b) => (b.theta.to_string(), b.speed.to_string()),
                None => (String::new(), String::new()),
            };
            let lifetime = if rec.lifetime.is_finite() {
                rec.lifetime.to_string()
            } else {
                "inf".to_string()
            };
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},",
                p.id, p.germ.x, p.germ.y, p.branch_count, theta0, v0, lifetime
            );
            match rec.stop() {
                Some(s) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        s.stopper, s.attacker_branch, s.blocker_branch, s.impact.x, s.impact.y, s.blocker_s
                    );
                }
                None => out.push_str(",,,,,\n"),
            }
        }
        out
    }
}
