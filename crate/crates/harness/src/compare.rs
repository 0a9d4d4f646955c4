//! Point-by-point comparison of two explorations of the same configuration.

use serde::{Deserialize, Serialize};
use stopped_grains::{MarkedConfiguration, StoppedExploration};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum ToleranceRule {
    Absolute { tol: f64 },
    /// `dt·(v_attacker + v_blocker)` per stopped point.
    DtScaled { dt: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparePolicy {
    pub rule: ToleranceRule,
    /// Share of reference-stopped points whose lifetimes must agree.
    pub min_within: f64,
    /// Share of reference-stopped points whose stoppers must agree.
    pub min_stopper_match: f64,
}

impl ComparePolicy {
    pub fn exact(tol: f64) -> Self {
        ComparePolicy {
            rule: ToleranceRule::Absolute { tol },
            min_within: 1.0,
            min_stopper_match: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub points: usize,
    /// Points stopped in the reference exploration.
    pub compared: usize,
    pub within: usize,
    pub stopper_matches: usize,
    pub max_error: f64,
    pub mean_error: f64,
    /// Lifetime deltas `b - a` for every point; null when both are infinite.
    pub deltas: Vec<Option<f64>>,
    pub lifetime_failures: Vec<usize>,
    pub stopper_mismatches: Vec<usize>,
    /// Points stopped in exactly one of the two.
    pub status_mismatches: Vec<usize>,
    pub pass: bool,
}

impl DiffReport {
    pub fn within_fraction(&self) -> f64 {
        if self.compared == 0 { 1.0 } else { self.within as f64 / self.compared as f64 }
    }

    pub fn stopper_fraction(&self) -> f64 {
        if self.compared == 0 { 1.0 } else { self.stopper_matches as f64 / self.compared as f64 }
    }
}

/// Compares `b` against the reference `a`. Tolerances are evaluated at the
/// reference stops.
pub fn compare(
    a: &StoppedExploration,
    b: &StoppedExploration,
    config: &MarkedConfiguration,
    policy: &ComparePolicy,
) -> Result<DiffReport> {
    if a.len() != b.len() || a.len() != config.len() {
        return Err(HarnessError::Compare(format!(
            "point ids differ: {} vs {} (configuration has {})",
            a.len(),
            b.len(),
            config.len()
        )));
    }
    let mut r = DiffReport {
        points: a.len(),
        compared: 0,
        within: 0,
        stopper_matches: 0,
        max_error: 0.0,
        mean_error: 0.0,
        deltas: Vec::with_capacity(a.len()),
        lifetime_failures: Vec::new(),
        stopper_mismatches: Vec::new(),
        status_mismatches: Vec::new(),
        pass: false,
    };
    let mut err_sum = 0.0;
    for i in 0..a.len() {
        let (ra, rb) = (&a.records[i], &b.records[i]);
        let (la, lb) = (ra.lifetime, rb.lifetime);
        r.deltas.push(if la.is_infinite() && lb.is_infinite() { None } else { Some(lb - la) });
        if ra.is_stopped() != rb.is_stopped() {
            r.status_mismatches.push(i);
        }
        let Some(stop) = ra.stop() else { continue };
        r.compared += 1;
        let tol = match policy.rule {
            ToleranceRule::Absolute { tol } => tol,
            ToleranceRule::DtScaled { dt } => {
                let va = config.points[i].branches.get(stop.attacker_branch).map_or(0.0, |m| m.speed);
                let vb = config.points[stop.stopper].branches.get(stop.blocker_branch).map_or(0.0, |m| m.speed);
                dt * (va + vb)
            }
        };
        let err = (lb - la).abs();
        if err.is_finite() {
            r.max_error = r.max_error.max(err);
            err_sum += err;
        } else {
            r.max_error = f64::INFINITY;
        }
        if err <= tol {
            r.within += 1;
        } else {
            r.lifetime_failures.push(i);
        }
        if b.stopper(i) == Some(stop.stopper) {
            r.stopper_matches += 1;
        } else {
            r.stopper_mismatches.push(i);
        }
    }
    r.mean_error = if r.compared == 0 { 0.0 } else { err_sum / r.compared as f64 };
    r.pass = r.within_fraction() >= policy.min_within && r.stopper_fraction() >= policy.min_stopper_match;
    Ok(r)
}
