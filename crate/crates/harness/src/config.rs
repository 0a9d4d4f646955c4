//! Experiment specifications read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stopped_grains::generic_engine::PathSampler;
use stopped_grains::pollution::critical_velocity;
use stopped_grains::segment_engine::Pruning;
use stopped_grains::{MarkDistribution, Window};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Resolve,
    Generic,
    PercolationScan,
    PollutionScan,
    ShieldEstimate,
    OracleCompare,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Resolve => "resolve",
            ExperimentKind::Generic => "generic",
            ExperimentKind::PercolationScan => "percolation-scan",
            ExperimentKind::PollutionScan => "pollution-scan",
            ExperimentKind::ShieldEstimate => "shield-estimate",
            ExperimentKind::OracleCompare => "oracle-compare",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub intensity: f64,
    pub window: Window,
    pub marks: MarkDistribution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineSpec {
    pub pruning: Pruning,
    /// Substep of the generic engine and the oracle.
    pub dt: f64,
    /// Generic-engine time step; chosen from the branching criterion when
    /// absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    pub safety: f64,
    pub horizon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_hit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster_cap: Option<usize>,
    /// Path law for the generic engine; follows the mark model when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampler: Option<PathSampler>,
    pub moment_samples: usize,
}

impl Default for EngineSpec {
    fn default() -> Self {
        EngineSpec {
            pruning: Pruning::Auto,
            dt: 1e-3,
            step: None,
            safety: 0.5,
            horizon: 50.0,
            eps_hit: None,
            cluster_cap: None,
            sampler: None,
            moment_samples: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    /// Core side lengths.
    pub sides: Vec<f64>,
    #[serde(default)]
    pub buffer: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PollutionSpec {
    /// Block scales.
    pub m: Vec<f64>,
    pub alpha: u32,
    /// Moment exponent defining the critical velocity.
    pub s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShieldSpec {
    /// Hexagon circumradius.
    pub scale: f64,
    pub eps: f64,
    /// Explicit critical velocity; otherwise derived from `m` and `s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default = "default_chords")]
    pub chords: usize,
    #[serde(default = "default_configs")]
    pub configs: usize,
}

fn default_chords() -> usize {
    500
}

fn default_configs() -> usize {
    400
}

impl ShieldSpec {
    pub fn critical_velocity(&self) -> Result<f64> {
        match (self.vc, self.m, self.s) {
            (Some(v), _, _) => Ok(v),
            (None, Some(m), Some(s)) => Ok(critical_velocity(m, s)?),
            _ => Err(HarnessError::Validation("shield needs either vc or both m and s".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub dt: f64,
    #[serde(default = "default_min_match")]
    pub min_stopper_match: f64,
}

fn default_min_match() -> f64 {
    0.98
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub replicas: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub process: ProcessSpec,
    #[serde(default)]
    pub engine: EngineSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pollution: Option<PollutionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shield: Option<ShieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
}

fn one() -> usize {
    1
}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(HarnessError::Validation(msg.into()))
}

impl ExperimentSpec {
    /// Parses TOML. A missing `kind` is taken from `kind_hint`; a present one
    /// must agree with it.
    pub fn from_toml(text: &str, kind_hint: Option<ExperimentKind>) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e| HarnessError::Validation(format!("{e}")))?;
        if let Some(k) = kind_hint {
            match table.get("kind") {
                None => {
                    table.insert("kind".into(), toml::Value::String(k.name().into()));
                }
                Some(v) if v.as_str() == Some(k.name()) => {}
                Some(v) => return invalid(format!("config kind {v} does not match subcommand {}", k.name())),
            }
        }
        let spec: ExperimentSpec = table.try_into().map_err(|e: toml::de::Error| HarnessError::Validation(format!("{e}")))?;
        Ok(spec)
    }

    pub fn load(path: &Path, kind_hint: Option<ExperimentKind>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text, kind_hint)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Serialize(e.to_string()))
    }

    /// Checks every parameter the selected experiment will read.
    pub fn validate(&self) -> Result<()> {
        let p = &self.process;
        if !(p.intensity > 0.0 && p.intensity.is_finite()) {
            return invalid(format!("intensity must be positive and finite, got {}", p.intensity));
        }
        p.window.validate()?;
        p.marks.validate()?;
        if self.replicas == 0 {
            return invalid("replicas must be at least 1");
        }
        let e = &self.engine;
        if !(e.dt > 0.0 && e.dt.is_finite()) {
            return invalid("engine.dt must be positive");
        }
        if !(e.safety > 0.0 && e.safety < 1.0) {
            return invalid("engine.safety must lie in (0,1)");
        }
        if !(e.horizon > 0.0) {
            return invalid("engine.horizon must be positive");
        }
        if e.step.is_some_and(|s| !(s > 0.0 && s.is_finite())) {
            return invalid("engine.step must be positive");
        }
        if e.eps_hit.is_some_and(|s| !(s > 0.0 && s.is_finite())) {
            return invalid("engine.eps_hit must be positive");
        }
        if let Some(PathSampler::Brownian { diffusion }) = e.sampler {
            if !(diffusion > 0.0 && diffusion.is_finite()) {
                return invalid("diffusion must be positive");
            }
        }
        match self.kind {
            ExperimentKind::Resolve | ExperimentKind::OracleCompare
                if !p.marks.model.is_ray() => {
                    return invalid(format!("{} needs a ray model", self.kind.name()));
                }
            _ => {}
        }
        match self.kind {
            ExperimentKind::PercolationScan => {
                let Some(s) = &self.scan else { return invalid("percolation-scan needs a [scan] section") };
                if s.sides.is_empty() || s.sides.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
                    return invalid("scan.sides must be positive");
                }
                if !(s.buffer >= 0.0 && s.buffer.is_finite()) {
                    return invalid("scan.buffer must be non-negative");
                }
                if !p.marks.model.is_ray() {
                    return invalid("percolation-scan needs a ray model");
                }
            }
            ExperimentKind::PollutionScan => {
                let Some(s) = &self.pollution else { return invalid("pollution-scan needs a [pollution] section") };
                if s.m.is_empty() {
                    return invalid("pollution.m must not be empty");
                }
                for m in &s.m {
                    critical_velocity(*m, s.s)?;
                }
            }
            ExperimentKind::ShieldEstimate => {
                let Some(s) = &self.shield else { return invalid("shield-estimate needs a [shield] section") };
                let vc = s.critical_velocity()?;
                if !(s.scale > 0.0 && s.scale.is_finite()) {
                    return invalid("shield.scale must be positive");
                }
                if !(s.eps > 0.0 && s.eps < 1.0) {
                    return invalid("shield.eps must lie in (0,1)");
                }
                if !(vc > 0.0 && vc.is_finite()) {
                    return invalid("critical velocity must be positive");
                }
                if s.chords == 0 || s.configs == 0 {
                    return invalid("shield.chords and shield.configs must be positive");
                }
                if p.marks.model != stopped_grains::Model::Unilateral {
                    return invalid("shield-estimate uses the unilateral model");
                }
            }
            ExperimentKind::OracleCompare => {
                let Some(o) = &self.oracle else { return invalid("oracle-compare needs an [oracle] section") };
                if !(o.dt > 0.0 && o.dt.is_finite()) {
                    return invalid("oracle.dt must be positive");
                }
                if !(0.0..=1.0).contains(&o.min_stopper_match) {
                    return invalid("oracle.min_stopper_match must lie in [0,1]");
                }
            }
            ExperimentKind::Resolve | ExperimentKind::Generic => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RESOLVE: &str = r#"
seed = 7
[process]
intensity = 1.0
window = { xmin = 0.0, xmax = 10.0, ymin = 0.0, ymax = 10.0 }
marks = { model = "unilateral", velocity = { law = "half-normal", sigma = 1.0 } }
"#;

    #[test]
    fn kind_from_hint_and_roundtrip() {
        let s = ExperimentSpec::from_toml(RESOLVE, Some(ExperimentKind::Resolve)).unwrap();
        assert_eq!(s.kind, ExperimentKind::Resolve);
        assert_eq!(s.replicas, 1);
        s.validate().unwrap();
        let back = ExperimentSpec::from_toml(&s.to_toml().unwrap(), None).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn kind_conflict_and_bad_values() {
        let text = format!("kind = \"generic\"\n{RESOLVE}");
        assert!(ExperimentSpec::from_toml(&text, Some(ExperimentKind::Resolve)).is_err());
        let neg = RESOLVE.replace("intensity = 1.0", "intensity = -1.0");
        let s = ExperimentSpec::from_toml(&neg, Some(ExperimentKind::Resolve)).unwrap();
        assert_eq!(s.validate().unwrap_err().exit_code(), 2);
        let s = ExperimentSpec::from_toml(RESOLVE, Some(ExperimentKind::PercolationScan)).unwrap();
        assert!(s.validate().is_err());
    }
}
