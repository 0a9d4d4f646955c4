//! Branch path samplers, displacement moments and step selection.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::geometry::Point;
use crate::point_process::{MarkDistribution, Model};
use crate::rng::{stream, Purpose};

/// How branch paths are generated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PathSampler {
    /// Deterministic rays from the configuration's marks.
    Ray,
    /// Planar Brownian motion with `diffusion` variance per coordinate per
    /// unit time.
    Brownian { diffusion: f64 },
}

impl PathSampler {
    pub fn for_model(model: Model) -> Self {
        match model {
            Model::Brownian => PathSampler::Brownian { diffusion: 1.0 },
            _ => PathSampler::Ray,
        }
    }

    pub fn is_ray(&self) -> bool {
        matches!(self, PathSampler::Ray)
    }
}

/// Incremental vertex generator of one branch; vertex `k` is the position at
/// time `k·dt`.
#[derive(Clone, Debug)]
pub(crate) enum BranchGen {
    Ray { origin: Point, step: Point },
    Brownian { rng: Box<ChaCha8Rng>, scale: f64 },
}

impl BranchGen {
    pub(crate) fn ray(origin: Point, theta: f64, speed: f64, dt: f64) -> Self {
        BranchGen::Ray {
            origin,
            step: Point::from_angle(theta) * (speed * dt),
        }
    }

    pub(crate) fn brownian(seed: u64, key: u64, branch: usize, diffusion: f64, dt: f64) -> Self {
        BranchGen::Brownian {
            rng: Box::new(stream(seed, Purpose::BrownianBranch, key, branch as u64)),
            scale: (diffusion * dt).sqrt(),
        }
    }

    /// Appends vertices until `path` holds indices `0..=k`.
    pub(crate) fn extend(&mut self, path: &mut Vec<Point>, k: usize) {
        while path.len() <= k {
            let i = path.len();
            let next = match self {
                BranchGen::Ray { origin, step } => *origin + *step * i as f64,
                BranchGen::Brownian { rng, scale } => {
                    let last = path[i - 1];
                    let dx: f64 = rng.sample(StandardNormal);
                    let dy: f64 = rng.sample(StandardNormal);
                    last + Point::new(dx * *scale, dy * *scale)
                }
            };
            path.push(next);
        }
    }
}

/// Monte-Carlo (or exact) estimate of `E(M⁴)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub mean: f64,
    /// Standard error; zero for exact values.
    pub se: f64,
    pub samples: usize,
}

/// Vertices per probe path in [`estimate_m4`]. Using a fixed count (rather
/// than a fixed `dt`) keeps the estimator exactly covariant under Brownian
/// scaling.
pub const M4_SUBSTEPS: usize = 256;

/// Estimates `E(M_{t,t+step}⁴)` where `M` is the largest displacement of any
/// branch of a grain over the window. The samplers are time-homogeneous, so
/// `t` does not enter. Rays with a fixed branch count use the exact moment
/// `E(V⁴)·step⁴`.
pub fn estimate_m4(
    sampler: &PathSampler,
    dist: &MarkDistribution,
    _t: f64,
    step: f64,
    n_samples: usize,
    seed: u64,
    exec: Exec,
) -> MomentEstimate {
    if step <= 0.0 || n_samples == 0 {
        return MomentEstimate { mean: 0.0, se: 0.0, samples: n_samples };
    }
    let fixed_rays = matches!(dist.model, Model::Unilateral | Model::Bilateral);
    if sampler.is_ray() && fixed_rays {
        return MomentEstimate {
            mean: dist.velocity.fourth_moment() * step.powi(4),
            se: 0.0,
            samples: 0,
        };
    }
    let branches = dist.effective_branches();
    let draw = |i: usize| -> f64 {
        let mut rng = stream(seed, Purpose::MonteCarlo, i as u64, 0);
        let k = branches.sample(&mut rng).max(1);
        let mut m = 0.0f64;
        for _ in 0..k {
            let d = match sampler {
                PathSampler::Ray => dist.velocity.sample(&mut rng) * step,
                PathSampler::Brownian { diffusion } => {
                    let scale = (diffusion * step / M4_SUBSTEPS as f64).sqrt();
                    let (mut x, mut y, mut sup) = (0.0f64, 0.0f64, 0.0f64);
                    for _ in 0..M4_SUBSTEPS {
                        let dx: f64 = rng.sample(StandardNormal);
                        let dy: f64 = rng.sample(StandardNormal);
                        x += dx * scale;
                        y += dy * scale;
                        sup = sup.max(x * x + y * y);
                    }
                    sup.sqrt()
                }
            };
            m = m.max(d);
        }
        m.powi(4)
    };
    let values = exec.map_range(n_samples, draw);
    let n = n_samples as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if n_samples > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    MomentEstimate {
        mean,
        se: (var / n).sqrt(),
        samples: n_samples,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSearch {
    /// Largest grid step, `grid_ratio^k · grid_max`.
    pub grid_max: f64,
    pub grid_ratio: f64,
    pub grid_min: f64,
    /// Times at which the moment is probed; the maximum is used.
    pub probes: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for StepSearch {
    fn default() -> Self {
        StepSearch {
            grid_max: 1.0,
            grid_ratio: 0.98,
            grid_min: 1e-4,
            probes: vec![0.0],
            n_samples: 20_000,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepChoice {
    pub step: f64,
    /// `16π·λ·Ê(M⁴)·E(K²)` at the chosen step.
    pub criterion: f64,
    pub m4: f64,
}

/// `16π·λ·m4·k2`.
pub fn branching_criterion(intensity: f64, m4: f64, k2: f64) -> f64 {
    16.0 * PI * intensity * m4 * k2
}

/// Largest step on the geometric grid whose branching criterion stays below
/// `safety`. All probes reuse one seed, so the estimate is monotone in the
/// step and a bisection over the grid is valid.
pub fn choose_step(
    intensity: f64,
    sampler: &PathSampler,
    dist: &MarkDistribution,
    safety: f64,
    search: &StepSearch,
) -> Result<StepChoice> {
    if !(safety > 0.0 && safety < 1.0) {
        return Err(Error::Config(format!("safety must lie in (0,1), got {safety}")));
    }
    let k2 = dist.effective_branches().second_moment();
    if !k2.is_finite() {
        return Err(Error::Precondition(
            "E(K^2) is infinite: branching criterion unsatisfiable at every step".into(),
        ));
    }
    let eval = |step: f64| -> StepChoice {
        let m4 = search
            .probes
            .iter()
            .map(|&t| estimate_m4(sampler, dist, t, step, search.n_samples, search.seed, search.exec).mean)
            .fold(0.0, f64::max);
        StepChoice {
            step,
            criterion: branching_criterion(intensity, m4, k2),
            m4,
        }
    };
    let n_grid = ((search.grid_min / search.grid_max).ln() / search.grid_ratio.ln()).floor() as i32;
    let at = |k: i32| search.grid_max * search.grid_ratio.powi(k);
    let first = eval(at(0));
    if first.criterion <= safety {
        return Ok(first);
    }
    let last = eval(at(n_grid));
    if last.criterion > safety {
        return Err(Error::CriterionUnsatisfiable {
            value: last.criterion,
            safety,
        });
    }
    // criterion(at(lo)) > safety >= criterion(at(hi))
    let (mut lo, mut hi, mut best) = (0, n_grid, last);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let c = eval(at(mid));
        if c.criterion <= safety {
            hi = mid;
            best = c;
        } else {
            lo = mid;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_process::{BranchLaw, VelocityLaw};

    #[test]
    fn ray_moment_is_exact() {
        let d = MarkDistribution::unilateral(VelocityLaw::Constant { value: 1.0 });
        let e = estimate_m4(&PathSampler::Ray, &d, 0.0, 0.1, 10, 1, Exec::Sequential);
        assert!((e.mean - 1e-4).abs() < 1e-18);
        assert_eq!(estimate_m4(&PathSampler::Ray, &d, 0.0, 0.0, 10, 1, Exec::Sequential).mean, 0.0);
    }

    #[test]
    fn step_for_unit_rays() {
        let d = MarkDistribution::unilateral(VelocityLaw::Constant { value: 1.0 });
        let c = choose_step(1.0, &PathSampler::Ray, &d, 0.5, &StepSearch::default()).unwrap();
        let exact = (0.5 / (16.0 * PI)).powf(0.25);
        assert!(c.step <= exact && c.step > exact * 0.98, "{} vs {exact}", c.step);
        let tiny = choose_step(1e-9, &PathSampler::Ray, &d, 0.5, &StepSearch::default()).unwrap();
        assert_eq!(tiny.step, 1.0);
        let heavy = MarkDistribution::brownian(BranchLaw::Zeta { exponent: 2.5 });
        let b = PathSampler::Brownian { diffusion: 1.0 };
        assert!(choose_step(1.0, &b, &heavy, 0.5, &StepSearch::default()).is_err());
    }
}
