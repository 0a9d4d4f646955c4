//! Cluster-stepped resolution for arbitrary branch paths.
//!
//! Time is cut into steps of length `step`. At the start of a step every
//! alive grain gets balls of radius `M + eps_hit/2` around its particles,
//! where `M` is the largest displacement of its branches over the step. Grains
//! whose balls overlap form a genealogical cluster; a cluster can only
//! interact with its own members and with traces deposited before the step,
//! so clusters are advanced independently (and in parallel). Inside a cluster
//! heads move by substeps of `dt` and stop at the first time they come within
//! `eps_hit` of an already deposited piece of another grain.

mod cluster;
mod genealogy;
mod path;

pub use genealogy::{build_genealogical_graph, GenealogicalGraph, GrainBalls};
pub use path::{
    branching_criterion, choose_step, estimate_m4, MomentEstimate, PathSampler, StepChoice, StepSearch, M4_SUBSTEPS,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::exploration::{GrainRecord, Outcome, StoppedExploration};
use crate::geometry::{Aabb, GridIndex, Point};
use crate::point_process::MarkedConfiguration;

use cluster::{advance_cluster, piece, Chunk, StepView};
use path::BranchGen;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    /// Genealogical step length; rounded down to a multiple of `dt`.
    pub step: f64,
    /// Path resolution.
    pub dt: f64,
    /// Collision radius.
    pub eps_hit: f64,
    /// Final time.
    pub horizon: f64,
}

impl StepParams {
    pub fn new(step: f64, dt: f64, eps_hit: f64, horizon: f64) -> Result<Self> {
        let p = StepParams { step, dt, eps_hit, horizon };
        p.validate()?;
        Ok(p)
    }

    /// `step` and `horizon` taken as given; `eps_hit` from [`default_eps`].
    pub fn with_default_eps(sampler: &PathSampler, step: f64, dt: f64, horizon: f64) -> Result<Self> {
        StepParams::new(step, dt, default_eps(sampler, dt), horizon)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.dt > 0.0
            && self.dt <= self.step
            && self.step <= self.horizon
            && self.horizon.is_finite()
            && self.eps_hit > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "step parameters need 0 < dt <= step <= horizon < inf and eps_hit > 0, got {self:?}"
            )))
        }
    }

    pub fn substeps(&self) -> usize {
        ((self.step / self.dt) * (1.0 + 1e-12)).floor().max(1.0) as usize
    }

    pub fn total_substeps(&self) -> usize {
        ((self.horizon / self.dt) * (1.0 + 1e-12)).floor() as usize
    }
}

/// `0.5·√dt` for Brownian paths; a tiny radius for rays, whose exact
/// crossings are found directly.
pub fn default_eps(sampler: &PathSampler, dt: f64) -> f64 {
    match sampler {
        PathSampler::Brownian { diffusion } => 0.5 * (diffusion * dt).sqrt(),
        PathSampler::Ray => 1e-9,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenericOptions {
    /// Abort when a genealogical cluster exceeds this size.
    pub cluster_cap: Option<usize>,
    pub exec: Exec,
    pub max_steps: Option<usize>,
    /// Trace pieces per static index entry.
    pub chunk: usize,
    /// Advance clusters in reverse order (results must not change).
    pub reverse_cluster_order: bool,
}

impl Default for GenericOptions {
    fn default() -> Self {
        GenericOptions {
            cluster_cap: None,
            exec: Exec::default(),
            max_steps: None,
            chunk: 8,
            reverse_cluster_order: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub step: usize,
    pub t: f64,
    pub alive: usize,
    pub clusters: usize,
    pub max_cluster: usize,
    /// `16π·λ·mean(M⁴)·E(K²)` over the alive grains of the step.
    pub criterion_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenericRun {
    pub exploration: StoppedExploration,
    pub steps: Vec<StepLog>,
    /// Realized branch polylines, cut at the lifetimes.
    pub traces: Vec<Vec<Vec<Point>>>,
}

impl GenericRun {
    /// Bounding box of each grain's realized trace inside `window`.
    pub fn extents(&self, window: &crate::point_process::Window) -> Vec<Aabb> {
        let bx = window.aabb();
        self.traces
            .iter()
            .map(|branches| {
                let mut e = Aabb::empty();
                for b in branches {
                    for w in b.windows(2) {
                        if let Some((u, v)) = crate::pog::clip_segment(w[0], w[1], &bx) {
                            e.include(u);
                            e.include(v);
                        }
                    }
                    if let [p] = b.as_slice() {
                        if bx.contains(*p) {
                            e.include(*p);
                        }
                    }
                }
                e
            })
            .collect()
    }
}

pub(crate) struct GrainState {
    pub paths: Vec<Vec<Point>>,
    gens: Vec<BranchGen>,
    alive: bool,
}

impl GrainState {
    fn extend(&mut self, k: usize) {
        for (p, g) in self.paths.iter_mut().zip(self.gens.iter_mut()) {
            g.extend(p, k);
        }
    }
}

fn init_grains(config: &MarkedConfiguration, sampler: &PathSampler, dt: f64) -> Result<Vec<GrainState>> {
    let model_is_ray = config.marks.model.is_ray();
    if model_is_ray != sampler.is_ray() {
        return Err(Error::Precondition(format!(
            "{sampler:?} sampler does not match the {:?} model",
            config.marks.model
        )));
    }
    Ok(config
        .points
        .iter()
        .map(|p| {
            let gens: Vec<BranchGen> = match sampler {
                PathSampler::Ray => p.branches.iter().map(|m| BranchGen::ray(p.germ, m.theta, m.speed, dt)).collect(),
                PathSampler::Brownian { diffusion } => (0..p.branch_count)
                    .map(|b| BranchGen::brownian(config.seed, p.key, b, *diffusion, dt))
                    .collect(),
            };
            GrainState {
                paths: vec![vec![p.germ]; gens.len()],
                gens,
                alive: true,
            }
        })
        .collect())
}

fn partial(records: &[GrainRecord]) -> StoppedExploration {
    StoppedExploration { records: records.to_vec() }
}

/// Runs the cluster-stepped construction up to `params.horizon`. Grains
/// still growing at the horizon are reported as truncated there.
pub fn run(
    config: &MarkedConfiguration,
    sampler: &PathSampler,
    params: &StepParams,
    opts: &GenericOptions,
) -> Result<GenericRun> {
    params.validate()?;
    let n = config.len();
    let dt = params.dt;
    let eps = params.eps_hit;
    let mut grains = init_grains(config, sampler, dt)?;
    let mut records = vec![GrainRecord::UNSTOPPED; n];
    let k2 = config.marks.effective_branches().second_moment();
    let sub = params.substeps();
    let k_total = params.total_substeps();

    // Typical piece length sets the grid cells.
    let piece_len = match sampler {
        PathSampler::Ray => config.max_speed() * dt,
        PathSampler::Brownian { diffusion } => (2.0 * diffusion * dt).sqrt(),
    };
    let dynamic_cell = (4.0 * (piece_len + eps)).max(1e-9);
    let static_cell = (4.0 * (piece_len * opts.chunk.max(1) as f64 + eps)).max(1e-9);
    let mut static_grid = GridIndex::new(static_cell);
    let mut chunks: Vec<Chunk> = Vec::new();

    let mut steps = Vec::new();
    let mut k_now = 0usize;
    let mut step_idx = 0usize;
    while k_now < k_total && opts.max_steps.is_none_or(|m| step_idx < m) {
        let k_end = (k_now + sub).min(k_total);
        let alive: Vec<usize> = (0..n).filter(|&i| records[i].is_unstopped()).collect();
        if alive.is_empty() {
            break;
        }
        opts.exec.for_each_mut(&mut grains, |g| {
            if g.alive {
                g.extend(k_end);
            }
        });
        let balls: Vec<GrainBalls> = alive
            .iter()
            .map(|&i| {
                let g = &grains[i];
                let mut m = 0.0f64;
                for p in &g.paths {
                    let c = p[k_now];
                    for v in &p[k_now..=k_end] {
                        m = m.max(v.dist(c));
                    }
                }
                GrainBalls {
                    grain: i,
                    centers: g.paths.iter().map(|p| p[k_now]).collect(),
                    radius: m + 0.5 * eps,
                }
            })
            .collect();
        let mean_m4 = balls.iter().map(|b| (b.radius - 0.5 * eps).powi(4)).sum::<f64>() / balls.len() as f64;
        let graph = build_genealogical_graph(&balls);
        let log = StepLog {
            step: step_idx,
            t: k_now as f64 * dt,
            alive: alive.len(),
            clusters: graph.components.len(),
            max_cluster: graph.max_component(),
            criterion_value: branching_criterion(config.intensity, mean_m4, k2),
        };
        log::debug!("{log:?}");
        steps.push(log);
        if let Some(cap) = opts.cluster_cap {
            if log.max_cluster > cap {
                return Err(Error::ClusterCap {
                    size: log.max_cluster,
                    cap,
                    step: step_idx,
                    partial: Box::new(partial(&records)),
                });
            }
        }

        let view = StepView {
            grains: &grains,
            records: &records,
            chunks: &chunks,
            static_grid: &static_grid,
            dt,
            eps,
            k_start: k_now,
            k_end,
            dynamic_cell,
        };
        let mut order = graph.components;
        if opts.reverse_cluster_order {
            order.reverse();
        }
        let outcomes = opts.exec.map(&order, |members| advance_cluster(&view, members));
        let mut stops: Vec<(usize, GrainRecord)> = outcomes.into_iter().flatten().collect();
        stops.sort_by_key(|(g, _)| *g);
        for (g, r) in stops {
            records[g] = r;
            grains[g].alive = false;
        }

        // Barrier: this step's pieces become static.
        for &i in &alive {
            let life = records[i].lifetime;
            for (b, p) in grains[i].paths.iter().enumerate() {
                let mut k0 = k_now;
                while k0 < k_end {
                    let k1 = (k0 + opts.chunk.max(1)).min(k_end);
                    let mut bx = Aabb::empty();
                    for j in k0..k1 {
                        if let Some((q0, q1, _, _)) = piece(p, j, dt, life) {
                            bx.include(q0);
                            bx.include(q1);
                        }
                    }
                    if !bx.is_empty() {
                        static_grid.insert(chunks.len(), bx);
                        chunks.push(Chunk { grain: i, branch: b, k0, k1 });
                    }
                    k0 = k1;
                }
            }
        }
        k_now = k_end;
        step_idx += 1;
    }
    let t_end = k_now as f64 * dt;
    for r in records.iter_mut() {
        if r.is_unstopped() {
            *r = GrainRecord {
                lifetime: t_end,
                outcome: Outcome::Truncated,
            };
        }
    }
    let traces = grains
        .iter()
        .zip(&records)
        .map(|(g, r)| {
            g.paths
                .iter()
                .map(|p| {
                    let mut out = vec![p[0]];
                    let mut k = 0;
                    while let Some((_, q1, _, _)) = piece(p, k, dt, r.lifetime) {
                        out.push(q1);
                        k += 1;
                    }
                    out
                })
                .collect()
        })
        .collect();
    Ok(GenericRun {
        exploration: StoppedExploration { records },
        steps,
        traces,
    })
}
