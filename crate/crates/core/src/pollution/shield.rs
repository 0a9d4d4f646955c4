//! Exploration confined to one hexagon and Monte-Carlo shield frequencies.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::exploration::StoppedExploration;
use crate::geometry::{segment_intersection, HexLattice, Point};
use crate::point_process::{MarkDistribution, MarkedConfiguration, VelocityLaw, Window};
use crate::rng::{stream, Purpose};
use crate::segment_engine::{resolve_with, Pruning, ResolveOptions};

/// Largest `t ∈ [0, 1]` such that the disc of radius `t·vc` around the tip
/// of every branch of point `id` stays inside the hexagon centred at `z`.
pub fn local_horizon(config: &MarkedConfiguration, id: usize, z: Point, vc: f64, lattice: &HexLattice) -> f64 {
    let p = &config.points[id];
    let r_in = lattice.inradius();
    let d = p.germ - z;
    let mut tau = 1.0f64;
    for b in &p.branches {
        let u = Point::from_angle(b.theta) * b.speed;
        for n in HexLattice::edge_normals() {
            let slack = r_in - n.dot(d);
            let rate = n.dot(u) + vc;
            if rate > 0.0 {
                tau = tau.min((slack / rate).max(0.0));
            }
        }
    }
    tau
}

/// Resolution of the slow points inside one hexagon with every grain cut at
/// its local horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalExploration {
    pub center: Point,
    /// Ids in the input configuration, in local order.
    pub ids: Vec<usize>,
    pub horizons: Vec<f64>,
    pub config: MarkedConfiguration,
    pub exploration: StoppedExploration,
}

impl LocalExploration {
    /// Realized trace pieces as closed segments.
    pub fn segments(&self) -> Vec<(Point, Point)> {
        let mut out = Vec::new();
        for (id, p) in self.config.points.iter().enumerate() {
            for b in 0..p.branches.len() {
                let end = self.exploration.ray_end(&self.config, id, b, f64::INFINITY);
                out.push((p.germ, end));
            }
        }
        out
    }

    /// Does the open chord `a → b` meet the local graph?
    pub fn blocks(&self, a: Point, b: Point, segments: &[(Point, Point)]) -> bool {
        segments.iter().any(|&(q0, q1)| segment_intersection(a, b, q0, q1).is_some())
    }
}

/// Resolves the points of `config` in the hexagon at `z`. Fails if one of
/// them is quick.
pub fn local_exploration(config: &MarkedConfiguration, z: Point, vc: f64, lattice: &HexLattice) -> Result<LocalExploration> {
    if !config.marks.model.is_ray() {
        return Err(Error::Precondition("local exploration needs ray grains".into()));
    }
    let mut ids = Vec::new();
    for p in &config.points {
        if lattice.hexagon_contains(p.germ, z, 1.0) {
            if p.branches.iter().any(|b| b.speed >= vc) {
                return Err(Error::Precondition(format!(
                    "point {} inside the hexagon is quick (speed >= {vc})",
                    p.id
                )));
            }
            ids.push(p.id);
        }
    }
    let horizons: Vec<f64> = ids.iter().map(|&i| local_horizon(config, i, z, vc, lattice)).collect();
    let mut points: Vec<_> = ids.iter().map(|&i| config.points[i].clone()).collect();
    for (i, p) in points.iter_mut().enumerate() {
        p.id = i;
    }
    let local = MarkedConfiguration { points, ..config.clone() };
    let opts = ResolveOptions {
        pruning: Pruning::AllPairs,
        exec: Exec::Sequential,
        horizons: Some(horizons.clone()),
        ..ResolveOptions::default()
    };
    let (exploration, _) = resolve_with(&local, &opts)?;
    Ok(LocalExploration { center: z, ids, horizons, config: local, exploration })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShieldParams {
    /// Hexagon circumradius.
    pub scale: f64,
    /// Inner hexagon shrink factor.
    pub eps: f64,
    pub vc: f64,
    pub intensity: f64,
    pub velocity: VelocityLaw,
    pub chords: usize,
    pub configs: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl ShieldParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(self.scale > 0.0) {
            return bad("hexagon scale must be positive");
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad("eps must lie in (0,1)");
        }
        if !(self.vc > 0.0) {
            return bad("critical velocity must be positive");
        }
        if !(self.intensity >= 0.0 && self.intensity.is_finite()) {
            return bad("intensity must be finite and non-negative");
        }
        if self.chords == 0 || self.configs == 0 {
            return bad("chords and configs must be positive");
        }
        self.velocity.validate()
    }
}

/// Frequency of configurations in which every sampled chord is blocked.
/// Finitely many chords can only miss gaps, so `p_hat` overestimates the
/// true probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShieldEstimate {
    pub p_hat: f64,
    pub se: f64,
    /// Normal-approximation 95% interval.
    pub ci: (f64, f64),
    pub shields: usize,
    pub configs: usize,
    pub mean_points: f64,
    /// Mean share of chords blocked per configuration.
    pub mean_blocked_fraction: f64,
}

fn uniform_on_contour<R: Rng>(rng: &mut R, verts: &[Point; 6]) -> Point {
    let k = rng.random_range(0..6);
    verts[k].lerp(verts[(k + 1) % 6], rng.random::<f64>())
}

fn uniform_in_hexagon<R: Rng>(rng: &mut R, lattice: &HexLattice, z: Point, eps: f64) -> Point {
    let r = eps * lattice.circumradius();
    loop {
        let p = z + Point::new((2.0 * rng.random::<f64>() - 1.0) * r, (2.0 * rng.random::<f64>() - 1.0) * r);
        if lattice.hexagon_contains(p, z, eps) {
            return p;
        }
    }
}

/// Samples one configuration of slow points in the hexagon at the origin.
pub fn shield_configuration(params: &ShieldParams, replica: usize) -> Result<MarkedConfiguration> {
    let lattice = HexLattice::new(params.scale);
    let r = lattice.circumradius();
    let window = Window::new(-r, r, -r, r, 0.0)?;
    let seed = stream(params.seed, Purpose::Replica, replica as u64, 0).random::<u64>();
    let dist = MarkDistribution::unilateral(params.velocity.clone());
    let mut c = MarkedConfiguration::generate(window, params.intensity, dist, seed)?;
    c.points.retain(|p| {
        lattice.hexagon_contains(p.germ, Point::default(), 1.0) && p.branches.iter().all(|b| b.speed < params.vc)
    });
    for (i, p) in c.points.iter_mut().enumerate() {
        p.id = i;
    }
    Ok(c)
}

/// Runs `configs` independent configurations, each tested against
/// `chords` chords from the (slightly dilated) contour into `eps·Hex`.
pub fn estimate_shield_probability(params: &ShieldParams) -> Result<ShieldEstimate> {
    params.validate()?;
    let lattice = HexLattice::new(params.scale);
    let outer = HexLattice::new(params.scale * (1.0 + 1e-6)).vertices(Point::default());
    let one = |r: usize| -> Result<(bool, usize, f64)> {
        let c = shield_configuration(params, r)?;
        let local = local_exploration(&c, Point::default(), params.vc, &lattice)?;
        let segs = local.segments();
        let mut rng = stream(params.seed, Purpose::Chords, r as u64, 0);
        let mut blocked = 0usize;
        for _ in 0..params.chords {
            let a = uniform_on_contour(&mut rng, &outer);
            let b = uniform_in_hexagon(&mut rng, &lattice, Point::default(), params.eps);
            if local.blocks(a, b, &segs) {
                blocked += 1;
            }
        }
        Ok((blocked == params.chords, c.len(), blocked as f64 / params.chords as f64))
    };
    let runs = params.exec.map_range(params.configs, one);
    let mut shields = 0usize;
    let mut points = 0usize;
    let mut frac = 0.0;
    for run in runs {
        let (s, n, f) = run?;
        shields += usize::from(s);
        points += n;
        frac += f;
    }
    let n = params.configs as f64;
    let p = shields as f64 / n;
    let se = (p * (1.0 - p) / n).sqrt();
    Ok(ShieldEstimate {
        p_hat: p,
        se,
        ci: (p - 1.96 * se, p + 1.96 * se),
        shields,
        configs: params.configs,
        mean_points: points as f64 / n,
        mean_blocked_fraction: frac / n,
    })
}
