//! Quick/slow splitting, pollution fields on block lattices and shield
//! hexagons.

mod shield;

pub use shield::{
    estimate_shield_probability, local_exploration, local_horizon, LocalExploration, ShieldEstimate, ShieldParams,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point_process::{MarkedConfiguration, MarkedPoint, VelocityLaw, Window};
use crate::rng::{stream, Purpose};
use crate::union_find::UnionFind;

/// `(3·ln m)^(1/s)`, the speed separating quick from slow grains at block
/// scale `m`.
pub fn critical_velocity(m: f64, s: f64) -> Result<f64> {
    if !(m >= 2.0) {
        return Err(Error::Config(format!("block scale m must be at least 2, got {m}")));
    }
    if !(s > 1.0) {
        return Err(Error::Config(format!("moment exponent s must exceed 1, got {s}")));
    }
    Ok((3.0 * m.ln()).powf(1.0 / s))
}

fn point_speed(p: &MarkedPoint) -> f64 {
    p.branches.iter().map(|b| b.speed).fold(0.0, f64::max)
}

/// Partition of a configuration by speed. Points keep their keys; `*_ids`
/// map the new dense ids back to the input ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuickSlow {
    pub quick: MarkedConfiguration,
    pub slow: MarkedConfiguration,
    pub quick_ids: Vec<usize>,
    pub slow_ids: Vec<usize>,
}

impl QuickSlow {
    /// Reassembles the input configuration.
    pub fn merge(&self) -> MarkedConfiguration {
        let n = self.quick_ids.len() + self.slow_ids.len();
        let mut points: Vec<Option<MarkedPoint>> = vec![None; n];
        for (part, ids) in [(&self.quick, &self.quick_ids), (&self.slow, &self.slow_ids)] {
            for (p, &id) in part.points.iter().zip(ids) {
                let mut p = p.clone();
                p.id = id;
                points[id] = Some(p);
            }
        }
        MarkedConfiguration {
            points: points.into_iter().map(|p| p.expect("ids cover 0..n")).collect(),
            ..self.quick.clone()
        }
    }
}

/// A point is quick when some branch speed is at least `vc`.
pub fn split_quick_slow(config: &MarkedConfiguration, vc: f64) -> QuickSlow {
    let mut quick = Vec::new();
    let mut slow = Vec::new();
    let (mut quick_ids, mut slow_ids) = (Vec::new(), Vec::new());
    for p in &config.points {
        if point_speed(p) >= vc {
            quick_ids.push(p.id);
            quick.push(p.clone());
        } else {
            slow_ids.push(p.id);
            slow.push(p.clone());
        }
    }
    let part = |mut pts: Vec<MarkedPoint>| {
        for (i, p) in pts.iter_mut().enumerate() {
            p.id = i;
        }
        MarkedConfiguration { points: pts, ..config.clone() }
    };
    QuickSlow {
        quick: part(quick),
        slow: part(slow),
        quick_ids,
        slow_ids,
    }
}

/// `1{vmax ≥ vc}·(⌊vmax/m + (1+α)/2⌋ + 1)`.
pub fn pollution_radius(vmax: f64, m: f64, alpha: u32, vc: f64) -> u64 {
    if vmax >= vc {
        (vmax / m + (1.0 + alpha as f64) / 2.0).floor() as u64 + 1
    } else {
        0
    }
}

/// Radii on the blocks `m·z + [-m/2, m/2)²` meeting the window, and the
/// union of the open sup-norm balls `{y : |y - z|∞ < R(z)}` restricted to
/// the same patch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PollutionField {
    pub m: f64,
    pub alpha: u32,
    pub vc: f64,
    /// Lattice coordinates of the lower-left block.
    pub z_min: (i64, i64),
    pub nx: usize,
    pub ny: usize,
    /// Largest speed in each block (0 when empty), row-major in `x`.
    pub vmax: Vec<f64>,
    pub radius: Vec<u64>,
    /// Block only partly inside the window.
    pub edge: Vec<bool>,
    pub polluted: Vec<bool>,
}

/// Lattice coordinate of the block holding abscissa `x`.
pub fn block_of(x: f64, m: f64) -> i64 {
    ((x + 0.5 * m) / m).floor() as i64
}

impl PollutionField {
    pub fn index(&self, zx: i64, zy: i64) -> Option<usize> {
        let (dx, dy) = (zx - self.z_min.0, zy - self.z_min.1);
        (dx >= 0 && dy >= 0 && (dx as usize) < self.nx && (dy as usize) < self.ny)
            .then(|| dy as usize * self.nx + dx as usize)
    }

    pub fn coords(&self, idx: usize) -> (i64, i64) {
        (self.z_min.0 + (idx % self.nx) as i64, self.z_min.1 + (idx / self.nx) as i64)
    }

    pub fn is_polluted(&self, zx: i64, zy: i64) -> bool {
        self.index(zx, zy).is_some_and(|i| self.polluted[i])
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn polluted_fraction(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.polluted.iter().filter(|p| **p).count() as f64 / self.len() as f64
    }

    /// `z_x,z_y,V_max,R` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("z_x,z_y,V_max,R\n");
        for i in 0..self.len() {
            let (zx, zy) = self.coords(i);
            out.push_str(&format!("{zx},{zy},{},{}\n", self.vmax[i], self.radius[i]));
        }
        out
    }
}

/// Pollution field with `vc = critical_velocity(m, s)`.
pub fn pollution_set(config: &MarkedConfiguration, m: f64, alpha: u32, s: f64) -> Result<PollutionField> {
    let vc = critical_velocity(m, s)?;
    Ok(pollution_field(config, m, alpha, vc))
}

pub fn pollution_field(config: &MarkedConfiguration, m: f64, alpha: u32, vc: f64) -> PollutionField {
    let w = &config.window;
    let z_min = (block_of(w.xmin, m), block_of(w.ymin, m));
    let z_max = (block_of(w.xmax, m), block_of(w.ymax, m));
    let nx = (z_max.0 - z_min.0 + 1) as usize;
    let ny = (z_max.1 - z_min.1 + 1) as usize;
    let mut field = PollutionField {
        m,
        alpha,
        vc,
        z_min,
        nx,
        ny,
        vmax: vec![0.0; nx * ny],
        radius: vec![0; nx * ny],
        edge: vec![false; nx * ny],
        polluted: vec![false; nx * ny],
    };
    for p in &config.points {
        if let Some(i) = field.index(block_of(p.germ.x, m), block_of(p.germ.y, m)) {
            field.vmax[i] = field.vmax[i].max(point_speed(p));
        }
    }
    for i in 0..field.len() {
        let (zx, zy) = field.coords(i);
        let (cx, cy) = (zx as f64 * m, zy as f64 * m);
        field.edge[i] = cx - 0.5 * m < w.xmin || cx + 0.5 * m > w.xmax || cy - 0.5 * m < w.ymin || cy + 0.5 * m > w.ymax;
        field.radius[i] = pollution_radius(field.vmax[i], m, alpha, vc);
    }
    for i in 0..field.len() {
        let r = field.radius[i] as i64;
        if r == 0 {
            continue;
        }
        let (zx, zy) = field.coords(i);
        for dy in -(r - 1)..=(r - 1) {
            for dx in -(r - 1)..=(r - 1) {
                if let Some(j) = field.index(zx + dx, zy + dy) {
                    field.polluted[j] = true;
                }
            }
        }
    }
    field
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnpollutedStats {
    pub polluted_fraction: f64,
    /// Largest nearest-neighbour component of unpolluted blocks, as a share
    /// of the patch.
    pub largest_unpolluted_fraction: f64,
    pub components: usize,
    /// Mean of `R²` over the blocks.
    pub e_r2_hat: f64,
}

pub fn unpolluted_components(field: &PollutionField) -> UnpollutedStats {
    let n = field.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        if field.polluted[i] {
            continue;
        }
        let (zx, zy) = field.coords(i);
        for (ax, ay) in [(zx + 1, zy), (zx, zy + 1)] {
            if let Some(j) = field.index(ax, ay) {
                if !field.polluted[j] {
                    uf.union(i, j);
                }
            }
        }
    }
    let comps: Vec<Vec<usize>> = uf.components().into_iter().filter(|c| !field.polluted[c[0]]).collect();
    let largest = comps.iter().map(Vec::len).max().unwrap_or(0);
    let e_r2_hat = if n == 0 {
        0.0
    } else {
        field.radius.iter().map(|r| (*r as f64).powi(2)).sum::<f64>() / n as f64
    };
    UnpollutedStats {
        polluted_fraction: field.polluted_fraction(),
        largest_unpolluted_fraction: if n == 0 { 0.0 } else { largest as f64 / n as f64 },
        components: comps.len(),
        e_r2_hat,
    }
}

/// Monte-Carlo mean of `exp(V^s)` with its standard error.
pub fn estimate_exp_moment(law: &VelocityLaw, s: f64, n: usize, seed: u64) -> (f64, f64) {
    let mut rng = stream(seed, Purpose::MonteCarlo, 0, 1);
    let vals: Vec<f64> = (0..n).map(|_| law.sample(&mut rng).powf(s).exp()).collect();
    let nf = n as f64;
    let mean = vals.iter().sum::<f64>() / nf;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0).max(1.0);
    (mean, (var / nf).sqrt())
}

/// Empirical frequency of blocks of side `m` (inside `window`) holding a
/// quick point, over `configs` fresh configurations.
pub fn quick_block_frequency(
    window: &Window,
    intensity: f64,
    law: &VelocityLaw,
    m: f64,
    vc: f64,
    configs: usize,
    seed: u64,
) -> Result<(f64, f64, usize)> {
    let dist = crate::point_process::MarkDistribution::unilateral(law.clone());
    let mut hits = 0usize;
    let mut blocks = 0usize;
    for r in 0..configs {
        let sub = stream(seed, Purpose::Replica, r as u64, 0).random::<u64>();
        let c = MarkedConfiguration::generate(*window, intensity, dist.clone(), sub)?;
        let f = pollution_field(&c, m, 1, vc);
        for i in 0..f.len() {
            if !f.edge[i] {
                blocks += 1;
                hits += usize::from(f.vmax[i] >= vc);
            }
        }
    }
    let p = hits as f64 / blocks.max(1) as f64;
    Ok((p, (p * (1.0 - p) / blocks.max(1) as f64).sqrt(), blocks))
}
