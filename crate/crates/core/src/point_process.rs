//! Seeded marked Poisson configurations in rectangular windows.

use std::f64::consts::{PI, TAU};

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson, Zeta};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::geometry::{Aabb, GrowingBranch, Point};
use crate::rng::{stream, Purpose};

/// Rectangular simulation window. Every point of the window takes part in the
/// dynamics; statistics are restricted to the core (window shrunk by `buffer`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    #[serde(default)]
    pub buffer: f64,
}

impl Window {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64, buffer: f64) -> Result<Self> {
        let w = Window { xmin, xmax, ymin, ymax, buffer };
        w.validate()?;
        Ok(w)
    }

    /// `[0, side]²` with the given buffer.
    pub fn square(side: f64, buffer: f64) -> Result<Self> {
        Window::new(0.0, side, 0.0, side, buffer)
    }

    /// Degenerate (zero-width or zero-height) windows are accepted and simply
    /// hold no points.
    pub fn validate(&self) -> Result<()> {
        let vals = [self.xmin, self.xmax, self.ymin, self.ymax, self.buffer];
        if vals.iter().any(|v| !v.is_finite()) {
            return config_err("window bounds must be finite");
        }
        if self.xmax < self.xmin || self.ymax < self.ymin {
            return config_err(format!(
                "window [{}, {}] x [{}, {}] has negative extent",
                self.xmin, self.xmax, self.ymin, self.ymax
            ));
        }
        if self.buffer < 0.0 || self.buffer > 0.5 * self.width().min(self.height()) {
            return config_err(format!(
                "buffer {} must lie in [0, min(width, height)/2]",
                self.buffer
            ));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn core(&self) -> Window {
        Window {
            xmin: self.xmin + self.buffer,
            xmax: self.xmax - self.buffer,
            ymin: self.ymin + self.buffer,
            ymax: self.ymax - self.buffer,
            buffer: 0.0,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    pub fn in_core(&self, p: Point) -> bool {
        self.core().contains(p)
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::new(Point::new(self.xmin, self.ymin), Point::new(self.xmax, self.ymax))
    }

    /// Image under `p ↦ c·p` (buffer scaled too).
    pub fn scaled(&self, c: f64) -> Window {
        Window {
            xmin: self.xmin * c,
            xmax: self.xmax * c,
            ymin: self.ymin * c,
            ymax: self.ymax * c,
            buffer: self.buffer * c,
        }
    }
}

/// Speed law of a branch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum VelocityLaw {
    Constant { value: f64 },
    Uniform { low: f64, high: f64 },
    Exponential { rate: f64 },
    HalfNormal { sigma: f64 },
    Pareto { shape: f64, scale: f64 },
    /// Quantile function tabulated at equally spaced levels `0, 1/(n-1), ..., 1`
    /// and interpolated linearly.
    Tabulated { quantiles: Vec<f64> },
}

impl VelocityLaw {
    pub fn validate(&self) -> Result<()> {
        use VelocityLaw::*;
        let ok = match self {
            Constant { value } => value.is_finite() && *value > 0.0,
            Uniform { low, high } => low.is_finite() && high.is_finite() && *low >= 0.0 && high > low,
            Exponential { rate } => rate.is_finite() && *rate > 0.0,
            HalfNormal { sigma } => sigma.is_finite() && *sigma > 0.0,
            Pareto { shape, scale } => {
                shape.is_finite() && scale.is_finite() && *shape > 0.0 && *scale > 0.0
            }
            Tabulated { quantiles } => {
                quantiles.len() >= 2
                    && quantiles.iter().all(|q| q.is_finite() && *q >= 0.0)
                    && quantiles.windows(2).all(|w| w[0] <= w[1])
                    && quantiles[quantiles.len() - 1] > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            config_err(format!("velocity law {self:?} is not supported on (0, inf)"))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        use VelocityLaw::*;
        loop {
            let v = match self {
                Constant { value } => *value,
                Uniform { low, high } => rng.random_range(*low..*high),
                Exponential { rate } => Exp::new(*rate).expect("validated").sample(rng),
                HalfNormal { sigma } => Normal::new(0.0, *sigma).expect("validated").sample(rng).abs(),
                Pareto { shape, scale } => rand_distr::Pareto::new(*scale, *shape).expect("validated").sample(rng),
                Tabulated { quantiles } => tabulated_quantile(quantiles, rng.random::<f64>()),
            };
            if v > 0.0 {
                return v;
            }
        }
    }

    /// Essential supremum, if finite.
    pub fn bound(&self) -> Option<f64> {
        use VelocityLaw::*;
        match self {
            Constant { value } => Some(*value),
            Uniform { high, .. } => Some(*high),
            Tabulated { quantiles } => quantiles.last().copied(),
            Exponential { .. } | HalfNormal { .. } | Pareto { .. } => None,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.bound().is_some()
    }

    /// `E(V⁴)`, `+inf` when it diverges.
    pub fn fourth_moment(&self) -> f64 {
        use VelocityLaw::*;
        match self {
            Constant { value } => value.powi(4),
            Uniform { low, high } => (high.powi(5) - low.powi(5)) / (5.0 * (high - low)),
            Exponential { rate } => 24.0 / rate.powi(4),
            HalfNormal { sigma } => 3.0 * sigma.powi(4),
            Pareto { shape, scale } => {
                if *shape > 4.0 {
                    shape * scale.powi(4) / (shape - 4.0)
                } else {
                    f64::INFINITY
                }
            }
            Tabulated { quantiles } => {
                let w = 1.0 / (quantiles.len() - 1) as f64;
                quantiles
                    .windows(2)
                    .map(|q| {
                        let (a, b) = (q[0], q[1]);
                        if b == a {
                            a.powi(4) * w
                        } else {
                            w * (b.powi(5) - a.powi(5)) / (5.0 * (b - a))
                        }
                    })
                    .sum()
            }
        }
    }

    /// Whether `E(exp(V^s)) < ∞`.
    pub fn exp_moment_finite(&self, s: f64) -> bool {
        use VelocityLaw::*;
        match self {
            Constant { .. } | Uniform { .. } | Tabulated { .. } => true,
            // exp(v^s - rate·v): integrable iff s < 1, or s = 1 with rate > 1.
            Exponential { rate } => s < 1.0 || (s == 1.0 && *rate > 1.0),
            // exp(v^s - v²/2σ²): integrable iff s < 2, or s = 2 with σ² < 1/2.
            HalfNormal { sigma } => s < 2.0 || (s == 2.0 && sigma * sigma < 0.5),
            Pareto { .. } => s <= 0.0,
        }
    }

    /// Supremum of the exponents `s` with `E(exp(V^s)) < ∞`.
    pub fn exp_moment_supremum(&self) -> f64 {
        use VelocityLaw::*;
        match self {
            Constant { .. } | Uniform { .. } | Tabulated { .. } => f64::INFINITY,
            Exponential { .. } => 1.0,
            HalfNormal { .. } => 2.0,
            Pareto { .. } => 0.0,
        }
    }

    /// `P(V ≥ v)`.
    pub fn tail(&self, v: f64) -> f64 {
        use VelocityLaw::*;
        match self {
            Constant { value } => f64::from(u8::from(*value >= v)),
            Uniform { low, high } => ((high - v) / (high - low)).clamp(0.0, 1.0),
            Exponential { rate } => (-rate * v.max(0.0)).exp(),
            HalfNormal { sigma } => {
                statrs::function::erf::erfc(v.max(0.0) / (sigma * std::f64::consts::SQRT_2))
            }
            Pareto { shape, scale } => {
                if v <= *scale {
                    1.0
                } else {
                    (scale / v).powf(*shape)
                }
            }
            Tabulated { quantiles } => {
                let n = quantiles.len() - 1;
                if v <= quantiles[0] {
                    return 1.0;
                }
                if v > quantiles[n] {
                    return 0.0;
                }
                for (i, w) in quantiles.windows(2).enumerate() {
                    if v <= w[1] && w[1] > w[0] {
                        let u = (i as f64 + (v - w[0]) / (w[1] - w[0])) / n as f64;
                        return 1.0 - u;
                    }
                }
                0.0
            }
        }
    }
}

fn tabulated_quantile(q: &[f64], u: f64) -> f64 {
    let x = u * (q.len() - 1) as f64;
    let i = (x.floor() as usize).min(q.len() - 2);
    let frac = x - i as f64;
    q[i] + (q[i + 1] - q[i]) * frac
}

/// Law of the number of branches of a grain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum BranchLaw {
    Dirac { k: usize },
    /// `probs[i] = P(K = i + 1)`.
    Finite { probs: Vec<f64> },
    /// `P(K = k) ∝ k^(-exponent)`, `exponent > 1`.
    Zeta { exponent: f64 },
}

impl BranchLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            BranchLaw::Dirac { k } => *k >= 1,
            BranchLaw::Finite { probs } => {
                !probs.is_empty()
                    && probs.iter().all(|p| p.is_finite() && *p >= 0.0)
                    && probs.iter().sum::<f64>() > 0.0
            }
            BranchLaw::Zeta { exponent } => exponent.is_finite() && *exponent > 1.0,
        };
        if ok {
            Ok(())
        } else {
            config_err(format!("branch-count law {self:?} is not a law on the positive integers"))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            BranchLaw::Dirac { k } => *k,
            BranchLaw::Finite { probs } => {
                WeightedIndex::new(probs).expect("validated").sample(rng) + 1
            }
            BranchLaw::Zeta { exponent } => {
                let k = Zeta::new(*exponent).expect("validated").sample(rng);
                if k >= usize::MAX as f64 {
                    usize::MAX
                } else {
                    k as usize
                }
            }
        }
    }

    /// `E(K²)`, `+inf` when it diverges.
    pub fn second_moment(&self) -> f64 {
        match self {
            BranchLaw::Dirac { k } => (*k as f64).powi(2),
            BranchLaw::Finite { probs } => {
                let total: f64 = probs.iter().sum();
                probs
                    .iter()
                    .enumerate()
                    .map(|(i, p)| p * ((i + 1) as f64).powi(2))
                    .sum::<f64>()
                    / total
            }
            BranchLaw::Zeta { exponent } => {
                if *exponent > 3.0 {
                    riemann_zeta(exponent - 2.0) / riemann_zeta(*exponent)
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

/// `ζ(x)` for `x > 1` by Euler-Maclaurin after 1000 terms.
fn riemann_zeta(x: f64) -> f64 {
    const N: usize = 1000;
    let n = N as f64;
    let head: f64 = (1..N).map(|k| (k as f64).powf(-x)).sum();
    head + n.powf(1.0 - x) / (x - 1.0) + 0.5 * n.powf(-x) + x * n.powf(-x - 1.0) / 12.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// One ray per grain.
    Unilateral,
    /// Two opposite rays with a common speed.
    Bilateral,
    /// `K` independent planar Brownian paths.
    Brownian,
    /// `K` rays with independent directions and speeds.
    Custom,
}

impl Model {
    pub fn is_ray(self) -> bool {
        !matches!(self, Model::Brownian)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkDistribution {
    pub model: Model,
    pub velocity: VelocityLaw,
    /// Ignored by the unilateral (K = 1) and bilateral (K = 2) models.
    #[serde(default = "default_branches")]
    pub branches: BranchLaw,
}

fn default_branches() -> BranchLaw {
    BranchLaw::Dirac { k: 1 }
}

impl MarkDistribution {
    pub fn new(model: Model, velocity: VelocityLaw) -> Self {
        let branches = match model {
            Model::Bilateral => BranchLaw::Dirac { k: 2 },
            _ => BranchLaw::Dirac { k: 1 },
        };
        MarkDistribution { model, velocity, branches }
    }

    pub fn unilateral(velocity: VelocityLaw) -> Self {
        MarkDistribution::new(Model::Unilateral, velocity)
    }

    pub fn bilateral(velocity: VelocityLaw) -> Self {
        MarkDistribution::new(Model::Bilateral, velocity)
    }

    pub fn brownian(branches: BranchLaw) -> Self {
        MarkDistribution {
            model: Model::Brownian,
            velocity: VelocityLaw::Constant { value: 1.0 },
            branches,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.velocity.validate()?;
        self.branches.validate()
    }

    /// The branch-count law actually used by the model.
    pub fn effective_branches(&self) -> BranchLaw {
        match self.model {
            Model::Unilateral => BranchLaw::Dirac { k: 1 },
            Model::Bilateral => BranchLaw::Dirac { k: 2 },
            Model::Brownian | Model::Custom => self.branches.clone(),
        }
    }
}

/// Direction and speed of one ray branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchMark {
    pub theta: f64,
    pub speed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    /// Dense index `0..n`.
    pub id: usize,
    /// Stable sampling index; keys the mark and path streams of the point.
    pub key: u64,
    pub germ: Point,
    pub branch_count: usize,
    /// Ray marks, one per branch; empty for Brownian grains.
    pub branches: Vec<BranchMark>,
}

/// A germ before marking.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Germ {
    pub key: u64,
    pub pos: Point,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkedConfiguration {
    pub window: Window,
    pub intensity: f64,
    pub seed: u64,
    pub marks: MarkDistribution,
    pub points: Vec<MarkedPoint>,
}

/// Homogeneous Poisson germs in `window`. Germ `i` carries key `i`.
pub fn sample_poisson(window: &Window, intensity: f64, seed: u64) -> Result<Vec<Germ>> {
    if !(intensity > 0.0 && intensity.is_finite()) {
        return config_err(format!("intensity must be positive and finite, got {intensity}"));
    }
    window.validate()?;
    let mean = intensity * window.area();
    if mean <= 0.0 {
        return Ok(Vec::new());
    }
    let mut count_rng = stream(seed, Purpose::GermCount, 0, 0);
    let n = Poisson::new(mean)
        .map_err(|e| crate::Error::Config(format!("poisson mean {mean}: {e}")))?
        .sample(&mut count_rng) as u64;
    let mut rng = stream(seed, Purpose::GermPositions, 0, 0);
    Ok((0..n)
        .map(|key| {
            let x = window.xmin + window.width() * rng.random::<f64>();
            let y = window.ymin + window.height() * rng.random::<f64>();
            Germ { key, pos: Point::new(x, y) }
        })
        .collect())
}

/// Draws marks for each germ from a stream keyed by the germ's key; the
/// result is sorted by key and ids are assigned in that order.
pub fn attach_marks(
    mut germs: Vec<Germ>,
    dist: &MarkDistribution,
    seed: u64,
) -> Vec<MarkedPoint> {
    germs.sort_by_key(|g| g.key);
    germs
        .iter()
        .enumerate()
        .map(|(id, g)| {
            let mut rng = stream(seed, Purpose::Marks, g.key, 0);
            mark_point(id, g, dist, &mut rng)
        })
        .collect()
}

fn mark_point<R: Rng>(id: usize, g: &Germ, dist: &MarkDistribution, rng: &mut R) -> MarkedPoint {
    let (branch_count, branches) = match dist.model {
        Model::Unilateral => {
            let theta = rng.random::<f64>() * TAU;
            let speed = dist.velocity.sample(rng);
            (1, vec![BranchMark { theta, speed }])
        }
        Model::Bilateral => {
            let theta = rng.random::<f64>() * TAU;
            let speed = dist.velocity.sample(rng);
            (
                2,
                vec![BranchMark { theta, speed }, BranchMark { theta: theta + PI, speed }],
            )
        }
        Model::Custom => {
            let k = dist.branches.sample(rng);
            let marks = (0..k)
                .map(|_| {
                    let theta = rng.random::<f64>() * TAU;
                    let speed = dist.velocity.sample(rng);
                    BranchMark { theta, speed }
                })
                .collect();
            (k, marks)
        }
        Model::Brownian => (dist.branches.sample(rng), Vec::new()),
    };
    MarkedPoint {
        id,
        key: g.key,
        germ: g.pos,
        branch_count,
        branches,
    }
}

/// Statistical hypotheses of the existence and non-percolation results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub fourth_moment: Option<f64>,
    pub fourth_moment_finite: bool,
    /// Supremum of `s` with `E(exp(V^s)) < ∞`; `None` means every `s`.
    pub exp_moment_supremum: Option<f64>,
    /// Some `s > 1` has `E(exp(V^s)) < ∞`.
    pub exp_moment_above_one: bool,
    pub branch_second_moment: Option<f64>,
    pub branch_second_moment_finite: bool,
    pub warnings: Vec<String>,
}

pub fn validate_moments(dist: &MarkDistribution) -> MomentReport {
    let m4 = dist.velocity.fourth_moment();
    let sup = dist.velocity.exp_moment_supremum();
    let k2 = dist.effective_branches().second_moment();
    let mut warnings = Vec::new();
    let ray = dist.model.is_ray();
    if ray && !m4.is_finite() {
        warnings.push(format!("E(V^4) is infinite for {:?}: existence is not guaranteed", dist.velocity));
    }
    if ray && sup <= 1.0 {
        warnings.push(format!(
            "no s > 1 with E(exp(V^s)) finite for {:?}: non-percolation is not guaranteed",
            dist.velocity
        ));
    }
    if !k2.is_finite() {
        warnings.push("E(K^2) is infinite: the branching criterion cannot hold".to_string());
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    MomentReport {
        fourth_moment: m4.is_finite().then_some(m4),
        fourth_moment_finite: m4.is_finite(),
        exp_moment_supremum: sup.is_finite().then_some(sup),
        exp_moment_above_one: sup > 1.0,
        branch_second_moment: k2.is_finite().then_some(k2),
        branch_second_moment_finite: k2.is_finite(),
        warnings,
    }
}

impl MarkedConfiguration {
    /// Samples germs and marks from one master seed.
    pub fn generate(window: Window, intensity: f64, marks: MarkDistribution, seed: u64) -> Result<Self> {
        marks.validate()?;
        let germs = sample_poisson(&window, intensity, seed)?;
        let points = attach_marks(germs, &marks, seed);
        Ok(MarkedConfiguration { window, intensity, seed, marks, points })
    }

    /// Builds a configuration from explicit points; ids and keys are reset to
    /// list positions.
    pub fn from_points(
        window: Window,
        intensity: f64,
        seed: u64,
        marks: MarkDistribution,
        mut points: Vec<MarkedPoint>,
    ) -> Self {
        for (i, p) in points.iter_mut().enumerate() {
            p.id = i;
            p.key = i as u64;
        }
        MarkedConfiguration { window, intensity, seed, marks, points }
    }

    /// Unilateral configuration from `(x, y, theta, speed)` rows.
    pub fn unilateral(window: Window, rows: &[(f64, f64, f64, f64)]) -> Self {
        let points = rows
            .iter()
            .enumerate()
            .map(|(i, &(x, y, theta, speed))| MarkedPoint {
                id: i,
                key: i as u64,
                germ: Point::new(x, y),
                branch_count: 1,
                branches: vec![BranchMark { theta, speed }],
            })
            .collect();
        let max_speed = rows.iter().map(|r| r.3).fold(0.0, f64::max);
        let marks = MarkDistribution::unilateral(VelocityLaw::Constant {
            value: if max_speed > 0.0 { max_speed } else { 1.0 },
        });
        MarkedConfiguration::from_points(window, 1.0, 0, marks, points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Ray branches of point `id`.
    pub fn rays(&self, id: usize) -> Vec<GrowingBranch> {
        let p = &self.points[id];
        p.branches
            .iter()
            .enumerate()
            .map(|(b, m)| GrowingBranch::new(p.germ, m.theta, m.speed, id, b))
            .collect()
    }

    pub fn max_speed(&self) -> f64 {
        self.points
            .iter()
            .flat_map(|p| p.branches.iter().map(|b| b.speed))
            .fold(0.0, f64::max)
    }

    pub fn germ_bounds(&self) -> Aabb {
        Aabb::of_points(self.points.iter().map(|p| p.germ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_speed() -> VelocityLaw {
        VelocityLaw::Constant { value: 1.0 }
    }

    #[test]
    fn poisson_is_deterministic_and_has_the_right_mean() {
        let w = Window::square(10.0, 0.0).unwrap();
        assert_eq!(sample_poisson(&w, 1.0, 3).unwrap(), sample_poisson(&w, 1.0, 3).unwrap());
        let total: usize = (0..400).map(|s| sample_poisson(&w, 1.0, s).unwrap().len()).sum();
        let mean = total as f64 / 400.0;
        assert!((mean - 100.0).abs() < 4.0 * (100.0f64 / 400.0).sqrt(), "mean {mean}");
    }

    #[test]
    fn degenerate_window_and_bad_intensity() {
        let w = Window::new(0.0, 0.0, 0.0, 5.0, 0.0).unwrap();
        assert!(sample_poisson(&w, 1.0, 1).unwrap().is_empty());
        let w = Window::square(1.0, 0.0).unwrap();
        assert!(sample_poisson(&w, 0.0, 1).is_err());
        assert!(sample_poisson(&w, -1.0, 1).is_err());
        assert!(Window::square(10.0, 6.0).is_err());
    }

    #[test]
    fn model_branch_structure() {
        let w = Window::square(10.0, 0.0).unwrap();
        let c = MarkedConfiguration::generate(w, 1.0, MarkDistribution::unilateral(unit_speed()), 9).unwrap();
        assert!(c.points.iter().all(|p| p.branch_count == 1 && p.branches.len() == 1));
        let law = VelocityLaw::HalfNormal { sigma: 1.0 };
        let c = MarkedConfiguration::generate(w, 1.0, MarkDistribution::bilateral(law), 9).unwrap();
        for p in &c.points {
            assert_eq!(p.branches.len(), 2);
            assert_eq!(p.branches[0].speed, p.branches[1].speed);
            assert_eq!(p.branches[1].theta, p.branches[0].theta + PI);
        }
    }

    #[test]
    fn marks_do_not_depend_on_germ_order() {
        let w = Window::square(8.0, 0.0).unwrap();
        let germs = sample_poisson(&w, 1.0, 5).unwrap();
        let dist = MarkDistribution::unilateral(VelocityLaw::Exponential { rate: 1.0 });
        let a = attach_marks(germs.clone(), &dist, 5);
        let mut rev = germs;
        rev.reverse();
        let b = attach_marks(rev, &dist, 5);
        assert_eq!(a, b);
    }

    #[test]
    fn moment_flags() {
        let r = validate_moments(&MarkDistribution::unilateral(unit_speed()));
        assert!(r.fourth_moment_finite && r.exp_moment_above_one && r.warnings.is_empty());
        let r = validate_moments(&MarkDistribution::unilateral(VelocityLaw::Pareto { shape: 3.0, scale: 1.0 }));
        assert!(!r.fourth_moment_finite);
        let hn = VelocityLaw::HalfNormal { sigma: 1.0 };
        assert!(hn.exp_moment_finite(1.9));
        assert!(!hn.exp_moment_finite(2.0));
        assert!(!hn.exp_moment_finite(2.5));
        assert!(VelocityLaw::HalfNormal { sigma: 0.5 }.exp_moment_finite(2.0));
        assert!((hn.fourth_moment() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn analytic_moments_match_sampling() {
        let laws = [
            VelocityLaw::Uniform { low: 0.5, high: 2.0 },
            VelocityLaw::Exponential { rate: 2.0 },
            VelocityLaw::Pareto { shape: 9.0, scale: 1.0 },
            VelocityLaw::Tabulated { quantiles: vec![0.0, 1.0, 1.5, 4.0] },
        ];
        let mut rng = stream(1, Purpose::MonteCarlo, 0, 0);
        for law in laws {
            let n = 200_000;
            let samples: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
            let m4 = samples.iter().map(|v| v.powi(4)).sum::<f64>() / n as f64;
            let exact = law.fourth_moment();
            assert!((m4 / exact - 1.0).abs() < 0.05, "{law:?}: {m4} vs {exact}");
            let t = samples.iter().filter(|&&v| v >= 1.2).count() as f64 / n as f64;
            assert!((t - law.tail(1.2)).abs() < 0.01, "{law:?} tail");
        }
    }

    #[test]
    fn branch_laws() {
        assert_eq!(BranchLaw::Dirac { k: 2 }.second_moment(), 4.0);
        assert_eq!(BranchLaw::Finite { probs: vec![0.5, 0.5] }.second_moment(), 2.5);
        assert!(BranchLaw::Zeta { exponent: 2.5 }.second_moment().is_infinite());
        let z = BranchLaw::Zeta { exponent: 5.0 }.second_moment();
        // ζ(3)/ζ(5)
        assert!((z - 1.202_056_903_159_594 / 1.036_927_755_143_37).abs() < 1e-9);
    }
}
