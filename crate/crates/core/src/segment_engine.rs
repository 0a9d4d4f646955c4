//! Exact event-driven resolution for ray grains (unilateral, bilateral and
//! multi-ray models).
//!
//! Every attacker owns a lazily refilled, time-sorted batch of hit candidates.
//! A global heap holds the next candidate of each unstopped attacker, keyed by
//! `(t, attacker, blocker)`. A popped candidate is realized iff the blocker had
//! deposited the impact point before its own stop (`s < f_blocker`); otherwise
//! the attacker's next candidate is queued. Since `s < t` for every candidate,
//! a blocker that is still growing at time `t` never stops before `s`, so a
//! single pass in time order is exact.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::exploration::{GrainRecord, Outcome, Stop, StoppedExploration};
use crate::geometry::{
    point_segment_distance, segment_distance, solve_hit, Aabb, GridIndex, GrowingBranch, HitOutcome, Point,
    Tolerances,
};
use crate::point_process::{MarkedConfiguration, Window};

/// Candidate enumeration strategy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pruning {
    /// Grid when the velocity law is bounded, all pairs otherwise.
    #[default]
    Auto,
    AllPairs,
    /// Germ grid queried with a doubling time horizon. Exact for any finite
    /// configuration since the query radius uses the configuration's largest
    /// speed.
    Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolveOptions {
    pub pruning: Pruning,
    pub exec: Exec,
    pub tol: Tolerances,
    /// Per-point growth horizons; a grain still growing at its horizon is
    /// truncated there.
    pub horizons: Option<Vec<f64>>,
    /// Candidates kept per refill in all-pairs mode.
    pub batch: usize,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        ResolveOptions {
            pruning: Pruning::Auto,
            exec: Exec::default(),
            tol: Tolerances::default(),
            horizons: None,
            batch: 32,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResolveStats {
    pub pruning: Option<Pruning>,
    pub candidates: u64,
    pub refills: u64,
    /// Realized events sharing their time with the previous realized event.
    pub ties: u64,
    pub degenerate_pairs: u64,
    /// Popped candidates rejected because the blocker stopped first.
    pub rejected: u64,
}

#[derive(Clone, Copy, Debug)]
struct Cand {
    t: f64,
    s: f64,
    blocker: usize,
    ab: usize,
    bb: usize,
    point: Point,
}

impl Cand {
    fn order(&self, o: &Cand) -> Ordering {
        self.t
            .total_cmp(&o.t)
            .then(self.blocker.cmp(&o.blocker))
            .then(self.ab.cmp(&o.ab))
            .then(self.bb.cmp(&o.bb))
    }
}

#[derive(Clone, Copy, Debug)]
struct Event {
    t: f64,
    attacker: usize,
    /// `usize::MAX` for a truncation.
    blocker: usize,
    ab: usize,
    bb: usize,
}

impl PartialEq for Event {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Event {
    fn cmp(&self, o: &Self) -> Ordering {
        self.t
            .total_cmp(&o.t)
            .then(self.attacker.cmp(&o.attacker))
            .then(self.blocker.cmp(&o.blocker))
            .then(self.ab.cmp(&o.ab))
            .then(self.bb.cmp(&o.bb))
    }
}

#[derive(Default)]
struct AttackerState {
    /// Sorted by decreasing time; the next candidate is last.
    batch: Vec<Cand>,
    /// Every candidate with `t <= covered` has been generated.
    covered: f64,
    done: bool,
    candidates: u64,
    refills: u64,
    degenerate: u64,
}

struct Engine<'a> {
    rays: Vec<Vec<GrowingBranch>>,
    n: usize,
    horizons: Option<&'a [f64]>,
    tol: Tolerances,
    mode: Mode,
}

enum Mode {
    AllPairs { batch: usize },
    Grid { grid: GridIndex, vmax: f64, spacing: f64, bounds: Aabb },
}

impl Engine<'_> {
    fn limit(&self, a: usize) -> f64 {
        self.horizons.map_or(f64::INFINITY, |h| h[a])
    }

    fn push_pair(&self, a: usize, b: usize, lo: f64, hi: f64, st: &mut AttackerState, out: &mut Vec<Cand>) {
        let hb = self.limit(b);
        for ra in &self.rays[a] {
            for rb in &self.rays[b] {
                match solve_hit(ra, rb, &self.tol) {
                    HitOutcome::Hit(h) => {
                        if h.t > lo && h.t <= hi && h.s < hb {
                            out.push(Cand {
                                t: h.t,
                                s: h.s,
                                blocker: b,
                                ab: ra.branch,
                                bb: rb.branch,
                                point: h.point,
                            });
                        }
                    }
                    HitOutcome::DegenerateCollinear => st.degenerate += 1,
                    HitOutcome::Miss => {}
                }
            }
        }
    }

    fn refill(&self, a: usize, st: &mut AttackerState) {
        let limit = self.limit(a);
        while st.batch.is_empty() && !st.done {
            st.refills += 1;
            let lo = st.covered;
            let mut out = Vec::new();
            match &self.mode {
                Mode::AllPairs { batch } => {
                    for b in 0..self.n {
                        if b != a {
                            self.push_pair(a, b, lo, limit, st, &mut out);
                        }
                    }
                    if out.len() > *batch {
                        let (_, kth, _) = out.select_nth_unstable_by(*batch - 1, |x, y| x.order(y));
                        let cut = kth.t;
                        out.retain(|c| c.t <= cut);
                        st.covered = cut;
                    } else {
                        st.covered = limit;
                        st.done = true;
                    }
                }
                Mode::Grid { grid, vmax, spacing, bounds } => {
                    let germ = self.rays[a][0].origin;
                    let va = self.rays[a].iter().map(|r| r.speed).fold(0.0, f64::max);
                    let reach = [bounds.min, bounds.max, Point::new(bounds.min.x, bounds.max.y), Point::new(bounds.max.x, bounds.min.y)]
                        .iter()
                        .map(|c| c.dist(germ))
                        .fold(0.0, f64::max);
                    let speed = va + vmax;
                    let mut hi = if lo == 0.0 { 2.0 * spacing / speed } else { 2.0 * lo };
                    let radius = hi * speed;
                    if radius >= reach {
                        hi = f64::INFINITY;
                    }
                    if hi >= limit {
                        hi = limit;
                        st.done = true;
                    }
                    let region = Aabb::of_point(germ).dilate(radius.min(reach) * (1.0 + 1e-12) + 1e-12);
                    for b in grid.query(&region) {
                        if b != a {
                            self.push_pair(a, b, lo, hi, st, &mut out);
                        }
                    }
                    st.covered = hi;
                    if hi.is_infinite() {
                        st.done = true;
                    }
                }
            }
            out.sort_unstable_by(|x, y| y.order(x));
            st.candidates += out.len() as u64;
            st.batch = out;
        }
    }

    /// Next event of attacker `a`, refilling its batch if needed.
    fn next_event(&self, a: usize, st: &mut AttackerState) -> Option<Event> {
        self.refill(a, st);
        match st.batch.last() {
            Some(c) => Some(Event {
                t: c.t,
                attacker: a,
                blocker: c.blocker,
                ab: c.ab,
                bb: c.bb,
            }),
            None => {
                let limit = self.limit(a);
                limit.is_finite().then_some(Event {
                    t: limit,
                    attacker: a,
                    blocker: usize::MAX,
                    ab: 0,
                    bb: 0,
                })
            }
        }
    }
}

/// Resolves with default options.
pub fn resolve(config: &MarkedConfiguration) -> Result<StoppedExploration> {
    resolve_with(config, &ResolveOptions::default()).map(|(e, _)| e)
}

pub fn resolve_with(config: &MarkedConfiguration, opts: &ResolveOptions) -> Result<(StoppedExploration, ResolveStats)> {
    if !config.marks.model.is_ray() {
        return Err(Error::Precondition(
            "the exact engine handles ray grains only; use the generic engine for paths".into(),
        ));
    }
    let n = config.len();
    if let Some(h) = &opts.horizons {
        if h.len() != n || h.iter().any(|t| t.is_nan() || *t <= 0.0) {
            return Err(Error::Precondition("horizons must be positive, one per point".into()));
        }
    }
    for p in &config.points {
        if p.branches.is_empty() || p.branches.iter().any(|b| !(b.speed > 0.0) || !b.theta.is_finite()) {
            return Err(Error::Precondition(format!("point {} has invalid ray marks", p.id)));
        }
    }
    let pruning = match opts.pruning {
        Pruning::Auto if config.marks.velocity.is_bounded() => Pruning::Grid,
        Pruning::Auto => Pruning::AllPairs,
        p => p,
    };
    let mut stats = ResolveStats {
        pruning: Some(pruning),
        ..Default::default()
    };
    if n == 0 {
        return Ok((StoppedExploration::default(), stats));
    }
    let rays: Vec<Vec<GrowingBranch>> = (0..n).map(|i| config.rays(i)).collect();
    let mode = match pruning {
        Pruning::Grid => {
            let bounds = config.germ_bounds();
            let area = (bounds.width() * bounds.height()).max(1e-300);
            let spacing = (area / n as f64).sqrt().max(1e-9 * (1.0 + bounds.diagonal()));
            let grid = GridIndex::build(
                config.points.iter().map(|p| (p.id, Aabb::of_point(p.germ))),
                2.0 * spacing,
            );
            Mode::Grid {
                grid,
                vmax: config.max_speed(),
                spacing,
                bounds,
            }
        }
        _ => Mode::AllPairs { batch: opts.batch.max(1) },
    };
    let engine = Engine {
        rays,
        n,
        horizons: opts.horizons.as_deref(),
        tol: opts.tol,
        mode,
    };

    let initial: Vec<(AttackerState, Option<Event>)> = opts.exec.map_range(n, |a| {
        let mut st = AttackerState::default();
        let ev = engine.next_event(a, &mut st);
        (st, ev)
    });
    let mut states = Vec::with_capacity(n);
    let mut heap = BinaryHeap::with_capacity(n);
    for (st, ev) in initial {
        if let Some(ev) = ev {
            heap.push(Reverse(ev));
        }
        states.push(st);
    }

    let mut records = vec![GrainRecord::UNSTOPPED; n];
    let mut last_t = f64::NEG_INFINITY;
    while let Some(Reverse(ev)) = heap.pop() {
        let a = ev.attacker;
        if !records[a].is_unstopped() {
            continue;
        }
        if ev.blocker == usize::MAX {
            records[a] = GrainRecord {
                lifetime: ev.t,
                outcome: Outcome::Truncated,
            };
            continue;
        }
        let st = &mut states[a];
        let c = st.batch.pop().expect("queued candidate");
        if c.s < records[c.blocker].lifetime {
            debug_assert!(c.s < c.t, "realized stop with s >= t");
            if c.t == last_t {
                stats.ties += 1;
                log::debug!("tie at t={} (attacker {a}, blocker {})", c.t, c.blocker);
            }
            last_t = c.t;
            records[a] = GrainRecord {
                lifetime: c.t,
                outcome: Outcome::Stopped(Stop {
                    stopper: c.blocker,
                    attacker_branch: c.ab,
                    blocker_branch: c.bb,
                    impact: c.point,
                    blocker_s: c.s,
                }),
            };
        } else {
            stats.rejected += 1;
            if let Some(next) = engine.next_event(a, st) {
                heap.push(Reverse(next));
            }
        }
    }
    for st in &states {
        stats.candidates += st.candidates;
        stats.refills += st.refills;
        stats.degenerate_pairs += st.degenerate;
    }
    if stats.degenerate_pairs > 0 {
        log::warn!("{} collinear overlapping branch pairs treated as misses", stats.degenerate_pairs);
    }
    Ok((StoppedExploration { records }, stats))
}

#[derive(Clone, Copy, Debug)]
struct Seg {
    owner: usize,
    branch: usize,
    a: Point,
    b: Point,
}

/// Realized branch segments; rays of unstopped grains are clipped once they
/// have left the box holding every germ and every finite segment.
struct SegmentSet {
    segs: Vec<Seg>,
    grid: GridIndex,
    by_owner: Vec<Vec<usize>>,
}

impl SegmentSet {
    fn new(expl: &StoppedExploration, config: &MarkedConfiguration) -> Self {
        let mut bounds = config.germ_bounds();
        for (i, r) in expl.records.iter().enumerate() {
            if r.lifetime.is_finite() {
                for b in 0..config.points[i].branches.len() {
                    bounds.include(expl.ray_end(config, i, b, f64::INFINITY));
                }
            }
        }
        let clip_len = bounds.diagonal() + 1.0;
        let mut segs = Vec::new();
        let mut by_owner = vec![Vec::new(); config.len()];
        for (i, p) in config.points.iter().enumerate() {
            for (b, m) in p.branches.iter().enumerate() {
                let end = expl.ray_end(config, i, b, clip_len / m.speed);
                by_owner[i].push(segs.len());
                segs.push(Seg { owner: i, branch: b, a: p.germ, b: end });
            }
        }
        let n = segs.len().max(1) as f64;
        let cell = (bounds.width() * bounds.height() / n).sqrt().max(1e-6 * (1.0 + bounds.diagonal()));
        let grid = GridIndex::build(segs.iter().enumerate().map(|(k, s)| (k, Aabb::of_segment(s.a, s.b))), 2.0 * cell);
        SegmentSet { segs, grid, by_owner }
    }
}

fn scale_of(config: &MarkedConfiguration) -> f64 {
    let b = config.germ_bounds();
    if b.is_empty() {
        return 1.0;
    }
    [b.min.x, b.min.y, b.max.x, b.max.y].iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardcoreViolation {
    pub a: usize,
    pub a_branch: usize,
    pub b: usize,
    pub b_branch: usize,
    pub distance: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HardcoreReport {
    pub pairs_checked: usize,
    pub violations: Vec<HardcoreViolation>,
}

impl HardcoreReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that realized grains touch only where one of them recorded a stop
/// on the other, with the attacker's head at the impact point. `tol` is
/// relative to the coordinate magnitude of the configuration.
pub fn verify_hardcore(expl: &StoppedExploration, config: &MarkedConfiguration, tol: f64) -> HardcoreReport {
    let tol_abs = tol * scale_of(config);
    let set = SegmentSet::new(expl, config);
    let mut report = HardcoreReport::default();
    let allowed = |x: &Seg, y: &Seg| -> bool {
        let rec = &expl.records[x.owner];
        match rec.stop() {
            Some(s) if s.stopper == y.owner && s.attacker_branch == x.branch && s.blocker_branch == y.branch => {
                x.b.dist(s.impact) <= tol_abs && point_segment_distance(s.impact, y.a, y.b) <= tol_abs
            }
            _ => false,
        }
    };
    let mut cands = Vec::new();
    for (i, si) in set.segs.iter().enumerate() {
        set.grid.query_into(&Aabb::of_segment(si.a, si.b).dilate(tol_abs), &mut cands);
        for &j in &cands {
            let sj = &set.segs[j];
            if j <= i || sj.owner == si.owner {
                continue;
            }
            report.pairs_checked += 1;
            let d = segment_distance(si.a, si.b, sj.a, sj.b);
            if d <= tol_abs && !allowed(si, sj) && !allowed(sj, si) {
                report.violations.push(HardcoreViolation {
                    a: si.owner,
                    a_branch: si.branch,
                    b: sj.owner,
                    b_branch: sj.branch,
                    distance: d,
                });
            }
        }
    }
    // Two never-stopping rays must not cross anywhere, not only inside the box.
    let tol_h = Tolerances::default();
    let free: Vec<usize> = (0..config.len()).filter(|&i| expl.records[i].is_unstopped()).collect();
    for (k, &x) in free.iter().enumerate() {
        for &y in &free[k + 1..] {
            for rx in config.rays(x) {
                for ry in config.rays(y) {
                    let crosses = matches!(solve_hit(&rx, &ry, &tol_h), HitOutcome::Hit(_))
                        || matches!(solve_hit(&ry, &rx, &tol_h), HitOutcome::Hit(_));
                    if crosses {
                        report.violations.push(HardcoreViolation {
                            a: x,
                            a_branch: rx.branch,
                            b: y,
                            b_branch: ry.branch,
                            distance: 0.0,
                        });
                    }
                }
            }
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessViolation {
    pub id: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub checked: usize,
    pub violations: Vec<UniquenessViolation>,
}

impl UniquenessReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every stopped point: a single stopper other than itself, whose
/// grain holds the impact (deposited strictly before the stopper's own stop),
/// the head at the impact, and no third grain touching the head.
pub fn verify_uniqueness(expl: &StoppedExploration, config: &MarkedConfiguration, tol: f64) -> UniquenessReport {
    let tol_abs = tol * scale_of(config);
    let set = SegmentSet::new(expl, config);
    let mut report = UniquenessReport::default();
    let mut cands = Vec::new();
    for (x, rec) in expl.records.iter().enumerate() {
        let Some(s) = rec.stop() else { continue };
        report.checked += 1;
        let mut fail = |reason: String| report.violations.push(UniquenessViolation { id: x, reason });
        if s.stopper == x || s.stopper >= config.len() {
            fail(format!("invalid stopper {}", s.stopper));
            continue;
        }
        let p = &config.points[x];
        let Some(m) = p.branches.get(s.attacker_branch) else {
            fail("attacker branch out of range".into());
            continue;
        };
        let d = s.impact.dist(p.germ);
        if (rec.lifetime * m.speed - d).abs() > tol * d.max(1.0) {
            fail(format!("f*v = {} but |impact - germ| = {d}", rec.lifetime * m.speed));
        }
        if expl.ray_end(config, x, s.attacker_branch, f64::INFINITY).dist(s.impact) > tol_abs {
            fail("head is not at the impact point".into());
        }
        let y = s.stopper;
        let fy = expl.records[y].lifetime;
        if !(s.blocker_s < fy) {
            fail(format!("impact deposited at s={} but stopper lived {fy}", s.blocker_s));
        }
        match config.points[y].branches.get(s.blocker_branch) {
            Some(mb) => {
                let dep = config.points[y].germ + Point::from_angle(mb.theta) * (mb.speed * s.blocker_s);
                if dep.dist(s.impact) > tol_abs {
                    fail("impact is not on the stopper's track at s".into());
                }
            }
            None => fail("blocker branch out of range".into()),
        }
        set.grid.query_into(&Aabb::of_point(s.impact).dilate(tol_abs), &mut cands);
        let mut touching: Vec<usize> = cands
            .iter()
            .map(|&k| set.segs[k])
            .filter(|sg| sg.owner != x && point_segment_distance(s.impact, sg.a, sg.b) <= tol_abs)
            .map(|sg| sg.owner)
            .collect();
        touching.dedup();
        touching.sort_unstable();
        touching.dedup();
        if touching != [y] {
            fail(format!("head touches grains {touching:?}, expected [{y}]"));
        }
    }
    debug_assert!(set.by_owner.len() == config.len());
    report
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteTimeReport {
    pub core_total: usize,
    pub core_unstopped: usize,
    pub full_total: usize,
    pub full_unstopped: usize,
}

impl FiniteTimeReport {
    /// Fraction of core points never stopped (0 when the core is empty).
    pub fn core_fraction(&self) -> f64 {
        if self.core_total == 0 {
            0.0
        } else {
            self.core_unstopped as f64 / self.core_total as f64
        }
    }

    pub fn full_fraction(&self) -> f64 {
        if self.full_total == 0 {
            0.0
        } else {
            self.full_unstopped as f64 / self.full_total as f64
        }
    }
}

pub fn finite_time_report(expl: &StoppedExploration, config: &MarkedConfiguration, window: &Window) -> FiniteTimeReport {
    let core = window.core();
    let mut r = FiniteTimeReport {
        core_total: 0,
        core_unstopped: 0,
        full_total: 0,
        full_unstopped: 0,
    };
    for (p, rec) in config.points.iter().zip(&expl.records) {
        let free = rec.lifetime.is_infinite();
        r.full_total += 1;
        r.full_unstopped += usize::from(free);
        if core.contains(p.germ) {
            r.core_total += 1;
            r.core_unstopped += usize::from(free);
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn three_points() -> MarkedConfiguration {
        let w = Window::new(-1.0, 5.0, -2.0, 5.0, 0.0).unwrap();
        MarkedConfiguration::unilateral(w, &[(0.0, 0.0, 0.0, 1.0), (2.0, -1.0, PI / 2.0, 1.0), (3.0, 3.0, PI, 1.0)])
    }

    #[test]
    fn three_point_chain() {
        for pruning in [Pruning::AllPairs, Pruning::Grid] {
            let opts = ResolveOptions { pruning, ..Default::default() };
            let (e, _) = resolve_with(&three_points(), &opts).unwrap();
            assert!((e.lifetime(0) - 2.0).abs() < 1e-12);
            assert!((e.lifetime(1) - 4.0).abs() < 1e-12);
            assert!(e.lifetime(2).is_infinite());
            let s0 = e.records[0].stop().unwrap();
            assert_eq!(s0.stopper, 1);
            assert!(s0.impact.dist(Point::new(2.0, 0.0)) < 1e-12);
            assert!((s0.blocker_s - 1.0).abs() < 1e-12);
            let s1 = e.records[1].stop().unwrap();
            assert_eq!(s1.stopper, 2);
            assert!(s1.impact.dist(Point::new(2.0, 3.0)) < 1e-12);
            assert!((s1.blocker_s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_configurations() {
        let w = Window::square(10.0, 0.0).unwrap();
        assert!(resolve(&MarkedConfiguration::unilateral(w, &[])).unwrap().is_empty());
        let e = resolve(&MarkedConfiguration::unilateral(w, &[(1.0, 1.0, 0.3, 1.0)])).unwrap();
        assert!(e.lifetime(0).is_infinite() && e.stopper(0).is_none());
        let e = resolve(&MarkedConfiguration::unilateral(w, &[(1.0, 1.0, 0.3, 1.0), (1.0, 3.0, 0.3, 2.0)])).unwrap();
        assert_eq!(e.unstopped_count(), 2);
    }

    #[test]
    fn verifiers_on_the_chain() {
        let c = three_points();
        let e = resolve(&c).unwrap();
        assert!(verify_hardcore(&e, &c, 1e-9).ok());
        let u = verify_uniqueness(&e, &c, 1e-9);
        assert!(u.ok(), "{u:?}");
        assert_eq!(u.checked, 2);

        let mut shrunk = e.clone();
        shrunk.records[0].lifetime *= 0.9;
        assert!(verify_hardcore(&shrunk, &c, 1e-9).ok());

        let mut grown = e.clone();
        grown.records[0].lifetime *= 1.1;
        assert!(!verify_hardcore(&grown, &c, 1e-9).ok());
    }

    #[test]
    fn horizons_truncate() {
        let c = three_points();
        let opts = ResolveOptions {
            horizons: Some(vec![1.5, 10.0, 0.5]),
            ..Default::default()
        };
        let (e, _) = resolve_with(&c, &opts).unwrap();
        assert_eq!(e.records[0].outcome, Outcome::Truncated);
        assert_eq!(e.lifetime(0), 1.5);
        assert_eq!(e.records[2].outcome, Outcome::Truncated);
        // Point 1 would meet point 2's track at s = 1 > 0.5, so it runs to its horizon.
        assert_eq!(e.records[1].outcome, Outcome::Truncated);
        assert_eq!(e.lifetime(1), 10.0);
    }

    #[test]
    fn finite_time_single_point() {
        let w = Window::square(10.0, 0.0).unwrap();
        let c = MarkedConfiguration::unilateral(w, &[(5.0, 5.0, 0.0, 1.0)]);
        let r = finite_time_report(&resolve(&c).unwrap(), &c, &w);
        assert_eq!(r.core_fraction(), 1.0);
    }
}
