//! Acceptance suite: one PASS/FAIL line per criterion. Runs with a custom
//! main so the lines are always shown.

use std::time::{Duration, Instant};

use grains_harness::compare::{compare, ComparePolicy, ToleranceRule};
use grains_harness::config::{EngineSpec, ExperimentKind, ExperimentSpec, OracleSpec, PollutionSpec, ProcessSpec, ScanSpec, ShieldSpec};
use grains_harness::experiments::percolation_scan;
use grains_harness::execute;
use grains_harness::oracle::oracle_resolve;
use stopped_grains::generic_engine::{
    branching_criterion, choose_step, estimate_m4, run as run_generic, GenericOptions, PathSampler, StepParams, StepSearch,
};
use stopped_grains::pog::{check_structure, find_loops, FunctionalGraph};
use stopped_grains::pollution::{critical_velocity, estimate_exp_moment, pollution_radius, quick_block_frequency, estimate_shield_probability, ShieldParams};
use stopped_grains::segment_engine::{resolve, resolve_with, verify_hardcore, verify_uniqueness, ResolveOptions};
use stopped_grains::{BranchLaw, Exec, MarkDistribution, MarkedConfiguration, VelocityLaw, Window};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn law(i: usize) -> VelocityLaw {
    if i.is_multiple_of(2) {
        VelocityLaw::Constant { value: 1.0 }
    } else {
        VelocityLaw::HalfNormal { sigma: 1.0 }
    }
}

fn model(i: usize) -> MarkDistribution {
    if (i / 2).is_multiple_of(2) {
        MarkDistribution::unilateral(law(i))
    } else {
        MarkDistribution::bilateral(law(i))
    }
}

/// Stopper maps collected for the structural criterion.
type Maps = Vec<Vec<Option<usize>>>;

fn exploration_correctness(maps: &mut Maps) -> Verdict {
    let sizes = [50.0, 200.0, 1000.0, 5000.0];
    let runs = Exec::Parallel.map_range(100, |i| {
        let n = sizes[(i / 4) % 4];
        let w = Window::square(f64::sqrt(n), 0.0).unwrap();
        let c = MarkedConfiguration::generate(w, 1.0, model(i), 1000 + i as u64).unwrap();
        let opts = ResolveOptions { exec: Exec::Sequential, ..ResolveOptions::default() };
        let (e, _) = resolve_with(&c, &opts).unwrap();
        let h = verify_hardcore(&e, &c, 1e-9);
        let u = verify_uniqueness(&e, &c, 1e-9);
        (c.len(), h.violations.len(), u.violations.len(), e.stopper_map())
    });
    let largest = runs.iter().map(|r| r.0).max().unwrap_or(0);
    let hard: usize = runs.iter().map(|r| r.1).sum();
    let uniq: usize = runs.iter().map(|r| r.2).sum();
    maps.extend(runs.into_iter().map(|r| r.3));
    verdict(
        hard == 0 && uniq == 0,
        format!("100 instances (largest n={largest}): {hard} hardcore and {uniq} uniqueness violations"),
    )
}

fn oracle_equivalence(maps: &mut Maps) -> Verdict {
    let dt = 1e-3;
    let mut instances = Vec::new();
    let mut seed = 5000u64;
    while instances.len() < 50 {
        let i = instances.len();
        let w = Window::square(6.5, 0.0).unwrap();
        let c = MarkedConfiguration::generate(w, 1.0, model(i), seed).unwrap();
        seed += 1;
        if c.len() <= 50 {
            instances.push(c);
        }
    }
    let results = Exec::Parallel.map(&instances, |c| {
        let exact = resolve(c).unwrap();
        let oracle = oracle_resolve(c, dt).unwrap();
        let policy = ComparePolicy {
            rule: ToleranceRule::DtScaled { dt },
            min_within: 1.0,
            min_stopper_match: 0.98,
        };
        let d = compare(&exact, &oracle.exploration, c, &policy).unwrap();
        let unexplained = d
            .stopper_mismatches
            .iter()
            .filter(|i| oracle.near_ties.binary_search(i).is_err())
            .count();
        (d, unexplained, exact.stopper_map(), oracle.exploration.stopper_map())
    });
    let (mut compared, mut within, mut matched, mut unexplained, mut status) = (0, 0, 0, 0, 0);
    let mut max_err = 0.0f64;
    for (d, u, a, b) in results {
        compared += d.compared;
        within += d.within;
        matched += d.stopper_matches;
        unexplained += u;
        status += d.status_mismatches.len();
        max_err = max_err.max(d.max_error);
        maps.push(a);
        maps.push(b);
    }
    let frac = matched as f64 / compared.max(1) as f64;
    verdict(
        within == compared && frac >= 0.98 && unexplained == 0 && status == 0,
        format!(
            "{compared} stopped points: {within} within dt-tolerance (max err {max_err:.2e}), stopper match {:.4}, {unexplained} unexplained",
            frac
        ),
    )
}

fn transformed(c: &MarkedConfiguration, f: impl Fn(&mut stopped_grains::MarkedPoint), window: Window) -> MarkedConfiguration {
    let mut t = c.clone();
    t.window = window;
    t.points.iter_mut().for_each(f);
    t
}

fn rel(a: f64, b: f64) -> f64 {
    if a.is_infinite() && b.is_infinite() {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn equivariance() -> Verdict {
    let mut perm_ok = true;
    let (mut scale_err, mut rot_err) = (0.0f64, 0.0f64);
    let mut stopper_ok = true;
    for i in 0..20 {
        let w = Window::square(15.0, 0.0).unwrap();
        let c = MarkedConfiguration::generate(w, 1.0, model(i), 7000 + i as u64).unwrap();
        let e = resolve(&c).unwrap();
        // permutation: reversed and rotated id order
        let n = c.len();
        let perm: Vec<usize> = (0..n).map(|k| (2 * n - 1 - k + n / 3) % n).collect();
        {
            let mut pts: Vec<_> = perm.iter().map(|&k| c.points[k].clone()).collect();
            for (j, p) in pts.iter_mut().enumerate() {
                p.id = j;
            }
            let pc = MarkedConfiguration { points: pts, ..c.clone() };
            let pe = resolve(&pc).unwrap();
            for (j, &k) in perm.iter().enumerate() {
                perm_ok &= pe.lifetime(j).to_bits() == e.lifetime(k).to_bits();
                perm_ok &= pe.stopper(j).map(|s| perm[s]) == e.stopper(k);
            }
        }
        let s = 3.7;
        let sc = transformed(&c, |p| p.germ = p.germ * s, w.scaled(s));
        let se = resolve(&sc).unwrap();
        let phi = 0.3 + i as f64 * 0.25;
        let big = Window::new(-30.0, 30.0, -30.0, 30.0, 0.0).unwrap();
        let rc = transformed(
            &c,
            |p| {
                p.germ = p.germ.rotate(phi);
                p.branches.iter_mut().for_each(|b| b.theta += phi);
            },
            big,
        );
        let re = resolve(&rc).unwrap();
        for k in 0..n {
            scale_err = scale_err.max(rel(se.lifetime(k), s * e.lifetime(k)));
            rot_err = rot_err.max(rel(re.lifetime(k), e.lifetime(k)));
            stopper_ok &= se.stopper(k) == e.stopper(k) && re.stopper(k) == e.stopper(k);
        }
    }
    verdict(
        perm_ok && scale_err <= 1e-12 && rot_err <= 1e-9 && stopper_ok,
        format!("permutation exact: {perm_ok}, scaling rel err {scale_err:.2e}, rotation rel err {rot_err:.2e}, stoppers preserved: {stopper_ok}"),
    )
}

fn graph_structure(maps: &Maps) -> Verdict {
    let mut bad = 0;
    let mut min_loop = usize::MAX;
    let mut cycles_ok = true;
    for m in maps {
        let s = check_structure(m);
        bad += usize::from(!s.ok());
        if let Some(l) = s.min_loop_len {
            min_loop = min_loop.min(l);
        }
        let g = FunctionalGraph::new(m.clone()).unwrap();
        cycles_ok &= find_loops(&g).iter().all(|l| l.len() >= 2);
    }
    verdict(
        bad == 0 && cycles_ok && min_loop >= 2,
        format!("{} graphs: {bad} structural failures, shortest loop observed {min_loop}", maps.len()),
    )
}

fn cross_engine() -> Verdict {
    let dt = 1e-3;
    let results = Exec::Parallel.map_range(20, |i| {
        let w = Window::square(f64::sqrt(200.0), 0.0).unwrap();
        // speeds bounded away from zero keep the last finite lifetime, and so
        // the number of substeps, moderate
        let speeds = if i % 2 == 0 {
            VelocityLaw::Constant { value: 1.0 }
        } else {
            VelocityLaw::Uniform { low: 0.5, high: 1.5 }
        };
        let c = MarkedConfiguration::generate(w, 1.0, MarkDistribution::unilateral(speeds), 9000 + i as u64).unwrap();
        let exact = resolve(&c).unwrap();
        let last = exact.records.iter().map(|r| r.lifetime).filter(|t| t.is_finite()).fold(0.0, f64::max);
        let params = StepParams::with_default_eps(&PathSampler::Ray, 0.1, dt, last + 1.0).unwrap();
        let opts = GenericOptions { exec: Exec::Sequential, ..GenericOptions::default() };
        let g = run_generic(&c, &PathSampler::Ray, &params, &opts).unwrap();
        let policy = ComparePolicy { rule: ToleranceRule::DtScaled { dt }, min_within: 0.99, min_stopper_match: 0.0 };
        compare(&exact, &g.exploration, &c, &policy).unwrap()
    });
    let compared: usize = results.iter().map(|d| d.compared).sum();
    let within: usize = results.iter().map(|d| d.within).sum();
    let frac = within as f64 / compared.max(1) as f64;
    verdict(frac >= 0.99, format!("{within}/{compared} stopped points within dt-tolerance ({:.4})", frac))
}

fn branching_contrast() -> Verdict {
    let dist = MarkDistribution::brownian(BranchLaw::Dirac { k: 1 });
    let sampler = PathSampler::Brownian { diffusion: 1.0 };
    let lambda = 1.0;
    let w = Window::square(30.0, 0.0).unwrap();
    let search = StepSearch { seed: 11, ..StepSearch::default() };
    let small = match choose_step(lambda, &sampler, &dist, 0.5, &search) {
        Ok(c) => c,
        Err(e) => return verdict(false, format!("step selection failed: {e}")),
    };
    let m4_unit = estimate_m4(&sampler, &dist, 0.0, 1.0, 100_000, 12, Exec::Parallel);
    // E(M⁴) grows like step², so this step puts the product at 10
    let big_step = (10.0 / branching_criterion(lambda, m4_unit.mean, 1.0)).sqrt();
    let dt = 1e-3;
    let runs = |step: f64| {
        Exec::Parallel.map_range(20, |i| {
            let c = MarkedConfiguration::generate(w, lambda, dist.clone(), 300 + i as u64).unwrap();
            let params = StepParams::with_default_eps(&sampler, step, dt, 50.0 * step).unwrap();
            let opts = GenericOptions { exec: Exec::Sequential, max_steps: Some(50), ..GenericOptions::default() };
            run_generic(&c, &sampler, &params, &opts).unwrap().steps
        })
    };
    let quiet = runs(small.step);
    let max_small = quiet.iter().flatten().map(|s| s.max_cluster).max().unwrap_or(0);
    let loud = runs(big_step);
    let giant = loud
        .iter()
        .filter(|steps| steps.iter().any(|s| s.alive > 0 && s.max_cluster as f64 >= 0.2 * s.alive as f64))
        .count();
    verdict(
        small.criterion <= 0.5 && max_small <= 50 && giant >= 15,
        format!(
            "criterion {:.3} at step {:.4}: max cluster {max_small}; product 10 at step {:.4}: giant cluster in {giant}/20 seeds",
            small.criterion, small.step, big_step
        ),
    )
}

fn brownian_scaling() -> Verdict {
    let dist = MarkDistribution::brownian(BranchLaw::Dirac { k: 1 });
    let sampler = PathSampler::Brownian { diffusion: 1.0 };
    let t = 0.8;
    let a = estimate_m4(&sampler, &dist, 0.0, t, 100_000, 21, Exec::Parallel);
    let b = estimate_m4(&sampler, &dist, 0.0, t / 2.0, 100_000, 22, Exec::Parallel);
    let ratio = a.mean / b.mean;
    let se = ratio * ((a.se / a.mean).powi(2) + (b.se / b.mean).powi(2)).sqrt();
    verdict((ratio - 4.0).abs() <= 3.0 * se, format!("ratio {ratio:.4} (SE {se:.4}), |ratio-4| = {:.2} SE", (ratio - 4.0).abs() / se))
}

fn ray_spec(kind: ExperimentKind, window: Window, marks: MarkDistribution, seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        kind,
        seed,
        replicas: 1,
        out_dir: None,
        process: ProcessSpec { intensity: 1.0, window, marks },
        engine: EngineSpec::default(),
        scan: None,
        pollution: None,
        shield: None,
        oracle: None,
    }
}

fn non_percolation() -> Verdict {
    let unit = MarkDistribution::unilateral(VelocityLaw::Constant { value: 1.0 });
    let mut spec = ray_spec(ExperimentKind::PercolationScan, Window::square(1.0, 0.0).unwrap(), unit, 40);
    spec.replicas = 20;
    spec.scan = Some(ScanSpec { sides: vec![20.0, 40.0, 80.0], buffer: 5.0 });
    let scan = match percolation_scan(&spec, Exec::Parallel) {
        Ok(s) => s,
        Err(e) => return verdict(false, format!("scan failed: {e}")),
    };
    let f: Vec<f64> = scan.by_side.iter().map(|s| s.mean_largest_core_fraction).collect();
    let sp: Vec<f64> = scan.by_side.iter().map(|s| s.spanning_frequency).collect();
    verdict(
        f[0] > f[1] && f[1] > f[2] && sp[2] < sp[0],
        format!(
            "largest core fraction {:.4} > {:.4} > {:.4}; spanning {:.2} (L=20) vs {:.2} (L=80)",
            f[0], f[1], f[2], sp[0], sp[2]
        ),
    )
}

/// `1 + max{k ≥ 0 : k ≤ v/m + (α+1)/2}` by direct search.
fn radius_by_search(v: f64, m: f64, alpha: u32, vc: f64) -> u64 {
    if v < vc {
        return 0;
    }
    let x = v / m + (alpha as f64 + 1.0) / 2.0;
    let mut k = 0u64;
    while ((k + 1) as f64) <= x {
        k += 1;
    }
    k + 1
}

fn pollution_checks() -> Verdict {
    use rand::Rng;
    let mut rng = stopped_grains::rng::stream(77, stopped_grains::rng::Purpose::MonteCarlo, 0, 0);
    let mut mismatches = 0;
    for _ in 0..10_000 {
        let m = rng.random_range(2.0..60.0);
        let alpha = rng.random_range(0..30u32);
        let vc = rng.random_range(0.5..5.0);
        let v = if rng.random::<bool>() { rng.random_range(0.0..400.0) } else { vc };
        mismatches += usize::from(pollution_radius(v, m, alpha, vc) != radius_by_search(v, m, alpha, vc));
    }
    let law = VelocityLaw::HalfNormal { sigma: 1.0 };
    let (s, lambda) = (1.5, 1.0);
    let (e, e_se) = estimate_exp_moment(&law, s, 200_000, 78);
    let mut bound_ok = true;
    let mut details = Vec::new();
    for m in [10.0, 20.0, 40.0] {
        let vc = critical_velocity(m, s).unwrap();
        let w = Window::square(400.0, 0.0).unwrap();
        let (p, se, blocks) = quick_block_frequency(&w, lambda, &law, m, vc, 4, 79).unwrap();
        let bound = lambda * e / m;
        let slack = 3.0 * (se * se + (lambda * e_se / m).powi(2)).sqrt();
        bound_ok &= p <= bound + slack;
        details.push(format!("m={m}: {p:.4} <= {bound:.4} ({blocks} blocks)"));
    }
    verdict(
        mismatches == 0 && bound_ok,
        format!("{mismatches} radius mismatches in 10^4 tuples; {}", details.join(", ")),
    )
}

fn shield_positivity() -> Verdict {
    let vc = critical_velocity(5.0, 2.0).unwrap();
    let params = |eps: f64| ShieldParams {
        scale: 5.0,
        eps,
        vc,
        intensity: 4.0,
        velocity: VelocityLaw::Constant { value: 1.0 },
        chords: 500,
        configs: 400,
        seed: 55,
        exec: Exec::Parallel,
    };
    let main = estimate_shield_probability(&params(0.5)).unwrap();
    let sweep: Vec<_> = [0.3, 0.6, 0.9].iter().map(|&e| estimate_shield_probability(&params(e)).unwrap()).collect();
    let monotone = sweep
        .windows(2)
        .all(|w| w[1].p_hat <= w[0].p_hat + 2.0 * (w[0].se.powi(2) + w[1].se.powi(2)).sqrt());
    verdict(
        main.ci.0 > 0.0 && monotone,
        format!(
            "p_hat {:.4} CI [{:.4}, {:.4}] over {} configs; eps 0.3/0.6/0.9: {:.4}/{:.4}/{:.4}",
            main.p_hat, main.ci.0, main.ci.1, main.configs, sweep[0].p_hat, sweep[1].p_hat, sweep[2].p_hat
        ),
    )
}

fn artifacts(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().is_some_and(|n| n != "manifest.json") {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Verdict {
    let w = Window::square(12.0, 0.0).unwrap();
    let half = MarkDistribution::bilateral(VelocityLaw::HalfNormal { sigma: 1.0 });
    let mut specs = Vec::new();
    let mut s = ray_spec(ExperimentKind::Resolve, w, half.clone(), 1);
    s.replicas = 3;
    specs.push(s);
    let mut s = ray_spec(ExperimentKind::Generic, w, MarkDistribution::brownian(BranchLaw::Dirac { k: 1 }), 2);
    s.engine.horizon = 1.0;
    s.engine.dt = 5e-3;
    s.engine.moment_samples = 2000;
    specs.push(s);
    let mut s = ray_spec(ExperimentKind::PercolationScan, w, MarkDistribution::unilateral(VelocityLaw::Constant { value: 1.0 }), 3);
    s.replicas = 3;
    s.scan = Some(ScanSpec { sides: vec![6.0, 10.0], buffer: 1.0 });
    specs.push(s);
    let mut s = ray_spec(ExperimentKind::PollutionScan, Window::square(60.0, 0.0).unwrap(), MarkDistribution::unilateral(VelocityLaw::HalfNormal { sigma: 1.0 }), 4);
    s.replicas = 2;
    s.pollution = Some(PollutionSpec { m: vec![3.0, 6.0], alpha: 2, s: 1.5 });
    s.shield = Some(ShieldSpec { scale: 3.0, eps: 0.5, vc: None, m: Some(5.0), s: Some(2.0), chords: 100, configs: 20 });
    specs.push(s);
    let mut s = ray_spec(ExperimentKind::ShieldEstimate, w, MarkDistribution::unilateral(VelocityLaw::Constant { value: 1.0 }), 5);
    s.process.intensity = 4.0;
    s.shield = Some(ShieldSpec { scale: 3.0, eps: 0.5, vc: Some(2.0), m: None, s: None, chords: 200, configs: 30 });
    specs.push(s);
    let mut s = ray_spec(ExperimentKind::OracleCompare, Window::square(5.0, 0.0).unwrap(), half, 6);
    s.replicas = 2;
    s.oracle = Some(OracleSpec { dt: 1e-3, min_stopper_match: 0.98 });
    specs.push(s);
    let root = tempfile::tempdir().unwrap();
    let mut files = 0;
    let mut differing = Vec::new();
    for spec in &specs {
        let name = spec.kind.name();
        let runs: Vec<_> = [Some(1), Some(4), Some(1)]
            .iter()
            .enumerate()
            .map(|(k, &threads)| {
                let dir = root.path().join(format!("{name}-{k}"));
                execute(spec, &dir, threads).unwrap();
                artifacts(&dir)
            })
            .collect();
        files += runs[0].len();
        if runs[0].is_empty() || runs.iter().any(|r| *r != runs[0]) {
            differing.push(name);
        }
    }
    verdict(
        differing.is_empty(),
        format!("{} experiments, {files} artifacts compared across 1/4/1 threads; differing: {:?}", specs.len(), differing),
    )
}

fn main() {
    // `cargo test -- --list` and filters are accepted but the suite always runs whole
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut maps: Maps = Vec::new();
    let mut failed = 0;
    let mut run = |id: usize, name: &str, limit: Option<Duration>, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        let took = start.elapsed();
        let in_time = limit.is_none_or(|l| took <= l);
        let pass = v.pass && in_time;
        failed += usize::from(!pass);
        let budget = limit.map_or(String::new(), |l| format!(" / limit {:.0}s", l.as_secs_f64()));
        println!(
            "criterion {id:>2} {:<28} {}  {} [{:.1}s{budget}]",
            name,
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            took.as_secs_f64()
        );
    };
    run(1, "exploration correctness", Some(Duration::from_secs(120)), &mut || exploration_correctness(&mut maps));
    run(2, "oracle equivalence", Some(Duration::from_secs(300)), &mut || oracle_equivalence(&mut maps));
    run(3, "equivariance", None, &mut equivariance);
    run(4, "outdegree-one structure", None, &mut || graph_structure(&maps));
    run(5, "cross-engine agreement", None, &mut cross_engine);
    run(6, "branching-criterion contrast", Some(Duration::from_secs(600)), &mut branching_contrast);
    run(7, "brownian moment scaling", None, &mut brownian_scaling);
    run(8, "non-percolation trend", Some(Duration::from_secs(900)), &mut non_percolation);
    run(9, "pollution radius and bound", None, &mut pollution_checks);
    run(10, "shield positivity", None, &mut shield_positivity);
    run(11, "determinism", None, &mut determinism);
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

