//! Experiment pipelines. Each replica uses seed `seed ^ replica`; replicas
//! may run concurrently but are written in replica order.

use serde::{Deserialize, Serialize};
use serde_json::json;
use stopped_grains::generic_engine::{
    choose_step, default_eps, run as run_generic, GenericOptions, PathSampler, StepParams, StepSearch,
};
use stopped_grains::pog::{check_structure, cluster_report, find_loops, percolation_stats, ray_extents, FunctionalGraph};
use stopped_grains::pollution::{
    estimate_shield_probability, pollution_set, unpolluted_components, ShieldEstimate, ShieldParams,
};
use stopped_grains::segment_engine::{resolve_with, verify_hardcore, verify_uniqueness, ResolveOptions};
use stopped_grains::{Exec, MarkedConfiguration, StoppedExploration, Window};

use crate::compare::{compare, ComparePolicy, ToleranceRule};
use crate::config::{ExperimentKind, ExperimentSpec};
use crate::emit::{exploration_svg, paths_svg, segments_csv};
use crate::error::{HarnessError, Result};
use crate::manifest::ArtifactWriter;
use crate::oracle::oracle_resolve;

/// Tolerance for the exploration self-checks, relative to coordinate scale.
const CHECK_TOL: f64 = 1e-9;

pub fn replica_seed(seed: u64, replica: usize) -> u64 {
    seed ^ replica as u64
}

fn configuration(spec: &ExperimentSpec, window: Window, seed: u64) -> Result<MarkedConfiguration> {
    Ok(MarkedConfiguration::generate(window, spec.process.intensity, spec.process.marks.clone(), seed)?)
}

fn resolve_options(spec: &ExperimentSpec, exec: Exec) -> ResolveOptions {
    ResolveOptions {
        pruning: spec.engine.pruning,
        exec,
        ..ResolveOptions::default()
    }
}

/// Runs `spec` and writes its artifacts through `out`.
pub fn run_experiment(spec: &ExperimentSpec, out: &mut ArtifactWriter, exec: Exec) -> Result<()> {
    spec.validate()?;
    match spec.kind {
        ExperimentKind::Resolve => resolve_experiment(spec, out, exec),
        ExperimentKind::Generic => generic_experiment(spec, out, exec),
        ExperimentKind::PercolationScan => {
            let scan = percolation_scan(spec, exec)?;
            let mut csv = String::from("side,replica,seed,points,largest_core_fraction,spanning,components,loops\n");
            for r in &scan.rows {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.side, r.replica, r.seed, r.points, r.largest_core_fraction, r.spanning as u8, r.components, r.loops
                ));
            }
            out.write("scan.csv", csv.as_bytes())?;
            out.write_json("summary.json", &scan.by_side)
        }
        ExperimentKind::PollutionScan => pollution_experiment(spec, out, exec),
        ExperimentKind::ShieldEstimate => {
            let (vc, est) = shield_estimate(spec, exec)?;
            out.write_json("summary.json", &json!({ "vc": vc, "estimate": est, "p_hat": est.p_hat, "p_hat_se": est.se }))
        }
        ExperimentKind::OracleCompare => oracle_experiment(spec, out, exec),
    }
}

fn resolve_experiment(spec: &ExperimentSpec, out: &mut ArtifactWriter, exec: Exec) -> Result<()> {
    let opts = resolve_options(spec, exec);
    let results = exec.map_range(spec.replicas, |r| -> Result<_> {
        let seed = replica_seed(spec.seed, r);
        let c = configuration(spec, spec.process.window, seed)?;
        // the engine parallelizes internally only for a single replica
        let inner = ResolveOptions { exec: if spec.replicas > 1 { Exec::Sequential } else { exec }, ..opts.clone() };
        let (e, stats) = resolve_with(&c, &inner)?;
        Ok((seed, c, e, stats))
    });
    let mut summary = Vec::new();
    for (r, res) in results.into_iter().enumerate() {
        let (seed, c, e, stats) = res?;
        let g = FunctionalGraph::from_exploration(&e)?;
        let report = cluster_report(&g);
        let structure = check_structure(&e.stopper_map());
        let hard = verify_hardcore(&e, &c, CHECK_TOL);
        let uniq = verify_uniqueness(&e, &c, CHECK_TOL);
        let dir = format!("r{r}");
        out.write(&format!("{dir}/exploration.csv"), e.to_csv(&c).as_bytes())?;
        out.write(&format!("{dir}/segments.csv"), segments_csv(&e, &c).as_bytes())?;
        out.write(&format!("{dir}/geometry.svg"), exploration_svg(&e, &c).as_bytes())?;
        out.write_json(
            &format!("{dir}/pog.json"),
            &json!({ "loops": find_loops(&g), "structure": structure, "clusters": report }),
        )?;
        summary.push(json!({
            "replica": r,
            "seed": seed,
            "points": c.len(),
            "stopped": e.stopped_count(),
            "unstopped": e.unstopped_count(),
            "components": report.components.len(),
            "loops": report.loop_size_histogram.values().sum::<usize>(),
            "largest_component": report.components.iter().map(|c| c.members.len()).max().unwrap_or(0),
            "structure_ok": structure.ok(),
            "hardcore_violations": hard.violations.len(),
            "uniqueness_violations": uniq.violations.len(),
            "stats": stats,
        }));
    }
    out.write_json("summary.json", &summary)
}

fn generic_experiment(spec: &ExperimentSpec, out: &mut ArtifactWriter, exec: Exec) -> Result<()> {
    let sampler = spec.engine.sampler.unwrap_or(PathSampler::for_model(spec.process.marks.model));
    let choice = match spec.engine.step {
        Some(step) => json!({ "step": step, "chosen": false }),
        None => {
            let search = StepSearch {
                n_samples: spec.engine.moment_samples,
                seed: spec.seed,
                exec,
                ..StepSearch::default()
            };
            let c = choose_step(spec.process.intensity, &sampler, &spec.process.marks, spec.engine.safety, &search)?;
            json!({ "step": c.step, "chosen": true, "criterion": c.criterion, "m4": c.m4 })
        }
    };
    let step = choice["step"].as_f64().expect("step is numeric");
    let eps = spec.engine.eps_hit.unwrap_or_else(|| default_eps(&sampler, spec.engine.dt));
    let params = StepParams::new(step, spec.engine.dt, eps, spec.engine.horizon)?;
    let opts = GenericOptions {
        cluster_cap: spec.engine.cluster_cap,
        exec,
        ..GenericOptions::default()
    };
    let mut summary = Vec::new();
    for r in 0..spec.replicas {
        let seed = replica_seed(spec.seed, r);
        let c = configuration(spec, spec.process.window, seed)?;
        let dir = format!("r{r}");
        let run = match run_generic(&c, &sampler, &params, &opts) {
            Ok(run) => run,
            Err(stopped_grains::Error::ClusterCap { size, cap, step, partial }) => {
                out.write(&format!("{dir}/partial_exploration.csv"), partial.to_csv(&c).as_bytes())?;
                return Err(stopped_grains::Error::ClusterCap { size, cap, step, partial }.into());
            }
            Err(e) => return Err(e.into()),
        };
        out.write(&format!("{dir}/exploration.csv"), run.exploration.to_csv(&c).as_bytes())?;
        out.write_json(&format!("{dir}/steps.json"), &run.steps)?;
        out.write(&format!("{dir}/paths.svg"), paths_svg(&c.window, &run.traces, &run.exploration).as_bytes())?;
        summary.push(json!({
            "replica": r,
            "seed": seed,
            "points": c.len(),
            "stopped": run.exploration.stopped_count(),
            "steps": run.steps.len(),
            "max_cluster": run.steps.iter().map(|s| s.max_cluster).max().unwrap_or(0),
        }));
    }
    out.write_json("summary.json", &json!({ "step": choice, "eps_hit": eps, "replicas": summary }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub side: f64,
    pub replica: usize,
    pub seed: u64,
    pub points: usize,
    pub largest_core_fraction: f64,
    pub spanning: bool,
    pub components: usize,
    pub loops: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideSummary {
    pub side: f64,
    pub mean_largest_core_fraction: f64,
    pub se_largest_core_fraction: f64,
    pub spanning_frequency: f64,
    pub replicas: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    pub by_side: Vec<SideSummary>,
}

/// Largest-component and spanning statistics over core sides and replicas.
pub fn percolation_scan(spec: &ExperimentSpec, exec: Exec) -> Result<ScanResult> {
    let scan = spec
        .scan
        .as_ref()
        .ok_or_else(|| HarnessError::Validation("percolation-scan needs a [scan] section".into()))?;
    let jobs: Vec<(f64, usize)> = scan.sides.iter().flat_map(|&l| (0..spec.replicas).map(move |r| (l, r))).collect();
    let opts = resolve_options(spec, Exec::Sequential);
    let rows = exec.map(&jobs, |&(side, r)| -> Result<ScanRow> {
        let b = scan.buffer;
        let window = Window::new(-b, side + b, -b, side + b, b)?;
        let seed = replica_seed(spec.seed, r);
        let c = configuration(spec, window, seed)?;
        let (e, _) = resolve_with(&c, &opts)?;
        let g = FunctionalGraph::from_exploration(&e)?;
        let germs: Vec<_> = c.points.iter().map(|p| p.germ).collect();
        let st = percolation_stats(&g, &ray_extents(&e, &c), &germs, &window);
        Ok(ScanRow {
            side,
            replica: r,
            seed,
            points: c.len(),
            largest_core_fraction: st.largest_core_fraction,
            spanning: st.spanning,
            components: st.components.len(),
            loops: st.n_loops,
        })
    });
    let rows: Vec<ScanRow> = rows.into_iter().collect::<Result<_>>()?;
    let by_side = scan
        .sides
        .iter()
        .map(|&side| {
            let xs: Vec<&ScanRow> = rows.iter().filter(|r| r.side == side).collect();
            let n = xs.len() as f64;
            let mean = xs.iter().map(|r| r.largest_core_fraction).sum::<f64>() / n;
            let var = xs.iter().map(|r| (r.largest_core_fraction - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            SideSummary {
                side,
                mean_largest_core_fraction: mean,
                se_largest_core_fraction: (var / n).sqrt(),
                spanning_frequency: xs.iter().filter(|r| r.spanning).count() as f64 / n,
                replicas: xs.len(),
            }
        })
        .collect();
    Ok(ScanResult { rows, by_side })
}

fn shield_estimate(spec: &ExperimentSpec, exec: Exec) -> Result<(f64, ShieldEstimate)> {
    let s = spec
        .shield
        .as_ref()
        .ok_or_else(|| HarnessError::Validation("missing [shield] section".into()))?;
    let vc = s.critical_velocity()?;
    let params = ShieldParams {
        scale: s.scale,
        eps: s.eps,
        vc,
        intensity: spec.process.intensity,
        velocity: spec.process.marks.velocity.clone(),
        chords: s.chords,
        configs: s.configs,
        seed: spec.seed,
        exec,
    };
    Ok((vc, estimate_shield_probability(&params)?))
}

fn pollution_experiment(spec: &ExperimentSpec, out: &mut ArtifactWriter, exec: Exec) -> Result<()> {
    let p = spec
        .pollution
        .as_ref()
        .ok_or_else(|| HarnessError::Validation("missing [pollution] section".into()))?;
    let shield = match &spec.shield {
        Some(_) => Some(shield_estimate(spec, exec)?.1),
        None => None,
    };
    let mut per_m = Vec::new();
    for &m in &p.m {
        let fields = exec.map_range(spec.replicas, |r| -> Result<_> {
            let c = configuration(spec, spec.process.window, replica_seed(spec.seed, r))?;
            Ok(pollution_set(&c, m, p.alpha, p.s)?)
        });
        let (mut pf, mut lu, mut er2) = (0.0, 0.0, 0.0);
        let mut vc = 0.0;
        for (r, f) in fields.into_iter().enumerate() {
            let f = f?;
            let st = unpolluted_components(&f);
            pf += st.polluted_fraction;
            lu += st.largest_unpolluted_fraction;
            er2 += st.e_r2_hat;
            vc = f.vc;
            out.write(&format!("m{m}/r{r}/field.csv"), f.to_csv().as_bytes())?;
        }
        let n = spec.replicas as f64;
        per_m.push(json!({
            "m": m,
            "vc": vc,
            "polluted_fraction": pf / n,
            "largest_unpolluted_fraction": lu / n,
            "E_R2_hat": er2 / n,
            "p_hat": shield.as_ref().map(|s| s.p_hat),
            "p_hat_se": shield.as_ref().map(|s| s.se),
        }));
    }
    out.write_json("summary.json", &json!({ "alpha": p.alpha, "s": p.s, "per_m": per_m, "shield": shield }))
}

/// Exact engine against the oracle on each replica.
pub fn oracle_replica(spec: &ExperimentSpec, r: usize) -> Result<(MarkedConfiguration, StoppedExploration, crate::oracle::OracleRun, crate::compare::DiffReport)> {
    let o = spec
        .oracle
        .as_ref()
        .ok_or_else(|| HarnessError::Validation("missing [oracle] section".into()))?;
    let c = configuration(spec, spec.process.window, replica_seed(spec.seed, r))?;
    let oracle = oracle_resolve(&c, o.dt)?;
    let (exact, _) = resolve_with(&c, &resolve_options(spec, Exec::Sequential))?;
    let policy = ComparePolicy {
        rule: ToleranceRule::DtScaled { dt: o.dt },
        min_within: 1.0,
        min_stopper_match: o.min_stopper_match,
    };
    let diff = compare(&exact, &oracle.exploration, &c, &policy)?;
    Ok((c, exact, oracle, diff))
}

fn oracle_experiment(spec: &ExperimentSpec, out: &mut ArtifactWriter, exec: Exec) -> Result<()> {
    let results = exec.map_range(spec.replicas, |r| oracle_replica(spec, r));
    let mut summary = Vec::new();
    let mut all_pass = true;
    for (r, res) in results.into_iter().enumerate() {
        let (c, _exact, oracle, diff) = res?;
        let unexplained: Vec<usize> =
            diff.stopper_mismatches.iter().copied().filter(|i| oracle.near_ties.binary_search(i).is_err()).collect();
        let pass = diff.pass && unexplained.is_empty();
        all_pass &= pass;
        out.write(&format!("r{r}/oracle.csv"), oracle.exploration.to_csv(&c).as_bytes())?;
        out.write_json(&format!("r{r}/diff.json"), &diff)?;
        summary.push(json!({
            "replica": r,
            "points": c.len(),
            "compared": diff.compared,
            "max_error": diff.max_error,
            "stopper_fraction": diff.stopper_fraction(),
            "unexplained_mismatches": unexplained,
            "oracle_steps": oracle.steps,
            "pass": pass,
        }));
    }
    out.write_json("summary.json", &json!({ "pass": all_pass, "replicas": summary }))
}
