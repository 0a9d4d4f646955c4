//! Experiment orchestration for the stopped-grains engines: TOML specs,
//! seeded replicas, an independent brute-force oracle, comparisons and
//! artifact output with a hashed manifest.

pub mod compare;
pub mod config;
pub mod emit;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod oracle;

use std::path::{Path, PathBuf};

use stopped_grains::Exec;

pub use config::{ExperimentKind, ExperimentSpec};
pub use error::{HarnessError, Result};
pub use manifest::{ArtifactWriter, Manifest, RunStatus};

/// Environment variable naming the output directory.
pub const OUT_DIR_ENV: &str = "SIM_OUT_DIR";

#[derive(Clone, Debug, Default)]
pub struct RunRequest {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub replicas: Option<usize>,
    pub threads: Option<usize>,
}

/// `--out`, then the environment, then the spec, then `./out`.
pub fn output_dir(flag: Option<&Path>, env: Option<&str>, spec: &ExperimentSpec) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| env.filter(|s| !s.is_empty()).map(PathBuf::from))
        .or_else(|| spec.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Loads and validates the spec, applying command-line overrides. Nothing
/// is written.
pub fn prepare(kind: ExperimentKind, req: &RunRequest) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::load(&req.config, Some(kind))?;
    if let Some(s) = req.seed {
        spec.seed = s;
    }
    if let Some(r) = req.replicas {
        spec.replicas = r;
    }
    if req.threads == Some(0) {
        return Err(HarnessError::Validation("--threads must be at least 1".into()));
    }
    spec.validate()?;
    Ok(spec)
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    #[cfg(feature = "parallel")]
    if let Some(t) = threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| HarnessError::Validation(format!("cannot build thread pool: {e}")))?;
        return Ok(pool.install(f));
    }
    let _ = threads;
    Ok(f())
}

/// Runs a validated spec into `dir`. The manifest is written first and
/// finalized as `ok` or `aborted`; the run's own error is returned after
/// that.
pub fn execute(spec: &ExperimentSpec, dir: &Path, threads: Option<usize>) -> Result<Manifest> {
    let exec = if threads == Some(1) { Exec::Sequential } else { Exec::Parallel };
    let mut out = ArtifactWriter::create(dir, spec, threads)?;
    let outcome = with_threads(threads, || experiments::run_experiment(spec, &mut out, exec))?;
    let manifest = out.finish(outcome.as_ref().map(|_| ()))?;
    outcome.map(|_| manifest)
}

pub fn run(kind: ExperimentKind, req: &RunRequest) -> Result<Manifest> {
    let spec = prepare(kind, req)?;
    let env = std::env::var(OUT_DIR_ENV).ok();
    let dir = output_dir(req.out.as_deref(), env.as_deref(), &spec);
    execute(&spec, &dir, req.threads)
}
