use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use grains_harness::{run, ExperimentKind, RunRequest};

#[derive(Parser)]
#[command(name = "sim", version, about = "Stopped germ-grain experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact resolution of a ray configuration.
    Resolve(RunArgs),
    /// Cluster-stepped resolution (Brownian or ray paths).
    Generic(RunArgs),
    /// Largest-component statistics over growing windows.
    PercScan(RunArgs),
    /// Pollution fields over block scales.
    Pollution(RunArgs),
    /// Monte-Carlo shield probability.
    Shield(RunArgs),
    /// Exact engine against the brute-force oracle.
    OracleCompare(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides SIM_OUT_DIR and the config).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Resolve(a) => (ExperimentKind::Resolve, a),
        Command::Generic(a) => (ExperimentKind::Generic, a),
        Command::PercScan(a) => (ExperimentKind::PercolationScan, a),
        Command::Pollution(a) => (ExperimentKind::PollutionScan, a),
        Command::Shield(a) => (ExperimentKind::ShieldEstimate, a),
        Command::OracleCompare(a) => (ExperimentKind::OracleCompare, a),
    };
    let req = RunRequest {
        config: args.config,
        seed: args.seed,
        out: args.out,
        replicas: args.replicas,
        threads: args.threads,
    };
    match run(kind, &req) {
        Ok(m) => {
            log::info!("{} files written", m.files.len());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
