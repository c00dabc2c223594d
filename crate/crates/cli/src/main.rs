use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cpdr_cli::config::{BoundsConfig, IsingMseConfig, MitigateCsvConfig, SpdBenchConfig};
use cpdr_cli::{bounds, ising_mse, mitigate_csv, spd_bench, Failure};

/// Truncated Clifford-perturbation estimation and learning-based error
/// mitigation benchmarks.
#[derive(Parser)]
#[command(name = "cpdr", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config, TOML.
    #[arg(long)]
    config: PathBuf,
    /// Directory for output tables and reports.
    #[arg(long)]
    out: PathBuf,
    /// Master seed; every job seed derives from it deterministically.
    #[arg(long)]
    seed: u64,
    /// Worker threads, 0 for all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Truncation-order sweep against the dense reference.
    SpdBench(RunArgs),
    /// Mitigation-protocol MSE comparison on the Ising benchmark.
    IsingMse(RunArgs),
    /// Empirical verification sweep of the truncation error bounds.
    Bounds(RunArgs),
    /// Fit and apply CPDR-ZNE to an external measurement table.
    MitigateCsv(RunArgs),
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let args = match &cli.command {
        Command::SpdBench(a) | Command::IsingMse(a) | Command::Bounds(a) | Command::MitigateCsv(a) => a,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| Failure::Validation(format!("cannot build worker pool: {e}")))?;

    match &cli.command {
        Command::SpdBench(a) => {
            let cfg = SpdBenchConfig::load(&a.config)?;
            let report = pool.install(|| spd_bench::run(&cfg, &a.out, a.seed))?;
            println!(
                "spd-bench: {} rows -> {}",
                report.rows.len(),
                a.out.join("spd_bench.csv").display()
            );
        }
        Command::IsingMse(a) => {
            let cfg = IsingMseConfig::load(&a.config)?;
            let report = pool.install(|| ising_mse::run(&cfg, &a.out, a.seed))?;
            println!(
                "ising-mse: {} protocols over {} theta_h rows -> {}",
                report.protocols.len(),
                report.mse_by_theta_h.len(),
                a.out.display()
            );
            for (protocol, mse) in &report.median_mse {
                println!("  median MSE {protocol}: {mse:.3e}");
            }
        }
        Command::Bounds(a) => {
            let cfg = BoundsConfig::load(&a.config)?;
            let report = pool.install(|| bounds::run(&cfg, &a.out, a.seed))?;
            println!(
                "bounds: {} configurations within bounds -> {}",
                report.rows.len(),
                a.out.join("bounds.csv").display()
            );
        }
        Command::MitigateCsv(a) => {
            let cfg = MitigateCsvConfig::load(&a.config)?;
            let report = pool.install(|| mitigate_csv::run(&cfg, &a.out, a.seed))?;
            println!(
                "mitigate-csv: {} points ({} train) -> {}",
                report.points.len(),
                report.n_train,
                a.out.join("mitigation_report.json").display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{failure}");
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
