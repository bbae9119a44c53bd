use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ergoplan::maps::RegionLayout;
use ergoplan::optimizer::StartMode;
use ergoplan_bench::config::ExperimentConfig;
use ergoplan_bench::dataset::{self, DEFAULT_RESOLUTION};
use ergoplan_bench::{gradcheck, BenchError};

#[derive(Parser)]
#[command(name = "ergoplan", version, about = "Multi-agent ergodic search planning and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Fixed,
    Shared,
    PerAgent,
}

impl From<Mode> for StartMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Fixed => StartMode::FixedStart,
            Mode::Shared => StartMode::SharedOptimizedStart,
            Mode::PerAgent => StartMode::PerAgentOptimizedStart,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate random mixture maps with start regions.
    GenMaps {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Agent types that receive start regions.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        types: Vec<u32>,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: usize,
    },
    /// Plan one team on one map.
    Plan {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        regions: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the strategy comparison.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare analytic gradients with finite differences.
    CheckGrad {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::GenMaps {
            count,
            seed,
            out,
            types,
            resolution,
        } => {
            if resolution < 2 || types.is_empty() {
                return Err(BenchError::Config {
                    path: out,
                    message: "resolution must be at least 2 and at least one type is required".into(),
                });
            }
            let cases = dataset::write_cases(&out, count, seed, resolution, &types, &RegionLayout::default())?;
            println!("wrote {} maps to {}", cases.len(), out.display());
        }
        Command::Plan {
            map,
            regions,
            config,
            mode,
            out,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let case = dataset::load_case(&map, &regions)?;
            let summary = ergoplan_bench::plan_command(&cfg, &case, mode.into(), &out)?;
            println!(
                "team phi {:.6e} after {} iterations, feasible: {}",
                summary.team_phi, summary.iterations, summary.feasible
            );
        }
        Command::Bench { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let base = config.parent().map(PathBuf::from).unwrap_or_default();
            let cases = dataset::load_cases(&cfg, &base)?;
            let result = ergoplan_bench::bench(&cfg, &cases, &out)?;
            println!("strategy  mean_phi      std_phi       vs SR");
            for a in &result.aggregates {
                let imp = a
                    .improvement_pct_vs_sr
                    .map(|v| format!("{v:+.2}%"))
                    .unwrap_or_else(|| "-".into());
                println!("{:<9} {:<13.6e} {:<13.6e} {imp}", a.strategy.name(), a.mean_phi, a.std_phi);
            }
            println!("infeasible trials: {}", result.violations());
        }
        Command::CheckGrad { seed } => {
            let s = gradcheck::run_gradient_checks(seed)?;
            println!(
                "integrator max rel error {:.3e} (limit {:.0e})",
                s.integrator_max_rel_error,
                gradcheck::INTEGRATOR_TOLERANCE
            );
            println!(
                "diff-drive max rel error {:.3e} (limit {:.0e})",
                s.diff_drive_max_rel_error,
                gradcheck::DIFF_DRIVE_TOLERANCE
            );
            if !s.passed() {
                return Err(BenchError::Plan(ergoplan::Error::Precondition(
                    "gradient check exceeded tolerance".into(),
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage problems count as configuration errors
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
