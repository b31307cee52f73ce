use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cooploc::harness::{
    emit_outcome, run_experiment, write_trajectories, ExperimentConfig, FleetSource,
    MethodSelection,
};
use cooploc::kinematics::generate_fleet;
use cooploc::{Error, Result};

#[derive(Parser)]
#[command(name = "cooploc", about = "Cooperative vehicle localization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo experiment and write CDFs plus summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// gps | gr-cl | glrr-cl | all
        #[arg(long)]
        method: Option<String>,
    },
    /// Generate one fleet trajectory and write it as CSV.
    Gen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the version.
    Version,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            method,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(m) = method {
                cfg.method = m.parse::<MethodSelection>()?;
            }
            let outcome = run_experiment(&cfg)?;
            emit_outcome(&outcome, &cfg, &out)?;
            for r in &outcome.reports {
                let reduction = outcome
                    .mean_reduction(r.method)
                    .map_or("undefined".to_string(), |v| format!("{v:.1}%"));
                println!(
                    "{:<8} MSLE {:>10.4} m^2  reduction vs GPS {reduction}  ({} samples)",
                    r.method,
                    r.msle,
                    r.sample_count()
                );
            }
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Gen { config, out, seed } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let FleetSource::Generated(fleet) = &cfg.fleet else {
                return Err(Error::Config("gen needs fleet keys, not trajectory_file".into()));
            };
            let traj = generate_fleet(fleet, seed.unwrap_or(cfg.seed))?;
            write_trajectories(&traj, &out)?;
            println!(
                "wrote {} vehicles x {} ticks to {}",
                traj.vehicles(),
                traj.ticks(),
                out.display()
            );
            Ok(())
        }
        Command::Version => {
            println!("cooploc {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
