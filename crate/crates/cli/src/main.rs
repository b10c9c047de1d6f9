//! Command-line front-end: load-case simulation, fatigue evaluation,
//! rainflow counting, wall-thickness sweeps and Pareto extraction.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 numerical failure.

mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "flexlife", version, about = "Elastic-link manipulator lifetime and design sweeps")]
struct Cli {
    /// Directory for result files (default: config output_dir or the current directory).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the pick-and-place load case.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Critical-plane lifetime of a `t,sigma_xx,sigma_xy` stress file.
    Fatigue {
        stress: PathBuf,
        /// Fatigue material JSON.
        material: PathBuf,
        /// Duration of one task execution (s); defaults to the time span of the file.
        #[arg(long)]
        t_task: Option<f64>,
        /// Run configuration supplying the fatigue settings.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Rainflow matrix of a `t,sigma` file.
    Rainflow {
        input: PathBuf,
        /// Run configuration supplying the fatigue settings.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Wall-thickness design sweep.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Evaluate fatigue only for members of the Pareto front.
        #[arg(long)]
        only_pareto_fatigue: bool,
        /// Ceiling for infinite lifetimes in the plot file (h).
        #[arg(long, default_value_t = 3500.0)]
        plot_cap_hours: f64,
    },
    /// Pareto front of a `config,Jm_percent,Jvib_m` table.
    Pareto { input: PathBuf },
}

fn run(cli: Cli) -> CliResult<()> {
    let out = cli.out_dir.as_deref();
    let work = || match &cli.command {
        Command::Simulate { config } => commands::simulate_cmd(config, out),
        Command::Fatigue { stress, material, t_task, config } => {
            commands::fatigue_cmd(stress, material, *t_task, config.as_deref(), out)
        }
        Command::Rainflow { input, config } => commands::rainflow_cmd(input, config.as_deref(), out),
        Command::Sweep { config, only_pareto_fatigue, plot_cap_hours } => {
            commands::sweep_cmd(config, out, *only_pareto_fatigue, *plot_cap_hours)
        }
        Command::Pareto { input } => commands::pareto_cmd(input, out),
    };
    match cli.jobs {
        Some(0) => Err(CliError::input("--jobs must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::input(e.to_string()))?
            .install(work),
        None => work(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
