use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sdoal::{run_scenario, RunConfig, RunError, Scenario};

#[derive(Parser)]
#[command(
    name = "sdoal",
    version,
    about = "Strongly-driven one-atom laser scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV tables and JSON summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trajectories: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        tmax: Option<f64>,
    },
    /// Check parameter validity and the analytic-vs-numeric tolerances.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn load(cli: Cli) -> Result<RunConfig, RunError> {
    Ok(match cli.command {
        Command::Run {
            config,
            scenario,
            out,
            seed,
            trajectories,
            dt,
            tmax,
        } => {
            let mut cfg = RunConfig::from_file(&config)?;
            if let Some(s) = scenario {
                cfg.scenario = s.parse()?;
            }
            cfg.out_dir = out;
            cfg.master_seed = seed.unwrap_or(cfg.master_seed);
            cfg.n_traj = trajectories.unwrap_or(cfg.n_traj);
            cfg.dt = dt.or(cfg.dt);
            cfg.t_max = tmax.or(cfg.t_max);
            cfg.validate()?;
            cfg
        }
        Command::Validate { config, out } => {
            let mut cfg = RunConfig::from_file(&config)?;
            cfg.scenario = Scenario::Validate;
            cfg.out_dir = out;
            cfg
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let cfg = match load(cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match run_scenario(&cfg) {
        Ok(report) => {
            for check in &report.summary.checks {
                let mark = if check.passed { "ok  " } else { "FAIL" };
                println!(
                    "{mark} {} = {} ({} {})",
                    check.name, check.value, check.relation, check.limit
                );
            }
            for file in &report.files {
                println!("wrote {}", file.display());
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
