use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use membrane_core::config::{Scenario, ScenarioConfig};
use membrane_core::scenarios::{run_convergence_study, run_formfind, run_pressure_sweep, run_solve};
use membrane_core::{Error, Result};

/// Hyperelastic membrane analysis and minimal-surface form finding on
/// triangulated surfaces.
#[derive(Parser)]
#[command(name = "membrane", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal surface by fixed-point Laplace-Beltrami iteration.
    Formfind(Common),
    /// One static solve.
    Solve(Common),
    /// Convergence study over uniform mesh refinements.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Number of refinement levels (overrides study.levels).
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Pressure sweep recording the extreme radii.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long, value_name = "PATH", required_unless_present = "scenario")]
    config: Option<PathBuf>,
    /// Run a named scenario with its defaults instead of a file.
    #[arg(long, value_name = "NAME", conflicts_with = "config")]
    scenario: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Quadratic displacements on quadratic geometry.
    #[arg(long)]
    iso_p2: bool,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig> {
        if let Some(n) = self.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::Config(format!("--threads: {e}")))?;
        }
        let mut config = match (&self.config, &self.scenario) {
            (Some(path), _) => ScenarioConfig::from_file(path).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
                other => other,
            })?,
            (None, Some(name)) => ScenarioConfig::named(name.parse::<Scenario>()?)?,
            (None, None) => return Err(Error::Config("--config or --scenario is required".into())),
        };
        if self.iso_p2 {
            config.displacement_degree = 2;
        }
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Formfind(c) => {
            let config = c.load()?;
            let state = run_formfind(&config, Some(&c.out))?;
            println!(
                "form finding converged after {} iterations, area {:.15e} m^2",
                state.iterations,
                state.areas.last().copied().unwrap_or(f64::NAN)
            );
            Ok(true)
        }
        Command::Solve(c) => {
            let config = c.load()?;
            let outcome = run_solve(&config, Some(&c.out))?;
            print!("{}", outcome.report.to_text());
            print!("{}", outcome.summary());
            Ok(outcome.report.converged)
        }
        Command::Converge { common, levels } => {
            let config = common.load()?;
            let table = run_convergence_study(&config, levels.unwrap_or(config.study.levels), Some(&common.out))?;
            print!("{}", table.to_csv());
            print!("{}", table.metadata_text());
            Ok(true)
        }
        Command::Sweep(c) => {
            let config = c.load()?;
            let table = run_pressure_sweep(&config, Some(&c.out))?;
            print!("{}", table.to_csv());
            if let Some(f) = &table.failure {
                eprintln!("sweep stopped {f}");
            }
            Ok(table.failure.is_none())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
