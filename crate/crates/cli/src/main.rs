use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use phasefield_cli::config::{self, BUNDLED};
use phasefield_cli::runner::{self, RunOutcome};
use phasefield_cli::selftest;

#[derive(Parser)]
#[command(
    name = "phasefield",
    version,
    about = "Diffuse-interface surface PDE experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or a bundled config name.
    Run {
        #[arg(long)]
        config: String,
        /// Directory for relative output paths.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Quadrature exactness, constant-solution and rho-bound checks.
    Selftest,
    /// List the bundled configs.
    ListExamples,
}

fn load_config(arg: &str) -> Result<config::RunConfig> {
    let path = PathBuf::from(arg);
    let text = if path.exists() {
        std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?
    } else if let Some(text) = config::bundled(arg) {
        text.to_string()
    } else {
        anyhow::bail!(
            "`{arg}` is neither a readable file nor a bundled config (see list-examples)"
        );
    };
    config::parse(&text).with_context(|| format!("invalid config `{arg}`"))
}

fn run(config_arg: &str, out_dir: PathBuf) -> Result<()> {
    let config = load_config(config_arg)?;
    for w in runner::warnings(&config) {
        eprintln!("warning: {w}");
    }
    match runner::run(&config, &out_dir)? {
        RunOutcome::Study { csv, csv_path, .. } => {
            print!("{csv}");
            if let Some(path) = csv_path {
                eprintln!("wrote {}", path.display());
            }
        }
        RunOutcome::Surface {
            surface,
            dof_range,
            vtk_path,
            cg_iterations,
        } => {
            println!("cg iterations: {cg_iterations}");
            println!(
                "u_h over all DOFs: min {:.4} max {:.4}",
                dof_range.0, dof_range.1
            );
            match surface.value_range() {
                Some((lo, hi)) => println!(
                    "u_h on the isosurface ({} triangles): min {lo:.4} max {hi:.4}",
                    surface.triangles.len()
                ),
                None => println!("isosurface is empty"),
            }
            if let Some(path) = vtk_path {
                eprintln!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out_dir } => match run(&config, out_dir) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::FAILURE
            }
        },
        Command::Selftest => {
            let checks = selftest::run_all();
            for c in &checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            if checks.iter().all(|c| c.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::ListExamples => {
            for (name, text) in BUNDLED {
                let summary = text
                    .lines()
                    .next()
                    .unwrap_or("")
                    .trim_start_matches('#')
                    .trim();
                println!("{name:<12} {summary}");
            }
            ExitCode::SUCCESS
        }
    }
}
