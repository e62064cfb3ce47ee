use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use sirpns::fem::Discretization;
use sirpns::io::{experiment_preset, parse_config_with, run_to_directory, ExperimentId};
use sirpns::Mesh;

mod suites;

#[derive(Parser)]
#[command(name = "sirpns", version, about = "Coupled SIR / pathogen / Navier-Stokes simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write monitors and VTK snapshots.
    Run {
        /// Configuration file; missing keys take the experiment's defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// exp1, exp2, exp3, exp4, pathogen_only or custom.
        #[arg(long)]
        experiment: Option<String>,
        /// Output directory (overrides the configuration).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite; the exit code reports pass or fail.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
    },
    /// Print mesh and degree-of-freedom counts.
    MeshInfo {
        #[arg(long, default_value_t = 32)]
        nx: usize,
        #[arg(long, default_value_t = 32)]
        ny: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Ode,
    Mms,
    Invariants,
}

fn run(config: Option<PathBuf>, experiment: Option<String>, out: Option<PathBuf>) -> Result<()> {
    let id = experiment.map(|e| e.parse::<ExperimentId>()).transpose()?;
    let mut cfg = match config {
        Some(path) => {
            if !path.is_file() {
                bail!("config not found: {}", path.display());
            }
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            parse_config_with(&text, id).with_context(|| format!("in {}", path.display()))?
        }
        None => experiment_preset(id.unwrap_or_default()),
    };
    if let Some(out) = out {
        cfg.out_dir = out;
    }
    eprintln!(
        "running {} on {}x{} mesh, {} steps of dt = {}",
        cfg.experiment,
        cfg.nx,
        cfg.ny,
        cfg.steps(),
        cfg.controls.dt
    );
    let res = run_to_directory(&cfg, &cfg.out_dir)?;
    let last = res.trajectory.monitors.last().copied().unwrap_or_default();
    let unconverged = res.trajectory.reports.iter().filter(|r| !r.converged).count();
    println!("steps: {}", res.steps);
    println!("snapshots: {}", res.snapshots.len());
    println!("monitor: {}", res.monitor_csv.display());
    println!(
        "final t = {:.4}: int_S = {:.6e}, int_I = {:.6e}, int_R = {:.6e}, int_C = {:.6e}",
        last.t, last.int_s, last.int_i, last.int_r, last.int_c
    );
    if unconverged > 0 {
        eprintln!("warning: Picard iteration did not converge in {unconverged} steps");
    }
    Ok(())
}

fn mesh_info(nx: usize, ny: usize) -> Result<()> {
    let disc = Discretization::new(Mesh::unit_square(nx, ny)?)?;
    let m = disc.mesh();
    println!("vertices: {}", m.n_vertices());
    println!("triangles: {}", m.n_triangles());
    println!("boundary vertices: {}", disc.boundary_vertices().len());
    println!("mesh size h: {:.6e}", m.mesh_size());
    println!("scalar dofs: {}", disc.n_scalar());
    println!("velocity dofs: {}", disc.n_velocity());
    println!("saddle dofs: {}", disc.n_saddle());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, experiment, out } => run(config, experiment, out).map(|_| true),
        Command::Verify { suite } => match suite {
            Suite::Ode => suites::ode(),
            Suite::Mms => suites::mms(),
            Suite::Invariants => suites::invariants(),
        },
        Command::MeshInfo { nx, ny } => mesh_info(nx, ny).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
