//! Command-line driver: runs scenarios from a TOML configuration and writes
//! CSV reports and VTK fields.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use topograd::experiments::{noise_sweep, run_one_shot, size_sweep, verification_suite, ExperimentReport};
use topograd::io::{export_field_vtk, export_run, load_config, parse_config, RunConfig, VtkFields};
use topograd::mesh::Mesh;

#[derive(Parser)]
#[command(name = "topograd", version, about = "One-shot obstacle reconstruction in Stokes-Brinkmann flow")]
struct Cli {
    /// TOML configuration; defaults apply to every missing key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true, env = "TOPOGRAD_OUT")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct the configured obstacle.
    Run,
    /// Repeat the reconstruction for each radius in `sweep.radii`.
    SweepSize,
    /// Repeat the reconstruction for each noise level in `sweep.noise`.
    SweepNoise,
    /// Run the numerical verification checks; fails if any check fails.
    Verify,
    /// Write the mesh alone as VTK.
    ExportMesh,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

fn summarize(report: &ExperimentReport) -> String {
    let r = &report.reconstruction;
    if !r.detected() {
        return report.status().into();
    }
    let center = r
        .recovered_center
        .map(|c| format!("({:.3}, {:.3})", c.x, c.y))
        .unwrap_or_else(|| "-".into());
    format!(
        "gamma* = {}, E = {}, center = {center}, center error = {}",
        fmt_opt(r.gamma_star),
        fmt_opt(r.e_value),
        fmt_opt(report.center_error)
    )
}

fn write(mesh: &Mesh, report: &ExperimentReport, config: &RunConfig, dir: &Path, stem: &str) -> topograd::Result<()> {
    for path in export_run(mesh, report, &config.export, dir, stem)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn execute(cli: Cli) -> topograd::Result<bool> {
    let mut config = match &cli.config {
        Some(path) => load_config(path)?,
        None => parse_config("")?,
    };
    if let Some(out) = cli.out {
        config.output_dir = out;
    }
    let scenario = config.scenario()?;
    let dir = config.output_dir.clone();
    match cli.command {
        Command::Run => {
            let report = run_one_shot(&scenario)?;
            println!("{}: {}", scenario.name, summarize(&report));
            write(&scenario.mesh()?, &report, &config, &dir, &scenario.name)?;
        }
        Command::SweepSize => {
            let mesh = scenario.mesh()?;
            for (r, report) in config.sweep.radii.iter().zip(size_sweep(&scenario, &config.sweep.radii)?) {
                println!("r = {r}: {}", summarize(&report));
                write(&mesh, &report, &config, &dir, &format!("{}-r{r}", scenario.name))?;
            }
        }
        Command::SweepNoise => {
            let mesh = scenario.mesh()?;
            for entry in noise_sweep(&scenario, &config.sweep.noise)? {
                let flag = if entry.degraded { " [degraded]" } else { "" };
                println!("noise = {}: {}{flag}", entry.delta, summarize(&entry.report));
                write(&mesh, &entry.report, &config, &dir, &format!("{}-noise{}", scenario.name, entry.delta))?;
            }
        }
        Command::Verify => {
            let summary = verification_suite(&scenario, &config.verify)?;
            for item in &summary.items {
                let status = if item.passed { "PASS" } else { "FAIL" };
                println!("{status} {}: {} (required {})", item.name, item.measured, item.tolerance);
            }
            return Ok(summary.passed());
        }
        Command::ExportMesh => {
            std::fs::create_dir_all(&dir).map_err(|e| topograd::Error::Io {
                path: dir.clone(),
                source: e,
            })?;
            let path = dir.join("mesh.vtk");
            export_field_vtk(&scenario.mesh()?, &VtkFields::new(), &path)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
