//! `auvsim`: hull geometry, trim, linear models, closed-loop simulation and controller
//! comparison sweeps for the torpedo AUV model.

pub mod error;
pub mod output;
pub mod run;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use auv_core::config::{load_scenario, load_sweep, load_vehicle};
use auv_core::trim::RollMode;
use auv_core::VehicleParams;

pub use error::{CliError, CliResult};
use output::{OutputWriter, RunManifest};
use run::{ModeRun, ResolvedRun};

#[derive(Debug, Parser)]
#[command(
    name = "auvsim",
    version,
    about = "Torpedo AUV model, trim, linearization and closed-loop simulation"
)]
pub struct Cli {
    /// Vehicle file; overrides the one a scenario names.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for outputs and the run manifest.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// RNG seed; overrides scenario seeds.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
    /// Worker threads for `compare` (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Suppress progress on standard error.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RollArg {
    Free,
    Zero,
}

impl From<RollArg> for RollMode {
    fn from(r: RollArg) -> Self {
        match r {
            RollArg::Free => RollMode::Free,
            RollArg::Zero => RollMode::Zero,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hull radius profile as CSV.
    Hull {
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Level-flight trim.
    Trim {
        #[arg(long, default_value_t = 4.0)]
        speed_knots: f64,
        #[arg(long, value_enum, default_value_t = RollArg::Free)]
        roll_mode: RollArg,
    },
    /// Depth, yaw and speed linear models checked against the numeric Jacobian.
    Linearize {
        #[arg(long, default_value_t = 4.0)]
        speed_knots: f64,
    },
    /// Closed-loop simulation of one scenario file.
    Simulate { scenario: PathBuf },
    /// Perturbation × controller sweep.
    Compare { sweep: PathBuf },
    /// Repeat the run recorded in a manifest and check the output hashes.
    Rerun { manifest: PathBuf },
}

fn vehicle(config: &Option<PathBuf>) -> CliResult<VehicleParams> {
    Ok(match config {
        Some(p) => load_vehicle(p)?,
        None => VehicleParams::research_vehicle(),
    })
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map_or("run".into(), |s| s.to_string_lossy().into_owned())
}

/// Reads every input the command refers to.
pub fn resolve(cli: &Cli) -> CliResult<(ResolvedRun, Vec<String>)> {
    let mut inputs: Vec<String> = cli.config.iter().map(|p| p.display().to_string()).collect();
    let run = match &cli.command {
        Command::Hull { samples } => ResolvedRun::Hull {
            vehicle: vehicle(&cli.config)?,
            samples: *samples,
        },
        Command::Trim {
            speed_knots,
            roll_mode,
        } => ResolvedRun::Trim {
            vehicle: vehicle(&cli.config)?,
            speed_knots: *speed_knots,
            roll_mode: (*roll_mode).into(),
        },
        Command::Linearize { speed_knots } => ResolvedRun::Linearize {
            vehicle: vehicle(&cli.config)?,
            speed_knots: *speed_knots,
        },
        Command::Simulate { scenario } => {
            let mut l = load_scenario(scenario, cli.config.as_deref())?;
            if let Some(seed) = cli.seed {
                l.scenario.sim.seed = seed;
            }
            inputs.push(scenario.display().to_string());
            inputs.extend(l.vehicle_path.iter().map(|p| p.display().to_string()));
            ResolvedRun::Simulate {
                name: stem(scenario),
                scenario: l.scenario,
                vehicle: l.vehicle,
            }
        }
        Command::Compare { sweep } => {
            let l = load_sweep(sweep, cli.config.as_deref())?;
            inputs.push(sweep.display().to_string());
            let modes = l
                .scenarios
                .into_iter()
                .map(|(mode, mut s)| {
                    if let Some(seed) = cli.seed {
                        s.scenario.sim.seed = seed;
                    }
                    inputs.push(s.path.display().to_string());
                    ModeRun {
                        mode,
                        scenario: s.scenario,
                        vehicle: s.vehicle,
                    }
                })
                .collect();
            ResolvedRun::Compare {
                name: stem(sweep),
                sweep: l.config,
                modes,
            }
        }
        Command::Rerun { manifest } => {
            let m = RunManifest::read(manifest)?;
            inputs.push(manifest.display().to_string());
            (m.config, inputs.clone()).0
        }
    };
    Ok((run, inputs))
}

/// Executes `run` into `out_dir` and writes its manifest.
pub fn execute(
    run: &ResolvedRun,
    inputs: Vec<String>,
    out_dir: &Path,
    force: bool,
    jobs: Option<usize>,
    verbose: bool,
) -> CliResult<(String, RunManifest)> {
    let mut out = OutputWriter::new(out_dir, force)?;
    let mut names = run.output_names();
    names.push(run.manifest_name());
    out.ensure_free(&names)?;
    let start = Instant::now();
    let outcome = run.execute(&mut out, jobs, verbose)?;
    let manifest = RunManifest {
        tool: "auvsim".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: run.seed(),
        inputs,
        config: run.clone(),
        outputs: out.written.clone(),
        runtime_s: start.elapsed().as_secs_f64(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(anyhow::Error::from)?;
    text.push('\n');
    out.write(&run.manifest_name(), text.as_bytes())?;
    match outcome.failure {
        Some(e) => {
            eprintln!("{}", outcome.report);
            Err(e)
        }
        None => Ok((outcome.report, manifest)),
    }
}

/// Runs the parsed command line and returns the report for standard output.
pub fn run(cli: &Cli) -> CliResult<String> {
    let (resolved, inputs) = resolve(cli)?;
    let (mut report, manifest) = execute(
        &resolved,
        inputs,
        &cli.out_dir,
        cli.force,
        cli.jobs,
        !cli.quiet,
    )?;
    if let Command::Rerun { manifest: path } = &cli.command {
        let original = RunManifest::read(path)?;
        let mut mismatched = Vec::new();
        for o in &original.outputs {
            if o.path.ends_with(".manifest.json") {
                continue;
            }
            match manifest.outputs.iter().find(|n| n.path == o.path) {
                Some(n) if n.sha256 == o.sha256 => {}
                _ => mismatched.push(o.path.clone()),
            }
        }
        if !mismatched.is_empty() {
            return Err(CliError::Numeric(format!(
                "outputs differ from the manifest: {}",
                mismatched.join(", ")
            )));
        }
        report.push_str(&format!(
            "\nreproduced {} output(s) bit-identically",
            original.outputs.len()
        ));
    }
    Ok(report)
}
