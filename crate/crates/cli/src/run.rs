#![allow(non_snake_case)]

//! Fully resolved commands and their execution.

use std::fmt::Write as _;

use anyhow::Context;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use auv_core::config::{SweepConfig, SweepGroup};
use auv_core::controllers::ControlMode;
use auv_core::linearization::{
    compare_models, depth_pitch_model, depth_transfer_functions, numeric_jacobian,
    reference_discrepancies, speed_model, yaw_model, DepthTransferFunctions, JacobianComparison,
    ReferenceDiscrepancy, StateSpaceModel, TransferFunction, YawModel,
};
use auv_core::simulator::{run_scenario, run_scenario_with_progress, Metrics, Scenario, SimError};
use auv_core::trim::{solve_trim, RollMode, TrimDecision, TrimError, TrimOptions, TrimResult};
use auv_core::units::knots_to_mps;
use auv_core::vehicle::hull::hull_profile;
use auv_core::{VehicleModel, VehicleParams};

use crate::error::{CliError, CliResult};
use crate::output::OutputWriter;

/// One controller mode of a sweep with its scenario and vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRun {
    pub mode: ControlMode,
    pub scenario: Scenario,
    pub vehicle: VehicleParams,
}

/// A command with every file reference replaced by its contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum ResolvedRun {
    Hull {
        vehicle: VehicleParams,
        samples: usize,
    },
    Trim {
        vehicle: VehicleParams,
        speed_knots: f64,
        roll_mode: RollMode,
    },
    Linearize {
        vehicle: VehicleParams,
        speed_knots: f64,
    },
    Simulate {
        name: String,
        scenario: Scenario,
        vehicle: VehicleParams,
    },
    Compare {
        name: String,
        sweep: SweepConfig,
        modes: Vec<ModeRun>,
    },
}

impl ResolvedRun {
    /// Stem used for the manifest file.
    pub fn stem(&self) -> String {
        match self {
            ResolvedRun::Hull { .. } => "hull".into(),
            ResolvedRun::Trim { .. } => "trim".into(),
            ResolvedRun::Linearize { .. } => "linearization".into(),
            ResolvedRun::Simulate { name, .. } | ResolvedRun::Compare { name, .. } => name.clone(),
        }
    }

    /// Data files this run writes.
    pub fn output_names(&self) -> Vec<String> {
        let s = self.stem();
        match self {
            ResolvedRun::Hull { .. } => vec!["hull.csv".into()],
            ResolvedRun::Trim { .. } => vec!["trim.json".into()],
            ResolvedRun::Linearize { .. } => vec!["linearization.json".into()],
            ResolvedRun::Simulate { .. } => vec![format!("{s}.csv"), format!("{s}.metrics.json")],
            ResolvedRun::Compare { .. } => {
                vec![format!("{s}.compare.csv"), format!("{s}.compare.json")]
            }
        }
    }

    pub fn manifest_name(&self) -> String {
        format!("{}.manifest.json", self.stem())
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            ResolvedRun::Simulate { scenario, .. } => Some(scenario.sim.seed),
            ResolvedRun::Compare { modes, .. } => modes.first().map(|m| m.scenario.sim.seed),
            _ => None,
        }
    }
}

/// Report text plus a deferred failure (outputs were still written).
pub struct Outcome {
    pub report: String,
    pub failure: Option<CliError>,
}

fn json(value: &impl Serialize) -> CliResult<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value).context("serialising output")?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn trim_error(e: TrimError) -> CliError {
    match e {
        TrimError::InvalidSpeed(_) => CliError::Usage(e.to_string()),
        _ => CliError::Numeric(e.to_string()),
    }
}

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::Config(c) => CliError::Config(c),
        other => CliError::Numeric(other.to_string()),
    }
}

fn model(vehicle: &VehicleParams) -> CliResult<VehicleModel> {
    VehicleModel::new(vehicle.clone())
        .map_err(|e| CliError::Config(auv_core::ConfigError::invalid("vehicle", e.to_string())))
}

fn speed_mps(knots: f64) -> CliResult<f64> {
    if knots.is_nan() || knots <= 0.0 || knots.is_infinite() {
        return Err(CliError::Usage(format!(
            "speed must be positive, got {knots} knots"
        )));
    }
    Ok(knots_to_mps(knots))
}

fn solve(vehicle: &VehicleParams, U: f64, roll_mode: RollMode) -> CliResult<TrimResult> {
    let m = model(vehicle)?;
    let opts = TrimOptions {
        roll_mode,
        ..Default::default()
    };
    let r = solve_trim(U, &TrimDecision::default_guess(U), &m, &opts).map_err(trim_error)?;
    if !r.converged {
        return Err(CliError::Numeric(format!(
            "trim did not converge: residual norm {:e}, residual {:?}",
            r.residual_norm, r.residual
        )));
    }
    Ok(r)
}

/// Trim solution in file units.
#[derive(Debug, Clone, Serialize)]
struct TrimReport {
    speed_knots: f64,
    speed_mps: f64,
    roll_mode: RollMode,
    converged: bool,
    saturated: bool,
    iterations: usize,
    residual_norm: f64,
    u_mps: f64,
    v_mps: f64,
    w_mps: f64,
    alpha_deg: f64,
    beta_deg: f64,
    theta_deg: f64,
    phi_deg: f64,
    n_rpm: f64,
    u_p_mps: f64,
    delta_s1_deg: f64,
    delta_s2_deg: f64,
    delta_r1_deg: f64,
    delta_r2_deg: f64,
    delta_roll_deg: f64,
}

#[derive(Debug, Clone, Serialize)]
struct LinearizationReport {
    speed_mps: f64,
    trim_n_rpm: f64,
    depth: StateSpaceModel,
    depth_transfer_functions: DepthTransferFunctions,
    yaw: YawModel,
    speed: TransferFunction,
    printed_references: Vec<ReferenceDiscrepancy>,
    plane_jacobian_comparison: Vec<JacobianComparison>,
    coupled_jacobian_comparison: Vec<JacobianComparison>,
    open_loop_eigenvalues: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
struct CompareCell {
    group: String,
    level: f64,
    mode: ControlMode,
    seed: u64,
    metrics: Option<Metrics>,
    error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
struct ModeSpread {
    mode: ControlMode,
    min: f64,
    max: f64,
    mean: f64,
    relative_spread: f64,
}

#[derive(Debug, Clone, Serialize)]
struct CompareReport {
    cells: Vec<CompareCell>,
    spread: Vec<ModeSpread>,
}

/// Independent seed for sweep cell `index`.
pub fn cell_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn fmt_level(g: &SweepGroup, level: f64) -> String {
    format!("{}@{}", g.name, level)
}

/// Relative spread (max − min)/mean of finite values.
pub fn relative_spread(values: &[f64]) -> (f64, f64, f64, f64) {
    let v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN, f64::NAN);
    }
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (min, max, mean, (max - min) / mean)
}

impl ResolvedRun {
    /// Runs the command, writing its data files through `out`.
    pub fn execute(
        &self,
        out: &mut OutputWriter,
        jobs: Option<usize>,
        verbose: bool,
    ) -> CliResult<Outcome> {
        match self {
            ResolvedRun::Hull { vehicle, samples } => {
                if *samples < 2 {
                    return Err(CliError::Usage("--samples must be at least 2".into()));
                }
                let rows = hull_profile(&vehicle.hull, *samples)
                    .map_err(|e| CliError::Numeric(e.to_string()))?;
                let mut csv = String::from("xi_m,r_m\n");
                for (xi, r) in &rows {
                    writeln!(csv, "{xi},{r}").unwrap();
                }
                out.write("hull.csv", csv.as_bytes())?;
                Ok(Outcome {
                    report: format!(
                        "hull: {} samples over [0, {}] m",
                        rows.len(),
                        vehicle.hull.l
                    ),
                    failure: None,
                })
            }
            ResolvedRun::Trim {
                vehicle,
                speed_knots,
                roll_mode,
            } => {
                let U = speed_mps(*speed_knots)?;
                let r = solve(vehicle, U, *roll_mode)?;
                let d = &r.decision;
                let (state, _) = d.to_state(U);
                let rep = TrimReport {
                    speed_knots: *speed_knots,
                    speed_mps: U,
                    roll_mode: *roll_mode,
                    converged: r.converged,
                    saturated: r.saturated,
                    iterations: r.iterations,
                    residual_norm: r.residual_norm,
                    u_mps: state.velocity.u,
                    v_mps: state.velocity.v,
                    w_mps: state.velocity.w,
                    alpha_deg: d.alpha.to_degrees(),
                    beta_deg: d.beta.to_degrees(),
                    theta_deg: d.theta.to_degrees(),
                    phi_deg: d.phi.to_degrees(),
                    n_rpm: d.n,
                    u_p_mps: d.u_p,
                    delta_s1_deg: d.delta_s1.to_degrees(),
                    delta_s2_deg: d.delta_s2.to_degrees(),
                    delta_r1_deg: d.delta_r1.to_degrees(),
                    delta_r2_deg: d.delta_r2.to_degrees(),
                    delta_roll_deg: d.delta_roll().to_degrees(),
                };
                out.write("trim.json", &json(&rep)?)?;
                let mut s = String::new();
                writeln!(
                    s,
                    "level flight at {speed_knots} knots ({U:.4} m/s), roll {roll_mode:?}"
                )
                .unwrap();
                writeln!(
                    s,
                    "  converged in {} iterations, residual {:.2e}",
                    r.iterations, r.residual_norm
                )
                .unwrap();
                for (k, v) in [
                    ("u (m/s)", rep.u_mps),
                    ("v (m/s)", rep.v_mps),
                    ("w (m/s)", rep.w_mps),
                    ("alpha (deg)", rep.alpha_deg),
                    ("beta (deg)", rep.beta_deg),
                    ("theta (deg)", rep.theta_deg),
                    ("phi (deg)", rep.phi_deg),
                    ("n (RPM)", rep.n_rpm),
                    ("u_p (m/s)", rep.u_p_mps),
                    ("delta_s1 (deg)", rep.delta_s1_deg),
                    ("delta_s2 (deg)", rep.delta_s2_deg),
                    ("delta_r1 (deg)", rep.delta_r1_deg),
                    ("delta_r2 (deg)", rep.delta_r2_deg),
                    ("delta_roll (deg)", rep.delta_roll_deg),
                ] {
                    writeln!(s, "  {k:<18}{v:>12.5}").unwrap();
                }
                if r.saturated {
                    writeln!(s, "  warning: solution clamped to actuator limits").unwrap();
                }
                Ok(Outcome {
                    report: s,
                    failure: None,
                })
            }
            ResolvedRun::Linearize {
                vehicle,
                speed_knots,
            } => {
                let U = speed_mps(*speed_knots)?;
                let r = solve(vehicle, U, RollMode::Free)?;
                let m = model(vehicle)?;
                let (state, cmd) = r.decision.to_state(U);
                let nl = numeric_jacobian(&state, &cmd, &m, 1e-6)
                    .map_err(|e| CliError::Numeric(e.to_string()))?;
                let eig =
                    nl.a.complex_eigenvalues()
                        .iter()
                        .map(|c| (c.re, c.im))
                        .collect();
                let rep = LinearizationReport {
                    speed_mps: U,
                    trim_n_rpm: r.decision.n,
                    depth: depth_pitch_model(U, vehicle),
                    depth_transfer_functions: depth_transfer_functions(U, vehicle),
                    yaw: yaw_model(U, vehicle),
                    speed: speed_model(U, r.decision.n, vehicle),
                    printed_references: reference_discrepancies(U, r.decision.n, vehicle),
                    plane_jacobian_comparison: compare_models(
                        U,
                        r.decision.n,
                        vehicle,
                        &nl.plane_jacobians(),
                    ),
                    coupled_jacobian_comparison: compare_models(
                        U,
                        r.decision.n,
                        vehicle,
                        &nl.coupled_jacobians(),
                    ),
                    open_loop_eigenvalues: eig,
                };
                out.write("linearization.json", &json(&rep)?)?;
                let mut s = String::new();
                writeln!(
                    s,
                    "linear models at {U:.4} m/s (trim {:.1} RPM)",
                    r.decision.n
                )
                .unwrap();
                for c in &rep.plane_jacobian_comparison {
                    writeln!(
                        s,
                        "  {:<6}{:<16} analytic {:>11.5}  numeric {:>11.5}  {}",
                        c.subsystem,
                        c.entry,
                        c.analytic,
                        c.numeric,
                        if c.within_tolerance { "ok" } else { "MISMATCH" }
                    )
                    .unwrap();
                }
                writeln!(s, "printed constants:").unwrap();
                for d in &rep.printed_references {
                    writeln!(
                        s,
                        "  {:<28} printed {:>9.4}  computed {:>9.4}  ({:+.1} %)",
                        d.name,
                        d.printed,
                        d.computed,
                        100.0 * d.relative
                    )
                    .unwrap();
                }
                Ok(Outcome {
                    report: s,
                    failure: None,
                })
            }
            ResolvedRun::Simulate {
                name,
                scenario,
                vehicle,
            } => {
                let result = if verbose {
                    run_scenario_with_progress(scenario, vehicle, |f| {
                        eprintln!("{name}: {:3.0} %", 100.0 * f)
                    })
                } else {
                    run_scenario(scenario, vehicle)
                };
                match result {
                    Ok(o) => {
                        let mut csv = Vec::new();
                        o.log.write_csv(&mut csv).context("formatting CSV")?;
                        out.write(&format!("{name}.csv"), &csv)?;
                        out.write(&format!("{name}.metrics.json"), &json(&o.metrics)?)?;
                        let m = &o.metrics;
                        Ok(Outcome {
                            report: format!(
                                "{name}: {} samples, rmse y {:.4} m, z {:.4} m, u {:.4} m/s",
                                m.samples, m.rmse_y, m.rmse_z, m.rmse_u
                            ),
                            failure: None,
                        })
                    }
                    Err(SimError::Diverged { t, reason, log }) => {
                        let mut csv = Vec::new();
                        log.write_csv(&mut csv).context("formatting CSV")?;
                        let p = out.write_partial(&format!("{name}.csv"), &csv)?;
                        Err(CliError::Numeric(format!(
                            "{name} diverged at t = {t} s: {reason}; partial log kept at {}",
                            p.display()
                        )))
                    }
                    Err(e) => Err(sim_error(e)),
                }
            }
            ResolvedRun::Compare { name, sweep, modes } => compare(name, sweep, modes, out, jobs),
        }
    }
}

fn compare(
    name: &str,
    sweep: &SweepConfig,
    modes: &[ModeRun],
    out: &mut OutputWriter,
    jobs: Option<usize>,
) -> CliResult<Outcome> {
    let mut plan = Vec::new();
    for g in &sweep.groups {
        for &level in &g.levels {
            for m in modes {
                plan.push((g, level, m));
            }
        }
    }
    let run_cell = |(i, (g, level, m)): (usize, &(&SweepGroup, f64, &ModeRun))| {
        let mut s = g.apply(&m.scenario, *level);
        s.controller.mode = m.mode;
        s.sim.seed = cell_seed(m.scenario.sim.seed, i);
        let res = run_scenario(&s, &m.vehicle);
        CompareCell {
            group: g.name.clone(),
            level: *level,
            mode: m.mode,
            seed: s.sim.seed,
            metrics: res.as_ref().ok().map(|o| o.metrics),
            error: res.err().map(|e| e.to_string()),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .context("building thread pool")?;
    let cells: Vec<CompareCell> =
        pool.install(|| plan.par_iter().enumerate().map(run_cell).collect());

    let mut columns: Vec<String> = Vec::new();
    for g in &sweep.groups {
        for &l in &g.levels {
            columns.push(fmt_level(g, l));
        }
    }
    let mut csv = String::from("controller");
    for c in &columns {
        csv.push(',');
        csv.push_str(c);
    }
    csv.push('\n');
    let mut table = String::from("| controller |");
    for c in &columns {
        write!(table, " {c} |").unwrap();
    }
    writeln!(table, "\n|---|{}", "---|".repeat(columns.len())).unwrap();
    let mut spread = Vec::new();
    if !columns.is_empty() {
        for m in modes {
            let row: Vec<&CompareCell> = cells.iter().filter(|c| c.mode == m.mode).collect();
            let vals: Vec<String> = row
                .iter()
                .map(|c| {
                    c.metrics
                        .map_or("DIVERGED".to_string(), |x| format!("{:.4}", x.rmse_y))
                })
                .collect();
            csv.push_str(&format!("{},{}\n", m.mode, vals.join(",")));
            table.push_str(&format!("| {} | {} |\n", m.mode, vals.join(" | ")));
            let ys: Vec<f64> = row
                .iter()
                .filter_map(|c| c.metrics.map(|x| x.rmse_y))
                .collect();
            let (min, max, mean, rel) = relative_spread(&ys);
            spread.push(ModeSpread {
                mode: m.mode,
                min,
                max,
                mean,
                relative_spread: rel,
            });
        }
    }
    out.write(&format!("{name}.compare.csv"), csv.as_bytes())?;
    let diverged = cells.iter().filter(|c| c.metrics.is_none()).count();
    out.write(
        &format!("{name}.compare.json"),
        &json(&CompareReport {
            cells,
            spread: spread.clone(),
        })?,
    )?;
    let mut report = format!("rmse_y (m) for {name}\n{table}");
    for s in &spread {
        writeln!(
            report,
            "{} relative spread {:.4}",
            s.mode, s.relative_spread
        )
        .unwrap();
    }
    Ok(Outcome {
        report,
        failure: (diverged > 0)
            .then(|| CliError::Numeric(format!("{diverged} sweep cell(s) diverged"))),
    })
}
