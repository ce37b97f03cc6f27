//! Fixed-step closed-loop simulation: RK4 on vehicle, shaft and current speed, reference
//! generation, parameter perturbations and tracking metrics.

#![allow(non_snake_case)]

pub mod log;
pub mod reference;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controllers::{Autopilot, Controller, ControllerConfig, ReferenceFilter, References};
use crate::error::{ConfigError, ModelError};
use crate::trim::{solve_trim, RollMode, TrimDecision, TrimError, TrimOptions, TrimResult};
use crate::units::{rps_to_rpm, GRAVITY};
use crate::vehicle::current::OceanCurrent;
use crate::vehicle::params::{HydroCoefficients, VehicleParams};
use crate::vehicle::{ActuatorCommand, PropellerModel, StateVector, VehicleModel, VehicleState};

pub use log::{rmse, MetricError, Metrics, Record, TimeSeriesLog};
pub use reference::{
    lawn_mowing_reference, FilterSettings, LateralReference, LawnMowingPattern, ReferenceSettings,
    Step, TurnDirection,
};

/// One RK4 step of the vehicle, shaft and current-speed states with `cmd` and the current
/// noise sample held over the step.
pub fn integrate_step(
    state: &VehicleState,
    cmd: &ActuatorCommand,
    current: &OceanCurrent,
    model: &VehicleModel,
    dt: f64,
    noise: f64,
) -> Result<(VehicleState, OceanCurrent), ModelError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(ModelError::Domain {
            quantity: "dt",
            value: dt,
            domain: "> 0".into(),
        });
    }
    let f = |x: &StateVector, U_c: f64| -> Result<(StateVector, f64), ModelError> {
        let oc = OceanCurrent { U_c, ..*current };
        let d = model.state_derivative(&VehicleState::from_vector(x), cmd, &oc)?;
        Ok((d.to_vector(), current.speed_rate(U_c, noise)))
    };
    let x = state.to_vector();
    let c = current.U_c;
    let (k1, c1) = f(&x, c)?;
    let (k2, c2) = f(&(x + k1 * (0.5 * dt)), c + 0.5 * dt * c1)?;
    let (k3, c3) = f(&(x + k2 * (0.5 * dt)), c + 0.5 * dt * c2)?;
    let (k4, c4) = f(&(x + k3 * dt), c + dt * c3)?;
    let next = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    let U_c = c + dt / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
    let next = VehicleState::from_vector(&next);
    if !next.is_finite() || !U_c.is_finite() {
        return Err(ModelError::NonFinite("integrated state"));
    }
    Ok((
        next,
        OceanCurrent {
            U_c: U_c.max(0.0),
            ..*current
        },
    ))
}

/// Current settings as written in scenario files (angles in degrees).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurrentSettings {
    /// Initial current speed, m/s.
    pub speed_mps: f64,
    pub alpha_deg: f64,
    pub beta_deg: f64,
    pub zeta: f64,
    pub mu: f64,
    pub noise_sigma: f64,
}

impl Default for CurrentSettings {
    fn default() -> Self {
        CurrentSettings {
            speed_mps: 0.0,
            alpha_deg: 0.0,
            beta_deg: 0.0,
            zeta: 0.0,
            mu: 0.0,
            noise_sigma: 0.0,
        }
    }
}

impl CurrentSettings {
    pub fn to_current(&self) -> OceanCurrent {
        OceanCurrent {
            U_c: self.speed_mps,
            alpha_c: self.alpha_deg.to_radians(),
            beta_c: self.beta_deg.to_radians(),
            zeta: self.zeta,
            mu: self.mu,
            noise_sigma: self.noise_sigma,
        }
    }
}

/// Parameter changes applied before a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Perturbations {
    /// Coefficient multipliers keyed by coefficient name (e.g. `X_uu`).
    pub multipliers: BTreeMap<String, f64>,
    /// Added to (x_cg, y_cg, z_cg), m.
    pub cg_shift_m: [f64; 3],
    /// Added to B, N.
    pub buoyancy_delta_n: f64,
    /// When set, B is chosen so that (B − W)/g equals this many grams.
    pub buoyancy_excess_g: Option<f64>,
}

/// Copy of `params` with scaled coefficients, shifted centre of gravity and adjusted
/// buoyancy.
pub fn perturb_params(
    params: &VehicleParams,
    multipliers: &BTreeMap<String, f64>,
    cg_shift: [f64; 3],
    buoyancy_delta: f64,
) -> Result<VehicleParams, ConfigError> {
    let mut p = params.clone();
    for (name, &k) in multipliers {
        if !(k > 0.0) || !k.is_finite() {
            return Err(ConfigError::invalid(
                format!("perturbations.multipliers.{name}"),
                "must be > 0",
            ));
        }
        let c = p
            .hydro
            .coefficient_mut(name)
            .ok_or_else(|| ConfigError::UnknownCoefficient {
                name: name.clone(),
                valid: HydroCoefficients::NAMES.join(", "),
            })?;
        *c *= k;
    }
    p.rigid_body.x_cg += cg_shift[0];
    p.rigid_body.y_cg += cg_shift[1];
    p.rigid_body.z_cg += cg_shift[2];
    p.rigid_body.B += buoyancy_delta;
    p.validate()?;
    Ok(p)
}

impl Perturbations {
    pub fn apply(&self, params: &VehicleParams) -> Result<VehicleParams, ConfigError> {
        let mut delta = self.buoyancy_delta_n;
        if let Some(g) = self.buoyancy_excess_g {
            if !g.is_finite() {
                return Err(ConfigError::invalid(
                    "perturbations.buoyancy_excess_g",
                    "must be finite",
                ));
            }
            let rb = &params.rigid_body;
            delta += rb.W + g * 1e-3 * GRAVITY - rb.B;
        }
        perturb_params(params, &self.multipliers, self.cg_shift_m, delta)
    }

    pub fn is_identity(&self) -> bool {
        self == &Perturbations::default()
    }
}

/// Run control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSettings {
    pub duration_s: f64,
    #[serde(default = "default_dt")]
    pub dt_s: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub propeller_model: PropellerModel,
    /// Roll handling of the initial trim state; the feedforward always uses zero roll.
    #[serde(default)]
    pub initial_roll_mode: RollMode,
}

fn default_dt() -> f64 {
    0.01
}

/// Vehicle file reference, resolved relative to the scenario file. Absent means the
/// built-in research vehicle.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSection {
    pub config: Option<String>,
}

/// A complete closed-loop experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub vehicle: VehicleSection,
    pub sim: SimSettings,
    #[serde(default)]
    pub references: ReferenceSettings,
    #[serde(default)]
    pub current: CurrentSettings,
    #[serde(default)]
    pub perturbations: Perturbations,
    #[serde(default)]
    pub controller: ControllerConfig,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.sim;
        if !(s.dt_s > 0.0) || !s.dt_s.is_finite() {
            return Err(ConfigError::invalid("sim.dt_s", "must be > 0"));
        }
        if !(s.duration_s >= 0.0) || !s.duration_s.is_finite() {
            return Err(ConfigError::invalid("sim.duration_s", "must be >= 0"));
        }
        self.references.validate()?;
        self.current
            .to_current()
            .validate()
            .map_err(|e| ConfigError::invalid("current", e.to_string()))?;
        self.controller.validate()
    }

    /// Number of integration steps.
    pub fn steps(&self) -> usize {
        (self.sim.duration_s / self.sim.dt_s + 1e-9).floor() as usize
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("simulation diverged at t = {t} s: {reason}")]
    Diverged {
        t: f64,
        reason: String,
        log: Box<TimeSeriesLog>,
    },
    #[error("trim failed: {0}")]
    Trim(#[from] TrimError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Log, metrics and the trim points used.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub log: TimeSeriesLog,
    pub metrics: Metrics,
    pub initial_trim: TrimResult,
    pub feedforward_trim: TrimResult,
}

fn trim_at(
    U: f64,
    model: &VehicleModel,
    roll_mode: RollMode,
    kappa: f64,
) -> Result<TrimResult, TrimError> {
    let opts = TrimOptions {
        roll_mode,
        kappa,
        ..Default::default()
    };
    let r = solve_trim(U, &TrimDecision::default_guess(U), model, &opts)?;
    if !r.converged {
        return Err(TrimError::NotConverged {
            iterations: r.iterations,
            norm: r.residual_norm,
            residual: r.residual,
        });
    }
    Ok(r)
}

fn record(
    t: f64,
    s: &VehicleState,
    r: &References,
    out: &crate::controllers::ControllerOutputs,
    current: &OceanCurrent,
) -> Record {
    let v = &s.velocity;
    let e = &s.pose;
    let c = &out.cmd;
    Record {
        t_s: t,
        x_m: e.x,
        y_m: e.y,
        z_m: e.z,
        phi_deg: e.phi.to_degrees(),
        theta_deg: e.theta.to_degrees(),
        psi_deg: e.psi.to_degrees(),
        u_mps: v.u,
        v_mps: v.v,
        w_mps: v.w,
        p_degps: v.p.to_degrees(),
        q_degps: v.q.to_degrees(),
        r_degps: v.r.to_degrees(),
        shaft_rpm: rps_to_rpm(s.shaft.n),
        u_p_mps: s.shaft.u_p,
        u_ref_mps: r.u,
        z_ref_m: r.z,
        y_ref_m: r.y,
        phi_ref_deg: r.phi.to_degrees(),
        theta_ref_deg: out.theta_ref.to_degrees(),
        psi_ref_deg: out.psi_ref.to_degrees(),
        n_cmd_rpm: c.n,
        delta_s_deg: out.delta_s.to_degrees(),
        delta_r_deg: out.delta_r.to_degrees(),
        delta_a_deg: out.delta_a.to_degrees(),
        delta_s1_deg: c.delta_s1.to_degrees(),
        delta_s2_deg: c.delta_s2.to_degrees(),
        delta_r1_deg: c.delta_r1.to_degrees(),
        delta_r2_deg: c.delta_r2.to_degrees(),
        s_pitch: out.s_pitch,
        s_yaw: out.s_yaw,
        current_mps: current.U_c,
    }
}

/// Runs `scenario` on a perturbed copy of `params`. Trim points (initial state and
/// feedforward) come from the unperturbed vehicle.
pub fn run_scenario(scenario: &Scenario, params: &VehicleParams) -> Result<SimOutput, SimError> {
    run_scenario_with_progress(scenario, params, |_| {})
}

/// As [`run_scenario`], calling `progress` with the completed fraction every 10 %.
pub fn run_scenario_with_progress(
    scenario: &Scenario,
    params: &VehicleParams,
    mut progress: impl FnMut(f64),
) -> Result<SimOutput, SimError> {
    scenario.validate()?;
    let nominal = VehicleModel::new(params.clone())?;
    let plant = VehicleModel::new(scenario.perturbations.apply(params)?)?
        .with_propeller_model(scenario.sim.propeller_model);
    let refs = &scenario.references;
    let raw0 = refs.raw(0.0);
    let kappa = scenario.controller.kappa;
    let initial_trim = trim_at(raw0[0], &nominal, scenario.sim.initial_roll_mode, kappa)?;
    let feedforward_trim = trim_at(raw0[0], &nominal, RollMode::Zero, kappa)?;

    let (mut state, _) = initial_trim.decision.to_state(raw0[0]);
    state.pose.z = raw0[1];
    state.pose.y = raw0[2];
    let limits = &params.limits;
    let mut autopilot = Autopilot::new(
        &scenario.controller,
        &feedforward_trim.decision,
        limits.fin_max,
        rps_to_rpm(limits.n_max),
    );
    let fs = &refs.filter;
    let mut filters = [
        ReferenceFilter::with_initial(fs.speed_tau_s, raw0[0]),
        ReferenceFilter::with_initial(fs.depth_tau_s, raw0[1]),
        ReferenceFilter::with_initial(fs.lateral_tau_s, raw0[2]),
        ReferenceFilter::with_initial(fs.roll_tau_s, raw0[3]),
    ];
    let mut current = scenario.current.to_current();
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.sim.seed);
    let normal = Normal::new(0.0, current.noise_sigma)
        .map_err(|e| ConfigError::invalid("current.noise_sigma", e.to_string()))?;

    let dt = scenario.sim.dt_s;
    let mut log = TimeSeriesLog::new(dt);
    let steps = scenario.steps();
    let tick = (steps / 10).max(1);
    log.records.reserve(steps);
    for k in 0..steps {
        if k > 0 && k % tick == 0 {
            progress(k as f64 / steps as f64);
        }
        let t = k as f64 * dt;
        let raw = refs.raw(t);
        let mut f = [0.0; 4];
        for i in 0..4 {
            f[i] = filters[i].step(raw[i], dt);
        }
        let r = References {
            u: f[0],
            z: f[1],
            y: f[2],
            phi: f[3],
        };
        let out = autopilot.step(&r, &state, dt);
        log.records.push(record(t, &state, &r, &out, &current));
        let noise = if current.noise_sigma > 0.0 {
            normal.sample(&mut rng)
        } else {
            0.0
        };
        let diverged = |reason: String, log: TimeSeriesLog| SimError::Diverged {
            t,
            reason,
            log: Box::new(log),
        };
        match integrate_step(&state, &out.cmd, &current, &plant, dt, noise) {
            Ok((s, c)) => {
                state = s;
                current = c;
            }
            Err(e) => return Err(diverged(e.to_string(), log)),
        }
        let nu = crate::vehicle::hydro::as_vector(&state.velocity).norm();
        if nu > limits.speed_max {
            return Err(diverged(
                format!("|nu| = {nu:.3} exceeds {}", limits.speed_max),
                log,
            ));
        }
    }
    progress(1.0);
    let metrics = Metrics::from_log(&log);
    Ok(SimOutput {
        log,
        metrics,
        initial_trim,
        feedforward_trim,
    })
}
