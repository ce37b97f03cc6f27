//! Cascaded PD autopilot (depth/pitch, lateral/yaw, speed, roll), the roll-nullifying fin
//! allocation and the boundary-layer sliding-mode inner loops.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::trim::TrimDecision;
use crate::units::wrap_angle;
use crate::vehicle::{ActuatorCommand, VehicleState};

/// Default pitch-reference limit, rad.
pub const THETA_MAX: f64 = 0.35;

/// Default heading-reference limit, rad (15°).
pub const PSI_REF_MAX: f64 = 0.2617993877991494;

/// Resolution of the fin allocation grid, rad.
pub const ALLOCATION_QUANTUM: f64 = 1.0 / (1u64 << 40) as f64;

/// Proportional-derivative gains with a derivative filter and output limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdGains {
    pub kp: f64,
    pub kd: f64,
    /// Derivative low-pass time constant, s.
    pub tau_d: f64,
    pub min: f64,
    pub max: f64,
}

impl PdGains {
    pub fn new(kp: f64, kd: f64, tau_d: f64, limit: f64) -> Self {
        PdGains {
            kp,
            kd,
            tau_d,
            min: -limit,
            max: limit,
        }
    }

    pub fn validate(&self, key: &str) -> Result<(), ConfigError> {
        let all = [self.kp, self.kd, self.tau_d, self.min, self.max];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::invalid(key, "gains must be finite"));
        }
        if self.kp < 0.0 || self.kd < 0.0 {
            return Err(ConfigError::invalid(key, "kp and kd must be >= 0"));
        }
        if self.tau_d < 0.0 {
            return Err(ConfigError::invalid(key, "tau_d must be >= 0"));
        }
        if !(self.min < self.max) {
            return Err(ConfigError::invalid(key, "saturation requires min < max"));
        }
        Ok(())
    }

    fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.min, self.max)
    }
}

/// Sliding-surface weights, switching gain and boundary-layer width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmcParams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub boundary_layer: f64,
    /// Derivative low-pass time constant, s.
    #[serde(default = "default_tau_d")]
    pub tau_d: f64,
}

fn default_tau_d() -> f64 {
    0.05
}

impl SmcParams {
    pub fn validate(&self, key: &str) -> Result<(), ConfigError> {
        let all = [
            self.gamma1,
            self.gamma2,
            self.gamma3,
            self.boundary_layer,
            self.tau_d,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::invalid(key, "parameters must be finite"));
        }
        if !(self.gamma1 > 0.0) || !(self.gamma3 > 0.0) {
            return Err(ConfigError::invalid(key, "gamma1 and gamma3 must be > 0"));
        }
        if self.gamma2 < 0.0 {
            return Err(ConfigError::invalid(key, "gamma2 must be >= 0"));
        }
        if !(self.boundary_layer > 0.0) {
            return Err(ConfigError::invalid(key, "boundary_layer must be > 0"));
        }
        if self.tau_d < 0.0 {
            return Err(ConfigError::invalid(key, "tau_d must be >= 0"));
        }
        Ok(())
    }
}

/// First-order low-pass on a reference signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceFilter {
    pub tau: f64,
    state: Option<f64>,
}

impl ReferenceFilter {
    pub fn new(tau: f64) -> Self {
        assert!(tau > 0.0, "filter time constant must be positive");
        ReferenceFilter { tau, state: None }
    }

    /// Starts the filter at `x`.
    pub fn with_initial(tau: f64, x: f64) -> Self {
        ReferenceFilter {
            state: Some(x),
            ..Self::new(tau)
        }
    }

    pub fn value(&self) -> Option<f64> {
        self.state
    }

    pub fn reset(&mut self, x: Option<f64>) {
        self.state = x;
    }

    /// Exact zero-order-hold step of ẋ = (target − x)/τ. An unset filter jumps to the target.
    pub fn step(&mut self, target: f64, dt: f64) -> f64 {
        let x = match self.state {
            None => target,
            Some(x) => target + (x - target) * (-dt / self.tau).exp(),
        };
        self.state = Some(x);
        x
    }
}

/// One-step exact discretisation of ẋ = (target − x)/τ_f.
pub fn reference_filter_step(target: f64, dt: f64, filter: &mut ReferenceFilter) -> f64 {
    filter.step(target, dt)
}

/// Filtered backward difference of a measured signal, ẏ ≈ s/(τs + 1) y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirtyDerivative {
    pub tau: f64,
    angular: bool,
    prev: Option<f64>,
    value: f64,
}

impl DirtyDerivative {
    pub fn new(tau: f64) -> Self {
        DirtyDerivative {
            tau,
            angular: false,
            prev: None,
            value: 0.0,
        }
    }

    /// Differences are wrapped to (−π, π].
    pub fn angular(tau: f64) -> Self {
        DirtyDerivative {
            angular: true,
            ..Self::new(tau)
        }
    }

    pub fn reset(&mut self) {
        self.prev = None;
        self.value = 0.0;
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// The effective time constant is at least `2 dt`.
    pub fn step(&mut self, x: f64, dt: f64) -> f64 {
        if let Some(prev) = self.prev {
            let dx = if self.angular {
                wrap_angle(x - prev)
            } else {
                x - prev
            };
            let tau = self.tau.max(2.0 * dt);
            self.value = (tau * self.value + dx) / (tau + dt);
        }
        self.prev = Some(x);
        self.value
    }
}

fn pd(e: f64, e_rate: f64, g: &PdGains) -> f64 {
    g.kp * e + g.kd * e_rate
}

/// Pitch reference θ_ref = −(K_pd e_z + K_dd ė_z), clamped to the gain limits.
pub fn depth_outer(e_z: f64, e_z_rate: f64, gains: &PdGains) -> f64 {
    gains.clamp(-pd(e_z, e_z_rate, gains))
}

/// Stern command δ_s = −(K_pp e_θ + K_dp ė_θ).
pub fn pitch_inner(e_theta: f64, e_theta_rate: f64, gains: &PdGains) -> f64 {
    gains.clamp(-pd(e_theta, e_theta_rate, gains))
}

/// Heading reference ψ_ref = K_py e_y + K_dy ė_y.
pub fn yaw_outer(e_y: f64, e_y_rate: f64, gains: &PdGains) -> f64 {
    gains.clamp(pd(e_y, e_y_rate, gains))
}

/// Rudder command δ_r = −(K_pψ e_ψ + K_dψ ė_ψ) with e_ψ wrapped to (−π, π].
pub fn yaw_inner(e_psi: f64, e_psi_rate: f64, gains: &PdGains) -> f64 {
    gains.clamp(-pd(wrap_angle(e_psi), e_psi_rate, gains))
}

/// Propeller command n = n_ff + K_ps e_u + K_ds ė_u in RPM, clamped to `[0, n_max_rpm]`
/// and to the gain limits.
pub fn speed_control(
    e_u: f64,
    e_u_rate: f64,
    gains: &PdGains,
    n_feedforward: f64,
    n_max_rpm: f64,
) -> f64 {
    (n_feedforward + pd(e_u, e_u_rate, gains))
        .clamp(gains.min, gains.max)
        .clamp(0.0, n_max_rpm)
}

/// Differential deflection δ_a = −(K_pφ (φ − φ_ref) + K_dφ φ̇).
pub fn roll_control(phi_error: f64, phi_rate: f64, gains: &PdGains) -> f64 {
    gains.clamp(-pd(phi_error, phi_rate, gains))
}

/// Unit saturation.
pub fn sat(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Sliding surface s = γ1 ė + γ2 e.
pub fn smc_surface(e: f64, e_rate: f64, params: &SmcParams) -> f64 {
    params.gamma1 * e_rate + params.gamma2 * e
}

/// Fin angle γ3 sat(s / boundary_layer).
pub fn smc_inner(e: f64, e_rate: f64, params: &SmcParams) -> f64 {
    params.gamma3 * sat(smc_surface(e, e_rate, params) / params.boundary_layer)
}

fn quantize(x: f64) -> f64 {
    (x / ALLOCATION_QUANTUM).round() * ALLOCATION_QUANTUM
}

/// Pre-saturation fin split δ_s1,2 = δ_s ± κδ_a/2, δ_r1,2 = δ_r ± (1−κ)δ_a/2 on a
/// 2⁻⁴⁰ rad grid, so each pair sums to exactly twice its mean.
pub fn allocate_roll_unsaturated(delta_s: f64, delta_r: f64, delta_a: f64, kappa: f64) -> [f64; 4] {
    assert!((0.0..=1.0).contains(&kappa), "kappa must lie in [0, 1]");
    let ds = quantize(delta_s);
    let dr = quantize(delta_r);
    let hs = quantize(0.5 * kappa * delta_a);
    let hr = quantize(0.5 * (1.0 - kappa) * delta_a);
    [ds + hs, ds - hs, dr + hr, dr - hr]
}

/// Fin split followed by per-fin saturation at ±`fin_max`. The returned command has n = 0.
pub fn allocate_roll(
    delta_s: f64,
    delta_r: f64,
    delta_a: f64,
    kappa: f64,
    fin_max: f64,
) -> ActuatorCommand {
    let [s1, s2, r1, r2] = allocate_roll_unsaturated(delta_s, delta_r, delta_a, kappa);
    ActuatorCommand {
        n: 0.0,
        delta_s1: s1.clamp(-fin_max, fin_max),
        delta_s2: s2.clamp(-fin_max, fin_max),
        delta_r1: r1.clamp(-fin_max, fin_max),
        delta_r2: r2.clamp(-fin_max, fin_max),
    }
}

/// Stateful controller stepped at a fixed rate.
pub trait Controller {
    type Reference;
    type Output;

    fn reset(&mut self);
    fn step(&mut self, reference: &Self::Reference, state: &VehicleState, dt: f64) -> Self::Output;
}

/// Inner-loop law for pitch or yaw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerLaw {
    Pd(PdGains),
    Smc(SmcParams),
}

impl InnerLaw {
    fn tau_d(&self) -> f64 {
        match self {
            InnerLaw::Pd(g) => g.tau_d,
            InnerLaw::Smc(p) => p.tau_d,
        }
    }

    /// Deflection increment for error `e = ref − meas` and its rate. The sliding surface
    /// is built on `meas − ref`, giving the same restoring sign as the PD law.
    fn apply(&self, e: f64, e_rate: f64) -> (f64, f64) {
        match self {
            InnerLaw::Pd(g) => (-pd(e, e_rate, g), 0.0),
            InnerLaw::Smc(p) => (smc_inner(-e, -e_rate, p), smc_surface(-e, -e_rate, p)),
        }
    }
}

/// Signals of one cascaded plane loop.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CascadeOutput {
    /// Attitude reference, rad.
    pub attitude_ref: f64,
    /// Mean fin command before allocation, rad.
    pub fin: f64,
    /// Sliding surface (zero under PD).
    pub surface: f64,
}

/// Depth → pitch → stern cascade.
#[derive(Debug, Clone)]
pub struct DepthLoop {
    pub outer: PdGains,
    pub inner: InnerLaw,
    pub theta_ff: f64,
    pub delta_ff: f64,
    pub fin_max: f64,
    z_rate: DirtyDerivative,
    theta_rate: DirtyDerivative,
}

impl DepthLoop {
    pub fn new(
        outer: PdGains,
        inner: InnerLaw,
        theta_ff: f64,
        delta_ff: f64,
        fin_max: f64,
    ) -> Self {
        DepthLoop {
            z_rate: DirtyDerivative::new(outer.tau_d),
            theta_rate: DirtyDerivative::angular(inner.tau_d()),
            outer,
            inner,
            theta_ff,
            delta_ff,
            fin_max,
        }
    }
}

impl Controller for DepthLoop {
    type Reference = f64;
    type Output = CascadeOutput;

    fn reset(&mut self) {
        self.z_rate.reset();
        self.theta_rate.reset();
    }

    fn step(&mut self, z_ref: &f64, state: &VehicleState, dt: f64) -> CascadeOutput {
        let z = state.pose.z;
        let theta = state.pose.theta;
        let z_dot = self.z_rate.step(z, dt);
        let theta_dot = self.theta_rate.step(theta, dt);
        let theta_ref = (self.theta_ff + depth_outer(z_ref - z, -z_dot, &self.outer))
            .clamp(self.outer.min, self.outer.max);
        let (d, surface) = self.inner.apply(theta_ref - theta, -theta_dot);
        let d = match self.inner {
            InnerLaw::Pd(g) => g.clamp(d),
            InnerLaw::Smc(_) => d,
        };
        CascadeOutput {
            attitude_ref: theta_ref,
            fin: (self.delta_ff + d).clamp(-self.fin_max, self.fin_max),
            surface,
        }
    }
}

/// Lateral offset → heading → rudder cascade.
#[derive(Debug, Clone)]
pub struct HeadingLoop {
    pub outer: PdGains,
    pub inner: InnerLaw,
    pub delta_ff: f64,
    pub fin_max: f64,
    y_rate: DirtyDerivative,
    psi_rate: DirtyDerivative,
}

impl HeadingLoop {
    pub fn new(outer: PdGains, inner: InnerLaw, delta_ff: f64, fin_max: f64) -> Self {
        HeadingLoop {
            y_rate: DirtyDerivative::new(outer.tau_d),
            psi_rate: DirtyDerivative::angular(inner.tau_d()),
            outer,
            inner,
            delta_ff,
            fin_max,
        }
    }
}

impl Controller for HeadingLoop {
    type Reference = f64;
    type Output = CascadeOutput;

    fn reset(&mut self) {
        self.y_rate.reset();
        self.psi_rate.reset();
    }

    fn step(&mut self, y_ref: &f64, state: &VehicleState, dt: f64) -> CascadeOutput {
        let y = state.pose.y;
        let psi = state.pose.psi;
        let y_dot = self.y_rate.step(y, dt);
        let psi_dot = self.psi_rate.step(psi, dt);
        let psi_ref = yaw_outer(y_ref - y, -y_dot, &self.outer);
        let (d, surface) = self.inner.apply(wrap_angle(psi_ref - psi), -psi_dot);
        let d = match self.inner {
            InnerLaw::Pd(g) => g.clamp(d),
            InnerLaw::Smc(_) => d,
        };
        CascadeOutput {
            attitude_ref: psi_ref,
            fin: (self.delta_ff + d).clamp(-self.fin_max, self.fin_max),
            surface,
        }
    }
}

/// Surge speed loop with trim feedforward. Output in RPM.
#[derive(Debug, Clone)]
pub struct SpeedLoop {
    pub gains: PdGains,
    pub n_ff: f64,
    pub n_max_rpm: f64,
    u_rate: DirtyDerivative,
}

impl SpeedLoop {
    pub fn new(gains: PdGains, n_ff: f64, n_max_rpm: f64) -> Self {
        SpeedLoop {
            u_rate: DirtyDerivative::new(gains.tau_d),
            gains,
            n_ff,
            n_max_rpm,
        }
    }
}

impl Controller for SpeedLoop {
    type Reference = f64;
    type Output = f64;

    fn reset(&mut self) {
        self.u_rate.reset();
    }

    fn step(&mut self, u_ref: &f64, state: &VehicleState, dt: f64) -> f64 {
        let u = state.velocity.u;
        let u_dot = self.u_rate.step(u, dt);
        speed_control(u_ref - u, -u_dot, &self.gains, self.n_ff, self.n_max_rpm)
    }
}

/// Roll loop producing the differential deflection δ_a.
#[derive(Debug, Clone)]
pub struct RollLoop {
    pub gains: PdGains,
    pub delta_ff: f64,
    phi_rate: DirtyDerivative,
}

impl RollLoop {
    pub fn new(gains: PdGains, delta_ff: f64) -> Self {
        RollLoop {
            phi_rate: DirtyDerivative::angular(gains.tau_d),
            gains,
            delta_ff,
        }
    }
}

impl Controller for RollLoop {
    type Reference = f64;
    type Output = f64;

    fn reset(&mut self) {
        self.phi_rate.reset();
    }

    fn step(&mut self, phi_ref: &f64, state: &VehicleState, dt: f64) -> f64 {
        let phi = state.pose.phi;
        let phi_dot = self.phi_rate.step(phi, dt);
        let d = roll_control(wrap_angle(phi - phi_ref), phi_dot, &self.gains);
        self.gains.clamp(self.delta_ff + d)
    }
}

/// Inner-loop family.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    #[default]
    Conventional,
    Smc,
}

impl std::fmt::Display for ControlMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ControlMode::Conventional => "conventional",
            ControlMode::Smc => "smc",
        })
    }
}

/// Full gain set. Angles in rad, lengths in m, speed gains in RPM per m/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerConfig {
    pub mode: ControlMode,
    pub depth: PdGains,
    pub pitch: PdGains,
    pub lateral: PdGains,
    pub yaw: PdGains,
    pub speed: PdGains,
    pub roll: PdGains,
    pub smc_pitch: SmcParams,
    pub smc_yaw: SmcParams,
    pub kappa: f64,
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.depth.validate("controller.depth")?;
        self.pitch.validate("controller.pitch")?;
        self.lateral.validate("controller.lateral")?;
        self.yaw.validate("controller.yaw")?;
        self.speed.validate("controller.speed")?;
        self.roll.validate("controller.roll")?;
        self.smc_pitch.validate("controller.smc_pitch")?;
        self.smc_yaw.validate("controller.smc_yaw")?;
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(ConfigError::invalid(
                "controller.kappa",
                "must lie in [0, 1]",
            ));
        }
        Ok(())
    }
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            mode: ControlMode::Conventional,
            depth: PdGains::new(0.1, 0.8, 0.2, THETA_MAX),
            pitch: PdGains::new(3.0, 3.0, 0.05, 0.35),
            lateral: PdGains::new(0.1, 0.0, 0.2, PSI_REF_MAX),
            yaw: PdGains::new(3.0, 3.0, 0.05, 0.35),
            speed: PdGains {
                kp: 15000.0,
                kd: 0.0,
                tau_d: 0.1,
                min: 0.0,
                max: 2500.0,
            },
            roll: PdGains::new(1.0, 0.3, 0.05, 0.35),
            smc_pitch: SmcParams {
                gamma1: 1.0,
                gamma2: 1.5,
                gamma3: 0.35,
                boundary_layer: 0.05,
                tau_d: 0.05,
            },
            smc_yaw: SmcParams {
                gamma1: 1.0,
                gamma2: 1.5,
                gamma3: 0.35,
                boundary_layer: 0.05,
                tau_d: 0.05,
            },
            kappa: 0.5,
        }
    }
}

/// Filtered references for one step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct References {
    pub u: f64,
    pub z: f64,
    pub y: f64,
    pub phi: f64,
}

/// Command plus intermediate loop signals.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ControllerOutputs {
    pub cmd: ActuatorCommand,
    pub theta_ref: f64,
    pub psi_ref: f64,
    pub delta_s: f64,
    pub delta_r: f64,
    pub delta_a: f64,
    pub s_pitch: f64,
    pub s_yaw: f64,
}

/// All loops with trim feedforward and the roll allocation.
#[derive(Debug, Clone)]
pub struct Autopilot {
    pub mode: ControlMode,
    pub kappa: f64,
    pub fin_max: f64,
    pub depth: DepthLoop,
    pub heading: HeadingLoop,
    pub speed: SpeedLoop,
    pub roll: RollLoop,
}

impl Autopilot {
    /// Builds the loops around a trim point. `fin_max` in rad, `n_max_rpm` in RPM.
    pub fn new(cfg: &ControllerConfig, trim: &TrimDecision, fin_max: f64, n_max_rpm: f64) -> Self {
        let (pitch, yaw) = match cfg.mode {
            ControlMode::Conventional => (InnerLaw::Pd(cfg.pitch), InnerLaw::Pd(cfg.yaw)),
            ControlMode::Smc => (InnerLaw::Smc(cfg.smc_pitch), InnerLaw::Smc(cfg.smc_yaw)),
        };
        Autopilot {
            mode: cfg.mode,
            kappa: cfg.kappa,
            fin_max,
            depth: DepthLoop::new(cfg.depth, pitch, trim.theta, trim.delta_s(), fin_max),
            heading: HeadingLoop::new(cfg.lateral, yaw, trim.delta_r(), fin_max),
            speed: SpeedLoop::new(cfg.speed, trim.n, n_max_rpm),
            roll: RollLoop::new(cfg.roll, trim.delta_roll()),
        }
    }
}

impl Controller for Autopilot {
    type Reference = References;
    type Output = ControllerOutputs;

    fn reset(&mut self) {
        self.depth.reset();
        self.heading.reset();
        self.speed.reset();
        self.roll.reset();
    }

    fn step(&mut self, r: &References, state: &VehicleState, dt: f64) -> ControllerOutputs {
        let pitch = self.depth.step(&r.z, state, dt);
        let yaw = self.heading.step(&r.y, state, dt);
        let n = self.speed.step(&r.u, state, dt);
        let delta_a = self.roll.step(&r.phi, state, dt);
        let mut cmd = allocate_roll(pitch.fin, yaw.fin, delta_a, self.kappa, self.fin_max);
        cmd.n = n;
        ControllerOutputs {
            cmd,
            theta_ref: pitch.attitude_ref,
            psi_ref: yaw.attitude_ref,
            delta_s: pitch.fin,
            delta_r: yaw.fin,
            delta_a,
            s_pitch: pitch.surface,
            s_yaw: yaw.surface,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_outer_examples() {
        let g = PdGains::new(0.1, 0.0, 0.0, THETA_MAX);
        assert_eq!(depth_outer(0.0, 0.0, &g), 0.0);
        assert!((depth_outer(1.0, 0.0, &g) + 0.1).abs() < 1e-15);
        assert_eq!(depth_outer(100.0, 0.0, &g), -THETA_MAX);
    }

    #[test]
    fn yaw_error_wraps() {
        let g = PdGains::new(1.0, 0.0, 0.0, 10.0);
        let e = 179f64.to_radians() - (-179f64).to_radians();
        assert!((yaw_inner(e, 0.0, &g) - 2f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn speed_feedforward_and_clamp() {
        let g = PdGains {
            kp: 1000.0,
            kd: 0.0,
            tau_d: 0.0,
            min: 0.0,
            max: 3000.0,
        };
        assert_eq!(speed_control(0.0, 0.0, &g, 1413.0, 2500.0), 1413.0);
        assert_eq!(speed_control(10.0, 0.0, &g, 1413.0, 2500.0), 2500.0);
        assert_eq!(speed_control(-10.0, 0.0, &g, 1413.0, 2500.0), 0.0);
    }

    #[test]
    fn smc_regimes() {
        let p = SmcParams {
            gamma1: 1.0,
            gamma2: 2.0,
            gamma3: 0.3,
            boundary_layer: 0.05,
            tau_d: 0.05,
        };
        assert_eq!(smc_inner(0.0, 0.0, &p), 0.0);
        assert_eq!(smc_inner(1.0, 0.0, &p), 0.3);
        assert_eq!(smc_inner(-1.0, 0.0, &p), -0.3);
        let s = smc_surface(0.005, 0.01, &p);
        assert!((smc_inner(0.005, 0.01, &p) - 0.3 * s / 0.05).abs() < 1e-15);
    }

    #[test]
    fn allocation_examples() {
        let c = allocate_roll(0.1, -0.05, 0.0, 0.5, 0.35);
        assert_eq!(c.delta_s1, c.delta_s2);
        assert_eq!(c.delta_r1, c.delta_r2);
        let c = allocate_roll(0.1, -0.05, 0.2, 1.0, 0.35);
        assert_eq!(c.delta_r1, c.delta_r2);
        assert!((c.delta_s1 - c.delta_s2 - 0.2).abs() < 1e-11);
    }

    #[test]
    fn filter_step_response() {
        let mut f = ReferenceFilter::with_initial(5.0, 0.0);
        let mut x = 0.0;
        for _ in 0..1000 {
            x = f.step(2.0, 0.01);
        }
        assert!((x - 2.0 * (1.0 - (-2.0f64).exp())).abs() < 1e-12);
        let mut f = ReferenceFilter::with_initial(5.0, 3.0);
        assert_eq!(f.step(3.0, 0.01), 3.0);
    }

    #[test]
    fn dirty_derivative_of_ramp() {
        let mut d = DirtyDerivative::new(0.05);
        let mut v = 0.0;
        for k in 0..2000 {
            v = d.step(0.5 * k as f64 * 0.01, 0.01);
        }
        assert!((v - 0.5).abs() < 1e-9);
    }
}
