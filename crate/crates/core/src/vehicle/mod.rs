//! Nonlinear 6-DOF vehicle model.

pub mod actuator;
pub mod current;
#[cfg(any(test, feature = "expanded-oracle"))]
pub mod expanded;
pub mod hull;
pub mod hydro;
pub mod kinematics;
pub mod params;
pub mod propeller;

use std::ops::{Add, Mul, Sub};

use nalgebra::{Matrix6, SVector, Vector6, LU, U6};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ModelError};
use crate::units::rpm_to_rps;
use current::{ocean_current_body_velocity, OceanCurrent};
use params::VehicleParams;

/// Body-frame linear (m/s) and angular (rad/s) velocity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BodyVelocity {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl BodyVelocity {
    pub fn to_array(&self) -> [f64; 6] {
        [self.u, self.v, self.w, self.p, self.q, self.r]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        BodyVelocity {
            u: a[0],
            v: a[1],
            w: a[2],
            p: a[3],
            q: a[4],
            r: a[5],
        }
    }

    pub fn linear_speed(&self) -> f64 {
        (self.u * self.u + self.v * self.v + self.w * self.w).sqrt()
    }
}

/// NED position (m, z down) and Euler angles (rad).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EarthPose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl EarthPose {
    pub fn to_array(&self) -> [f64; 6] {
        [self.x, self.y, self.z, self.phi, self.theta, self.psi]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        EarthPose {
            x: a[0],
            y: a[1],
            z: a[2],
            phi: a[3],
            theta: a[4],
            psi: a[5],
        }
    }
}

/// Propeller shaft speed (RPS) and axial inflow speed (m/s).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ShaftState {
    pub n: f64,
    pub u_p: f64,
}

/// Full vehicle state. The same layout holds time derivatives.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub velocity: BodyVelocity,
    pub pose: EarthPose,
    pub shaft: ShaftState,
}

pub type StateVector = SVector<f64, 14>;

impl VehicleState {
    pub const DIM: usize = 14;

    pub fn to_vector(&self) -> StateVector {
        let mut x = StateVector::zeros();
        x.fixed_rows_mut::<6>(0)
            .copy_from_slice(&self.velocity.to_array());
        x.fixed_rows_mut::<6>(6)
            .copy_from_slice(&self.pose.to_array());
        x[12] = self.shaft.n;
        x[13] = self.shaft.u_p;
        x
    }

    pub fn from_vector(x: &StateVector) -> Self {
        let g = |i: usize| [x[i], x[i + 1], x[i + 2], x[i + 3], x[i + 4], x[i + 5]];
        VehicleState {
            velocity: BodyVelocity::from_array(g(0)),
            pose: EarthPose::from_array(g(6)),
            shaft: ShaftState {
                n: x[12],
                u_p: x[13],
            },
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }
}

/// Propeller speed command (RPM) and fin deflections (rad).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ActuatorCommand {
    pub n: f64,
    pub delta_s1: f64,
    pub delta_s2: f64,
    pub delta_r1: f64,
    pub delta_r2: f64,
}

impl ActuatorCommand {
    pub fn to_array(&self) -> [f64; 5] {
        [
            self.n,
            self.delta_s1,
            self.delta_s2,
            self.delta_r1,
            self.delta_r2,
        ]
    }
}

/// Forces (N) and moments (N·m) in the body frame.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Wrench {
    pub X: f64,
    pub Y: f64,
    pub Z: f64,
    pub K: f64,
    pub M: f64,
    pub N: f64,
}

impl Wrench {
    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(self.X, self.Y, self.Z, self.K, self.M, self.N)
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Wrench {
            X: v[0],
            Y: v[1],
            Z: v[2],
            K: v[3],
            M: v[4],
            N: v[5],
        }
    }
}

impl Add for Wrench {
    type Output = Wrench;
    fn add(self, o: Wrench) -> Wrench {
        Wrench::from_vector(&(self.to_vector() + o.to_vector()))
    }
}

impl Sub for Wrench {
    type Output = Wrench;
    fn sub(self, o: Wrench) -> Wrench {
        Wrench::from_vector(&(self.to_vector() - o.to_vector()))
    }
}

impl Mul<f64> for Wrench {
    type Output = Wrench;
    fn mul(self, k: f64) -> Wrench {
        Wrench::from_vector(&(self.to_vector() * k))
    }
}

/// Which propeller model drives thrust and shaft dynamics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropellerModel {
    /// Thrust and torque follow the commanded speed through the quadratic fit; ṅ = 0.
    #[default]
    Polynomial,
    /// Shaft speed and inflow evolve per the two-state model under a motor speed loop.
    TwoState,
}

/// Validated parameters with the factorised mass matrix cached.
#[derive(Debug, Clone)]
pub struct VehicleModel {
    params: VehicleParams,
    mass: Matrix6<f64>,
    mass_lu: LU<f64, U6, U6>,
    pub propeller_model: PropellerModel,
}

impl VehicleModel {
    pub fn new(params: VehicleParams) -> Result<Self, ModelError> {
        params
            .validate()
            .map_err(|e| ModelError::InvalidParams(e.to_string()))?;
        let mass = hydro::mass_matrix(&params.rigid_body, &params.hydro)?;
        Ok(VehicleModel {
            mass_lu: mass.lu(),
            mass,
            params,
            propeller_model: PropellerModel::Polynomial,
        })
    }

    pub fn with_propeller_model(mut self, model: PropellerModel) -> Self {
        self.propeller_model = model;
        self
    }

    pub fn params(&self) -> &VehicleParams {
        &self.params
    }

    pub fn mass_matrix(&self) -> &Matrix6<f64> {
        &self.mass
    }

    /// Velocity relative to the water.
    pub fn relative_velocity(&self, vel: &BodyVelocity, current: &OceanCurrent) -> BodyVelocity {
        let [uc, vc, wc] = ocean_current_body_velocity(current);
        BodyVelocity {
            u: vel.u - uc,
            v: vel.v - vc,
            w: vel.w - wc,
            ..*vel
        }
    }

    /// Propeller (X, K) contribution for the active model.
    fn propeller_wrench(
        &self,
        state: &VehicleState,
        cmd: &ActuatorCommand,
    ) -> Result<(f64, f64), ModelError> {
        let pp = &self.params.propeller;
        match self.propeller_model {
            PropellerModel::Polynomial => propeller::propeller_thrust_torque(rpm_to_rps(cmd.n), pp),
            PropellerModel::TwoState => Ok((
                propeller::two_state_thrust(state.shaft.n, pp),
                propeller::two_state_torque(state.shaft.n, pp),
            )),
        }
    }

    /// Right-hand side τ + g − C(ν_r)ν_r − D(ν_r)ν_r of the kinetic equations.
    pub fn generalized_force(
        &self,
        state: &VehicleState,
        cmd: &ActuatorCommand,
        current: &OceanCurrent,
    ) -> Result<Vector6<f64>, ModelError> {
        ensure_finite(state.to_vector().as_slice(), "state")?;
        ensure_finite(&cmd.to_array(), "actuator command")?;
        if cmd.n < 0.0 {
            return Err(ModelError::Domain {
                quantity: "n",
                value: cmd.n,
                domain: "[0, n_max]".into(),
            });
        }
        let p = &self.params;
        let nu_r = self.relative_velocity(&state.velocity, current);
        let nu_r_vec = hydro::as_vector(&nu_r);
        let (x_prop, k_prop) = self.propeller_wrench(state, cmd)?;
        let mut tau = actuator::fin_wrench(cmd, nu_r.u, &p.hydro);
        tau.X += x_prop;
        tau.K += k_prop;
        let g = hydro::hydrostatic_wrench(state.pose.phi, state.pose.theta, &p.rigid_body);
        let c = hydro::coriolis_matrix(&nu_r, &p.rigid_body, &p.hydro);
        let d = hydro::damping_matrix(&nu_r, &p.hydro);
        Ok(tau.to_vector() + g.to_vector() - c * nu_r_vec - d * nu_r_vec)
    }

    /// Solves M ν̇ = f.
    pub fn accelerations(&self, force: &Vector6<f64>) -> Result<Vector6<f64>, ModelError> {
        self.mass_lu
            .solve(force)
            .ok_or_else(|| ModelError::InvalidParams("mass matrix is singular".into()))
    }

    /// Time derivative of the full vehicle state.
    pub fn state_derivative(
        &self,
        state: &VehicleState,
        cmd: &ActuatorCommand,
        current: &OceanCurrent,
    ) -> Result<VehicleState, ModelError> {
        let f = self.generalized_force(state, cmd, current)?;
        let nu_dot = self.accelerations(&f)?;
        let pose_dot = kinematics::euler_rates(&state.pose, &state.velocity)?;
        let pp = &self.params.propeller;
        let nu_r = self.relative_velocity(&state.velocity, current);
        let (n_dot, up_dot) = match self.propeller_model {
            PropellerModel::Polynomial => {
                let n = rpm_to_rps(cmd.n);
                let (_, up) = propeller::propeller_two_state_derivatives(
                    0.0,
                    n,
                    state.shaft.u_p,
                    nu_r.u,
                    self.params.hydro.X_uu,
                    pp,
                )?;
                (0.0, up)
            }
            PropellerModel::TwoState => {
                let q = propeller::motor_torque(rpm_to_rps(cmd.n), state.shaft.n, pp);
                propeller::propeller_two_state_derivatives(
                    q,
                    state.shaft.n,
                    state.shaft.u_p,
                    nu_r.u,
                    self.params.hydro.X_uu,
                    pp,
                )?
            }
        };
        let d = VehicleState {
            velocity: BodyVelocity::from_array([
                nu_dot[0], nu_dot[1], nu_dot[2], nu_dot[3], nu_dot[4], nu_dot[5],
            ]),
            pose: pose_dot,
            shaft: ShaftState {
                n: n_dot,
                u_p: up_dot,
            },
        };
        if !d.is_finite() {
            return Err(ModelError::NonFinite("state derivative"));
        }
        Ok(d)
    }

    /// Kinetic energy ½ νᵀ M ν.
    pub fn kinetic_energy(&self, vel: &BodyVelocity) -> f64 {
        let v = hydro::as_vector(vel);
        0.5 * v.dot(&(self.mass * v))
    }
}
