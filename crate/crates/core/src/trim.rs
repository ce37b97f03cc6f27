//! Level-flight trim: damped Newton solve of the full model and the reduced balance
//! equations.

#![allow(non_snake_case)]

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ModelError;
use crate::units::{rpm_to_rps, rps_to_rpm};
use crate::vehicle::current::OceanCurrent;
use crate::vehicle::params::VehicleParams;
use crate::vehicle::{
    ActuatorCommand, BodyVelocity, EarthPose, ShaftState, VehicleModel, VehicleState,
};

/// Trim unknowns. Angles in rad, `n` in RPM, `u_p` in m/s.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TrimDecision {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub phi: f64,
    pub n: f64,
    pub u_p: f64,
    pub delta_s1: f64,
    pub delta_s2: f64,
    pub delta_r1: f64,
    pub delta_r2: f64,
}

impl TrimDecision {
    /// All angles zero, 1200 RPM and inflow at 0.6 U.
    pub fn default_guess(U: f64) -> Self {
        TrimDecision {
            n: 1200.0,
            u_p: 0.6 * U,
            ..Default::default()
        }
    }

    /// Vehicle state and command realising this decision at speed `U`.
    pub fn to_state(&self, U: f64) -> (VehicleState, ActuatorCommand) {
        let (sa, ca) = self.alpha.sin_cos();
        let (sb, cb) = self.beta.sin_cos();
        let state = VehicleState {
            velocity: BodyVelocity {
                u: U * ca * cb,
                v: U * sb,
                w: U * sa * cb,
                ..Default::default()
            },
            pose: EarthPose {
                phi: self.phi,
                theta: self.theta,
                ..Default::default()
            },
            shaft: ShaftState {
                n: rpm_to_rps(self.n),
                u_p: self.u_p,
            },
        };
        let cmd = ActuatorCommand {
            n: self.n,
            delta_s1: self.delta_s1,
            delta_s2: self.delta_s2,
            delta_r1: self.delta_r1,
            delta_r2: self.delta_r2,
        };
        (state, cmd)
    }

    /// Mean stern deflection.
    pub fn delta_s(&self) -> f64 {
        0.5 * (self.delta_s1 + self.delta_s2)
    }

    /// Mean rudder deflection.
    pub fn delta_r(&self) -> f64 {
        0.5 * (self.delta_r1 + self.delta_r2)
    }

    /// Differential (roll) deflection.
    pub fn delta_roll(&self) -> f64 {
        (self.delta_s1 - self.delta_s2) + (self.delta_r1 - self.delta_r2)
    }
}

/// Rates that vanish in level flight, in native units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TrimResidual {
    pub U_dot: f64,
    pub alpha_dot: f64,
    pub beta_dot: f64,
    pub p_dot: f64,
    pub q_dot: f64,
    pub r_dot: f64,
    pub z_dot: f64,
    pub phi_dot: f64,
    pub theta_dot: f64,
    pub psi_dot: f64,
    pub n_dot: f64,
    pub u_p_dot: f64,
}

impl TrimResidual {
    pub fn to_array(&self) -> [f64; 12] {
        [
            self.U_dot,
            self.alpha_dot,
            self.beta_dot,
            self.p_dot,
            self.q_dot,
            self.r_dot,
            self.z_dot,
            self.phi_dot,
            self.theta_dot,
            self.psi_dot,
            self.n_dot,
            self.u_p_dot,
        ]
    }

    pub fn inf_norm(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RollMode {
    /// Roll angle is a free unknown balanced by hydrostatics.
    #[default]
    Free,
    /// Roll held at zero by a differential fin deflection.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrimOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub roll_mode: RollMode,
    /// Stern share of the differential deflection in zero-roll mode.
    pub kappa: f64,
}

impl Default for TrimOptions {
    fn default() -> Self {
        TrimOptions {
            tol: 1e-8,
            max_iter: 100,
            roll_mode: RollMode::Free,
            kappa: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimResult {
    pub decision: TrimDecision,
    pub residual: TrimResidual,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the solution violated a bound and was clamped.
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrimError {
    #[error("speed must be positive and finite, got {0}")]
    InvalidSpeed(f64),
    #[error("trim did not converge after {iterations} iterations; last residual norm {norm:e}, residual {residual:?}")]
    NotConverged {
        iterations: usize,
        norm: f64,
        residual: TrimResidual,
    },
    #[error("trim Jacobian is singular at iteration {0}; retry from a perturbed guess")]
    SingularJacobian(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Maps a decision to the twelve level-flight rates at speed `U` with no current.
pub fn trim_residual(
    d: &TrimDecision,
    U: f64,
    model: &VehicleModel,
) -> Result<TrimResidual, ModelError> {
    let (state, cmd) = d.to_state(U);
    let dx = model.state_derivative(&state, &cmd, &OceanCurrent::still())?;
    let BodyVelocity { u, v, w, .. } = state.velocity;
    let acc = dx.velocity;
    let speed = (u * u + v * v + w * w).sqrt();
    let (U_dot, alpha_dot, beta_dot) = if speed > 0.0 {
        let U_dot = (u * acc.u + v * acc.v + w * acc.w) / speed;
        let uw = u * u + w * w;
        let alpha_dot = if uw > 0.0 {
            (u * acc.w - w * acc.u) / uw
        } else {
            0.0
        };
        let beta_dot = if uw > 0.0 {
            (speed * acc.v - v * U_dot) / (speed * uw.sqrt())
        } else {
            0.0
        };
        (U_dot, alpha_dot, beta_dot)
    } else {
        (acc.linear_speed(), 0.0, 0.0)
    };
    Ok(TrimResidual {
        U_dot,
        alpha_dot,
        beta_dot,
        p_dot: acc.p,
        q_dot: acc.q,
        r_dot: acc.r,
        z_dot: dx.pose.z,
        phi_dot: dx.pose.phi,
        theta_dot: dx.pose.theta,
        psi_dot: dx.pose.psi,
        n_dot: dx.shaft.n,
        u_p_dot: dx.shaft.u_p,
    })
}

const N_UNKNOWNS: usize = 8;

fn pack(d: &TrimDecision, opts: &TrimOptions) -> DVector<f64> {
    let roll = match opts.roll_mode {
        RollMode::Free => d.phi,
        RollMode::Zero => d.delta_roll(),
    };
    DVector::from_vec(vec![
        d.alpha,
        d.beta,
        d.theta,
        roll,
        rpm_to_rps(d.n),
        d.u_p,
        d.delta_s(),
        d.delta_r(),
    ])
}

fn unpack(x: &DVector<f64>, opts: &TrimOptions) -> TrimDecision {
    let (phi, da) = match opts.roll_mode {
        RollMode::Free => (x[3], 0.0),
        RollMode::Zero => (0.0, x[3]),
    };
    let k = opts.kappa;
    TrimDecision {
        alpha: x[0],
        beta: x[1],
        theta: x[2],
        phi,
        n: rps_to_rpm(x[4]),
        u_p: x[5],
        delta_s1: x[6] + 0.5 * k * da,
        delta_s2: x[6] - 0.5 * k * da,
        delta_r1: x[7] + 0.5 * (1.0 - k) * da,
        delta_r2: x[7] - 0.5 * (1.0 - k) * da,
    }
}

fn equations(
    x: &DVector<f64>,
    U: f64,
    model: &VehicleModel,
    opts: &TrimOptions,
) -> Result<DVector<f64>, ModelError> {
    let r = trim_residual(&unpack(x, opts), U, model)?;
    Ok(DVector::from_vec(vec![
        r.U_dot,
        r.alpha_dot,
        r.beta_dot,
        r.p_dot,
        r.q_dot,
        r.r_dot,
        r.z_dot,
        r.u_p_dot,
    ]))
}

fn fd_step(x: f64) -> f64 {
    (1e-6 * x.abs()).max(1e-8)
}

/// Central-difference Jacobian of the eight trim equations in the packed unknowns.
fn jacobian(
    x: &DVector<f64>,
    U: f64,
    model: &VehicleModel,
    opts: &TrimOptions,
) -> Result<DMatrix<f64>, ModelError> {
    let mut J = DMatrix::zeros(N_UNKNOWNS, N_UNKNOWNS);
    for j in 0..N_UNKNOWNS {
        let h = fd_step(x[j]);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let col = (equations(&xp, U, model, opts)? - equations(&xm, U, model, opts)?) / (2.0 * h);
        J.set_column(j, &col);
    }
    Ok(J)
}

/// Jacobian of the packed trim equations, exposed for verification.
pub fn trim_jacobian(
    d: &TrimDecision,
    U: f64,
    model: &VehicleModel,
    opts: &TrimOptions,
) -> Result<DMatrix<f64>, ModelError> {
    jacobian(&pack(d, opts), U, model, opts)
}

/// Packed trim equations [U̇ α̇ β̇ ṗ q̇ ṙ ż u̇_p], exposed for verification.
pub fn trim_equations(
    d: &TrimDecision,
    U: f64,
    model: &VehicleModel,
    opts: &TrimOptions,
) -> Result<DVector<f64>, ModelError> {
    equations(&pack(d, opts), U, model, opts)
}

/// Damped Newton solve for level flight at speed `U`.
pub fn solve_trim(
    U: f64,
    guess: &TrimDecision,
    model: &VehicleModel,
    opts: &TrimOptions,
) -> Result<TrimResult, TrimError> {
    if !(U > 0.0) || !U.is_finite() {
        return Err(TrimError::InvalidSpeed(U));
    }
    let mut x = pack(guess, opts);
    let mut f = equations(&x, U, model, opts)?;
    let mut iterations = 0;
    loop {
        let residual = trim_residual(&unpack(&x, opts), U, model)?;
        let norm = residual.inf_norm();
        if norm < opts.tol {
            return Ok(finish(
                unpack(&x, opts),
                residual,
                iterations,
                U,
                model,
                opts.tol,
            ));
        }
        if iterations >= opts.max_iter {
            return Err(TrimError::NotConverged {
                iterations,
                norm,
                residual,
            });
        }
        iterations += 1;
        let J = jacobian(&x, U, model, opts)?;
        let step = J
            .lu()
            .solve(&(-&f))
            .filter(|s| s.iter().all(|v| v.is_finite()))
            .ok_or(TrimError::SingularJacobian(iterations))?;
        let f_norm = f.norm();
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=20 {
            let xn = &x + &step * lambda;
            if let Ok(fn_) = equations(&xn, U, model, opts) {
                if fn_.norm() < f_norm {
                    accepted = Some((xn, fn_));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let (xn, fn_) = match accepted {
            Some(a) => a,
            None => {
                let xn = &x + &step * lambda;
                let fn_ = equations(&xn, U, model, opts)?;
                (xn, fn_)
            }
        };
        x = xn;
        f = fn_;
    }
}

fn finish(
    d: TrimDecision,
    residual: TrimResidual,
    iterations: usize,
    U: f64,
    model: &VehicleModel,
    tol: f64,
) -> TrimResult {
    let lim = &model.params().limits;
    let fin = |a: f64| a.clamp(-lim.fin_max, lim.fin_max);
    let aero = |a: f64| a.clamp(-0.35, 0.35);
    let clamped = TrimDecision {
        alpha: aero(d.alpha),
        beta: aero(d.beta),
        n: d.n.clamp(0.0, rps_to_rpm(lim.n_max)),
        delta_s1: fin(d.delta_s1),
        delta_s2: fin(d.delta_s2),
        delta_r1: fin(d.delta_r1),
        delta_r2: fin(d.delta_r2),
        ..d
    };
    let saturated = clamped != d;
    let (residual, residual_norm) = if saturated {
        match trim_residual(&clamped, U, model) {
            Ok(r) => (r, r.inf_norm()),
            Err(_) => (residual, f64::NAN),
        }
    } else {
        (residual, residual.inf_norm())
    };
    TrimResult {
        decision: clamped,
        residual,
        residual_norm,
        iterations,
        converged: residual_norm < tol,
        saturated,
    }
}

/// The six simplified level-flight balances (surge, sway, heave, roll, pitch, yaw) in the
/// small-angle form. The propeller terms use the quadratic fit coefficients.
pub fn reduced_trim_equations(d: &TrimDecision, U: f64, params: &VehicleParams) -> [f64; 6] {
    let rb = &params.rigid_body;
    let h = &params.hydro;
    let pp = &params.propeller;
    let (W, B) = (rb.W, rb.B);
    let n = rpm_to_rps(d.n);
    let v = U * d.beta.sin();
    let UU = U * U;
    let ds = d.delta_s1 + d.delta_s2;
    let dr = d.delta_r1 + d.delta_r2;
    let (theta, phi) = (d.theta, d.phi);
    [
        (B - W) * theta + h.X_uu * UU + (1.0 - pp.tau_p) * pp.T_nn * n * n,
        (W - B) * phi + h.Y_uv * U * v + h.Y_vv * v * v + h.Y_uu_dr * UU * dr,
        (W - B) * (1.0 - 0.5 * theta * theta - 0.5 * phi * phi) - h.Z_ww * UU * theta * theta
            + h.Z_uw * U * theta
            + h.Z_uu_ds * UU * ds,
        -rb.z_cg * W * phi + pp.b1 * n * n + h.K_roll * d.delta_roll(),
        rb.z_cg * (W + h.M_uw * UU) * theta - h.M_ww * UU * theta * theta + h.M_uu_ds * UU * ds,
        h.N_uv * U * v + h.N_vv * v * v + h.N_uu_dr * UU * dr,
    ]
}
