#![allow(non_snake_case)]

use nalgebra::{Matrix6, Vector6};

use super::params::{HydroCoefficients, RigidBodyParams};
use super::{BodyVelocity, Wrench};
use crate::error::ModelError;

pub fn rigid_body_mass(rb: &RigidBodyParams) -> Matrix6<f64> {
    let m = rb.m;
    let (xg, yg, zg) = (rb.x_cg, rb.y_cg, rb.z_cg);
    #[rustfmt::skip]
    let M = Matrix6::from_row_slice(&[
        m,        0.0,      0.0,      0.0,      m * zg,  -m * yg,
        0.0,      m,        0.0,     -m * zg,   0.0,      m * xg,
        0.0,      0.0,      m,        m * yg,  -m * xg,   0.0,
        0.0,     -m * zg,   m * yg,   rb.I_xx,  0.0,      0.0,
        m * zg,   0.0,     -m * xg,   0.0,      rb.I_yy,  0.0,
       -m * yg,   m * xg,   0.0,      0.0,      0.0,      rb.I_zz,
    ]);
    M
}

pub fn added_mass(hc: &HydroCoefficients) -> Matrix6<f64> {
    #[rustfmt::skip]
    let A = Matrix6::from_row_slice(&[
        hc.X_udot, 0.0,       0.0,       0.0,       0.0,       0.0,
        0.0,       hc.Y_vdot, 0.0,       0.0,       0.0,       hc.Y_rdot,
        0.0,       0.0,       hc.Z_wdot, 0.0,       hc.Z_qdot, 0.0,
        0.0,       0.0,       0.0,       hc.K_pdot, 0.0,       0.0,
        0.0,       0.0,       hc.M_wdot, 0.0,       hc.M_qdot, 0.0,
        0.0,       hc.N_vdot, 0.0,       0.0,       0.0,       hc.N_rdot,
    ]);
    -A
}

/// M = M_RB + M_A, rejected when singular or ill-conditioned.
pub fn mass_matrix(
    rb: &RigidBodyParams,
    hc: &HydroCoefficients,
) -> Result<Matrix6<f64>, ModelError> {
    let M = rigid_body_mass(rb) + added_mass(hc);
    if M.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite("mass matrix"));
    }
    let sv = M.singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    if lo <= hi * 1e-12 {
        return Err(ModelError::InvalidParams(format!(
            "mass matrix is singular (singular values {lo:e}..{hi:e})"
        )));
    }
    Ok(M)
}

/// Rigid-body Coriolis/centripetal matrix with zero products of inertia.
pub fn rigid_body_coriolis(vel: &BodyVelocity, rb: &RigidBodyParams) -> Matrix6<f64> {
    let BodyVelocity { u, v, w, p, q, r } = *vel;
    let m = rb.m;
    let (xg, yg, zg) = (rb.x_cg, rb.y_cg, rb.z_cg);
    let (ixx, iyy, izz) = (rb.I_xx, rb.I_yy, rb.I_zz);
    #[rustfmt::skip]
    let C = Matrix6::from_row_slice(&[
        0.0, 0.0, 0.0,  m * (yg * q + zg * r), -m * (xg * q - w),  -m * (xg * r + v),
        0.0, 0.0, 0.0, -m * (yg * p + w),       m * (zg * r + xg * p), -m * (yg * r - u),
        0.0, 0.0, 0.0, -m * (zg * p - v),      -m * (zg * q + u),   m * (xg * p + yg * q),
        -m * (yg * q + zg * r),  m * (yg * p + w),      m * (zg * p - v),  0.0,       izz * r,  -iyy * q,
         m * (xg * q - w),      -m * (zg * r + xg * p), m * (zg * q + u), -izz * r,   0.0,       ixx * p,
         m * (xg * r + v),       m * (yg * r - u),     -m * (xg * p + yg * q), iyy * q, -ixx * p, 0.0,
    ]);
    C
}

/// Added-mass Coriolis/centripetal matrix; skew-symmetric for every velocity.
pub fn added_mass_coriolis(vel: &BodyVelocity, hc: &HydroCoefficients) -> Matrix6<f64> {
    let BodyVelocity { u, v, w, p, q, r } = *vel;
    let (xu, yv, zw) = (hc.X_udot * u, hc.Y_vdot * v, hc.Z_wdot * w);
    let (kp, mq, nr) = (hc.K_pdot * p, hc.M_qdot * q, hc.N_rdot * r);
    #[rustfmt::skip]
    let C = Matrix6::from_row_slice(&[
        0.0, 0.0, 0.0,  0.0, -zw,  yv,
        0.0, 0.0, 0.0,  zw,  0.0, -xu,
        0.0, 0.0, 0.0, -yv,  xu,  0.0,
        0.0, -zw,  yv,  0.0, -nr,  mq,
        zw,  0.0, -xu,  nr,  0.0, -kp,
        -yv, xu,  0.0, -mq,  kp,  0.0,
    ]);
    C
}

pub fn coriolis_matrix(
    vel: &BodyVelocity,
    rb: &RigidBodyParams,
    hc: &HydroCoefficients,
) -> Matrix6<f64> {
    rigid_body_coriolis(vel, rb) + added_mass_coriolis(vel, hc)
}

pub fn linear_damping(hc: &HydroCoefficients) -> Matrix6<f64> {
    let l = &hc.linear;
    #[rustfmt::skip]
    let D = Matrix6::from_row_slice(&[
        l.X_u, 0.0, 0.0,  0.0, 0.0,  0.0,
        0.0,  l.Y_v, 0.0, l.Y_p, 0.0, l.Y_r,
        0.0,  0.0, l.Z_w, 0.0, l.Z_q, 0.0,
        0.0,  l.K_v, 0.0, l.K_p, 0.0, l.K_r,
        0.0,  0.0, l.M_w, 0.0, l.M_q, 0.0,
        0.0,  l.N_v, 0.0, l.N_p, 0.0, l.N_r,
    ]);
    -D
}

/// Cross-flow drag part of the damping.
pub fn quadratic_damping(vel: &BodyVelocity, hc: &HydroCoefficients) -> Matrix6<f64> {
    let BodyVelocity { u, v, w, p, q, r } = *vel;
    let (u, v, w, p, q, r) = (u.abs(), v.abs(), w.abs(), p.abs(), q.abs(), r.abs());
    #[rustfmt::skip]
    let D = Matrix6::from_row_slice(&[
        hc.X_uu * u, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, hc.Y_vv * v, 0.0, 0.0, 0.0, hc.Y_rr * r,
        0.0, 0.0, hc.Z_ww * w, 0.0, hc.Z_qq * q, 0.0,
        0.0, 0.0, 0.0, hc.K_pp * p, 0.0, 0.0,
        0.0, 0.0, hc.M_ww * w, 0.0, hc.M_qq * q, 0.0,
        0.0, hc.N_vv * v, 0.0, 0.0, 0.0, hc.N_rr * r,
    ]);
    -D
}

/// Hull and fin lift part of the damping, scaled by surge.
pub fn lift_damping(vel: &BodyVelocity, hc: &HydroCoefficients) -> Matrix6<f64> {
    let u = vel.u;
    #[rustfmt::skip]
    let D = Matrix6::from_row_slice(&[
        0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, hc.Y_uv * u, 0.0, 0.0, 0.0, hc.Y_ur * u,
        0.0, 0.0, hc.Z_uw * u, 0.0, hc.Z_uq * u, 0.0,
        0.0, 0.0, 0.0, hc.K_up * u, 0.0, 0.0,
        0.0, 0.0, hc.M_uw * u, 0.0, hc.M_uq * u, 0.0,
        0.0, hc.N_uv * u, 0.0, 0.0, 0.0, hc.N_ur * u,
    ]);
    -D
}

pub fn damping_matrix(vel: &BodyVelocity, hc: &HydroCoefficients) -> Matrix6<f64> {
    linear_damping(hc) + quadratic_damping(vel, hc) + lift_damping(vel, hc)
}

/// Weight and buoyancy restoring forces and moments at roll `phi` and pitch `theta`.
pub fn hydrostatic_wrench(phi: f64, theta: f64, rb: &RigidBodyParams) -> Wrench {
    let (sf, cf) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let (W, B) = (rb.W, rb.B);
    let gx = rb.x_cg * W - rb.x_cb * B;
    let gy = rb.y_cg * W - rb.y_cb * B;
    let gz = rb.z_cg * W - rb.z_cb * B;
    Wrench {
        X: -(W - B) * st,
        Y: (W - B) * ct * sf,
        Z: (W - B) * ct * cf,
        K: -gy * ct * cf - gz * ct * sf,
        M: -gz * st - gx * ct * cf,
        N: -gx * ct * sf - gy * st,
    }
}

pub(crate) fn as_vector(vel: &BodyVelocity) -> Vector6<f64> {
    Vector6::from(vel.to_array())
}
