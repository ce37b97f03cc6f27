//! Component-form kinetics written term by term, independent of the matrix assembly in
//! [`super::hydro`]. Used as a cross-check of [`super::VehicleModel::state_derivative`].

#![allow(non_snake_case)]

use nalgebra::{Matrix6, Vector6};

use super::current::{ocean_current_body_velocity, OceanCurrent};
use super::params::VehicleParams;
use super::{ActuatorCommand, VehicleState};
use crate::units::rpm_to_rps;

/// Body accelerations [u̇ v̇ ẇ ṗ q̇ ṙ] under the polynomial propeller model.
pub fn body_accelerations(
    params: &VehicleParams,
    state: &VehicleState,
    cmd: &ActuatorCommand,
    current: &OceanCurrent,
) -> Option<[f64; 6]> {
    let rb = &params.rigid_body;
    let h = &params.hydro;
    let lin = &h.linear;
    let pp = &params.propeller;
    let [uc, vc, wc] = ocean_current_body_velocity(current);
    let vel = state.velocity;
    let (u, v, w) = (vel.u - uc, vel.v - vc, vel.w - wc);
    let (p, q, r) = (vel.p, vel.q, vel.r);
    let (phi, theta) = (state.pose.phi, state.pose.theta);
    let m = rb.m;
    let (xg, yg, zg) = (rb.x_cg, rb.y_cg, rb.z_cg);
    let (xb, yb, zb) = (rb.x_cb, rb.y_cb, rb.z_cb);
    let (W, B) = (rb.W, rb.B);

    let X_HS = -(W - B) * theta.sin();
    let Y_HS = (W - B) * theta.cos() * phi.sin();
    let Z_HS = (W - B) * theta.cos() * phi.cos();
    let K_HS =
        -(yg * W - yb * B) * theta.cos() * phi.cos() - (zg * W - zb * B) * theta.cos() * phi.sin();
    let M_HS = -(zg * W - zb * B) * theta.sin() - (xg * W - xb * B) * theta.cos() * phi.cos();
    let N_HS = -(xg * W - xb * B) * theta.cos() * phi.sin() - (yg * W - yb * B) * theta.sin();

    let n = rpm_to_rps(cmd.n);
    let X_prop = pp.a1 * n * n + pp.a2 * n + pp.a3;
    let K_prop = pp.b1 * n * n + pp.b2 * n + pp.b3;
    let ds = cmd.delta_s1 + cmd.delta_s2;
    let dr = cmd.delta_r1 + cmd.delta_r2;
    let d_roll = (cmd.delta_s1 - cmd.delta_s2) + (cmd.delta_r1 - cmd.delta_r2);

    let X =
        X_HS + h.X_uu * u * u.abs() + lin.X_u * u + h.Z_wdot * w * q - h.Y_vdot * v * r + X_prop;
    let Y = Y_HS
        + h.Y_vv * v * v.abs()
        + h.Y_rr * r * r.abs()
        + h.Y_uv * u * v
        + h.Y_ur * u * r
        + lin.Y_v * v
        + lin.Y_p * p
        + lin.Y_r * r
        - h.Z_wdot * w * p
        + h.X_udot * u * r
        + h.Y_uu_dr * u * u * dr;
    let Z = Z_HS
        + h.Z_ww * w * w.abs()
        + h.Z_qq * q * q.abs()
        + h.Z_uw * u * w
        + h.Z_uq * u * q
        + lin.Z_w * w
        + lin.Z_q * q
        + h.Y_vdot * v * p
        - h.X_udot * u * q
        + h.Z_uu_ds * u * u * ds;
    let K = K_HS
        + h.K_pp * p * p.abs()
        + h.K_up * u * p
        + lin.K_v * v
        + lin.K_p * p
        + lin.K_r * r
        + (h.Z_wdot - h.Y_vdot) * v * w
        + (h.N_rdot - h.M_qdot) * q * r
        + K_prop
        + h.K_roll * d_roll;
    let M = M_HS
        + h.M_ww * w * w.abs()
        + h.M_qq * q * q.abs()
        + h.M_uw * u * w
        + h.M_uq * u * q
        + lin.M_w * w
        + lin.M_q * q
        + (h.X_udot - h.Z_wdot) * u * w
        + (h.K_pdot - h.N_rdot) * p * r
        + h.M_uu_ds * u * u * ds;
    let N = N_HS
        + h.N_vv * v * v.abs()
        + h.N_rr * r * r.abs()
        + h.N_uv * u * v
        + h.N_ur * u * r
        + lin.N_v * v
        + lin.N_p * p
        + lin.N_r * r
        + (h.Y_vdot - h.X_udot) * u * v
        + (h.M_qdot - h.K_pdot) * p * q
        + h.N_uu_dr * u * u * dr;

    // Rigid-body terms that do not multiply an acceleration, moved to the right-hand side.
    let rb_X = m * (-v * r + w * q - xg * (q * q + r * r) + yg * p * q + zg * p * r);
    let rb_Y = m * (-w * p + u * r - yg * (p * p + r * r) + zg * q * r + xg * p * q);
    let rb_Z = m * (-u * q + v * p - zg * (p * p + q * q) + xg * r * p + yg * r * q);
    let rb_K = (rb.I_zz - rb.I_yy) * q * r + m * (yg * (-u * q + v * p) - zg * (-w * p + u * r));
    let rb_M = (rb.I_xx - rb.I_zz) * r * p + m * (zg * (-v * r + w * q) - xg * (-u * q + v * p));
    let rb_N = (rb.I_yy - rb.I_xx) * p * q + m * (xg * (-w * p + u * r) - yg * (-v * r + w * q));

    let rhs = Vector6::new(X - rb_X, Y - rb_Y, Z - rb_Z, K - rb_K, M - rb_M, N - rb_N);

    #[rustfmt::skip]
    let inertia = Matrix6::from_row_slice(&[
        m - h.X_udot, 0.0, 0.0, 0.0, m * zg, -m * yg,
        0.0, m - h.Y_vdot, 0.0, -m * zg, 0.0, m * xg - h.Y_rdot,
        0.0, 0.0, m - h.Z_wdot, m * yg, -m * xg - h.Z_qdot, 0.0,
        0.0, -m * zg, m * yg, rb.I_xx - h.K_pdot, 0.0, 0.0,
        m * zg, 0.0, -m * xg - h.M_wdot, 0.0, rb.I_yy - h.M_qdot, 0.0,
        -m * yg, m * xg - h.N_vdot, 0.0, 0.0, 0.0, rb.I_zz - h.N_rdot,
    ]);
    let acc = inertia.lu().solve(&rhs)?;
    Some([acc[0], acc[1], acc[2], acc[3], acc[4], acc[5]])
}
