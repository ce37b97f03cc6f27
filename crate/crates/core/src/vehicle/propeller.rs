#![allow(non_snake_case)]

use super::params::PropellerParams;
use crate::error::ModelError;

/// Polynomial thrust and torque at shaft speed `n` (RPS). Returns (X_prop, K_prop).
pub fn propeller_thrust_torque(n: f64, pp: &PropellerParams) -> Result<(f64, f64), ModelError> {
    if !n.is_finite() {
        return Err(ModelError::NonFinite("propeller speed"));
    }
    if n < 0.0 {
        return Err(ModelError::Domain {
            quantity: "n",
            value: n,
            domain: "[0, n_max]".into(),
        });
    }
    Ok((
        pp.a1 * n * n + pp.a2 * n + pp.a3,
        pp.b1 * n * n + pp.b2 * n + pp.b3,
    ))
}

/// Shaft and inflow accelerations (ṅ, u̇_p) of the two-state propeller model.
pub fn propeller_two_state_derivatives(
    Q: f64,
    n: f64,
    u_p: f64,
    u: f64,
    X_uu: f64,
    pp: &PropellerParams,
) -> Result<(f64, f64), ModelError> {
    if pp.J_m <= 0.0 || pp.m_f <= 0.0 {
        return Err(ModelError::InvalidParams(
            "propeller J_m and m_f must be positive".into(),
        ));
    }
    let (d_f0, d_f) = pp.inflow_damping(X_uu);
    let n_dot = (Q - pp.K_n * n - pp.Q_nn * n * n.abs()) / pp.J_m;
    let up_dot =
        (pp.T_nn * n * n.abs() - d_f0 * u_p - d_f * u_p.abs() * (u_p - (1.0 - pp.w_p) * u))
            / pp.m_f;
    Ok((n_dot, up_dot))
}

/// Motor torque applied by the shaft speed loop: steady-state feedforward for the
/// commanded speed plus proportional correction.
pub fn motor_torque(n_cmd: f64, n: f64, pp: &PropellerParams) -> f64 {
    pp.K_n * n_cmd + pp.Q_nn * n_cmd * n_cmd.abs() + pp.K_motor * (n_cmd - n)
}

/// Thrust delivered to the hull by the two-state model, N.
pub fn two_state_thrust(n: f64, pp: &PropellerParams) -> f64 {
    (1.0 - pp.tau_p) * pp.T_nn * n * n.abs()
}

/// Reaction torque on the hull from the two-state model, N·m.
pub fn two_state_torque(n: f64, pp: &PropellerParams) -> f64 {
    -pp.Q_nn * n * n.abs()
}
