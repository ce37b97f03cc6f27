#![allow(non_snake_case)]

use super::params::{HydroCoefficients, PropellerParams};
use super::propeller::propeller_thrust_torque;
use super::{ActuatorCommand, Wrench};
use crate::error::{ensure_finite, ModelError};
use crate::units::rpm_to_rps;

/// Differential fin deflection that produces roll torque.
pub fn roll_deflection(cmd: &ActuatorCommand) -> f64 {
    (cmd.delta_s1 - cmd.delta_s2) + (cmd.delta_r1 - cmd.delta_r2)
}

/// Fin forces and moments at surge `u`, without any propeller contribution.
pub fn fin_wrench(cmd: &ActuatorCommand, u: f64, hc: &HydroCoefficients) -> Wrench {
    let uu = u * u;
    let ds = cmd.delta_s1 + cmd.delta_s2;
    let dr = cmd.delta_r1 + cmd.delta_r2;
    Wrench {
        X: 0.0,
        Y: hc.Y_uu_dr * uu * dr,
        Z: hc.Z_uu_ds * uu * ds,
        K: hc.K_roll * roll_deflection(cmd),
        M: hc.M_uu_ds * uu * ds,
        N: hc.N_uu_dr * uu * dr,
    }
}

/// Control wrench of the propeller polynomial and the four fins.
pub fn actuator_wrench(
    cmd: &ActuatorCommand,
    u: f64,
    pp: &PropellerParams,
    hc: &HydroCoefficients,
) -> Result<Wrench, ModelError> {
    ensure_finite(&cmd.to_array(), "actuator command")?;
    ensure_finite(&[u], "surge")?;
    let (X_prop, K_prop) = propeller_thrust_torque(rpm_to_rps(cmd.n), pp)?;
    let mut w = fin_wrench(cmd, u, hc);
    w.X += X_prop;
    w.K += K_prop;
    Ok(w)
}
