use nalgebra::{Matrix3, Vector3};

use super::{BodyVelocity, EarthPose};
use crate::error::{ensure_finite, ModelError};

/// Distance from ±π/2 pitch at which the Euler rate transform is rejected, rad.
pub const PITCH_GUARD: f64 = 1e-3;

/// Body-to-earth rotation for linear velocities.
pub fn linear_transform(phi: f64, theta: f64, psi: f64) -> Matrix3<f64> {
    let (sf, cf) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = psi.sin_cos();
    Matrix3::new(
        cp * ct,
        -sp * cf + cp * st * sf,
        sp * sf + cp * st * cf,
        sp * ct,
        cp * cf + sp * st * sf,
        -cp * sf + sp * st * cf,
        -st,
        ct * sf,
        ct * cf,
    )
}

/// Body angular velocity to Euler angle rates.
pub fn angular_transform(phi: f64, theta: f64) -> Result<Matrix3<f64>, ModelError> {
    check_pitch(theta)?;
    let (sf, cf) = phi.sin_cos();
    let ct = theta.cos();
    let tt = theta.tan();
    Ok(Matrix3::new(
        1.0,
        sf * tt,
        cf * tt,
        0.0,
        cf,
        -sf,
        0.0,
        sf / ct,
        cf / ct,
    ))
}

pub fn check_pitch(theta: f64) -> Result<(), ModelError> {
    if !theta.is_finite() {
        return Err(ModelError::NonFinite("theta"));
    }
    if theta.abs() >= std::f64::consts::FRAC_PI_2 - PITCH_GUARD {
        return Err(ModelError::Singularity {
            theta,
            guard: PITCH_GUARD,
        });
    }
    Ok(())
}

/// Time derivative of the earth-fixed pose.
pub fn euler_rates(pose: &EarthPose, vel: &BodyVelocity) -> Result<EarthPose, ModelError> {
    ensure_finite(&pose.to_array(), "pose")?;
    ensure_finite(&vel.to_array(), "velocity")?;
    let a = angular_transform(pose.phi, pose.theta)?;
    let t = linear_transform(pose.phi, pose.theta, pose.psi);
    let pos = t * Vector3::new(vel.u, vel.v, vel.w);
    let ang = a * Vector3::new(vel.p, vel.q, vel.r);
    Ok(EarthPose {
        x: pos.x,
        y: pos.y,
        z: pos.z,
        phi: ang.x,
        theta: ang.y,
        psi: ang.z,
    })
}
