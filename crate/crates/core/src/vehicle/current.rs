#![allow(non_snake_case)]

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ModelError};

/// Ocean current magnitude state, direction and first-order dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OceanCurrent {
    /// Speed, m/s.
    pub U_c: f64,
    /// Angle of attack, rad.
    pub alpha_c: f64,
    /// Side-slip angle, rad.
    pub beta_c: f64,
    /// Decay rate, 1/s.
    pub zeta: f64,
    /// Mean input of the speed dynamics, m/s².
    pub mu: f64,
    /// Standard deviation of the Gaussian input, m/s².
    pub noise_sigma: f64,
}

#[allow(non_snake_case)]
impl OceanCurrent {
    pub fn still() -> Self {
        OceanCurrent {
            U_c: 0.0,
            alpha_c: 0.0,
            beta_c: 0.0,
            zeta: 0.0,
            mu: 0.0,
            noise_sigma: 0.0,
        }
    }

    pub fn constant(U_c: f64, alpha_c: f64, beta_c: f64) -> Self {
        OceanCurrent {
            U_c,
            alpha_c,
            beta_c,
            ..Self::still()
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        ensure_finite(
            &[
                self.U_c,
                self.alpha_c,
                self.beta_c,
                self.zeta,
                self.mu,
                self.noise_sigma,
            ],
            "ocean current",
        )?;
        if self.zeta < 0.0 {
            return Err(ModelError::Domain {
                quantity: "zeta",
                value: self.zeta,
                domain: ">= 0".into(),
            });
        }
        if self.noise_sigma < 0.0 {
            return Err(ModelError::Domain {
                quantity: "noise_sigma",
                value: self.noise_sigma,
                domain: ">= 0".into(),
            });
        }
        Ok(())
    }

    /// dU_c/dt for input `mu + noise`.
    pub fn speed_rate(&self, U_c: f64, noise_sample: f64) -> f64 {
        self.mu + noise_sample - self.zeta * U_c
    }
}

/// Body-frame current components (u_c, v_c, w_c).
pub fn ocean_current_body_velocity(oc: &OceanCurrent) -> [f64; 3] {
    let (sa, ca) = oc.alpha_c.sin_cos();
    let (sb, cb) = oc.beta_c.sin_cos();
    [oc.U_c * ca * cb, oc.U_c * sb, oc.U_c * sa * cb]
}

/// Advances the current speed one RK4 step with `mu + noise_sample` held over the step.
/// The speed is clamped to be nonnegative.
pub fn ocean_current_step(
    oc: &OceanCurrent,
    dt: f64,
    noise_sample: f64,
) -> Result<OceanCurrent, ModelError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(ModelError::Domain {
            quantity: "dt",
            value: dt,
            domain: "> 0".into(),
        });
    }
    let f = |x: f64| oc.speed_rate(x, noise_sample);
    let x = oc.U_c;
    let k1 = f(x);
    let k2 = f(x + 0.5 * dt * k1);
    let k3 = f(x + 0.5 * dt * k2);
    let k4 = f(x + dt * k3);
    let next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if !next.is_finite() {
        return Err(ModelError::NonFinite("current speed"));
    }
    Ok(OceanCurrent {
        U_c: next.max(0.0),
        ..*oc
    })
}
