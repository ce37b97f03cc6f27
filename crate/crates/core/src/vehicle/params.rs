//! Vehicle constants as loaded from the vehicle config file.

#![allow(non_snake_case)]

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::units::{self, GRAVITY};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RigidBodyFile")]
pub struct RigidBodyParams {
    pub m: f64,
    pub W: f64,
    pub B: f64,
    pub rho: f64,
    pub x_cg: f64,
    pub y_cg: f64,
    pub z_cg: f64,
    pub x_cb: f64,
    pub y_cb: f64,
    pub z_cb: f64,
    pub I_xx: f64,
    pub I_yy: f64,
    pub I_zz: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RigidBodyFile {
    m: f64,
    #[serde(default)]
    W: Option<f64>,
    B: f64,
    rho: f64,
    x_cg: f64,
    y_cg: f64,
    z_cg: f64,
    #[serde(default)]
    x_cb: f64,
    #[serde(default)]
    y_cb: f64,
    #[serde(default)]
    z_cb: f64,
    I_xx: f64,
    I_yy: f64,
    I_zz: f64,
}

impl From<RigidBodyFile> for RigidBodyParams {
    fn from(f: RigidBodyFile) -> Self {
        RigidBodyParams {
            m: f.m,
            W: f.W.unwrap_or(f.m * GRAVITY),
            B: f.B,
            rho: f.rho,
            x_cg: f.x_cg,
            y_cg: f.y_cg,
            z_cg: f.z_cg,
            x_cb: f.x_cb,
            y_cb: f.y_cb,
            z_cb: f.z_cb,
            I_xx: f.I_xx,
            I_yy: f.I_yy,
            I_zz: f.I_zz,
        }
    }
}

/// Myring hull profile parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HullGeometry {
    pub a: f64,
    pub a_offset: f64,
    pub b: f64,
    pub c: f64,
    pub c_offset: f64,
    pub n: f64,
    pub theta: f64,
    pub d: f64,
    pub l_f: f64,
    pub l: f64,
}

/// Linear damping derivatives. None are tabulated for the research vehicle, so all
/// default to zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinearDamping {
    pub X_u: f64,
    pub Y_v: f64,
    pub Y_p: f64,
    pub Y_r: f64,
    pub Z_w: f64,
    pub Z_q: f64,
    pub K_v: f64,
    pub K_p: f64,
    pub K_r: f64,
    pub M_w: f64,
    pub M_q: f64,
    pub N_v: f64,
    pub N_p: f64,
    pub N_r: f64,
}

/// Hydrodynamic coefficient set. `X_uu` stands for X_u|u|, `Z_uu_ds` for Z_uuδs and so on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydroCoefficients {
    pub X_udot: f64,
    pub Y_vdot: f64,
    pub Y_rdot: f64,
    pub Z_wdot: f64,
    pub Z_qdot: f64,
    pub K_pdot: f64,
    pub M_wdot: f64,
    pub M_qdot: f64,
    pub N_vdot: f64,
    pub N_rdot: f64,

    pub X_uu: f64,
    pub Y_vv: f64,
    pub Y_rr: f64,
    pub Z_ww: f64,
    pub Z_qq: f64,
    pub K_pp: f64,
    pub M_ww: f64,
    pub M_qq: f64,
    pub N_vv: f64,
    pub N_rr: f64,

    pub X_wq: f64,
    pub X_qq: f64,
    pub X_vr: f64,
    pub X_rr: f64,
    pub Y_uv: f64,
    pub Y_ur: f64,
    pub Y_wp: f64,
    pub Y_pq: f64,
    pub Z_uw: f64,
    pub Z_uq: f64,
    pub Z_vp: f64,
    pub Z_rp: f64,
    pub M_uw: f64,
    pub M_uq: f64,
    pub M_vp: f64,
    pub M_rp: f64,
    pub N_uv: f64,
    pub N_ur: f64,
    pub N_wp: f64,
    pub N_pq: f64,
    #[serde(default)]
    pub K_up: f64,

    pub Y_uu_dr: f64,
    pub Z_uu_ds: f64,
    pub M_uu_ds: f64,
    pub N_uu_dr: f64,
    pub K_roll: f64,

    #[serde(default)]
    pub linear: LinearDamping,
}

macro_rules! named_coefficients {
    ($($name:ident),* $(,)?) => {
        impl HydroCoefficients {
            /// Every coefficient name accepted by [`HydroCoefficients::coefficient_mut`].
            pub const NAMES: &'static [&'static str] = &[$(stringify!($name)),*];

            pub fn coefficient_mut(&mut self, name: &str) -> Option<&mut f64> {
                match name {
                    $(stringify!($name) => Some(&mut self.$name),)*
                    _ => None,
                }
            }

            pub fn coefficient(&self, name: &str) -> Option<f64> {
                match name {
                    $(stringify!($name) => Some(self.$name),)*
                    _ => None,
                }
            }
        }
    };
}

named_coefficients!(
    X_udot, Y_vdot, Y_rdot, Z_wdot, Z_qdot, K_pdot, M_wdot, M_qdot, N_vdot, N_rdot, X_uu, Y_vv,
    Y_rr, Z_ww, Z_qq, K_pp, M_ww, M_qq, N_vv, N_rr, X_wq, X_qq, X_vr, X_rr, Y_uv, Y_ur, Y_wp, Y_pq,
    Z_uw, Z_uq, Z_vp, Z_rp, M_uw, M_uq, M_vp, M_rp, N_uv, N_ur, N_wp, N_pq, K_up, Y_uu_dr, Z_uu_ds,
    M_uu_ds, N_uu_dr, K_roll,
);

/// Propeller polynomial fit (RPS argument) and two-state shaft/inflow constants.
///
/// `Q_nn` is the hydrodynamic load coefficient on the shaft (positive); the vehicle feels
/// the reaction `-Q_nn n|n|` about x when the two-state model is active.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropellerParams {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub J_m: f64,
    pub m_f: f64,
    pub T_nn: f64,
    pub Q_nn: f64,
    pub K_n: f64,
    pub K_motor: f64,
    pub tau_p: f64,
    pub a_p: f64,
    pub w_p: f64,
}

impl Default for PropellerParams {
    /// Quadratic fit anchored at 1413 RPM for 2.0577 m/s: thrust balances the axial drag
    /// and torque balances the roll trim of -2.5941 deg.
    fn default() -> Self {
        PropellerParams {
            a1: 0.012_367_938_207_635_2,
            a2: 0.0,
            a3: 0.0,
            b1: -0.000_468_817_644_479_378_13,
            b2: 0.0,
            b3: 0.0,
            J_m: 0.05,
            m_f: 1.0,
            T_nn: 0.013_742_153_564_039_11,
            Q_nn: 0.000_468_817_644_479_378_13,
            K_n: 0.002,
            K_motor: 0.05,
            tau_p: 0.1,
            a_p: 0.0684,
            w_p: 0.4,
        }
    }
}

impl PropellerParams {
    /// Inflow damping coefficients (d_f0, d_f).
    pub fn inflow_damping(&self, X_uu: f64) -> (f64, f64) {
        let k = (1.0 - self.tau_p) * (1.0 + self.a_p);
        let d_f0 = -2.0 * X_uu / (k * (1.0 - self.w_p));
        let d_f = -X_uu / (k * (1.0 - self.w_p).powi(2));
        (d_f0, d_f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActuatorLimits {
    /// Per-fin deflection limit, rad (degrees in files).
    #[serde(rename = "fin_max_deg", with = "units::degrees")]
    pub fin_max: f64,
    /// Propeller speed limit, RPS (RPM in files).
    #[serde(rename = "n_max_rpm", with = "units::rpm")]
    pub n_max: f64,
    /// Linear speed above which a simulation is declared diverged, m/s.
    #[serde(rename = "speed_max_mps")]
    pub speed_max: f64,
}

impl Default for ActuatorLimits {
    fn default() -> Self {
        ActuatorLimits {
            fin_max: 0.35,
            n_max: units::rpm_to_rps(2500.0),
            speed_max: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleParams {
    pub rigid_body: RigidBodyParams,
    pub hull: HullGeometry,
    pub hydro: HydroCoefficients,
    #[serde(default)]
    pub propeller: PropellerParams,
    #[serde(default)]
    pub limits: ActuatorLimits,
}

impl VehicleParams {
    /// The research vehicle with the tabulated constants and a roll-fin effectiveness of
    /// 2.75 N·m/rad. Identical to `configs/vehicle_default.toml`.
    pub fn research_vehicle() -> Self {
        let m = 30.5;
        VehicleParams {
            rigid_body: RigidBodyParams {
                m,
                W: m * GRAVITY,
                B: 306.0,
                rho: 1030.0,
                x_cg: 0.0,
                y_cg: 0.0,
                z_cg: 0.0192,
                x_cb: 0.0,
                y_cb: 0.0,
                z_cb: 0.0,
                I_xx: 0.177,
                I_yy: 3.45,
                I_zz: 3.45,
            },
            hull: HullGeometry {
                a: 0.191,
                a_offset: 0.0165,
                b: 0.654,
                c: 0.541,
                c_offset: 0.0368,
                n: 2.0,
                theta: 0.436,
                d: 0.191,
                l_f: 0.828,
                l: 1.33,
            },
            hydro: HydroCoefficients {
                X_udot: -0.93,
                Y_vdot: -35.5,
                Y_rdot: 1.93,
                Z_wdot: -35.5,
                Z_qdot: -1.93,
                K_pdot: -0.014,
                M_wdot: -1.93,
                M_qdot: -4.88,
                N_vdot: 1.93,
                N_rdot: -4.88,
                X_uu: -1.62,
                Y_vv: -131.0,
                Y_rr: 0.632,
                Z_ww: -131.0,
                Z_qq: -0.632,
                K_pp: -0.001,
                M_ww: 3.18,
                M_qq: -9.4,
                N_vv: -3.18,
                N_rr: -9.4,
                X_wq: -35.5,
                X_qq: 1.93,
                X_vr: 35.5,
                X_rr: -1.93,
                Y_uv: -28.6,
                Y_ur: 5.22,
                Y_wp: 35.5,
                Y_pq: 1.93,
                Z_uw: -28.6,
                Z_uq: -5.22,
                Z_vp: -35.5,
                Z_rp: 1.93,
                M_uw: 24.0,
                M_uq: -2.0,
                M_vp: -1.93,
                M_rp: 4.86,
                N_uv: -24.0,
                N_ur: -2.0,
                N_wp: -1.93,
                N_pq: -4.86,
                K_up: 0.0,
                Y_uu_dr: 9.64,
                Z_uu_ds: -9.64,
                M_uu_ds: -6.15,
                N_uu_dr: -6.15,
                K_roll: 2.75,
                linear: LinearDamping::default(),
            },
            propeller: PropellerParams::default(),
            limits: ActuatorLimits::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let p: VehicleParams = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: "<vehicle>".into(),
            message: e.to_string(),
        })?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let rb = &self.rigid_body;
        positive("rigid_body.m", rb.m)?;
        positive("rigid_body.W", rb.W)?;
        positive("rigid_body.B", rb.B)?;
        positive("rigid_body.rho", rb.rho)?;
        positive("rigid_body.I_xx", rb.I_xx)?;
        positive("rigid_body.I_yy", rb.I_yy)?;
        positive("rigid_body.I_zz", rb.I_zz)?;
        for (k, v) in [
            ("rigid_body.x_cg", rb.x_cg),
            ("rigid_body.y_cg", rb.y_cg),
            ("rigid_body.z_cg", rb.z_cg),
            ("rigid_body.x_cb", rb.x_cb),
            ("rigid_body.y_cb", rb.y_cb),
            ("rigid_body.z_cb", rb.z_cb),
        ] {
            finite(k, v)?;
        }

        let h = &self.hull;
        for (k, v) in [
            ("hull.a", h.a),
            ("hull.b", h.b),
            ("hull.c", h.c),
            ("hull.d", h.d),
            ("hull.n", h.n),
            ("hull.l", h.l),
            ("hull.l_f", h.l_f),
        ] {
            positive(k, v)?;
        }
        finite("hull.a_offset", h.a_offset)?;
        finite("hull.c_offset", h.c_offset)?;
        finite("hull.theta", h.theta)?;
        if (h.l_f - (h.a + h.b - h.a_offset)).abs() > 1e-3 {
            return Err(ConfigError::invalid(
                "hull.l_f",
                format!("must equal a + b - a_offset = {}", h.a + h.b - h.a_offset),
            ));
        }
        if h.l <= h.l_f {
            return Err(ConfigError::invalid("hull.l", "must exceed l_f"));
        }

        let hc = &self.hydro;
        for name in HydroCoefficients::NAMES {
            finite(name, hc.coefficient(name).unwrap_or(f64::NAN))?;
        }
        for (k, v) in [
            ("hydro.X_udot", hc.X_udot),
            ("hydro.Y_vdot", hc.Y_vdot),
            ("hydro.Z_wdot", hc.Z_wdot),
            ("hydro.K_pdot", hc.K_pdot),
            ("hydro.M_qdot", hc.M_qdot),
            ("hydro.N_rdot", hc.N_rdot),
        ] {
            if v > 0.0 {
                return Err(ConfigError::invalid(
                    k,
                    "added-mass diagonal terms must be <= 0",
                ));
            }
        }

        let pp = &self.propeller;
        positive("propeller.J_m", pp.J_m)?;
        positive("propeller.m_f", pp.m_f)?;
        for (k, v) in [
            ("propeller.a1", pp.a1),
            ("propeller.a2", pp.a2),
            ("propeller.a3", pp.a3),
            ("propeller.b1", pp.b1),
            ("propeller.b2", pp.b2),
            ("propeller.b3", pp.b3),
            ("propeller.T_nn", pp.T_nn),
            ("propeller.Q_nn", pp.Q_nn),
            ("propeller.K_n", pp.K_n),
            ("propeller.K_motor", pp.K_motor),
        ] {
            finite(k, v)?;
        }
        if !(0.0..1.0).contains(&pp.tau_p) || !(0.0..1.0).contains(&pp.w_p) || pp.a_p <= -1.0 {
            return Err(ConfigError::invalid(
                "propeller",
                "need 0 <= tau_p < 1, 0 <= w_p < 1 and a_p > -1",
            ));
        }

        let lim = &self.limits;
        positive("limits.fin_max_deg", lim.fin_max)?;
        positive("limits.n_max_rpm", lim.n_max)?;
        positive("limits.speed_max_mps", lim.speed_max)?;
        // Thrust slope 2 a1 n + a2 is affine in n, so checking both ends covers [0, n_max].
        if pp.a2 < 0.0 || 2.0 * pp.a1 * lim.n_max + pp.a2 < 0.0 {
            return Err(ConfigError::invalid(
                "propeller.a1",
                "thrust must be nondecreasing over [0, n_max]",
            ));
        }
        Ok(())
    }
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::invalid(
            key,
            format!("must be positive, got {v}"),
        ))
    }
}

fn finite(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::invalid(key, "must be finite"))
    }
}
