//! Analytic depth-pitch, yaw and speed models and a finite-difference Jacobian of the
//! nonlinear model for cross-checking them.

#![allow(non_snake_case)]

use nalgebra::{DMatrix, Matrix6, SMatrix, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::units::rpm_to_rps;
use crate::vehicle::current::OceanCurrent;
use crate::vehicle::kinematics::euler_rates;
use crate::vehicle::params::VehicleParams;
use crate::vehicle::{ActuatorCommand, BodyVelocity, EarthPose, VehicleModel, VehicleState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpaceModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub state_labels: Vec<String>,
    pub input_labels: Vec<String>,
}

impl StateSpaceModel {
    fn new(a: DMatrix<f64>, b: DMatrix<f64>, states: &[&str], inputs: &[&str]) -> Self {
        StateSpaceModel {
            a,
            b,
            state_labels: states.iter().map(|s| s.to_string()).collect(),
            input_labels: inputs.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn eigenvalues(&self) -> Vec<(f64, f64)> {
        self.a
            .complex_eigenvalues()
            .iter()
            .map(|c| (c.re, c.im))
            .collect()
    }
}

/// Rational transfer function with coefficients in descending powers of s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferFunction {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

impl TransferFunction {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Self {
        TransferFunction {
            num: trim_leading(num),
            den: trim_leading(den),
        }
    }

    pub fn series(&self, other: &TransferFunction) -> TransferFunction {
        TransferFunction::new(
            poly_mul(&self.num, &other.num),
            poly_mul(&self.den, &other.den),
        )
    }

    /// Same function with a monic denominator.
    pub fn normalized(&self) -> TransferFunction {
        let lead = self.den[0];
        TransferFunction {
            num: self.num.iter().map(|c| c / lead).collect(),
            den: self.den.iter().map(|c| c / lead).collect(),
        }
    }

    pub fn is_proper(&self) -> bool {
        self.num.len() <= self.den.len()
    }

    /// Number of poles at the origin.
    pub fn integrators(&self) -> usize {
        self.den.iter().rev().take_while(|c| **c == 0.0).count()
    }

    /// G(0) for functions without integrators.
    pub fn dc_gain(&self) -> f64 {
        self.num.last().copied().unwrap_or(0.0) / self.den.last().copied().unwrap_or(f64::NAN)
    }

    pub fn poles(&self) -> Vec<(f64, f64)> {
        poly_roots(&self.den)
    }
}

fn trim_leading(mut p: Vec<f64>) -> Vec<f64> {
    while p.len() > 1 && p[0] == 0.0 {
        p.remove(0);
    }
    if p.is_empty() {
        p.push(0.0);
    }
    p
}

pub fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Roots of a polynomial through its companion matrix.
pub fn poly_roots(p: &[f64]) -> Vec<(f64, f64)> {
    let p = trim_leading(p.to_vec());
    let deg = p.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let mut c = DMatrix::zeros(deg, deg);
    for j in 0..deg {
        c[(0, j)] = -p[j + 1] / p[0];
    }
    for i in 1..deg {
        c[(i, i - 1)] = 1.0;
    }
    c.complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect()
}

/// Pitch inertia including added inertia, kg·m².
pub fn pitch_inertia(params: &VehicleParams) -> f64 {
    params.rigid_body.I_yy - params.hydro.M_qdot
}

/// Yaw inertia including added inertia, kg·m².
pub fn yaw_inertia(params: &VehicleParams) -> f64 {
    params.rigid_body.I_zz - params.hydro.N_rdot
}

/// Depth-pitch model with states (q, θ, z) and input δs1 + δs2.
pub fn depth_pitch_model(U: f64, params: &VehicleParams) -> StateSpaceModel {
    let rb = &params.rigid_body;
    let I = pitch_inertia(params);
    let M_q = params.hydro.M_uq * U;
    let M_theta = -rb.z_cg * rb.W;
    let M_ds = params.hydro.M_uu_ds * U * U;
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(3, 3, &[
        (M_q - rb.m * rb.x_cg * U) / I, M_theta / I, 0.0,
        1.0, 0.0, 0.0,
        0.0, -U, 0.0,
    ]);
    let b = DMatrix::from_row_slice(3, 1, &[M_ds / I, 0.0, 0.0]);
    StateSpaceModel::new(a, b, &["q", "theta", "z"], &["delta_s1+delta_s2"])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthTransferFunctions {
    /// z / (δs1 + δs2).
    pub g_z: TransferFunction,
    /// θ / (δs1 + δs2).
    pub g_theta: TransferFunction,
    /// z / θ.
    pub g_z_outer: TransferFunction,
}

pub fn depth_transfer_functions(U: f64, params: &VehicleParams) -> DepthTransferFunctions {
    let ss = depth_pitch_model(U, params);
    let g_theta =
        TransferFunction::new(vec![ss.b[(0, 0)]], vec![1.0, -ss.a[(0, 0)], -ss.a[(0, 1)]]);
    let g_z_outer = TransferFunction::new(vec![-U], vec![1.0, 0.0]);
    DepthTransferFunctions {
        g_z: g_theta.series(&g_z_outer),
        g_theta,
        g_z_outer,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YawModel {
    pub state_space: StateSpaceModel,
    /// ψ / (δr1 + δr2).
    pub g_psi: TransferFunction,
    /// y / (δr1 + δr2).
    pub g_y: TransferFunction,
}

/// Yaw model with states (r, ψ) and input δr1 + δr2.
pub fn yaw_model(U: f64, params: &VehicleParams) -> YawModel {
    let rb = &params.rigid_body;
    let I = yaw_inertia(params);
    let a00 = (params.hydro.N_ur - rb.m * rb.x_cg) * U / I;
    let b0 = params.hydro.N_uu_dr * U * U / I;
    let a = DMatrix::from_row_slice(2, 2, &[a00, 0.0, 1.0, 0.0]);
    let b = DMatrix::from_row_slice(2, 1, &[b0, 0.0]);
    let g_psi = TransferFunction::new(vec![b0], vec![1.0, -a00, 0.0]);
    let g_y = g_psi.series(&TransferFunction::new(vec![U], vec![1.0, 0.0]));
    YawModel {
        state_space: StateSpaceModel::new(a, b, &["r", "psi"], &["delta_r1+delta_r2"]),
        g_psi,
        g_y,
    }
}

/// Surge response u/n (n in RPS) linearised at speed `U` and shaft speed `n_trim_rpm`.
/// Both the drag and the thrust are expanded to first order about the operating point.
pub fn speed_model(U: f64, n_trim_rpm: f64, params: &VehicleParams) -> TransferFunction {
    let h = &params.hydro;
    let pp = &params.propeller;
    let m_n = 2.0 * rpm_to_rps(n_trim_rpm);
    let X_u = 2.0 * h.X_uu * U;
    TransferFunction::new(
        vec![m_n * (1.0 - pp.tau_p) * pp.T_nn],
        vec![params.rigid_body.m - h.X_udot, -X_u],
    )
}

/// Printed reference constants for the 4-knot models, kept for comparison only.
pub mod reference {
    /// Depth: 4.154 / (s (s² + 0.824 s + 0.6927)).
    pub const DEPTH_GAIN: f64 = 4.154;
    pub const DEPTH_DEN: [f64; 3] = [1.0, 0.824, 0.6927];
    /// Yaw: -4.223 / (s (s + 0.579)).
    pub const YAW_GAIN: f64 = -4.223;
    pub const YAW_POLE: f64 = -0.579;
    /// Speed: 0.038 / (31.41 s + 1.6).
    pub const SPEED_NUM: f64 = 0.038;
    pub const SPEED_DEN: [f64; 2] = [31.41, 1.6];
}

pub const JACOBIAN_STATE_LABELS: [&str; 12] = [
    "u", "v", "w", "p", "q", "r", "x", "y", "z", "phi", "theta", "psi",
];
pub const JACOBIAN_INPUT_LABELS: [&str; 5] =
    ["n_rps", "delta_s1", "delta_s2", "delta_r1", "delta_r2"];

#[derive(Debug, Clone, PartialEq)]
pub struct NumericLinearization {
    /// ∂(ν̇, η̇)/∂(ν, η).
    pub a: SMatrix<f64, 12, 12>,
    /// ∂(ν̇, η̇)/∂(n, δs1, δs2, δr1, δr2), n in RPS.
    pub b: SMatrix<f64, 12, 5>,
    /// ∂f/∂(ν, η) of the generalized force before inversion of M.
    pub force_a: SMatrix<f64, 6, 12>,
    /// ∂f/∂ inputs.
    pub force_b: SMatrix<f64, 6, 5>,
    pub mass: Matrix6<f64>,
    /// Largest velocity-derivative magnitude at the operating point.
    pub operating_rate: f64,
    /// Set when the operating point is not an equilibrium (rate above 1e-6).
    pub not_trim: bool,
}

fn split(x: &[f64; 12]) -> (BodyVelocity, EarthPose) {
    (
        BodyVelocity::from_array([x[0], x[1], x[2], x[3], x[4], x[5]]),
        EarthPose::from_array([x[6], x[7], x[8], x[9], x[10], x[11]]),
    )
}

fn eval(
    model: &VehicleModel,
    base: &VehicleState,
    x: &[f64; 12],
    u: &[f64; 5],
) -> Result<(Vector6<f64>, [f64; 12]), ModelError> {
    let (velocity, pose) = split(x);
    let state = VehicleState {
        velocity,
        pose,
        shaft: base.shaft,
    };
    let cmd = ActuatorCommand {
        n: crate::units::rps_to_rpm(u[0]),
        delta_s1: u[1],
        delta_s2: u[2],
        delta_r1: u[3],
        delta_r2: u[4],
    };
    let f = model.generalized_force(&state, &cmd, &OceanCurrent::still())?;
    let acc = model.accelerations(&f)?;
    let rates = euler_rates(&pose, &velocity)?;
    let mut out = [0.0; 12];
    out[..6].copy_from_slice(acc.as_slice());
    out[6..].copy_from_slice(&rates.to_array());
    Ok((f, out))
}

/// Central-difference Jacobian of the nonlinear model about (state, cmd) with relative
/// step `rel_step` (floor `rel_step`).
pub fn numeric_jacobian(
    state: &VehicleState,
    cmd: &ActuatorCommand,
    model: &VehicleModel,
    rel_step: f64,
) -> Result<NumericLinearization, ModelError> {
    let mut x0 = [0.0; 12];
    x0[..6].copy_from_slice(&state.velocity.to_array());
    x0[6..].copy_from_slice(&state.pose.to_array());
    let u0 = [
        rpm_to_rps(cmd.n),
        cmd.delta_s1,
        cmd.delta_s2,
        cmd.delta_r1,
        cmd.delta_r2,
    ];
    let (_, rates0) = eval(model, state, &x0, &u0)?;
    let operating_rate = rates0[..6]
        .iter()
        .chain(rates0[9..].iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));

    let mut a = SMatrix::<f64, 12, 12>::zeros();
    let mut force_a = SMatrix::<f64, 6, 12>::zeros();
    for j in 0..12 {
        let h = rel_step * x0[j].abs().max(1.0);
        let (mut xp, mut xm) = (x0, x0);
        xp[j] += h;
        xm[j] -= h;
        let (fp, rp) = eval(model, state, &xp, &u0)?;
        let (fm, rm) = eval(model, state, &xm, &u0)?;
        for i in 0..12 {
            a[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
        }
        force_a.set_column(j, &((fp - fm) / (2.0 * h)));
    }
    let mut b = SMatrix::<f64, 12, 5>::zeros();
    let mut force_b = SMatrix::<f64, 6, 5>::zeros();
    for j in 0..5 {
        let h = rel_step * u0[j].abs().max(1.0);
        let (mut up, mut um) = (u0, u0);
        up[j] += h;
        um[j] -= h;
        let (fp, rp) = eval(model, state, &x0, &up)?;
        let (fm, rm) = eval(model, state, &x0, &um)?;
        for i in 0..12 {
            b[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
        }
        force_b.set_column(j, &((fp - fm) / (2.0 * h)));
    }
    Ok(NumericLinearization {
        a,
        b,
        force_a,
        force_b,
        mass: *model.mass_matrix(),
        operating_rate,
        not_trim: operating_rate > 1e-6,
    })
}

/// Numeric counterparts of the analytic subsystem models.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneJacobians {
    pub depth: StateSpaceModel,
    pub yaw: StateSpaceModel,
    /// (∂u̇/∂u, ∂u̇/∂n).
    pub speed: (f64, f64),
}

const IU: usize = 0;
const IQ: usize = 4;
const IR: usize = 5;
const IZ: usize = 8;
const ITHETA: usize = 10;
const IPSI: usize = 11;

impl NumericLinearization {
    /// Sub-blocks with the unrelated degrees of freedom frozen: each plane's acceleration is
    /// its generalized-force derivative over the diagonal inertia, so couplings through
    /// off-diagonal inertia and through the frozen velocities are excluded.
    pub fn plane_jacobians(&self) -> PlaneJacobians {
        let m = &self.mass;
        let fa = &self.force_a;
        let fb = &self.force_b;
        let a = &self.a;
        let depth_idx = [IQ, ITHETA, IZ];
        let mut ad = DMatrix::zeros(3, 3);
        for (j, &c) in depth_idx.iter().enumerate() {
            ad[(0, j)] = fa[(4, c)] / m[(4, 4)];
            ad[(1, j)] = a[(ITHETA, c)];
            ad[(2, j)] = a[(IZ, c)];
        }
        let bd = DMatrix::from_row_slice(
            3,
            1,
            &[0.5 * (fb[(4, 1)] + fb[(4, 2)]) / m[(4, 4)], 0.0, 0.0],
        );

        let yaw_idx = [IR, IPSI];
        let mut ay = DMatrix::zeros(2, 2);
        for (j, &c) in yaw_idx.iter().enumerate() {
            ay[(0, j)] = fa[(5, c)] / m[(5, 5)];
            ay[(1, j)] = a[(IPSI, c)];
        }
        let by = DMatrix::from_row_slice(2, 1, &[0.5 * (fb[(5, 3)] + fb[(5, 4)]) / m[(5, 5)], 0.0]);

        PlaneJacobians {
            depth: StateSpaceModel::new(ad, bd, &["q", "theta", "z"], &["delta_s1+delta_s2"]),
            yaw: StateSpaceModel::new(ay, by, &["r", "psi"], &["delta_r1+delta_r2"]),
            speed: (fa[(0, IU)] / m[(0, 0)], fb[(0, 0)] / m[(0, 0)]),
        }
    }

    /// The same sub-blocks taken directly from the fully coupled Jacobian.
    pub fn coupled_jacobians(&self) -> PlaneJacobians {
        let a = &self.a;
        let b = &self.b;
        let pick = |rows: &[usize], cols: &[usize]| {
            DMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
        };
        let depth = [IQ, ITHETA, IZ];
        let yaw = [IR, IPSI];
        let bd = DMatrix::from_fn(3, 1, |i, _| 0.5 * (b[(depth[i], 1)] + b[(depth[i], 2)]));
        let by = DMatrix::from_fn(2, 1, |i, _| 0.5 * (b[(yaw[i], 3)] + b[(yaw[i], 4)]));
        PlaneJacobians {
            depth: StateSpaceModel::new(
                pick(&depth, &depth),
                bd,
                &["q", "theta", "z"],
                &["delta_s1+delta_s2"],
            ),
            yaw: StateSpaceModel::new(pick(&yaw, &yaw), by, &["r", "psi"], &["delta_r1+delta_r2"]),
            speed: (a[(IU, IU)], b[(IU, 0)]),
        }
    }
}

/// One analytic-versus-numeric entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianComparison {
    pub subsystem: String,
    pub entry: String,
    pub analytic: f64,
    pub numeric: f64,
    pub within_tolerance: bool,
}

/// Entry agreement: |a - n| <= max(5% of |a|, 0.02).
pub fn entries_agree(analytic: f64, numeric: f64) -> bool {
    (analytic - numeric).abs() <= (0.05 * analytic.abs()).max(0.02)
}

/// Entrywise comparison of the analytic models against numeric plane Jacobians.
pub fn compare_models(
    U: f64,
    n_trim_rpm: f64,
    params: &VehicleParams,
    numeric: &PlaneJacobians,
) -> Vec<JacobianComparison> {
    let mut out = Vec::new();
    let mut push = |sub: &str, entry: String, an: f64, nu: f64| {
        out.push(JacobianComparison {
            subsystem: sub.into(),
            entry,
            analytic: an,
            numeric: nu,
            within_tolerance: entries_agree(an, nu),
        })
    };
    let dp = depth_pitch_model(U, params);
    for (sub, an, nu) in [
        ("depth", &dp, &numeric.depth),
        ("yaw", &yaw_model(U, params).state_space, &numeric.yaw),
    ] {
        for i in 0..an.a.nrows() {
            for j in 0..an.a.ncols() {
                push(
                    sub,
                    format!("A[{},{}]", an.state_labels[i], an.state_labels[j]),
                    an.a[(i, j)],
                    nu.a[(i, j)],
                );
            }
            push(
                sub,
                format!("B[{}]", an.state_labels[i]),
                an.b[(i, 0)],
                nu.b[(i, 0)],
            );
        }
    }
    let g = speed_model(U, n_trim_rpm, params);
    push(
        "speed",
        "pole".into(),
        -g.den[1] / g.den[0],
        numeric.speed.0,
    );
    push(
        "speed",
        "input".into(),
        g.num[0] / g.den[0],
        numeric.speed.1,
    );
    out
}

/// A printed model constant beside the value computed from the parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDiscrepancy {
    pub name: String,
    pub printed: f64,
    pub computed: f64,
    /// (computed − printed)/|printed|.
    pub relative: f64,
}

/// Printed 4-knot constants against the analytic models at `U`.
pub fn reference_discrepancies(
    U: f64,
    n_trim_rpm: f64,
    params: &VehicleParams,
) -> Vec<ReferenceDiscrepancy> {
    let gz = depth_transfer_functions(U, params).g_z.normalized();
    let gpsi = yaw_model(U, params).g_psi.normalized();
    let gu = speed_model(U, n_trim_rpm, params);
    [
        ("depth gain", reference::DEPTH_GAIN, gz.num[0]),
        ("depth s coefficient", reference::DEPTH_DEN[1], gz.den[1]),
        ("depth constant", reference::DEPTH_DEN[2], gz.den[2]),
        ("yaw gain", reference::YAW_GAIN, gpsi.num[0]),
        ("yaw pole", reference::YAW_POLE, -gpsi.den[1]),
        ("speed numerator", reference::SPEED_NUM, gu.num[0]),
        ("speed denominator s", reference::SPEED_DEN[0], gu.den[0]),
        (
            "speed denominator constant",
            reference::SPEED_DEN[1],
            gu.den[1],
        ),
    ]
    .into_iter()
    .map(|(name, printed, computed)| ReferenceDiscrepancy {
        name: name.into(),
        printed,
        computed,
        relative: (computed - printed) / printed.abs(),
    })
    .collect()
}
