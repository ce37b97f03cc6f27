#![allow(non_snake_case)]

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use nalgebra::{Matrix3, Vector6};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use auv_core::config::{load_scenario, load_sweep, LoadedScenario};
use auv_core::controllers::{
    allocate_roll, allocate_roll_unsaturated, sat, smc_inner, SmcParams, ALLOCATION_QUANTUM,
};
use auv_core::linearization::{compare_models, numeric_jacobian, reference_discrepancies};
use auv_core::simulator::{integrate_step, run_scenario, SimOutput};
use auv_core::trim::{solve_trim, TrimDecision, TrimOptions};
use auv_core::units::{knots_to_mps, wrap_angle};
use auv_core::vehicle::current::OceanCurrent;
use auv_core::vehicle::expanded::body_accelerations;
use auv_core::vehicle::hydro::{added_mass_coriolis, mass_matrix};
use auv_core::vehicle::kinematics::linear_transform;
use auv_core::{
    ActuatorCommand, BodyVelocity, EarthPose, ShaftState, VehicleModel, VehicleParams, VehicleState,
};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(name: &str) -> LoadedScenario {
    load_scenario(&root().join("scenarios").join(name), None).unwrap()
}

fn simulate(name: &str) -> (SimOutput, f64) {
    let l = scenario(name);
    let start = Instant::now();
    let out = run_scenario(&l.scenario, &l.vehicle).unwrap();
    (out, start.elapsed().as_secs_f64())
}

fn verdict(n: u32, title: &str, pass: bool, detail: &str) {
    println!(
        "criterion {n:>2} {} {title}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} failed: {detail}");
}

fn check(ok: bool, label: String, failures: &mut Vec<String>) -> String {
    if !ok {
        failures.push(label.clone());
    }
    label
}

#[test]
fn criterion_01_trim_reproduction() {
    let model = VehicleModel::new(VehicleParams::research_vehicle()).unwrap();
    let U = knots_to_mps(4.0);
    let start = Instant::now();
    let r = solve_trim(
        U,
        &TrimDecision::default_guess(U),
        &model,
        &TrimOptions::default(),
    )
    .unwrap();
    let runtime = start.elapsed().as_secs_f64();
    let d = r.decision;
    let (s, _) = d.to_state(U);
    let mut failures = Vec::new();
    let mut lines = Vec::new();
    let mut rel = |name: &str, got: f64, want: f64, tol: f64| {
        let ok = ((got - want) / want).abs() <= tol;
        lines.push(check(
            ok,
            format!("{name} {got:.4} vs {want}"),
            &mut failures,
        ));
    };
    rel("u", s.velocity.u, 2.0577, 0.02);
    rel("u_p", d.u_p, 1.2936, 0.02);
    rel("n", d.n, 1413.0, 0.05);
    let mut abs = |name: &str, got: f64, want: f64, tol: f64| {
        let ok = (got - want).abs() <= tol;
        lines.push(check(
            ok,
            format!("{name} {got:.4} vs {want}"),
            &mut failures,
        ));
    };
    abs("v", s.velocity.v, 0.001, 0.02 * U);
    abs("w", s.velocity.w, -0.011, 0.02 * U);
    abs("phi_deg", d.phi.to_degrees(), -2.5941, 0.3);
    abs("theta_deg", d.theta.to_degrees(), -0.72, 0.3);
    abs("alpha_deg", d.alpha.to_degrees(), -0.72, 0.3);
    abs("beta_deg", d.beta.to_degrees(), -0.0276, 0.3);
    abs("delta_r_deg", d.delta_r().to_degrees(), -0.05, 0.3);
    let ds = d.delta_s().to_degrees();
    let stern_ok = (ds - -1.4).abs() <= 0.3 || (ds - -1.2648).abs() <= 0.3;
    lines.push(check(
        stern_ok,
        format!("delta_s_deg {ds:.4} vs -1.4 / -1.2648"),
        &mut failures,
    ));
    let conv_ok = r.converged && r.residual_norm < 1e-8;
    lines.push(check(
        conv_ok,
        format!("residual {:.1e}", r.residual_norm),
        &mut failures,
    ));
    lines.push(check(
        runtime < 1.0,
        format!("runtime {runtime:.3} s"),
        &mut failures,
    ));
    for l in &lines {
        println!("    {l}");
    }
    verdict(
        1,
        "trim reproduction",
        failures.is_empty(),
        &format!("out of band: {failures:?}"),
    );
}

#[test]
fn criterion_02_level_flight_hold() {
    let model = VehicleModel::new(VehicleParams::research_vehicle()).unwrap();
    let U = knots_to_mps(4.0);
    let r = solve_trim(
        U,
        &TrimDecision::default_guess(U),
        &model,
        &TrimOptions::default(),
    )
    .unwrap();
    let (mut s, cmd) = r.decision.to_state(U);
    s.pose.z = 60.0;
    let mut c = OceanCurrent::still();
    let start = Instant::now();
    let (mut max_rate, mut max_drift) = (0.0f64, 0.0f64);
    let mut t_exceed = None;
    for k in 1..=10_000 {
        match integrate_step(&s, &cmd, &c, &model, 0.01, 0.0) {
            Ok(next) => (s, c) = next,
            Err(_) => break,
        }
        let rate = s
            .velocity
            .p
            .abs()
            .max(s.velocity.q.abs())
            .max(s.velocity.r.abs());
        if rate >= 1e-4 && t_exceed.is_none() {
            t_exceed = Some(k as f64 * 0.01);
        }
        max_rate = max_rate.max(rate);
        max_drift = max_drift.max((s.pose.z - 60.0).abs());
    }
    let runtime = start.elapsed().as_secs_f64();
    let pass = max_rate < 1e-4 && max_drift < 0.05 && runtime < 5.0;
    verdict(
        2,
        "level-flight hold",
        pass,
        &format!(
            "max body rate {max_rate:.2e} rad/s (first >= 1e-4 at t = {t_exceed:?} s), depth drift {max_drift:.3e} m, runtime {runtime:.2} s"
        ),
    );
}

#[test]
fn criterion_03_linearization_consistency() {
    let model = VehicleModel::new(VehicleParams::research_vehicle()).unwrap();
    let U = knots_to_mps(4.0);
    let r = solve_trim(
        U,
        &TrimDecision::default_guess(U),
        &model,
        &TrimOptions::default(),
    )
    .unwrap();
    let (s, c) = r.decision.to_state(U);
    let nl = numeric_jacobian(&s, &c, &model, 1e-6).unwrap();
    let cmp = compare_models(U, r.decision.n, model.params(), &nl.plane_jacobians());
    let bad: Vec<String> = cmp
        .iter()
        .filter(|c| !c.within_tolerance)
        .map(|c| {
            format!(
                "{} {} {:.4} vs {:.4}",
                c.subsystem, c.entry, c.analytic, c.numeric
            )
        })
        .collect();
    for d in reference_discrepancies(U, r.decision.n, model.params()) {
        println!(
            "    reference {:<28} printed {:>9.4} computed {:>9.4} ({:+.1} %)",
            d.name,
            d.printed,
            d.computed,
            100.0 * d.relative
        );
    }
    verdict(
        3,
        "linearization consistency",
        bad.is_empty() && !cmp.is_empty(),
        &format!("{} entries compared, mismatches {bad:?}", cmp.len()),
    );
}

#[test]
fn criterion_04_dual_form_dynamics() {
    let params = VehicleParams::research_vehicle();
    let model = VehicleModel::new(params.clone()).unwrap();
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (
        proptest::array::uniform6(-1.0..1.0f64),
        0.2..3.0f64,
        (-0.6..0.6f64, -0.6..0.6f64, -PI..PI),
        0.0..2500.0f64,
        proptest::array::uniform4(-0.35..0.35f64),
        (0.0..0.5f64, -0.5..0.5f64, -PI..PI),
    );
    let worst = std::cell::Cell::new(0.0f64);
    let result = runner.run(
        &strategy,
        |(nu, u, (phi, theta, psi), n, f, (U_c, a_c, b_c))| {
            let state = VehicleState {
                velocity: BodyVelocity {
                    u: u + nu[0],
                    v: 0.3 * nu[1],
                    w: 0.3 * nu[2],
                    p: nu[3],
                    q: nu[4],
                    r: nu[5],
                },
                pose: EarthPose {
                    phi,
                    theta,
                    psi,
                    ..Default::default()
                },
                shaft: ShaftState::default(),
            };
            let cmd = ActuatorCommand {
                n,
                delta_s1: f[0],
                delta_s2: f[1],
                delta_r1: f[2],
                delta_r2: f[3],
            };
            let current = OceanCurrent::constant(U_c, a_c, b_c);
            let a = model
                .state_derivative(&state, &cmd, &current)
                .unwrap()
                .velocity
                .to_array();
            let b = body_accelerations(&params, &state, &cmd, &current).unwrap();
            for i in 0..6 {
                let e = (a[i] - b[i]).abs();
                worst.set(worst.get().max(e));
                prop_assert!(e < 1e-9, "component {} differs by {:e}", i, e);
            }
            Ok(())
        },
    );
    verdict(
        4,
        "dual-form dynamics oracle",
        result.is_ok(),
        &format!(
            "1000 random states, worst entry difference {:.2e} ({result:?})",
            worst.get()
        ),
    );
}

#[test]
fn criterion_05_integrator_order() {
    let model = VehicleModel::new(VehicleParams::research_vehicle()).unwrap();
    let U = knots_to_mps(4.0);
    let r = solve_trim(
        U,
        &TrimDecision::default_guess(U),
        &model,
        &TrimOptions::default(),
    )
    .unwrap();
    let (mut s0, mut cmd) = r.decision.to_state(U);
    s0.velocity.q = 0.05;
    s0.velocity.r = -0.03;
    cmd.delta_s1 += 0.05;
    cmd.delta_r2 -= 0.04;
    let run = |dt: f64| {
        let (mut s, mut c) = (s0, OceanCurrent::still());
        for _ in 0..(10.0 / dt).round() as usize {
            (s, c) = integrate_step(&s, &cmd, &c, &model, dt, 0.0).unwrap();
        }
        s.to_vector()
    };
    let reference = run(0.00125);
    let e1 = (run(0.02) - reference).norm();
    let e2 = (run(0.01) - reference).norm();
    let ratio = e1 / e2;
    verdict(
        5,
        "integrator order",
        ratio >= 8.0,
        &format!("10 s error {e1:.3e} at dt 0.02, {e2:.3e} at dt 0.01, ratio {ratio:.1}"),
    );
}

#[test]
fn criterion_06_ocean_current_response() {
    let (out, runtime) = simulate("ocean_current.toml");
    let last = out.log.last().unwrap();
    let u_err = out.metrics.final_error_u.abs() / last.u_ref_mps;
    let z_err = out.metrics.final_error_z.abs() / last.z_ref_m;
    let uc_ok = (last.current_mps - 0.25).abs() <= 0.01;
    let pass = uc_ok && u_err < 0.02 && z_err < 0.02;
    verdict(
        6,
        "ocean-current response",
        pass,
        &format!(
            "U_c {:.4} m/s, steady speed error {:.2} %, depth error {:.3} %, runtime {runtime:.2} s",
            last.current_mps,
            100.0 * u_err,
            100.0 * z_err
        ),
    );
}

#[test]
fn criterion_07_cg_shift() {
    let l = scenario("cg_shift.toml");
    assert_eq!(l.scenario.perturbations.cg_shift_m, [0.008, 0.0, 0.0]);
    let out = run_scenario(&l.scenario, &l.vehicle).unwrap();
    let phi0 = out.initial_trim.decision.phi.to_degrees();
    let last = out.log.last().unwrap();
    let pass =
        (phi0 - -2.59).abs() < 0.3 && last.phi_deg.abs() < 0.2 && (last.z_m - 60.0).abs() <= 0.5;
    verdict(
        7,
        "CG-shift scenario",
        pass,
        &format!(
            "phi {phi0:.3} deg -> {:.4} deg, final depth {:.3} m",
            last.phi_deg, last.z_m
        ),
    );
}

#[test]
fn criterion_08_robustness_ordering() {
    let (conv_nom, t1) = simulate("lawnmow_conventional.toml");
    let (smc_nom, t2) = simulate("lawnmow_smc.toml");
    let (conv_dist, t3) = simulate("lawnmow_combined_conventional.toml");
    let (smc_dist, t4) = simulate("lawnmow_combined_smc.toml");
    let (cn, sn) = (conv_nom.metrics.rmse_y, smc_nom.metrics.rmse_y);
    let (cd, sd) = (conv_dist.metrics.rmse_y, smc_dist.metrics.rmse_y);

    let sweep = load_sweep(&root().join("scenarios/sweep_coefficients.toml"), None).unwrap();
    let mut spreads = Vec::new();
    for (mode, l) in &sweep.scenarios {
        let mut ys = Vec::new();
        for g in &sweep.config.groups {
            for &level in &g.levels {
                let s = g.apply(&l.scenario, level);
                ys.push(run_scenario(&s, &l.vehicle).unwrap().metrics.rmse_y);
            }
        }
        let min = ys.iter().copied().fold(f64::INFINITY, f64::min);
        let max = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        spreads.push((*mode, (max - min) / mean));
    }
    let conv_spread = spreads
        .iter()
        .find(|s| s.0.to_string() == "conventional")
        .unwrap()
        .1;
    let smc_spread = spreads.iter().find(|s| s.0.to_string() == "smc").unwrap().1;
    let slowest = t1.max(t2).max(t3).max(t4);

    let ordering = sd < cd;
    let conv_degrades = cd >= 2.0 * cn;
    let smc_holds = sd < 1.25 * sn;
    let spread_ok = smc_spread <= conv_spread;
    println!(
        "    reference values (logged only): combined rmse_y 3.694 (conventional) vs 1.632 (SMC)"
    );
    println!("    nominal rmse_y conventional {cn:.4} m, SMC {sn:.4} m");
    println!(
        "    combined rmse_y conventional {cd:.4} m ({:.3}x), SMC {sd:.4} m ({:.3}x)",
        cd / cn,
        sd / sn
    );
    println!(
        "    coefficient sweep relative spread conventional {conv_spread:.4}, SMC {smc_spread:.4}"
    );
    println!(
        "    rmse(SMC) < rmse(conv): {ordering}; conv >= 2x nominal: {conv_degrades}; SMC < 1.25x nominal: {smc_holds}; spread: {spread_ok}; slowest run {slowest:.2} s"
    );
    verdict(
        8,
        "robustness ordering",
        ordering && conv_degrades && smc_holds && spread_ok && slowest < 60.0,
        &format!(
            "combined/nominal conventional {:.3}, SMC {:.3}; SMC below conventional {ordering}; spreads {smc_spread:.4} <= {conv_spread:.4} {spread_ok}",
            cd / cn,
            sd / sn
        ),
    );
}

#[test]
fn criterion_09_manifest_determinism() {
    let t = tempfile::TempDir::new().unwrap();
    let bin = env!("CARGO_BIN_EXE_auvsim");
    let first = t.path().join("first");
    let second = t.path().join("second");
    let mut all = true;
    let mut detail = Vec::new();
    for name in ["lawnmow_smc", "ocean_current"] {
        let scen = root().join("scenarios").join(format!("{name}.toml"));
        let a = Command::new(bin)
            .args(["--quiet", "--out-dir"])
            .arg(&first)
            .arg("simulate")
            .arg(&scen)
            .output()
            .unwrap()
            .status;
        let manifest = first.join(format!("{name}.manifest.json"));
        let b = Command::new(bin)
            .args(["--quiet", "--out-dir"])
            .arg(&second)
            .arg("rerun")
            .arg(&manifest)
            .output()
            .unwrap()
            .status;
        let same = fs::read(first.join(format!("{name}.csv"))).unwrap()
            == fs::read(second.join(format!("{name}.csv"))).unwrap();
        let ok = a.success() && b.success() && same;
        all &= ok;
        detail.push(format!(
            "{name}: rerun exit {:?}, identical CSV {same}",
            b.code()
        ));
    }
    verdict(9, "manifest determinism", all, &detail.join("; "));
}

#[test]
fn criterion_10_property_suites() {
    let params = VehicleParams::research_vehicle();
    let cfg = || {
        TestRunner::new(Config {
            cases: 1000,
            failure_persistence: None,
            ..Config::default()
        })
    };
    let mut results = Vec::new();

    let r = cfg().run(&(-PI..PI, -1.5..1.5f64, -PI..PI), |(phi, theta, psi)| {
        let R = linear_transform(phi, theta, psi);
        prop_assert!((R.transpose() * R - Matrix3::identity()).abs().max() < 1e-12);
        Ok(())
    });
    results.push(("transform orthogonality", r.is_ok()));

    let r = cfg().run(
        &(-0.05..0.05f64, -0.02..0.02f64, 0.5..1.5f64),
        |(dx, dz, k)| {
            let mut p = params.clone();
            p.rigid_body.x_cg += dx;
            p.rigid_body.z_cg += dz;
            p.hydro.Z_wdot *= k;
            let M = mass_matrix(&p.rigid_body, &p.hydro).unwrap();
            prop_assert!((M - M.transpose()).abs().max() < 1e-9);
            prop_assert!(M.symmetric_eigenvalues().min() > 0.0);
            Ok(())
        },
    );
    results.push(("M positive-definite", r.is_ok()));

    let r = cfg().run(&proptest::array::uniform6(-3.0..3.0f64), |nu| {
        let v = BodyVelocity::from_array(nu);
        let Ca = added_mass_coriolis(&v, &params.hydro);
        prop_assert!((Ca + Ca.transpose()).abs().max() < 1e-9);
        let x = Vector6::from(nu);
        prop_assert!(x.dot(&(Ca * x)).abs() < 1e-8);
        Ok(())
    });
    results.push(("C_A skew-symmetry", r.is_ok()));

    let q = |x: f64| (x / ALLOCATION_QUANTUM).round() * ALLOCATION_QUANTUM;
    let r = cfg().run(
        &(-0.4..0.4f64, -0.4..0.4f64, -0.4..0.4f64, 0.0..=1.0f64),
        |(ds, dr, da, kappa)| {
            let [s1, s2, r1, r2] = allocate_roll_unsaturated(ds, dr, da, kappa);
            prop_assert_eq!(s1 + s2, 2.0 * q(ds));
            prop_assert_eq!(r1 + r2, 2.0 * q(dr));
            prop_assert_eq!(
                (s1 - s2) + (r1 - r2),
                2.0 * q(0.5 * kappa * da) + 2.0 * q(0.5 * (1.0 - kappa) * da)
            );
            prop_assert!(((s1 - s2) + (r1 - r2) - da).abs() <= 4.0 * ALLOCATION_QUANTUM);
            Ok(())
        },
    );
    results.push(("allocation sums", r.is_ok()));

    let r = cfg().run(
        &(
            -3.0..3.0f64,
            -3.0..3.0f64,
            -3.0..3.0f64,
            0.0..=1.0f64,
            0.01..0.6f64,
            -1e3..1e3f64,
        ),
        |(ds, dr, da, kappa, fin_max, e)| {
            let c = allocate_roll(ds, dr, da, kappa, fin_max);
            for d in [c.delta_s1, c.delta_s2, c.delta_r1, c.delta_r2] {
                prop_assert!(d.abs() <= fin_max);
            }
            prop_assert!(sat(e).abs() <= 1.0);
            let p = SmcParams {
                gamma1: 1.0,
                gamma2: 1.5,
                gamma3: 0.35,
                boundary_layer: 0.05,
                tau_d: 0.05,
            };
            prop_assert!(smc_inner(e, -e, &p).abs() <= p.gamma3);
            Ok(())
        },
    );
    results.push(("saturation bounds", r.is_ok()));

    let r = cfg().run(&(-1e3..1e3f64, -50i32..50), |(a, k)| {
        let w = wrap_angle(a);
        prop_assert!(w > -PI && w <= PI);
        let d = (wrap_angle(a + 2.0 * PI * k as f64) - w).abs();
        prop_assert!(d < 1e-8 || (d - 2.0 * PI).abs() < 1e-8);
        Ok(())
    });
    results.push(("yaw-error wrapping", r.is_ok()));

    let failed: Vec<&str> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    let names: Vec<&str> = results.iter().map(|r| r.0).collect();
    verdict(
        10,
        "property suites",
        failed.is_empty(),
        &format!("1000 cases each for {names:?}; failing {failed:?}"),
    );
}
