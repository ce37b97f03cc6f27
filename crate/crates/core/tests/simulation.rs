use std::collections::BTreeMap;
use std::path::Path;

use proptest::prelude::*;

use auv_core::config::{load_scenario, load_sweep};
use auv_core::controllers::{smc_inner, smc_surface, ControlMode, SmcParams};
use auv_core::linearization::depth_pitch_model;
use auv_core::simulator::{
    perturb_params, run_scenario, Perturbations, Scenario, SimError, TimeSeriesLog,
};
use auv_core::units::GRAVITY;
use auv_core::{ConfigError, VehicleParams};

fn scenario(extra: &str) -> Scenario {
    let text = format!("[sim]\nduration_s = 20.0\nseed = 7\n{extra}");
    let s: Scenario = toml::from_str(&text).unwrap();
    s.validate().unwrap();
    s
}

fn csv(log: &TimeSeriesLog) -> Vec<u8> {
    let mut buf = Vec::new();
    log.write_csv(&mut buf).unwrap();
    buf
}

fn scenarios_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios"))
}

#[test]
fn same_seed_gives_identical_logs() {
    let s = scenario("[current]\nspeed_mps = 0.2\nnoise_sigma = 0.05\nzeta = 0.5\nmu = 0.1\n");
    let p = VehicleParams::research_vehicle();
    let a = run_scenario(&s, &p).unwrap();
    let b = run_scenario(&s, &p).unwrap();
    assert_eq!(csv(&a.log), csv(&b.log));
    let mut other = s.clone();
    other.sim.seed = 8;
    let c = run_scenario(&other, &p).unwrap();
    assert_ne!(csv(&a.log), csv(&c.log));
}

#[test]
fn log_has_one_row_per_step_and_a_unit_header() {
    let s = scenario("");
    let out = run_scenario(&s, &VehicleParams::research_vehicle()).unwrap();
    assert_eq!(out.log.len(), s.steps());
    let text = String::from_utf8(csv(&out.log)).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("t_s,x_m,y_m,z_m,phi_deg,theta_deg,psi_deg,u_mps"));
    assert_eq!(header.split(',').count(), TimeSeriesLog::header().len());
}

#[test]
fn zero_duration_gives_an_empty_log() {
    let mut s = scenario("");
    s.sim.duration_s = 0.0;
    let out = run_scenario(&s, &VehicleParams::research_vehicle()).unwrap();
    assert!(out.log.is_empty());
    assert!(out.metrics.rmse_y.is_nan());
}

#[test]
fn closed_loop_holds_the_trim_point() {
    for mode in ["conventional", "smc"] {
        let s = scenario(&format!("[controller]\nmode = \"{mode}\"\n"));
        let out = run_scenario(&s, &VehicleParams::research_vehicle()).unwrap();
        let last = out.log.last().unwrap();
        assert!((last.z_m - 60.0).abs() < 0.05, "{mode}: z {}", last.z_m);
        assert!(last.y_m.abs() < 0.05, "{mode}: y {}", last.y_m);
        assert!(last.phi_deg.abs() < 0.5, "{mode}: phi {}", last.phi_deg);
    }
}

#[test]
fn perturbation_examples() {
    let p = VehicleParams::research_vehicle();
    let m = BTreeMap::from([("X_uu".to_string(), 1.25)]);
    let q = perturb_params(&p, &m, [0.0; 3], 0.0).unwrap();
    assert!((q.hydro.X_uu - -2.025).abs() < 1e-12);
    assert_eq!(
        perturb_params(&p, &BTreeMap::new(), [0.0; 3], 0.0).unwrap(),
        p
    );
    let bad = BTreeMap::from([("X_nope".to_string(), 1.1)]);
    match perturb_params(&p, &bad, [0.0; 3], 0.0) {
        Err(ConfigError::UnknownCoefficient { name, valid }) => {
            assert_eq!(name, "X_nope");
            assert!(valid.contains("M_uw"));
        }
        other => panic!("{other:?}"),
    }
    for g in [100.0, 340.0, 650.0, 1000.0] {
        let pert = Perturbations {
            buoyancy_excess_g: Some(g),
            ..Default::default()
        };
        let q = pert.apply(&p).unwrap();
        let excess = (q.rigid_body.B - q.rigid_body.W) / GRAVITY * 1e3;
        assert!((excess - g).abs() < 1e-9);
    }
    let cg = Perturbations {
        cg_shift_m: [0.008, 0.0, 0.0],
        ..Default::default()
    };
    assert_eq!(
        cg.apply(&p).unwrap().rigid_body.x_cg,
        p.rigid_body.x_cg + 0.008
    );
}

#[test]
fn unknown_scenario_keys_are_rejected() {
    let e = toml::from_str::<Scenario>("[sim]\nduration_s = 1.0\nbogus = 2\n").unwrap_err();
    assert!(e.to_string().contains("bogus"));
}

#[test]
fn bad_dt_is_a_config_error() {
    let mut s = scenario("");
    s.sim.dt_s = 0.0;
    assert!(s.validate().is_err());
    assert!(matches!(
        run_scenario(&s, &VehicleParams::research_vehicle()),
        Err(SimError::Config(_))
    ));
}

#[test]
fn bundled_scenarios_and_sweeps_load() {
    let dir = scenarios_dir();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name.starts_with("sweep_") {
            let sw = load_sweep(&path, None).unwrap();
            assert_eq!(sw.scenarios.len(), 2);
            assert_eq!(sw.scenarios[1].0, ControlMode::Smc);
        } else if name.ends_with(".toml") {
            load_scenario(&path, None).unwrap();
        }
    }
}

#[test]
fn ocean_current_settles_and_speed_is_regained() {
    let l = load_scenario(&scenarios_dir().join("ocean_current.toml"), None).unwrap();
    let out = run_scenario(&l.scenario, &l.vehicle).unwrap();
    let last = out.log.last().unwrap();
    assert!((last.current_mps - 0.25).abs() < 0.01);
    assert!(out.metrics.final_error_u.abs() / last.u_ref_mps < 0.02);
    assert!(out.metrics.final_error_z.abs() / 60.0 < 0.02);
}

#[test]
fn smc_surface_is_reached_on_the_pitch_model() {
    // Linear pitch dynamics under the boundary-layer law on e = θ − θ_ref, θ_ref = 0.
    let ss = depth_pitch_model(2.0577, &VehicleParams::research_vehicle());
    let p = SmcParams {
        gamma1: 1.0,
        gamma2: 1.5,
        gamma3: 0.35,
        boundary_layer: 0.05,
        tau_d: 0.05,
    };
    let (a00, a01, b0) = (ss.a[(0, 0)], ss.a[(0, 1)], ss.b[(0, 0)]);
    let (mut q, mut theta) = (0.0, 0.3);
    let dt = 0.001;
    let mut s_prev = smc_surface(theta, q, &p).abs();
    let mut reached = None;
    let mut deltas = Vec::new();
    for k in 0..20000 {
        // Fin command on the sum δs1 + δs2.
        let delta = 2.0 * smc_inner(theta, q, &p);
        let q_dot = a00 * q + a01 * theta + b0 * delta;
        q += dt * q_dot;
        theta += dt * q;
        let s = smc_surface(theta, q, &p).abs();
        if reached.is_none() {
            if s <= p.boundary_layer {
                reached = Some(k);
            } else {
                assert!(
                    s <= s_prev + 1e-9,
                    "surface grew outside the layer at step {k}"
                );
            }
        }
        s_prev = s;
        if k >= 15000 {
            deltas.push(delta);
        }
    }
    assert!(reached.is_some());
    assert!(theta.abs() < 1e-3);
    // No chattering: the command is smooth once on the surface.
    let max_jump = deltas
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    assert!(max_jump < 1e-4, "{max_jump}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn multipliers_scale_exactly_and_identity_is_a_no_op(k in 0.5..1.5f64, idx in 0usize..10) {
        let names = ["X_uu", "Y_vv", "Z_ww", "M_uw", "Z_uw", "N_uv", "M_qq", "N_rr", "Y_uv", "K_pp"];
        let p = VehicleParams::research_vehicle();
        let m = BTreeMap::from([(names[idx].to_string(), k)]);
        let q = perturb_params(&p, &m, [0.0; 3], 0.0).unwrap();
        let get = |v: &VehicleParams| toml::Value::try_from(&v.hydro).unwrap()[names[idx]].as_float().unwrap();
        prop_assert_eq!(get(&q), get(&p) * k);
        let one = BTreeMap::from([(names[idx].to_string(), 1.0)]);
        prop_assert_eq!(perturb_params(&p, &one, [0.0; 3], 0.0).unwrap(), p);
    }
}
