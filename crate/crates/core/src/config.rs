//! Vehicle, scenario and sweep files (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::controllers::ControlMode;
use crate::error::ConfigError;
use crate::simulator::Scenario;
use crate::vehicle::params::{HydroCoefficients, VehicleParams};

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Reads and validates a vehicle file.
pub fn load_vehicle(path: &Path) -> Result<VehicleParams, ConfigError> {
    let p: VehicleParams = parse(path, &read(path)?)?;
    p.validate()?;
    Ok(p)
}

fn resolve(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new(".")).join(p)
    }
}

/// Scenario plus the vehicle it refers to.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub path: PathBuf,
    pub scenario: Scenario,
    pub vehicle: VehicleParams,
    pub vehicle_path: Option<PathBuf>,
}

/// Reads a scenario file, validates it and loads its vehicle. `vehicle_override` replaces
/// the file's own vehicle reference.
pub fn load_scenario(
    path: &Path,
    vehicle_override: Option<&Path>,
) -> Result<LoadedScenario, ConfigError> {
    let scenario: Scenario = parse(path, &read(path)?)?;
    scenario.validate()?;
    let vehicle_path = match (vehicle_override, &scenario.vehicle.config) {
        (Some(v), _) => Some(v.to_path_buf()),
        (None, Some(rel)) => Some(resolve(path, rel)),
        (None, None) => None,
    };
    let vehicle = match &vehicle_path {
        Some(v) => load_vehicle(v)?,
        None => VehicleParams::research_vehicle(),
    };
    Ok(LoadedScenario {
        path: path.to_path_buf(),
        scenario,
        vehicle,
        vehicle_path,
    })
}

/// What a sweep group varies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepKind {
    /// Scales one coefficient; levels are multipliers (1.0 = nominal).
    Multiplier { coefficient: String },
    /// Sets (B − W)/g; levels in grams.
    BuoyancyG,
    /// Adds to x_cg; levels in m.
    CgShiftX,
}

/// One table block: a variable and its levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGroup {
    pub name: String,
    #[serde(flatten)]
    pub kind: SweepKind,
    pub levels: Vec<f64>,
}

/// Controller mode and the scenario file it runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepMode {
    pub mode: ControlMode,
    pub scenario: String,
}

/// Cross product of perturbation levels and controller modes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub modes: Vec<SweepMode>,
    #[serde(default)]
    pub groups: Vec<SweepGroup>,
}

impl SweepGroup {
    pub fn validate(&self, key: &str) -> Result<(), ConfigError> {
        if self.levels.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::invalid(
                format!("{key}.levels"),
                "levels must be finite",
            ));
        }
        if let SweepKind::Multiplier { coefficient } = &self.kind {
            if HydroCoefficients::NAMES.iter().all(|n| n != coefficient) {
                return Err(ConfigError::UnknownCoefficient {
                    name: coefficient.clone(),
                    valid: HydroCoefficients::NAMES.join(", "),
                });
            }
            if self.levels.iter().any(|&v| v <= 0.0) {
                return Err(ConfigError::invalid(
                    format!("{key}.levels"),
                    "multipliers must be > 0",
                ));
            }
        }
        Ok(())
    }

    /// Scenario with this group's `level` applied on top of its own perturbations.
    pub fn apply(&self, scenario: &Scenario, level: f64) -> Scenario {
        let mut s = scenario.clone();
        let p = &mut s.perturbations;
        match &self.kind {
            SweepKind::Multiplier { coefficient } => {
                *p.multipliers.entry(coefficient.clone()).or_insert(1.0) *= level;
            }
            SweepKind::BuoyancyG => p.buoyancy_excess_g = Some(level),
            SweepKind::CgShiftX => p.cg_shift_m[0] += level,
        }
        s
    }
}

/// A sweep with every mode's scenario loaded.
#[derive(Debug, Clone)]
pub struct LoadedSweep {
    pub path: PathBuf,
    pub config: SweepConfig,
    pub scenarios: Vec<(ControlMode, LoadedScenario)>,
}

const GROUP_KEYS: [&str; 4] = ["name", "kind", "coefficient", "levels"];

/// `serde(flatten)` cannot deny unknown keys, so groups are checked here.
fn check_group_keys(path: &Path, text: &str) -> Result<(), ConfigError> {
    let raw: toml::Table = parse(path, text)?;
    let groups = raw
        .get("groups")
        .and_then(|g| g.as_array())
        .map_or(&[][..], |a| a.as_slice());
    for (i, g) in groups.iter().enumerate() {
        if let Some(t) = g.as_table() {
            if let Some(k) = t.keys().find(|k| !GROUP_KEYS.contains(&k.as_str())) {
                return Err(ConfigError::invalid(
                    format!("groups[{i}].{k}"),
                    format!("unknown key; expected one of {}", GROUP_KEYS.join(", ")),
                ));
            }
        }
    }
    Ok(())
}

pub fn load_sweep(
    path: &Path,
    vehicle_override: Option<&Path>,
) -> Result<LoadedSweep, ConfigError> {
    let text = read(path)?;
    check_group_keys(path, &text)?;
    let config: SweepConfig = parse(path, &text)?;
    for (i, g) in config.groups.iter().enumerate() {
        g.validate(&format!("groups[{i}]"))?;
    }
    let mut scenarios = Vec::new();
    for m in &config.modes {
        let mut loaded = load_scenario(&resolve(path, &m.scenario), vehicle_override)?;
        loaded.scenario.controller.mode = m.mode;
        scenarios.push((m.mode, loaded));
    }
    Ok(LoadedSweep {
        path: path.to_path_buf(),
        config,
        scenarios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_parses() {
        let text = r#"
            [[modes]]
            mode = "smc"
            scenario = "a.toml"

            [[groups]]
            name = "X_uu"
            kind = "multiplier"
            coefficient = "X_uu"
            levels = [0.75, 1.0, 1.25]

            [[groups]]
            name = "buoyancy"
            kind = "buoyancy_g"
            levels = [100, 340]
        "#;
        let s: SweepConfig = toml::from_str(text).unwrap();
        assert_eq!(s.modes[0].mode, ControlMode::Smc);
        assert_eq!(s.groups[1].kind, SweepKind::BuoyancyG);
        s.groups[0].validate("groups[0]").unwrap();
    }

    #[test]
    fn unknown_coefficient_is_listed() {
        let g = SweepGroup {
            name: "x".into(),
            kind: SweepKind::Multiplier {
                coefficient: "X_bogus".into(),
            },
            levels: vec![1.0],
        };
        let e = g.validate("groups[0]").unwrap_err().to_string();
        assert!(e.contains("X_bogus") && e.contains("X_uu"));
    }
}
