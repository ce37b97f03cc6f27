//! Reference schedules and the lawn-mowing generator.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Value switched in at `t_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    pub t_s: f64,
    pub value: f64,
}

/// Piecewise-constant value: `base` until the first step, then the latest step reached.
pub fn schedule_value(base: f64, steps: &[Step], t: f64) -> f64 {
    steps.iter().rfind(|s| s.t_s <= t).map_or(base, |s| s.value)
}

fn check_steps(key: &str, steps: &[Step]) -> Result<(), ConfigError> {
    for w in steps.windows(2) {
        if !(w[1].t_s > w[0].t_s) {
            return Err(ConfigError::invalid(
                key,
                "step times must be strictly increasing",
            ));
        }
    }
    if steps
        .iter()
        .any(|s| !s.t_s.is_finite() || !s.value.is_finite() || s.t_s < 0.0)
    {
        return Err(ConfigError::invalid(
            key,
            "step times and values must be finite, t_s >= 0",
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TurnDirection {
    /// Lanes advance towards +y (starboard when heading north).
    #[default]
    Right,
    Left,
}

/// Parallel survey legs along +x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawnMowingPattern {
    pub leg_length_m: f64,
    pub lane_spacing_m: f64,
    pub lanes: usize,
    #[serde(default)]
    pub turn: TurnDirection,
}

impl Default for LawnMowingPattern {
    fn default() -> Self {
        LawnMowingPattern {
            leg_length_m: 100.0,
            lane_spacing_m: 100.0,
            lanes: 4,
            turn: TurnDirection::Right,
        }
    }
}

impl LawnMowingPattern {
    pub fn validate(&self, key: &str) -> Result<(), ConfigError> {
        if !(self.leg_length_m > 0.0) || !(self.lane_spacing_m > 0.0) {
            return Err(ConfigError::invalid(
                key,
                "leg_length_m and lane_spacing_m must be > 0",
            ));
        }
        if self.lanes < 2 {
            return Err(ConfigError::invalid(key, "at least two lanes are required"));
        }
        Ok(())
    }

    /// Lane reached after `t` seconds at `speed`.
    pub fn lane(&self, speed: f64, t: f64) -> usize {
        let legs = (speed * t.max(0.0) / self.leg_length_m).floor();
        (legs as usize).min(self.lanes - 1)
    }

    /// Time to fly every leg at `speed`.
    pub fn duration(&self, speed: f64) -> f64 {
        self.lanes as f64 * self.leg_length_m / speed
    }
}

/// Lateral set-point and heading hint (rad) for the lawn-mowing pattern.
pub fn lawn_mowing_reference(pattern: &LawnMowingPattern, speed: f64, t: f64) -> (f64, f64) {
    let sign = match pattern.turn {
        TurnDirection::Right => 1.0,
        TurnDirection::Left => -1.0,
    };
    (
        sign * pattern.lane_spacing_m * pattern.lane(speed, t) as f64,
        0.0,
    )
}

/// Lateral set-point source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LateralReference {
    Constant {
        #[serde(default)]
        y_m: f64,
        #[serde(default)]
        steps: Vec<Step>,
    },
    LawnMowing(LawnMowingPattern),
}

impl Default for LateralReference {
    fn default() -> Self {
        LateralReference::Constant {
            y_m: 0.0,
            steps: Vec::new(),
        }
    }
}

/// Reference filter time constants, s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSettings {
    pub speed_tau_s: f64,
    pub depth_tau_s: f64,
    pub lateral_tau_s: f64,
    pub roll_tau_s: f64,
}

impl Default for FilterSettings {
    fn default() -> Self {
        FilterSettings {
            speed_tau_s: 2.0,
            depth_tau_s: 5.0,
            lateral_tau_s: 10.0,
            roll_tau_s: 1.0,
        }
    }
}

/// Raw reference schedules. Speeds in knots, depth in m, roll in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSettings {
    pub speed_knots: f64,
    pub depth_m: f64,
    #[serde(default)]
    pub roll_deg: f64,
    #[serde(default)]
    pub speed_steps: Vec<Step>,
    #[serde(default)]
    pub depth_steps: Vec<Step>,
    #[serde(default)]
    pub lateral: LateralReference,
    #[serde(default)]
    pub filter: FilterSettings,
}

impl Default for ReferenceSettings {
    fn default() -> Self {
        ReferenceSettings {
            speed_knots: 4.0,
            depth_m: 60.0,
            roll_deg: 0.0,
            speed_steps: Vec::new(),
            depth_steps: Vec::new(),
            lateral: LateralReference::default(),
            filter: FilterSettings::default(),
        }
    }
}

impl ReferenceSettings {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.speed_knots > 0.0) || !self.speed_knots.is_finite() {
            return Err(ConfigError::invalid(
                "references.speed_knots",
                "must be > 0",
            ));
        }
        if !self.depth_m.is_finite() || !self.roll_deg.is_finite() {
            return Err(ConfigError::invalid(
                "references",
                "depth_m and roll_deg must be finite",
            ));
        }
        check_steps("references.speed_steps", &self.speed_steps)?;
        check_steps("references.depth_steps", &self.depth_steps)?;
        match &self.lateral {
            LateralReference::Constant { y_m, steps } => {
                if !y_m.is_finite() {
                    return Err(ConfigError::invalid(
                        "references.lateral.y_m",
                        "must be finite",
                    ));
                }
                check_steps("references.lateral.steps", steps)?;
            }
            LateralReference::LawnMowing(p) => p.validate("references.lateral")?,
        }
        let f = &self.filter;
        for (k, v) in [
            ("references.filter.speed_tau_s", f.speed_tau_s),
            ("references.filter.depth_tau_s", f.depth_tau_s),
            ("references.filter.lateral_tau_s", f.lateral_tau_s),
            ("references.filter.roll_tau_s", f.roll_tau_s),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ConfigError::invalid(k, "must be > 0"));
            }
        }
        Ok(())
    }

    /// Unfiltered (u m/s, z m, y m, φ rad) at time `t`.
    pub fn raw(&self, t: f64) -> [f64; 4] {
        let u = crate::units::knots_to_mps(schedule_value(self.speed_knots, &self.speed_steps, t));
        let z = schedule_value(self.depth_m, &self.depth_steps, t);
        let y = match &self.lateral {
            LateralReference::Constant { y_m, steps } => schedule_value(*y_m, steps, t),
            LateralReference::LawnMowing(p) => {
                lawn_mowing_reference(p, crate::units::knots_to_mps(self.speed_knots), t).0
            }
        };
        [u, z, y, self.roll_deg.to_radians()]
    }
}
