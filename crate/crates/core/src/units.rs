//! Unit constants and conversions. Everything inside the crate is SI with radians and
//! revolutions per second; degrees, RPM and knots appear only at file and CLI boundaries.

use std::f64::consts::PI;

pub const KNOT: f64 = 0.51444;
pub const GRAVITY: f64 = 9.81;

pub fn knots_to_mps(knots: f64) -> f64 {
    knots * KNOT
}

pub fn rpm_to_rps(rpm: f64) -> f64 {
    rpm / 60.0
}

pub fn rps_to_rpm(rps: f64) -> f64 {
    rps * 60.0
}

/// Wraps an angle to (-π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Serde adapter for a radian field written in degrees.
pub mod degrees {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rad: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(rad.to_degrees())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(f64::deserialize(d)?.to_radians())
    }
}

/// Serde adapter for an RPS field written in RPM.
pub mod rpm {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rps: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(super::rps_to_rpm(*rps))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(super::rpm_to_rps(f64::deserialize(d)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_stays_in_half_open_interval() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle((-358f64).to_radians()) - 2f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn four_knots() {
        assert!((knots_to_mps(4.0) - 2.05776).abs() < 1e-12);
    }
}
