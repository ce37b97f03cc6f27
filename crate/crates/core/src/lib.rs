//! Torpedo AUV toolkit: 6-DOF nonlinear model with ocean currents, level-flight trim,
//! linear subsystem models, cascaded PD and sliding-mode autopilots, and a fixed-step
//! closed-loop simulator.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod controllers;
pub mod error;
pub mod linearization;
pub mod simulator;
pub mod trim;
pub mod units;
pub mod vehicle;

pub use error::{ConfigError, ModelError};
pub use vehicle::params::VehicleParams;
pub use vehicle::{
    ActuatorCommand, BodyVelocity, EarthPose, ShaftState, VehicleModel, VehicleState, Wrench,
};
