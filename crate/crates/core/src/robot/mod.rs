//! The robot abstraction tasks are written against, and its backends.
//!
//! [`RobotInterface`] is the only surface a task may touch: joint reads,
//! actuation references and base state. [`RobotBackend`] adds what a runtime
//! needs to drive the world (episode start, advancing one agent period, time).
//!
//! References are latched: setting one twice before an advance keeps only the
//! last value, and the value is held (zero-order hold) until replaced.

mod mock;
mod simulated;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::physics::PhysicsError;
use crate::time::{SimTime, StepSize};

pub use mock::{MockFrame, MockRobot};
pub use simulated::SimulatedRobot;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RobotError {
    #[error("unknown joint '{0}'")]
    UnknownJoint(String),
    #[error("joint '{joint}' is in {actual} mode, {expected} required")]
    ControlMode {
        joint: String,
        expected: ControlMode,
        actual: ControlMode,
    },
    #[error("invalid PD gains kp = {kp}, kd = {kd} (both must be finite and >= 0)")]
    InvalidGains { kp: f64, kd: f64 },
    #[error("non-finite value {value} for joint '{joint}'")]
    NonFinite { joint: String, value: f64 },
    #[error("{0} are not supported by this robot")]
    NotSupported(&'static str),
    #[error("robot communication failure: {0}")]
    Communication(String),
    #[error("period {period:?} is not a whole number of physics steps of {dt:?}")]
    Period { period: StepSize, dt: StepSize },
    #[error(transparent)]
    Divergence(PhysicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum ControlMode {
    /// Generalized force (N or N·m) applied directly.
    #[default]
    Force,
    /// PD loop at the physics rate: `force = kp·(target − q) − kd·q̇`.
    PositionPd,
}

impl fmt::Display for ControlMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControlMode::Force => "force",
            ControlMode::PositionPd => "position-pd",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdGains {
    /// N/rad or N/m
    pub kp: f64,
    /// N·s/rad or N·s/m
    pub kd: f64,
}

impl PdGains {
    pub fn new(kp: f64, kd: f64) -> Result<Self, RobotError> {
        let ok = |g: f64| g.is_finite() && g >= 0.0;
        if ok(kp) && ok(kd) {
            Ok(PdGains { kp, kd })
        } else {
            Err(RobotError::InvalidGains { kp, kd })
        }
    }

    pub fn force(&self, target: f64, q: f64, qd: f64) -> f64 {
        self.kp * (target - q) - self.kd * qd
    }
}

/// A latched actuation reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    Force(f64),
    Position { target: f64, gains: PdGains },
}

impl Reference {
    pub fn mode(&self) -> ControlMode {
        match self {
            Reference::Force(_) => ControlMode::Force,
            Reference::Position { .. } => ControlMode::PositionPd,
        }
    }
}

/// Pose of the robot base in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseState {
    /// m
    pub position: [f64; 3],
    /// Unit quaternion `[w, x, y, z]`.
    pub orientation: [f64; 4],
}

impl BaseState {
    pub const IDENTITY: BaseState = BaseState {
        position: [0.0; 3],
        orientation: [1.0, 0.0, 0.0, 0.0],
    };

    pub fn orientation_norm(&self) -> f64 {
        self.orientation.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// A contact between a robot link and another body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub link: String,
    pub other: String,
    pub position: [f64; 3],
    pub force: [f64; 3],
}

/// Task-facing robot access.
pub trait RobotInterface {
    fn name(&self) -> &str;

    /// Actuated joints, in a fixed order for the lifetime of the robot.
    fn joint_names(&self) -> &[String];

    fn joint_position(&self, name: &str) -> Result<f64, RobotError>;

    fn joint_velocity(&self, name: &str) -> Result<f64, RobotError>;

    /// Effort limit from the model; `f64::INFINITY` when unbounded.
    fn joint_effort_limit(&self, name: &str) -> Result<f64, RobotError>;

    fn control_mode(&self, name: &str) -> Result<ControlMode, RobotError>;

    fn set_control_mode(&mut self, name: &str, mode: ControlMode) -> Result<(), RobotError>;

    /// Latches a force reference. Clamped to the effort limit when applied.
    fn set_joint_force(&mut self, name: &str, value: f64) -> Result<(), RobotError>;

    /// Latches a PD position target.
    fn set_joint_position_target(
        &mut self,
        name: &str,
        target: f64,
        gains: PdGains,
    ) -> Result<(), RobotError>;

    /// Places a joint at a given position and velocity (episode reset).
    fn reset_joint(&mut self, name: &str, position: f64, velocity: f64) -> Result<(), RobotError>;

    fn base_state(&self) -> BaseState;

    fn sensor_reading(&self, _sensor: &str) -> Result<Vec<f64>, RobotError> {
        Err(RobotError::NotSupported("sensors"))
    }

    fn contacts(&self, _link: &str) -> Result<Vec<Contact>, RobotError> {
        Err(RobotError::NotSupported("contacts"))
    }
}

/// Runtime-facing side of a robot.
pub trait RobotBackend: RobotInterface + Send {
    /// Starts an episode: time back to zero, references cleared to zero force.
    fn begin_episode(&mut self) -> Result<(), RobotError>;

    /// Applies the latched references for one agent period and refreshes the
    /// state snapshot.
    fn advance(&mut self, period: StepSize) -> Result<AdvanceReport, RobotError>;

    /// Time of the current state snapshot since the episode start.
    fn time(&self) -> SimTime;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AdvanceReport {
    /// Some applied force hit an effort limit during the period.
    pub clamped: bool,
}

/// Clamps `force` to `±limit`, reporting whether it was changed.
pub fn clamp_effort(force: f64, limit: f64) -> (f64, bool) {
    let clamped = force.clamp(-limit, limit);
    (clamped, clamped != force)
}

impl<R: RobotInterface + ?Sized> RobotInterface for Box<R> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn joint_names(&self) -> &[String] {
        (**self).joint_names()
    }
    fn joint_position(&self, name: &str) -> Result<f64, RobotError> {
        (**self).joint_position(name)
    }
    fn joint_velocity(&self, name: &str) -> Result<f64, RobotError> {
        (**self).joint_velocity(name)
    }
    fn joint_effort_limit(&self, name: &str) -> Result<f64, RobotError> {
        (**self).joint_effort_limit(name)
    }
    fn control_mode(&self, name: &str) -> Result<ControlMode, RobotError> {
        (**self).control_mode(name)
    }
    fn set_control_mode(&mut self, name: &str, mode: ControlMode) -> Result<(), RobotError> {
        (**self).set_control_mode(name, mode)
    }
    fn set_joint_force(&mut self, name: &str, value: f64) -> Result<(), RobotError> {
        (**self).set_joint_force(name, value)
    }
    fn set_joint_position_target(
        &mut self,
        name: &str,
        target: f64,
        gains: PdGains,
    ) -> Result<(), RobotError> {
        (**self).set_joint_position_target(name, target, gains)
    }
    fn reset_joint(&mut self, name: &str, position: f64, velocity: f64) -> Result<(), RobotError> {
        (**self).reset_joint(name, position, velocity)
    }
    fn base_state(&self) -> BaseState {
        (**self).base_state()
    }
    fn sensor_reading(&self, sensor: &str) -> Result<Vec<f64>, RobotError> {
        (**self).sensor_reading(sensor)
    }
    fn contacts(&self, link: &str) -> Result<Vec<Contact>, RobotError> {
        (**self).contacts(link)
    }
}

impl<R: RobotBackend + ?Sized> RobotBackend for Box<R> {
    fn begin_episode(&mut self) -> Result<(), RobotError> {
        (**self).begin_episode()
    }
    fn advance(&mut self, period: StepSize) -> Result<AdvanceReport, RobotError> {
        (**self).advance(period)
    }
    fn time(&self) -> SimTime {
        (**self).time()
    }
}

/// Index of `name` in `names`, or a lookup error naming the joint.
pub(crate) fn joint_index(names: &[String], name: &str) -> Result<usize, RobotError> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| RobotError::UnknownJoint(name.to_string()))
}

pub(crate) fn finite(joint: &str, value: f64) -> Result<f64, RobotError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(RobotError::NonFinite {
            joint: joint.to_string(),
            value,
        })
    }
}
