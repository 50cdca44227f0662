//! Robot-agnostic task logic.
//!
//! A [`Task`] maps agent actions to actuation references, and robot state to
//! observations, rewards and termination. It sees the robot only through
//! [`RobotInterface`], so the same task object runs unchanged against a
//! simulated robot, a scripted [`MockRobot`](crate::robot::MockRobot) or a
//! real-time backend.
//!
//! Numeric constants (limits, horizons, noise, reward shapes) follow the
//! classic cart-pole and pendulum benchmarks and live in each task's params.

mod cartpole;
mod pendulum;

use std::f64::consts::PI;

use thiserror::Error;

use crate::env::TerminalReason;
use crate::robot::{RobotError, RobotInterface};
use crate::seed::SimRng;
use crate::space::Space;
use crate::time::StepSize;

pub use cartpole::{CartPoleBalance, CartPoleBalanceParams, CartPoleSwingUp, CartPoleSwingUpParams};
pub use pendulum::{PendulumSwingUp, PendulumSwingUpParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TaskError {
    #[error("action {action:?} is outside the action space")]
    InvalidAction { action: Vec<f64> },
    #[error(transparent)]
    Robot(#[from] RobotError),
}

pub trait Task: Send {
    fn id(&self) -> &str;

    fn action_space(&self) -> &Space;

    fn observation_space(&self) -> &Space;

    /// Installs the task's own random stream. Tasks without task-level noise
    /// ignore it.
    fn seed(&mut self, _rng: SimRng) {}

    /// Places the robot in a freshly drawn initial state.
    fn reset(&mut self, robot: &mut dyn RobotInterface, rng: &mut SimRng)
        -> Result<(), TaskError>;

    /// Validates `action` and latches the corresponding references.
    fn set_action(&mut self, robot: &mut dyn RobotInterface, action: &[f64])
        -> Result<(), TaskError>;

    fn observation(&self, robot: &dyn RobotInterface) -> Result<Vec<f64>, TaskError>;

    /// Reward of the step that just completed and, if the episode is over,
    /// why. `step_index` is 1-based.
    fn reward_and_done(
        &self,
        robot: &dyn RobotInterface,
        step_index: u64,
    ) -> Result<(f64, Option<TerminalReason>), TaskError>;

    /// One-line human-readable state.
    fn render_text(&self, robot: &dyn RobotInterface) -> Result<String, TaskError>;
}

/// Options shared by every task factory.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TaskOptions {
    /// Start every episode from the nominal state with no noise.
    pub exact_init: bool,
}

/// A registered environment: task, robot model and timing.
#[derive(Debug, Clone, Copy)]
pub struct TaskEntry {
    pub id: &'static str,
    /// SDF source of the robot the task is written for.
    pub model_sdf: &'static str,
    pub agent_period_ns: u64,
    pub physics_dt_ns: u64,
    pub factory: fn(TaskOptions) -> Box<dyn Task>,
}

impl TaskEntry {
    pub fn agent_period(&self) -> StepSize {
        StepSize::from_nanos(self.agent_period_ns).expect("registered periods are nonzero")
    }

    pub fn physics_dt(&self) -> StepSize {
        StepSize::from_nanos(self.physics_dt_ns).expect("registered steps are nonzero")
    }
}

static REGISTRY: [TaskEntry; 3] = [
    TaskEntry {
        id: cartpole::BALANCE_ID,
        model_sdf: crate::model::CARTPOLE_SDF,
        agent_period_ns: 20_000_000,
        physics_dt_ns: 1_000_000,
        factory: |o| Box::new(CartPoleBalance::new(CartPoleBalanceParams::default(), o)),
    },
    TaskEntry {
        id: cartpole::SWINGUP_ID,
        model_sdf: crate::model::CARTPOLE_SDF,
        agent_period_ns: 20_000_000,
        physics_dt_ns: 1_000_000,
        factory: |o| Box::new(CartPoleSwingUp::new(CartPoleSwingUpParams::default(), o)),
    },
    TaskEntry {
        id: pendulum::SWINGUP_ID,
        model_sdf: crate::model::PENDULUM_SDF,
        agent_period_ns: 50_000_000,
        physics_dt_ns: 1_000_000,
        factory: |o| Box::new(PendulumSwingUp::new(PendulumSwingUpParams::default(), o)),
    },
];

pub fn registry() -> &'static [TaskEntry] {
    &REGISTRY
}

pub fn lookup(id: &str) -> Option<&'static TaskEntry> {
    REGISTRY.iter().find(|e| e.id == id)
}

pub fn ids() -> Vec<String> {
    REGISTRY.iter().map(|e| e.id.to_string()).collect()
}

/// Maps an angle into `(−π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let w = angle.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

fn check_action(space: &Space, action: &[f64]) -> Result<(), TaskError> {
    if action.iter().all(|a| a.is_finite()) && space.contains(action) {
        Ok(())
    } else {
        Err(TaskError::InvalidAction {
            action: action.to_vec(),
        })
    }
}
