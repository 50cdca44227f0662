//! The agent-facing environment interface.

use std::fmt;
use std::io;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelError;
use crate::physics::PhysicsError;
use crate::robot::RobotError;
use crate::seed::ChildSeed;
use crate::space::Space;
use crate::tasks::TaskError;
use crate::time::{SimTime, StepSize};

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("invalid action {action:?}: not in action space")]
    InvalidAction { action: Vec<f64> },
    #[error("environment must be reset before stepping")]
    NotReset,
    #[error("episode is done; call reset() before stepping again")]
    EpisodeDone,
    #[error("episode aborted: {0}")]
    Divergence(PhysicsError),
    #[error("robot error: {0}")]
    Robot(RobotError),
    #[error("task error: {0}")]
    Task(#[from] TaskError),
    #[error("model error: {0}")]
    Model(#[from] ModelError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown environment id {id:?}; registered ids: {}", known.join(", "))]
    UnknownEnv { id: String, known: Vec<String> },
    #[error("clock went backwards from {previous:?} to {now:?}")]
    ClockRegression {
        previous: std::time::Duration,
        now: std::time::Duration,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<RobotError> for EnvError {
    fn from(e: RobotError) -> Self {
        match e {
            RobotError::Divergence(p) => EnvError::Divergence(p),
            other => EnvError::Robot(other),
        }
    }
}

/// Static description of an environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvMetadata {
    pub id: String,
    pub observation_space: Space,
    pub action_space: Space,
    /// Simulated time advanced by one `step`, in nanoseconds.
    pub agent_period: StepSize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum RenderMode {
    #[default]
    None,
    /// One-line human-readable state.
    Text,
    /// Append the current state as a JSON line to a file.
    File(PathBuf),
}

/// Why an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalReason {
    AngleLimit,
    PositionLimit,
    StepLimit,
}

impl fmt::Display for TerminalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TerminalReason::AngleLimit => "angle_limit",
            TerminalReason::PositionLimit => "position_limit",
            TerminalReason::StepLimit => "step_limit",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub sim_time: SimTime,
    /// 1-based index of this step within the episode.
    pub step_index: u64,
    /// Some applied generalized force hit the model effort limit.
    pub clamped: bool,
    /// Agent periods missed during this step (real-time runtimes only).
    pub overruns: u64,
    /// Missed periods accumulated since the last reset.
    pub total_overruns: u64,
    pub terminal: Option<TerminalReason>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Gym-style environment.
///
/// Instances are single-owner: calls are externally serialized, but an
/// instance may be moved between threads.
pub trait Environment: Send {
    fn metadata(&self) -> &EnvMetadata;

    /// Re-keys every stochastic component from `master` and rewinds the
    /// streams. Returns the installed child seeds.
    fn seed(&mut self, master: u64) -> Vec<ChildSeed>;

    /// Starts a new episode. Without an intervening `seed`, the initial state
    /// is the next draw of the existing stream.
    fn reset(&mut self) -> Result<Vec<f64>, EnvError>;

    fn step(&mut self, action: &[f64]) -> Result<Step, EnvError>;

    /// Never mutates simulation state.
    fn render(&self, mode: &RenderMode) -> Result<Option<String>, EnvError>;

    /// Draws an action from the seeded action-space stream.
    fn sample_action(&mut self) -> Vec<f64>;

    fn sim_time(&self) -> SimTime;
}

impl<E: Environment + ?Sized> Environment for Box<E> {
    fn metadata(&self) -> &EnvMetadata {
        (**self).metadata()
    }
    fn seed(&mut self, master: u64) -> Vec<ChildSeed> {
        (**self).seed(master)
    }
    fn reset(&mut self) -> Result<Vec<f64>, EnvError> {
        (**self).reset()
    }
    fn step(&mut self, action: &[f64]) -> Result<Step, EnvError> {
        (**self).step(action)
    }
    fn render(&self, mode: &RenderMode) -> Result<Option<String>, EnvError> {
        (**self).render(mode)
    }
    fn sample_action(&mut self) -> Vec<f64> {
        (**self).sample_action()
    }
    fn sim_time(&self) -> SimTime {
        (**self).sim_time()
    }
}
