//! Reproducible robot reinforcement-learning environments.
//!
//! The crate is organised around four concepts:
//!
//! - an [`Environment`](env::Environment) is what the agent sees: `seed`,
//!   `reset`, `step` and `render` over typed [`Space`](space::Space)s;
//! - a [`Task`](tasks::Task) turns actions into actuation references and robot
//!   state into observations, rewards and termination, touching the robot only
//!   through [`RobotInterface`](robot::RobotInterface);
//! - a robot backend is either the physics-backed
//!   [`SimulatedRobot`](robot::SimulatedRobot) or anything else implementing
//!   [`RobotBackend`](robot::RobotBackend) (e.g. the scripted
//!   [`MockRobot`](robot::MockRobot));
//! - a [`Runtime`](runtime::Runtime) wraps a task and a backend and exposes the
//!   environment interface, either in-process with Real-Time-Factor pacing or
//!   paced by an external [`ClockSource`](runtime::ClockSource).
//!
//! Every stochastic component is keyed from a single master seed through
//! [`SeedTree`](seed::SeedTree), and simulated time is an integer nanosecond
//! count, so a fixed seed and action script reproduce a trajectory bit for bit.

// `!(x > 0.0)` style checks are deliberate: NaN has to fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod env;
pub mod model;
pub mod physics;
pub mod record;
pub mod robot;
pub mod runtime;
pub mod seed;
pub mod space;
pub mod tasks;
pub mod time;

pub use env::{EnvError, EnvMetadata, Environment, RenderMode, Step, StepInfo};
pub use physics::EngineId;
pub use record::StepRecord;
pub use runtime::{make, EnvOptions, RuntimeConfig, SimulatedRuntime};
pub use seed::SeedTree;
pub use space::Space;
pub use time::{SimTime, StepSize};

/// Framework version written into trajectory dump headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
