//! Runtimes: a task plus a robot backend behind the [`Environment`] interface.
//!
//! [`Runtime`] is generic over the backend and over a [`Pacer`]:
//!
//! - [`SimulatedRuntime`] drives a physics-backed robot in-process and paces
//!   steps by a Real-Time Factor (`rtf = 0` runs as fast as possible);
//! - [`RealTimeRuntime`] starts every advance on the next agent-period
//!   boundary of a [`ClockSource`] and counts overruns.
//!
//! Both run the same [`Task`] object. Step order is: validate the action,
//! latch it through the task, wait for the pacer, advance the robot by one
//! agent period, then read observation, reward and termination.

mod pacing;
mod rollout;
mod vector;

use std::fs::OpenOptions;
use std::io::Write;

use crate::env::{EnvError, EnvMetadata, Environment, RenderMode, Step, StepInfo};
use crate::model::parse_sdf;
use crate::physics::EngineId;
use crate::record::StepRecord;
use crate::robot::{RobotBackend, RobotError, SimulatedRobot};
use crate::seed::{ChildSeed, SeedTree, SimRng, LABEL_ACTION_SPACE, LABEL_INIT, LABEL_TASK};
use crate::tasks::{self, Task, TaskOptions};
use crate::time::{SimTime, StepSize};

pub use pacing::{ClockPacer, ClockSource, MockClock, Pacer, RtfPacer, SystemClock};
pub use rollout::{rollout, EpisodeSummary, Policy, Rollout};
pub use vector::{VecStep, VectorEnv};

/// Timing, engine and seed of one runtime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuntimeConfig {
    physics_dt: StepSize,
    agent_period: StepSize,
    rtf: f64,
    engine: EngineId,
    seed: u64,
}

impl RuntimeConfig {
    pub fn new(
        physics_dt: StepSize,
        agent_period: StepSize,
        rtf: f64,
        engine: EngineId,
        seed: u64,
    ) -> Result<Self, EnvError> {
        if agent_period.ratio(physics_dt).is_none() {
            return Err(EnvError::Config(format!(
                "agent period {} s is not an integer multiple of physics dt {} s",
                agent_period.as_secs_f64(),
                physics_dt.as_secs_f64()
            )));
        }
        if !(rtf.is_finite() && rtf >= 0.0) {
            return Err(EnvError::Config(format!(
                "rtf must be finite and >= 0, got {rtf}"
            )));
        }
        Ok(RuntimeConfig {
            physics_dt,
            agent_period,
            rtf,
            engine,
            seed,
        })
    }

    /// Same as [`new`](Self::new) with durations in seconds.
    pub fn from_secs(
        physics_dt: f64,
        agent_period: f64,
        rtf: f64,
        engine: EngineId,
        seed: u64,
    ) -> Result<Self, EnvError> {
        let dt = StepSize::from_secs_f64(physics_dt)
            .map_err(|e| EnvError::Config(format!("physics dt: {e}")))?;
        let period = StepSize::from_secs_f64(agent_period)
            .map_err(|e| EnvError::Config(format!("agent period: {e}")))?;
        RuntimeConfig::new(dt, period, rtf, engine, seed)
    }

    pub fn physics_dt(&self) -> StepSize {
        self.physics_dt
    }

    pub fn agent_period(&self) -> StepSize {
        self.agent_period
    }

    pub fn rtf(&self) -> f64 {
        self.rtf
    }

    pub fn engine(&self) -> EngineId {
        self.engine
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Physics ticks per environment step.
    pub fn ticks_per_step(&self) -> u64 {
        self.agent_period
            .ratio(self.physics_dt)
            .expect("validated at construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    NeedsReset,
    Running,
    Done,
}

type ResetHook<R> = Box<dyn FnMut(&mut R) -> Result<(), RobotError> + Send>;
type ObservationHook = Box<dyn FnMut(&mut Vec<f64>) + Send>;

/// A task running against a robot backend, paced by `P`.
pub struct Runtime<R: RobotBackend, P: Pacer> {
    metadata: EnvMetadata,
    config: RuntimeConfig,
    task: Box<dyn Task>,
    robot: R,
    pacer: P,
    init_rng: SimRng,
    action_rng: SimRng,
    phase: Phase,
    step_index: u64,
    total_overruns: u64,
    last_action: Vec<f64>,
    last_reward: f64,
    reset_hook: Option<ResetHook<R>>,
    observation_hook: Option<ObservationHook>,
}

pub type SimulatedRuntime<R = SimulatedRobot> = Runtime<R, RtfPacer>;
pub type RealTimeRuntime<C, R = SimulatedRobot> = Runtime<R, ClockPacer<C>>;

impl<R: RobotBackend, P: Pacer> Runtime<R, P> {
    pub fn new(
        id: impl Into<String>,
        task: Box<dyn Task>,
        robot: R,
        pacer: P,
        config: RuntimeConfig,
    ) -> Self {
        let metadata = EnvMetadata {
            id: id.into(),
            observation_space: task.observation_space().clone(),
            action_space: task.action_space().clone(),
            agent_period: config.agent_period,
        };
        let tree = SeedTree::new(config.seed);
        let mut runtime = Runtime {
            metadata,
            config,
            task,
            robot,
            pacer,
            init_rng: tree.rng(LABEL_INIT),
            action_rng: tree.rng(LABEL_ACTION_SPACE),
            phase: Phase::NeedsReset,
            step_index: 0,
            total_overruns: 0,
            last_action: Vec::new(),
            last_reward: 0.0,
            reset_hook: None,
            observation_hook: None,
        };
        runtime.seed(config.seed);
        runtime
    }

    pub fn config(&self) -> &RuntimeConfig {
        &self.config
    }

    pub fn robot(&self) -> &R {
        &self.robot
    }

    pub fn task(&self) -> &dyn Task {
        self.task.as_ref()
    }

    pub fn pacer(&self) -> &P {
        &self.pacer
    }

    /// Runs after the backend starts an episode and before the task draws its
    /// initial state. Real robots use this to bring the platform back to a
    /// resettable configuration.
    pub fn set_reset_hook(
        &mut self,
        hook: impl FnMut(&mut R) -> Result<(), RobotError> + Send + 'static,
    ) {
        self.reset_hook = Some(Box::new(hook));
    }

    /// Test hook: mutates every observation before it is returned.
    pub fn set_observation_hook(&mut self, hook: impl FnMut(&mut Vec<f64>) + Send + 'static) {
        self.observation_hook = Some(Box::new(hook));
    }

    /// Episode steps taken since the last reset.
    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    fn observe(&mut self) -> Result<Vec<f64>, EnvError> {
        let mut obs = self.task.observation(&self.robot)?;
        if let Some(hook) = self.observation_hook.as_mut() {
            hook(&mut obs);
        }
        Ok(obs)
    }

    /// The current state as a dump record.
    fn snapshot(&self) -> Result<StepRecord, EnvError> {
        Ok(StepRecord {
            t: self.robot.time().as_secs_f64(),
            observation: self.task.observation(&self.robot)?,
            action: self.last_action.clone(),
            reward: self.last_reward,
            done: self.phase == Phase::Done,
        })
    }
}

impl<P: Pacer> Runtime<SimulatedRobot, P> {
    /// Selects the physics engine from the next reset on.
    pub fn set_engine(&mut self, engine: EngineId) {
        self.robot.request_engine(engine);
    }

    pub fn engine(&self) -> EngineId {
        self.robot.engine()
    }
}

impl<R: RobotBackend, P: Pacer> Environment for Runtime<R, P> {
    fn metadata(&self) -> &EnvMetadata {
        &self.metadata
    }

    fn seed(&mut self, master: u64) -> Vec<ChildSeed> {
        let tree = SeedTree::new(master);
        self.init_rng = tree.rng(LABEL_INIT);
        self.action_rng = tree.rng(LABEL_ACTION_SPACE);
        self.task.seed(tree.rng(LABEL_TASK));
        [LABEL_INIT, LABEL_TASK, LABEL_ACTION_SPACE]
            .iter()
            .map(|label| ChildSeed {
                label: label.to_string(),
                seed: tree.child(label),
            })
            .collect()
    }

    fn reset(&mut self) -> Result<Vec<f64>, EnvError> {
        self.phase = Phase::NeedsReset;
        self.robot.begin_episode()?;
        if let Some(hook) = self.reset_hook.as_mut() {
            hook(&mut self.robot)?;
        }
        self.task.reset(&mut self.robot, &mut self.init_rng)?;
        self.pacer.start()?;
        self.step_index = 0;
        self.total_overruns = 0;
        self.last_action = vec![0.0; self.metadata.action_space.dim()];
        self.last_reward = 0.0;
        let obs = self.observe()?;
        self.phase = Phase::Running;
        Ok(obs)
    }

    fn step(&mut self, action: &[f64]) -> Result<Step, EnvError> {
        match self.phase {
            Phase::NeedsReset => return Err(EnvError::NotReset),
            Phase::Done => return Err(EnvError::EpisodeDone),
            Phase::Running => {}
        }
        if !(action.iter().all(|a| a.is_finite()) && self.metadata.action_space.contains(action))
        {
            return Err(EnvError::InvalidAction {
                action: action.to_vec(),
            });
        }
        let period = self.config.agent_period;
        self.pacer.begin_step();
        // Any failure from here on leaves the episode unusable.
        self.phase = Phase::NeedsReset;
        self.task.set_action(&mut self.robot, action)?;
        let overruns = self.pacer.before_advance(period)?;
        let report = self.robot.advance(period)?;
        self.step_index += 1;
        self.total_overruns += overruns;
        let observation = self.observe()?;
        let (reward, terminal) = self.task.reward_and_done(&self.robot, self.step_index)?;
        self.pacer.end_step(period);
        let done = terminal.is_some();
        self.phase = if done { Phase::Done } else { Phase::Running };
        self.last_action = action.to_vec();
        self.last_reward = reward;
        Ok(Step {
            observation,
            reward,
            done,
            info: StepInfo {
                sim_time: self.robot.time(),
                step_index: self.step_index,
                clamped: report.clamped,
                overruns,
                total_overruns: self.total_overruns,
                terminal,
            },
        })
    }

    fn render(&self, mode: &RenderMode) -> Result<Option<String>, EnvError> {
        match mode {
            RenderMode::None => Ok(None),
            RenderMode::Text => {
                let state = self.task.render_text(&self.robot)?;
                Ok(Some(format!(
                    "t={:.4} step={} {state}",
                    self.robot.time().as_secs_f64(),
                    self.step_index
                )))
            }
            RenderMode::File(path) => {
                let line = self.snapshot()?.to_json_line();
                let mut file = OpenOptions::new().create(true).append(true).open(path)?;
                writeln!(file, "{line}")?;
                Ok(None)
            }
        }
    }

    fn sample_action(&mut self) -> Vec<f64> {
        self.metadata.action_space.sample(&mut self.action_rng)
    }

    fn sim_time(&self) -> SimTime {
        self.robot.time()
    }
}

/// Construction options for registered environments.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvOptions {
    pub engine: EngineId,
    pub seed: u64,
    /// 0 runs as fast as possible.
    pub rtf: f64,
    /// Overrides the registered physics step (seconds).
    pub physics_dt: Option<f64>,
    pub exact_init: bool,
}

impl Default for EnvOptions {
    fn default() -> Self {
        EnvOptions {
            engine: EngineId::default(),
            seed: 0,
            rtf: 0.0,
            physics_dt: None,
            exact_init: false,
        }
    }
}

impl EnvOptions {
    pub fn seed(seed: u64) -> Self {
        EnvOptions {
            seed,
            ..EnvOptions::default()
        }
    }
}

fn build_parts(
    env_id: &str,
    options: &EnvOptions,
) -> Result<(Box<dyn Task>, SimulatedRobot, RuntimeConfig), EnvError> {
    let entry = tasks::lookup(env_id).ok_or_else(|| EnvError::UnknownEnv {
        id: env_id.to_string(),
        known: tasks::ids(),
    })?;
    let physics_dt = match options.physics_dt {
        Some(dt) => StepSize::from_secs_f64(dt)
            .map_err(|e| EnvError::Config(format!("physics dt: {e}")))?,
        None => entry.physics_dt(),
    };
    let config = RuntimeConfig::new(
        physics_dt,
        entry.agent_period(),
        options.rtf,
        options.engine,
        options.seed,
    )?;
    let model = parse_sdf(entry.model_sdf)?.model;
    let robot = SimulatedRobot::new(&model, options.engine, physics_dt)
        .map_err(EnvError::Divergence)?;
    let task = (entry.factory)(TaskOptions {
        exact_init: options.exact_init,
    });
    Ok((task, robot, config))
}

/// Builds a registered environment on the simulated runtime.
pub fn make(env_id: &str, options: &EnvOptions) -> Result<SimulatedRuntime, EnvError> {
    let (task, robot, config) = build_parts(env_id, options)?;
    Ok(Runtime::new(
        env_id,
        task,
        robot,
        RtfPacer::new(config.rtf()),
        config,
    ))
}

/// Builds a registered environment on the real-time runtime, with the
/// simulated robot as backend and `clock` as time source. `options.rtf` is
/// ignored.
pub fn make_realtime<C: ClockSource>(
    env_id: &str,
    options: &EnvOptions,
    clock: C,
) -> Result<RealTimeRuntime<C>, EnvError> {
    let (task, robot, config) = build_parts(env_id, options)?;
    Ok(Runtime::new(
        env_id,
        task,
        robot,
        ClockPacer::new(clock),
        config,
    ))
}
