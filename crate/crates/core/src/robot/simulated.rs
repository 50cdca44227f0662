use crate::model::RobotModel;
use crate::physics::{compile_model, EngineId, PhysicsError, PhysicsState, PhysicsWorld};
use crate::time::{SimTime, StepSize};

use super::{
    clamp_effort, finite, joint_index, AdvanceReport, BaseState, ControlMode, PdGains, Reference,
    RobotBackend, RobotError, RobotInterface,
};

/// A robot backed by an in-process physics engine.
///
/// Joint order is the compiled model's coordinate order. References are
/// applied at every physics tick; PD references are re-evaluated per tick.
#[derive(Debug, Clone)]
pub struct SimulatedRobot {
    name: String,
    joint_names: Vec<String>,
    world: PhysicsWorld,
    references: Vec<Reference>,
    pending_engine: Option<EngineId>,
    forces: Vec<f64>,
    last_clamped: Vec<bool>,
}

impl SimulatedRobot {
    pub fn new(model: &RobotModel, engine: EngineId, dt: StepSize) -> Result<Self, PhysicsError> {
        let compiled = compile_model(model)?;
        let joint_names = compiled.joint_names.clone();
        let dof = joint_names.len();
        Ok(SimulatedRobot {
            name: model.name.clone(),
            joint_names,
            world: PhysicsWorld::new(engine, compiled, dt),
            references: vec![Reference::Force(0.0); dof],
            pending_engine: None,
            forces: vec![0.0; dof],
            last_clamped: vec![false; dof],
        })
    }

    pub fn engine(&self) -> EngineId {
        self.world.engine()
    }

    /// Requests a different engine; it takes effect at the next
    /// [`begin_episode`](RobotBackend::begin_episode).
    pub fn request_engine(&mut self, engine: EngineId) {
        self.pending_engine = Some(engine);
    }

    pub fn dt(&self) -> StepSize {
        self.world.dt()
    }

    pub fn physics_state(&self) -> &PhysicsState {
        self.world.state()
    }

    pub fn set_physics_state(&mut self, state: PhysicsState) -> Result<(), PhysicsError> {
        self.world.set_state(state)
    }

    pub fn world(&self) -> &PhysicsWorld {
        &self.world
    }

    /// Generalized forces applied during the most recent physics tick.
    pub fn last_applied_forces(&self) -> &[f64] {
        &self.forces
    }

    /// Per-joint clamp flags of the most recent physics tick.
    pub fn last_clamped(&self) -> &[bool] {
        &self.last_clamped
    }

    fn index(&self, name: &str) -> Result<usize, RobotError> {
        joint_index(&self.joint_names, name)
    }

    fn require_mode(&self, i: usize, expected: ControlMode) -> Result<(), RobotError> {
        let actual = self.references[i].mode();
        if actual == expected {
            Ok(())
        } else {
            Err(RobotError::ControlMode {
                joint: self.joint_names[i].clone(),
                expected,
                actual,
            })
        }
    }

    /// One physics tick with the latched references.
    fn tick(&mut self) -> Result<bool, RobotError> {
        let limits = &self.world.model().effort_limits;
        let state = self.world.state();
        let mut any_clamped = false;
        for (i, reference) in self.references.iter().enumerate() {
            let raw = match *reference {
                Reference::Force(f) => f,
                Reference::Position { target, gains } => {
                    gains.force(target, state.q[i], state.qd[i])
                }
            };
            let (applied, clamped) = clamp_effort(raw, limits[i]);
            self.forces[i] = applied;
            self.last_clamped[i] = clamped;
            any_clamped |= clamped;
        }
        self.world.step(&self.forces).map_err(RobotError::Divergence)?;
        Ok(any_clamped)
    }
}

impl RobotInterface for SimulatedRobot {
    fn name(&self) -> &str {
        &self.name
    }

    fn joint_names(&self) -> &[String] {
        &self.joint_names
    }

    fn joint_position(&self, name: &str) -> Result<f64, RobotError> {
        Ok(self.world.state().q[self.index(name)?])
    }

    fn joint_velocity(&self, name: &str) -> Result<f64, RobotError> {
        Ok(self.world.state().qd[self.index(name)?])
    }

    fn joint_effort_limit(&self, name: &str) -> Result<f64, RobotError> {
        Ok(self.world.model().effort_limits[self.index(name)?])
    }

    fn control_mode(&self, name: &str) -> Result<ControlMode, RobotError> {
        Ok(self.references[self.index(name)?].mode())
    }

    fn set_control_mode(&mut self, name: &str, mode: ControlMode) -> Result<(), RobotError> {
        let i = self.index(name)?;
        if self.references[i].mode() != mode {
            // Switching holds the current configuration.
            self.references[i] = match mode {
                ControlMode::Force => Reference::Force(0.0),
                ControlMode::PositionPd => Reference::Position {
                    target: self.world.state().q[i],
                    gains: PdGains { kp: 0.0, kd: 0.0 },
                },
            };
        }
        Ok(())
    }

    fn set_joint_force(&mut self, name: &str, value: f64) -> Result<(), RobotError> {
        let i = self.index(name)?;
        self.require_mode(i, ControlMode::Force)?;
        self.references[i] = Reference::Force(finite(name, value)?);
        Ok(())
    }

    fn set_joint_position_target(
        &mut self,
        name: &str,
        target: f64,
        gains: PdGains,
    ) -> Result<(), RobotError> {
        let i = self.index(name)?;
        self.require_mode(i, ControlMode::PositionPd)?;
        let gains = PdGains::new(gains.kp, gains.kd)?;
        self.references[i] = Reference::Position {
            target: finite(name, target)?,
            gains,
        };
        Ok(())
    }

    fn reset_joint(&mut self, name: &str, position: f64, velocity: f64) -> Result<(), RobotError> {
        let i = self.index(name)?;
        let mut state = self.world.state().clone();
        state.q[i] = finite(name, position)?;
        state.qd[i] = finite(name, velocity)?;
        self.world.set_state(state).map_err(RobotError::Divergence)
    }

    fn base_state(&self) -> BaseState {
        // Only fixed-base archetypes compile.
        BaseState::IDENTITY
    }
}

impl RobotBackend for SimulatedRobot {
    fn begin_episode(&mut self) -> Result<(), RobotError> {
        if let Some(engine) = self.pending_engine.take() {
            self.world.set_engine(engine);
        }
        let dof = self.joint_names.len();
        self.world
            .set_state(PhysicsState::at_rest(dof))
            .map_err(RobotError::Divergence)?;
        self.references.fill(Reference::Force(0.0));
        self.forces.fill(0.0);
        self.last_clamped.fill(false);
        Ok(())
    }

    fn advance(&mut self, period: StepSize) -> Result<AdvanceReport, RobotError> {
        let dt = self.world.dt();
        let ticks = period.ratio(dt).ok_or(RobotError::Period { period, dt })?;
        let mut clamped = false;
        for _ in 0..ticks {
            clamped |= self.tick()?;
        }
        Ok(AdvanceReport { clamped })
    }

    fn time(&self) -> SimTime {
        self.world.state().time
    }
}
