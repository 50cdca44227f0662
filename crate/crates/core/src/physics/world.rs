use crate::time::StepSize;

use super::{DynamicsModel, EngineId, PhysicsError, PhysicsState};

/// One engine instance: a compiled model, the selected backend and the
/// current state. Single-owner; the compiled dynamics are shared.
#[derive(Debug, Clone)]
pub struct PhysicsWorld {
    engine: EngineId,
    model: DynamicsModel,
    dt: StepSize,
    state: PhysicsState,
}

impl PhysicsWorld {
    pub fn new(engine: EngineId, model: DynamicsModel, dt: StepSize) -> Self {
        let state = PhysicsState::at_rest(model.dof());
        PhysicsWorld {
            engine,
            model,
            dt,
            state,
        }
    }

    pub fn engine(&self) -> EngineId {
        self.engine
    }

    /// Selects the backend for subsequent steps. Callers restrict this to
    /// episode boundaries.
    pub fn set_engine(&mut self, engine: EngineId) {
        self.engine = engine;
    }

    pub fn model(&self) -> &DynamicsModel {
        &self.model
    }

    pub fn dt(&self) -> StepSize {
        self.dt
    }

    pub fn state(&self) -> &PhysicsState {
        &self.state
    }

    /// Replaces the state. Rejects wrong dimensions and non-finite values,
    /// leaving the current state untouched.
    pub fn set_state(&mut self, state: PhysicsState) -> Result<(), PhysicsError> {
        let dof = self.model.dof();
        for got in [state.q.len(), state.qd.len()] {
            if got != dof {
                return Err(PhysicsError::Dimension { expected: dof, got });
            }
        }
        if !state.is_finite() {
            return Err(PhysicsError::NonFinite);
        }
        self.state = state;
        Ok(())
    }

    /// Advances one physics tick under `force`. On divergence the state is
    /// left at its last finite value.
    pub fn step(&mut self, force: &[f64]) -> Result<(), PhysicsError> {
        let next = self
            .engine
            .engine()
            .step(self.model.dynamics.as_ref(), &self.state, force, self.dt)?;
        self.state = next;
        Ok(())
    }

    pub fn energy(&self) -> f64 {
        self.model.dynamics.energy(&self.state.q, &self.state.qd)
    }
}
