//! Pluggable physics: closed-form dynamics models and interchangeable
//! integrators behind one engine interface.
//!
//! An engine step is a pure function of `(EngineId, dynamics, state, force,
//! dt)`. Two backends ship:
//!
//! - [`EngineId::EulerSi`]: semi-implicit (symplectic) Euler, velocity first;
//! - [`EngineId::Rk4`]: classic four-stage Runge–Kutta on `(q, q̇)`.
//!
//! Further backends implement [`Engine`] and get an [`EngineId`] variant.

mod dynamics;
mod engine;
mod world;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::SimTime;

pub use dynamics::{compile_model, CartPole, Dynamics, DynamicsModel, Pendulum, GRAVITY};
pub use engine::{engine_step, Engine, Rk4, SemiImplicitEuler};
pub use world::PhysicsWorld;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("integration diverged at t = {}: non-finite state q = {:?}, qd = {:?}", .state.time, .state.q, .state.qd)]
    Divergence { state: PhysicsState },
    #[error("dimension mismatch: expected {expected} values, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("state contains non-finite values")]
    NonFinite,
    #[error("unsupported archetype: {found}; recognized patterns: {}", RECOGNIZED_ARCHETYPES.join("; "))]
    UnsupportedArchetype { found: String },
}

pub const RECOGNIZED_ARCHETYPES: &[&str] = &[
    "pendulum (base link + one revolute joint to a point-mass link)",
    "cart-pole (base link + prismatic joint to a cart + revolute joint to a pole)",
];

/// Generalized coordinates and simulated time of one engine instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicsState {
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
    pub time: SimTime,
}

impl PhysicsState {
    pub fn at_rest(dof: usize) -> Self {
        PhysicsState {
            q: vec![0.0; dof],
            qd: vec![0.0; dof],
            time: SimTime::ZERO,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.qd).all(|v| v.is_finite())
    }

    /// Bitwise equality (distinguishes `-0.0` from `0.0`).
    pub fn bit_eq(&self, other: &PhysicsState) -> bool {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        self.time == other.time && bits(&self.q) == bits(&other.q) && bits(&self.qd) == bits(&other.qd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum EngineId {
    #[default]
    #[serde(rename = "euler-si")]
    EulerSi,
    #[serde(rename = "rk4")]
    Rk4,
}

impl EngineId {
    pub const ALL: [EngineId; 2] = [EngineId::EulerSi, EngineId::Rk4];

    pub fn engine(self) -> &'static dyn Engine {
        match self {
            EngineId::EulerSi => &SemiImplicitEuler,
            EngineId::Rk4 => &Rk4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EngineId::EulerSi => "euler-si",
            EngineId::Rk4 => "rk4",
        }
    }
}

impl fmt::Display for EngineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EngineId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euler-si" => Ok(EngineId::EulerSi),
            "rk4" => Ok(EngineId::Rk4),
            other => Err(format!("unknown engine {other:?} (expected euler-si or rk4)")),
        }
    }
}
