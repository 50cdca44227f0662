use std::fmt::Debug;
use std::sync::Arc;

use crate::model::{JointKind, RobotModel};

use super::PhysicsError;

/// Gravitational acceleration, m/s², pointing down.
pub const GRAVITY: f64 = 9.81;

/// Forward dynamics of a model in generalized coordinates.
pub trait Dynamics: Debug + Send + Sync {
    fn dof(&self) -> usize;

    /// Writes `q̈ = f(q, q̇, force)` into `qdd`. All slices have length
    /// [`dof`](Dynamics::dof).
    fn forward(&self, q: &[f64], qd: &[f64], force: &[f64], qdd: &mut [f64]);

    /// Total mechanical energy, J.
    fn energy(&self, q: &[f64], qd: &[f64]) -> f64;
}

/// Simple pendulum with a point mass; `q = [θ]`, θ = 0 hanging down.
///
/// `θ̈ = −(g/L)·sin θ + τ/(m·L²)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pendulum {
    pub mass: f64,
    pub length: f64,
    pub gravity: f64,
}

impl Dynamics for Pendulum {
    fn dof(&self) -> usize {
        1
    }

    fn forward(&self, q: &[f64], _qd: &[f64], force: &[f64], qdd: &mut [f64]) {
        let Pendulum {
            mass: m,
            length: l,
            gravity: g,
        } = *self;
        qdd[0] = -(g / l) * q[0].sin() + force[0] / (m * l * l);
    }

    fn energy(&self, q: &[f64], qd: &[f64]) -> f64 {
        let Pendulum {
            mass: m,
            length: l,
            gravity: g,
        } = *self;
        0.5 * m * l * l * qd[0] * qd[0] + m * g * l * (1.0 - q[0].cos())
    }
}

/// Cart-pole with a uniform pole of half-length `l`; `q = [x, θ]`, θ = 0
/// upright. Classic point-mass-at-tip form:
///
/// ```text
/// θ̈ = [g·sinθ + cosθ·(−F − m·l·θ̇²·sinθ)/(M+m)] / [l·(4/3 − m·cos²θ/(M+m))]
/// ẍ = [F + m·l·(θ̇²·sinθ − θ̈·cosθ)] / (M+m)
/// ```
///
/// `F` is the force on the cart; torque on the pole joint is ignored (the
/// pole is passive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartPole {
    pub cart_mass: f64,
    pub pole_mass: f64,
    pub half_length: f64,
    pub gravity: f64,
}

impl Dynamics for CartPole {
    fn dof(&self) -> usize {
        2
    }

    fn forward(&self, q: &[f64], qd: &[f64], force: &[f64], qdd: &mut [f64]) {
        let CartPole {
            cart_mass,
            pole_mass: m,
            half_length: l,
            gravity: g,
        } = *self;
        let total = cart_mass + m;
        let (sin, cos) = q[1].sin_cos();
        let theta_dot = qd[1];
        let f = force[0];
        let theta_dd = (g * sin + cos * (-f - m * l * theta_dot * theta_dot * sin) / total)
            / (l * (4.0 / 3.0 - m * cos * cos / total));
        let x_dd = (f + m * l * (theta_dot * theta_dot * sin - theta_dd * cos)) / total;
        qdd[0] = x_dd;
        qdd[1] = theta_dd;
    }

    fn energy(&self, q: &[f64], qd: &[f64]) -> f64 {
        let CartPole {
            cart_mass,
            pole_mass: m,
            half_length: l,
            gravity: g,
        } = *self;
        let (x_dot, theta_dot) = (qd[0], qd[1]);
        let kinetic = 0.5 * (cart_mass + m) * x_dot * x_dot
            + m * l * x_dot * theta_dot * q[1].cos()
            + 0.5 * (4.0 / 3.0) * m * l * l * theta_dot * theta_dot;
        kinetic + m * g * l * q[1].cos()
    }
}

/// A compiled model: dynamics plus the joint metadata the robot layer needs.
#[derive(Debug, Clone)]
pub struct DynamicsModel {
    pub dynamics: Arc<dyn Dynamics>,
    /// Joint owning each generalized coordinate, in coordinate order.
    pub joint_names: Vec<String>,
    /// Effort limit per coordinate (`f64::INFINITY` when unbounded).
    pub effort_limits: Vec<f64>,
}

impl DynamicsModel {
    pub fn dof(&self) -> usize {
        self.dynamics.dof()
    }
}

/// Recognizes one of the supported archetypes and returns its closed-form
/// dynamics.
pub fn compile_model(model: &RobotModel) -> Result<DynamicsModel, PhysicsError> {
    let unsupported = |why: &str| PhysicsError::UnsupportedArchetype {
        found: format!("model '{}' ({} links): {why}", model.name, model.links.len()),
    };
    if !model.fixed_base {
        return Err(unsupported("floating base"));
    }
    if model.joints.iter().any(|j| j.kind == JointKind::Fixed) {
        return Err(unsupported("fixed joints"));
    }
    let mass_of = |name: &str| model.link(name).map(|l| (l.mass, l.com_offset));

    match (model.links.len(), model.joints.as_slice()) {
        (2, [j]) if j.kind == JointKind::Revolute && j.parent == model.base_link => {
            let (mass, length) = mass_of(&j.child).ok_or_else(|| unsupported("missing link"))?;
            if !(length > 0.0) {
                return Err(unsupported("pendulum link needs a positive centre-of-mass offset"));
            }
            Ok(DynamicsModel {
                dynamics: Arc::new(Pendulum {
                    mass,
                    length,
                    gravity: GRAVITY,
                }),
                joint_names: vec![j.name.clone()],
                effort_limits: vec![j.limits.effort],
            })
        }
        (3, [a, b]) => {
            let (cart, pole) = match (a.kind, b.kind) {
                (JointKind::Prismatic, JointKind::Revolute) => (a, b),
                (JointKind::Revolute, JointKind::Prismatic) => (b, a),
                _ => return Err(unsupported("two joints that are not prismatic + revolute")),
            };
            if cart.parent != model.base_link || pole.parent != cart.child {
                return Err(unsupported(
                    "prismatic joint must attach the cart to the base and the revolute joint the pole to the cart",
                ));
            }
            let (cart_mass, _) = mass_of(&cart.child).ok_or_else(|| unsupported("missing link"))?;
            let (pole_mass, half_length) =
                mass_of(&pole.child).ok_or_else(|| unsupported("missing link"))?;
            if !(half_length > 0.0) {
                return Err(unsupported("pole link needs a positive centre-of-mass offset"));
            }
            Ok(DynamicsModel {
                dynamics: Arc::new(CartPole {
                    cart_mass,
                    pole_mass,
                    half_length,
                    gravity: GRAVITY,
                }),
                joint_names: vec![cart.name.clone(), pole.name.clone()],
                effort_limits: vec![cart.limits.effort, pole.limits.effort],
            })
        }
        (_, joints) => Err(unsupported(&format!("{} joints", joints.len()))),
    }
}
