//! Articulated robot models and the SDF-subset reader/writer.
//!
//! Supported elements:
//!
//! | element | meaning |
//! |---|---|
//! | `model@name`, `static` | model name, fixed base (defaults to `true`) |
//! | `link@name` | a rigid body |
//! | `inertial/mass`, `inertial/inertia/{ixx,iyy,izz}` | mass and diagonal inertia; off-diagonals must be 0 |
//! | `inertial/pose` | centre-of-mass offset, z translation only |
//! | `joint@name@type` | `revolute`, `prismatic` or `fixed` |
//! | `joint/parent`, `joint/child` | link references |
//! | `axis/xyz`, `axis/limit/{lower,upper,effort,velocity}` | joint axis and limits; an absent limit is unbounded |
//!
//! Anything else produces a warning and is ignored.

mod parse;
mod serialize;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::{parse_sdf, parse_sdf_bytes, Parsed};
pub use serialize::serialize_sdf;
pub use validate::validate;

/// Shipped cart-pole model: rail (base), cart on a prismatic joint, 1 m pole
/// on a revolute joint.
pub const CARTPOLE_SDF: &str = include_str!("../../models/cartpole.sdf");
/// Shipped pendulum model: 1 kg point mass on a 1 m massless rod.
pub const PENDULUM_SDF: &str = include_str!("../../models/pendulum.sdf");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub name: String,
    /// kg
    pub mass: f64,
    /// Diagonal of the inertia tensor `(ixx, iyy, izz)`, kg·m².
    pub inertia_diag: [f64; 3],
    /// Distance of the centre of mass from the parent joint along the link, m.
    pub com_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointKind {
    Revolute,
    Prismatic,
    Fixed,
}

impl JointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            JointKind::Revolute => "revolute",
            JointKind::Prismatic => "prismatic",
            JointKind::Fixed => "fixed",
        }
    }

    pub fn from_sdf(s: &str) -> Option<Self> {
        match s {
            "revolute" => Some(JointKind::Revolute),
            "prismatic" => Some(JointKind::Prismatic),
            "fixed" => Some(JointKind::Fixed),
            _ => None,
        }
    }
}

/// Joint limits in rad (m), N·m (N) and rad/s (m/s). Infinite values mean
/// unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLimits {
    pub lower: f64,
    pub upper: f64,
    pub effort: f64,
    pub velocity: f64,
}

impl JointLimits {
    pub const UNBOUNDED: JointLimits = JointLimits {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
        effort: f64::INFINITY,
        velocity: f64::INFINITY,
    };

    pub fn is_unbounded(&self) -> bool {
        *self == JointLimits::UNBOUNDED
    }
}

impl Default for JointLimits {
    fn default() -> Self {
        JointLimits::UNBOUNDED
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub name: String,
    pub kind: JointKind,
    pub parent: String,
    pub child: String,
    /// `None` for fixed joints.
    pub axis: Option<[f64; 3]>,
    pub limits: JointLimits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotModel {
    pub name: String,
    pub links: Vec<Link>,
    pub joints: Vec<Joint>,
    pub base_link: String,
    pub fixed_base: bool,
}

impl RobotModel {
    /// Number of non-fixed joints.
    pub fn dof(&self) -> usize {
        self.actuated_joints().count()
    }

    pub fn actuated_joints(&self) -> impl Iterator<Item = &Joint> {
        self.joints.iter().filter(|j| j.kind != JointKind::Fixed)
    }

    pub fn link(&self, name: &str) -> Option<&Link> {
        self.links.iter().find(|l| l.name == name)
    }

    pub fn joint(&self, name: &str) -> Option<&Joint> {
        self.joints.iter().find(|j| j.name == name)
    }

    /// Joints whose parent is `link`, in document order.
    pub fn child_joints<'a>(&'a self, link: &'a str) -> impl Iterator<Item = &'a Joint> + 'a {
        self.joints.iter().filter(move |j| j.parent == link)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Location {
    pub line: u32,
    pub col: u32,
}

/// The model element a diagnostic is about.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "name", rename_all = "lowercase")]
pub enum Entity {
    Model(String),
    Link(String),
    Joint(String),
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entity::Model(n) => write!(f, "model '{n}'"),
            Entity::Link(n) => write!(f, "link '{n}'"),
            Entity::Joint(n) => write!(f, "joint '{n}'"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub location: Option<Location>,
    pub entity: Option<Entity>,
    /// Short name of the violated rule, e.g. `"mass > 0"`.
    pub rule: String,
    pub message: String,
}

impl Diagnostic {
    pub(crate) fn error(rule: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            location: None,
            entity: None,
            rule: rule.into(),
            message: message.into(),
        }
    }

    pub(crate) fn warning(rule: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(rule, message)
        }
    }

    pub(crate) fn at(mut self, location: Location) -> Self {
        self.location = Some(location);
        self
    }

    pub(crate) fn on(mut self, entity: Entity) -> Self {
        self.entity = Some(entity);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `file:line:col: severity: message`
    pub fn render(&self, file: &str) -> String {
        match self.location {
            Some(Location { line, col }) => {
                format!("{file}:{line}:{col}: {}: {}", self.severity, self.message)
            }
            None => format!("{file}: {}: {}", self.severity, self.message),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(Location { line, col }) = self.location {
            write!(f, "{line}:{col}: ")?;
        }
        write!(f, "{}: {}", self.severity, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{}", render_all(.0))]
    Invalid(Vec<Diagnostic>),
}

impl ModelError {
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            ModelError::Invalid(d) => d,
        }
    }
}

fn render_all(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(Diagnostic::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
