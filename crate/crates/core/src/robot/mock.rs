use std::sync::Arc;

use crate::time::{SimTime, StepSize};

use super::{
    finite, joint_index, AdvanceReport, BaseState, ControlMode, PdGains, Reference, RobotBackend,
    RobotError, RobotInterface,
};

/// Joint `(position, velocity)` pairs, one per joint, for one snapshot.
pub type MockFrame = Vec<(f64, f64)>;

/// A robot replaying a fixed script of joint snapshots.
///
/// Frame 0 is visible after `begin_episode`; each `advance` moves to the next
/// frame (the last frame repeats once the script is exhausted). Latched
/// references are recorded per advance so tests can inspect what a task
/// commanded. `reset_joint` is accepted and recorded but does not alter the
/// script.
#[derive(Debug, Clone)]
pub struct MockRobot {
    name: String,
    joint_names: Vec<String>,
    script: Arc<Vec<MockFrame>>,
    effort_limits: Vec<f64>,
    frame: usize,
    time: SimTime,
    advances: usize,
    fail_at: Option<usize>,
    references: Vec<Reference>,
    applied: Vec<Vec<Reference>>,
    resets: Vec<(String, f64, f64)>,
}

impl MockRobot {
    /// # Panics
    ///
    /// If the script is empty or a frame does not have one entry per joint.
    pub fn new(joint_names: &[&str], script: Vec<MockFrame>) -> Self {
        assert!(!script.is_empty(), "mock script needs at least one frame");
        assert!(
            script.iter().all(|f| f.len() == joint_names.len()),
            "every mock frame needs one entry per joint"
        );
        let dof = joint_names.len();
        MockRobot {
            name: "mock".into(),
            joint_names: joint_names.iter().map(|s| s.to_string()).collect(),
            script: Arc::new(script),
            effort_limits: vec![f64::INFINITY; dof],
            frame: 0,
            time: SimTime::ZERO,
            advances: 0,
            fail_at: None,
            references: vec![Reference::Force(0.0); dof],
            applied: Vec::new(),
            resets: Vec::new(),
        }
    }

    /// A script holding every joint at the same value forever.
    pub fn constant(joint_names: &[&str], position: f64, velocity: f64) -> Self {
        MockRobot::new(joint_names, vec![vec![(position, velocity); joint_names.len()]])
    }

    /// The `n`-th call to `advance` (0-based, counted over the robot's
    /// lifetime) fails with a communication error.
    pub fn failing_at(mut self, n: usize) -> Self {
        self.fail_at = Some(n);
        self
    }

    pub fn with_effort_limits(mut self, limits: Vec<f64>) -> Self {
        assert_eq!(limits.len(), self.joint_names.len());
        self.effort_limits = limits;
        self
    }

    /// References in force during each advance since the episode start.
    pub fn applied_references(&self) -> &[Vec<Reference>] {
        &self.applied
    }

    pub fn recorded_resets(&self) -> &[(String, f64, f64)] {
        &self.resets
    }

    pub fn frame_index(&self) -> usize {
        self.frame
    }

    fn current(&self, name: &str) -> Result<(f64, f64), RobotError> {
        let i = joint_index(&self.joint_names, name)?;
        Ok(self.script[self.frame][i])
    }
}

impl RobotInterface for MockRobot {
    fn name(&self) -> &str {
        &self.name
    }

    fn joint_names(&self) -> &[String] {
        &self.joint_names
    }

    fn joint_position(&self, name: &str) -> Result<f64, RobotError> {
        Ok(self.current(name)?.0)
    }

    fn joint_velocity(&self, name: &str) -> Result<f64, RobotError> {
        Ok(self.current(name)?.1)
    }

    fn joint_effort_limit(&self, name: &str) -> Result<f64, RobotError> {
        Ok(self.effort_limits[joint_index(&self.joint_names, name)?])
    }

    fn control_mode(&self, name: &str) -> Result<ControlMode, RobotError> {
        Ok(self.references[joint_index(&self.joint_names, name)?].mode())
    }

    fn set_control_mode(&mut self, name: &str, mode: ControlMode) -> Result<(), RobotError> {
        let i = joint_index(&self.joint_names, name)?;
        if self.references[i].mode() != mode {
            self.references[i] = match mode {
                ControlMode::Force => Reference::Force(0.0),
                ControlMode::PositionPd => Reference::Position {
                    target: self.script[self.frame][i].0,
                    gains: PdGains { kp: 0.0, kd: 0.0 },
                },
            };
        }
        Ok(())
    }

    fn set_joint_force(&mut self, name: &str, value: f64) -> Result<(), RobotError> {
        let i = joint_index(&self.joint_names, name)?;
        let actual = self.references[i].mode();
        if actual != ControlMode::Force {
            return Err(RobotError::ControlMode {
                joint: name.into(),
                expected: ControlMode::Force,
                actual,
            });
        }
        self.references[i] = Reference::Force(finite(name, value)?);
        Ok(())
    }

    fn set_joint_position_target(
        &mut self,
        name: &str,
        target: f64,
        gains: PdGains,
    ) -> Result<(), RobotError> {
        let i = joint_index(&self.joint_names, name)?;
        let actual = self.references[i].mode();
        if actual != ControlMode::PositionPd {
            return Err(RobotError::ControlMode {
                joint: name.into(),
                expected: ControlMode::PositionPd,
                actual,
            });
        }
        let gains = PdGains::new(gains.kp, gains.kd)?;
        self.references[i] = Reference::Position {
            target: finite(name, target)?,
            gains,
        };
        Ok(())
    }

    fn reset_joint(&mut self, name: &str, position: f64, velocity: f64) -> Result<(), RobotError> {
        joint_index(&self.joint_names, name)?;
        self.resets.push((name.to_string(), position, velocity));
        Ok(())
    }

    fn base_state(&self) -> BaseState {
        BaseState::IDENTITY
    }
}

impl RobotBackend for MockRobot {
    fn begin_episode(&mut self) -> Result<(), RobotError> {
        self.frame = 0;
        self.time = SimTime::ZERO;
        self.references.fill(Reference::Force(0.0));
        self.applied.clear();
        self.resets.clear();
        Ok(())
    }

    fn advance(&mut self, period: StepSize) -> Result<AdvanceReport, RobotError> {
        let n = self.advances;
        self.advances += 1;
        if self.fail_at == Some(n) {
            return Err(RobotError::Communication(format!(
                "scripted link failure on advance {n}"
            )));
        }
        let clamped = self
            .references
            .iter()
            .zip(&self.effort_limits)
            .any(|(r, &lim)| matches!(*r, Reference::Force(f) if f.abs() > lim));
        self.applied.push(self.references.clone());
        self.frame = (self.frame + 1).min(self.script.len() - 1);
        self.time += period;
        Ok(AdvanceReport { clamped })
    }

    fn time(&self) -> SimTime {
        self.time
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripted_reads() {
        let mut r = MockRobot::new(
            &["a"],
            vec![vec![(0.3, 0.0)], vec![(0.4, 1.0)]],
        );
        r.begin_episode().unwrap();
        assert_eq!(r.joint_position("a").unwrap(), 0.3);
        // Reads without an advance agree.
        assert_eq!(r.joint_position("a").unwrap(), r.joint_position("a").unwrap());
        let period = StepSize::from_nanos(1_000).unwrap();
        r.advance(period).unwrap();
        assert_eq!(r.joint_position("a").unwrap(), 0.4);
        assert_eq!(r.joint_velocity("a").unwrap(), 1.0);
        r.advance(period).unwrap();
        assert_eq!(r.joint_position("a").unwrap(), 0.4);
        assert_eq!(r.time(), SimTime::from_nanos(2_000));
        assert_eq!(r.joint_position("elbow"), Err(RobotError::UnknownJoint("elbow".into())));
    }

    #[test]
    fn records_latched_references() {
        let mut r = MockRobot::constant(&["a"], 0.0, 0.0);
        r.begin_episode().unwrap();
        r.set_joint_force("a", 1.0).unwrap();
        r.set_joint_force("a", 2.0).unwrap();
        r.advance(StepSize::from_nanos(1).unwrap()).unwrap();
        assert_eq!(r.applied_references(), [vec![Reference::Force(2.0)]]);
    }

    #[test]
    fn scripted_failure() {
        let mut r = MockRobot::constant(&["a"], 0.0, 0.0).failing_at(1);
        let p = StepSize::from_nanos(1).unwrap();
        r.advance(p).unwrap();
        assert!(matches!(r.advance(p), Err(RobotError::Communication(_))));
    }
}
