use std::f64::consts::PI;

use crate::env::TerminalReason;
use crate::robot::RobotInterface;
use crate::seed::{uniform, SimRng};
use crate::space::Space;

use super::{check_action, wrap_angle, Task, TaskError, TaskOptions};

pub(super) const SWINGUP_ID: &str = "pendulum-swingup";

#[derive(Debug, Clone, PartialEq)]
pub struct PendulumSwingUpParams {
    pub joint: String,
    /// N·m, applied at `a = ±1`
    pub torque_limit: f64,
    pub max_steps: u64,
    /// Half-width of the uniform noise on angle and rate around hanging rest.
    pub init_noise: f64,
}

impl Default for PendulumSwingUpParams {
    fn default() -> Self {
        PendulumSwingUpParams {
            joint: "pendulum_joint".into(),
            torque_limit: 2.0,
            max_steps: 200,
            init_noise: 0.05,
        }
    }
}

/// Swing a pendulum from hanging to upright.
///
/// The joint coordinate is zero when hanging; the task angle θ is measured
/// from upright, so hanging is θ = π. Observation `[cos θ, sin θ, θ̇]`;
/// reward `−(wrap(θ)² + 0.1·θ̇² + 0.001·τ²)` over a fixed horizon.
#[derive(Debug, Clone)]
pub struct PendulumSwingUp {
    params: PendulumSwingUpParams,
    action_space: Space,
    observation_space: Space,
    torque: f64,
}

impl PendulumSwingUp {
    pub fn new(mut params: PendulumSwingUpParams, options: TaskOptions) -> Self {
        if options.exact_init {
            params.init_noise = 0.0;
        }
        assert!(params.torque_limit > 0.0, "torque limit must be positive");
        let inf = f64::INFINITY;
        PendulumSwingUp {
            params,
            action_space: Space::uniform_box(1, -1.0, 1.0).expect("valid bounds"),
            observation_space: Space::new_box(vec![-1.0, -1.0, -inf], vec![1.0, 1.0, inf])
                .expect("valid bounds"),
            torque: 0.0,
        }
    }

    pub fn params(&self) -> &PendulumSwingUpParams {
        &self.params
    }

    /// Task angle (from upright) and rate.
    fn angle(&self, robot: &dyn RobotInterface) -> Result<(f64, f64), TaskError> {
        let q = robot.joint_position(&self.params.joint)?;
        let qd = robot.joint_velocity(&self.params.joint)?;
        Ok((q + PI, qd))
    }
}

impl Task for PendulumSwingUp {
    fn id(&self) -> &str {
        SWINGUP_ID
    }

    fn action_space(&self) -> &Space {
        &self.action_space
    }

    fn observation_space(&self) -> &Space {
        &self.observation_space
    }

    fn reset(
        &mut self,
        robot: &mut dyn RobotInterface,
        rng: &mut SimRng,
    ) -> Result<(), TaskError> {
        self.torque = 0.0;
        let noise = self.params.init_noise;
        let mut draw = || {
            if noise > 0.0 {
                uniform(rng, -noise, noise)
            } else {
                0.0
            }
        };
        let (q, qd) = (draw(), draw());
        robot.reset_joint(&self.params.joint, q, qd)?;
        Ok(())
    }

    fn set_action(
        &mut self,
        robot: &mut dyn RobotInterface,
        action: &[f64],
    ) -> Result<(), TaskError> {
        check_action(&self.action_space, action)?;
        let torque = action[0] * self.params.torque_limit;
        robot.set_joint_force(&self.params.joint, torque)?;
        self.torque = torque;
        Ok(())
    }

    fn observation(&self, robot: &dyn RobotInterface) -> Result<Vec<f64>, TaskError> {
        // cos(q + π) = −cos q, which is exact at rest.
        let q = robot.joint_position(&self.params.joint)?;
        let qd = robot.joint_velocity(&self.params.joint)?;
        Ok(vec![-q.cos(), -q.sin(), qd])
    }

    fn reward_and_done(
        &self,
        robot: &dyn RobotInterface,
        step_index: u64,
    ) -> Result<(f64, Option<TerminalReason>), TaskError> {
        let (theta, rate) = self.angle(robot)?;
        let w = wrap_angle(theta);
        let reward = -(w * w + 0.1 * rate * rate + 0.001 * self.torque * self.torque);
        let terminal = (step_index >= self.params.max_steps).then_some(TerminalReason::StepLimit);
        Ok((reward, terminal))
    }

    fn render_text(&self, robot: &dyn RobotInterface) -> Result<String, TaskError> {
        let (theta, rate) = self.angle(robot)?;
        Ok(format!(
            "theta={:.4} theta_dot={:.4} torque={:.4}",
            wrap_angle(theta),
            rate,
            self.torque
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robot::{MockRobot, RobotBackend};
    use crate::seed::SeedTree;
    use crate::time::StepSize;
    use proptest::prelude::*;

    fn task(exact: bool) -> PendulumSwingUp {
        PendulumSwingUp::new(
            PendulumSwingUpParams::default(),
            TaskOptions { exact_init: exact },
        )
    }

    #[test]
    fn hanging_observation() {
        let t = task(true);
        let robot = MockRobot::constant(&["pendulum_joint"], 0.0, 0.0);
        let obs = t.observation(&robot).unwrap();
        assert_eq!(obs, [-1.0, 0.0, 0.0]);
        let (r, done) = t.reward_and_done(&robot, 1).unwrap();
        assert_eq!(r, -(PI * PI));
        assert_eq!(done, None);
        assert!(t.render_text(&robot).unwrap().starts_with("theta=3.1416"));
    }

    #[test]
    fn upright_is_best() {
        let t = task(true);
        let robot = MockRobot::constant(&["pendulum_joint"], PI, 0.0);
        let (r, _) = t.reward_and_done(&robot, 1).unwrap();
        assert!(r.abs() < 1e-20);
    }

    #[test]
    fn fixed_horizon() {
        let t = task(true);
        let robot = MockRobot::constant(&["pendulum_joint"], 0.0, 0.0);
        assert_eq!(t.reward_and_done(&robot, 199).unwrap().1, None);
        assert_eq!(
            t.reward_and_done(&robot, 200).unwrap().1,
            Some(TerminalReason::StepLimit)
        );
    }

    #[test]
    fn torque_scaling() {
        let mut t = task(true);
        let mut robot = MockRobot::constant(&["pendulum_joint"], 0.0, 0.0);
        t.set_action(&mut robot, &[-0.5]).unwrap();
        robot.advance(StepSize::from_nanos(1).unwrap()).unwrap();
        assert_eq!(
            robot.applied_references()[0][0],
            crate::robot::Reference::Force(-1.0)
        );
    }

    #[test]
    fn reset_noise() {
        let mut t = task(false);
        let mut robot = MockRobot::constant(&["pendulum_joint"], 0.0, 0.0);
        let mut rng = SeedTree::new(3).rng("init");
        t.reset(&mut robot, &mut rng).unwrap();
        let (_, q, qd) = robot.recorded_resets()[0].clone();
        assert!(q.abs() <= 0.05 && qd.abs() <= 0.05);
        assert!(q != 0.0);
    }

    proptest! {
        #[test]
        fn reward_bounded_and_observation_in_space(
            q in -50.0f64..50.0, qd in -30.0f64..30.0, a in -1.0f64..1.0,
        ) {
            let mut t = task(false);
            let mut robot = MockRobot::constant(&["pendulum_joint"], q, qd);
            t.set_action(&mut robot, &[a]).unwrap();
            let (r, _) = t.reward_and_done(&robot, 1).unwrap();
            prop_assert!(r <= 0.0);
            prop_assert!(r >= -(PI * PI + 0.1 * qd * qd + 0.001 * 4.0));
            prop_assert!(t.observation_space().contains(&t.observation(&robot).unwrap()));
        }
    }
}
