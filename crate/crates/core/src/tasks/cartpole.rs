use std::f64::consts::PI;

use crate::env::TerminalReason;
use crate::robot::RobotInterface;
use crate::seed::{uniform, SimRng};
use crate::space::Space;

use super::{check_action, wrap_angle, Task, TaskError, TaskOptions};

pub(super) const BALANCE_ID: &str = "cartpole-balance";
pub(super) const SWINGUP_ID: &str = "cartpole-swingup";

#[derive(Debug, Clone, PartialEq)]
pub struct CartPoleBalanceParams {
    pub cart_joint: String,
    pub pole_joint: String,
    /// N, applied at `a = ±1`
    pub force_limit: f64,
    /// rad from upright
    pub theta_limit: f64,
    /// m
    pub x_limit: f64,
    pub max_steps: u64,
    /// Half-width of the uniform noise on each of `x, ẋ, θ, θ̇` at reset.
    pub init_noise: f64,
}

impl Default for CartPoleBalanceParams {
    fn default() -> Self {
        CartPoleBalanceParams {
            cart_joint: "cart_joint".into(),
            pole_joint: "pole_joint".into(),
            force_limit: 25.0,
            theta_limit: 12.0 * PI / 180.0,
            x_limit: 2.4,
            max_steps: 500,
            init_noise: 0.05,
        }
    }
}

/// Keep the pole upright. Observation `[x, ẋ, θ, θ̇]` with θ = 0 upright;
/// reward 1 per step.
#[derive(Debug, Clone)]
pub struct CartPoleBalance {
    params: CartPoleBalanceParams,
    action_space: Space,
    observation_space: Space,
}

impl CartPoleBalance {
    pub fn new(mut params: CartPoleBalanceParams, options: TaskOptions) -> Self {
        if options.exact_init {
            params.init_noise = 0.0;
        }
        assert!(
            params.force_limit > 0.0 && params.theta_limit > 0.0 && params.x_limit > 0.0,
            "cart-pole limits must be positive"
        );
        let inf = f64::INFINITY;
        let observation_space = Space::new_box(
            vec![-2.0 * params.x_limit, -inf, -2.0 * params.theta_limit, -inf],
            vec![2.0 * params.x_limit, inf, 2.0 * params.theta_limit, inf],
        )
        .expect("valid bounds");
        CartPoleBalance {
            params,
            action_space: Space::uniform_box(1, -1.0, 1.0).expect("valid bounds"),
            observation_space,
        }
    }

    pub fn params(&self) -> &CartPoleBalanceParams {
        &self.params
    }
}

/// `[x, ẋ, θ, θ̇]` read through the robot interface.
fn cart_state(
    robot: &dyn RobotInterface,
    cart: &str,
    pole: &str,
) -> Result<[f64; 4], TaskError> {
    Ok([
        robot.joint_position(cart)?,
        robot.joint_velocity(cart)?,
        robot.joint_position(pole)?,
        robot.joint_velocity(pole)?,
    ])
}

fn reset_cart(
    robot: &mut dyn RobotInterface,
    cart: &str,
    pole: &str,
    pole_angle: f64,
    noise: f64,
    rng: &mut SimRng,
) -> Result<(), TaskError> {
    let mut draw = || {
        if noise > 0.0 {
            uniform(rng, -noise, noise)
        } else {
            0.0
        }
    };
    let (x, xd, th, thd) = (draw(), draw(), draw(), draw());
    robot.reset_joint(cart, x, xd)?;
    robot.reset_joint(pole, pole_angle + th, thd)?;
    Ok(())
}

fn cart_text(s: [f64; 4]) -> String {
    format!(
        "x={:.4} x_dot={:.4} theta={:.4} theta_dot={:.4}",
        s[0], s[1], s[2], s[3]
    )
}

impl Task for CartPoleBalance {
    fn id(&self) -> &str {
        BALANCE_ID
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
        let p = &self.params;
        reset_cart(robot, &p.cart_joint, &p.pole_joint, 0.0, p.init_noise, rng)
    }

    fn set_action(
        &mut self,
        robot: &mut dyn RobotInterface,
        action: &[f64],
    ) -> Result<(), TaskError> {
        check_action(&self.action_space, action)?;
        robot.set_joint_force(&self.params.cart_joint, action[0] * self.params.force_limit)?;
        robot.set_joint_force(&self.params.pole_joint, 0.0)?;
        Ok(())
    }

    fn observation(&self, robot: &dyn RobotInterface) -> Result<Vec<f64>, TaskError> {
        Ok(cart_state(robot, &self.params.cart_joint, &self.params.pole_joint)?.to_vec())
    }

    fn reward_and_done(
        &self,
        robot: &dyn RobotInterface,
        step_index: u64,
    ) -> Result<(f64, Option<TerminalReason>), TaskError> {
        let p = &self.params;
        let [x, _, theta, _] = cart_state(robot, &p.cart_joint, &p.pole_joint)?;
        let terminal = if theta.abs() > p.theta_limit {
            Some(TerminalReason::AngleLimit)
        } else if x.abs() > p.x_limit {
            Some(TerminalReason::PositionLimit)
        } else if step_index >= p.max_steps {
            Some(TerminalReason::StepLimit)
        } else {
            None
        };
        Ok((1.0, terminal))
    }

    fn render_text(&self, robot: &dyn RobotInterface) -> Result<String, TaskError> {
        Ok(cart_text(cart_state(
            robot,
            &self.params.cart_joint,
            &self.params.pole_joint,
        )?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartPoleSwingUpParams {
    pub cart_joint: String,
    pub pole_joint: String,
    /// N, applied at `a = ±1`
    pub force_limit: f64,
    /// m
    pub x_limit: f64,
    pub max_steps: u64,
    /// Half-width of the uniform noise on each state component around the
    /// hanging rest state.
    pub init_noise: f64,
}

impl Default for CartPoleSwingUpParams {
    fn default() -> Self {
        CartPoleSwingUpParams {
            cart_joint: "cart_joint".into(),
            pole_joint: "pole_joint".into(),
            force_limit: 25.0,
            x_limit: 2.4,
            max_steps: 500,
            init_noise: 0.05,
        }
    }
}

/// Swing the pole up from hanging and hold it. Observation
/// `[x, ẋ, cos θ, sin θ, θ̇]` with θ = 0 upright; reward
/// `−(wrap(θ)² + 0.1·θ̇² + 0.001·F²)`.
#[derive(Debug, Clone)]
pub struct CartPoleSwingUp {
    params: CartPoleSwingUpParams,
    action_space: Space,
    observation_space: Space,
    force: f64,
}

impl CartPoleSwingUp {
    pub fn new(mut params: CartPoleSwingUpParams, options: TaskOptions) -> Self {
        if options.exact_init {
            params.init_noise = 0.0;
        }
        assert!(
            params.force_limit > 0.0 && params.x_limit > 0.0,
            "cart-pole limits must be positive"
        );
        let inf = f64::INFINITY;
        let observation_space = Space::new_box(
            vec![-2.0 * params.x_limit, -inf, -1.0, -1.0, -inf],
            vec![2.0 * params.x_limit, inf, 1.0, 1.0, inf],
        )
        .expect("valid bounds");
        CartPoleSwingUp {
            params,
            action_space: Space::uniform_box(1, -1.0, 1.0).expect("valid bounds"),
            observation_space,
            force: 0.0,
        }
    }

    pub fn params(&self) -> &CartPoleSwingUpParams {
        &self.params
    }
}

impl Task for CartPoleSwingUp {
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
        self.force = 0.0;
        let p = &self.params;
        reset_cart(robot, &p.cart_joint, &p.pole_joint, PI, p.init_noise, rng)
    }

    fn set_action(
        &mut self,
        robot: &mut dyn RobotInterface,
        action: &[f64],
    ) -> Result<(), TaskError> {
        check_action(&self.action_space, action)?;
        let force = action[0] * self.params.force_limit;
        robot.set_joint_force(&self.params.cart_joint, force)?;
        robot.set_joint_force(&self.params.pole_joint, 0.0)?;
        self.force = force;
        Ok(())
    }

    fn observation(&self, robot: &dyn RobotInterface) -> Result<Vec<f64>, TaskError> {
        let [x, xd, th, thd] = cart_state(robot, &self.params.cart_joint, &self.params.pole_joint)?;
        Ok(vec![x, xd, th.cos(), th.sin(), thd])
    }

    fn reward_and_done(
        &self,
        robot: &dyn RobotInterface,
        step_index: u64,
    ) -> Result<(f64, Option<TerminalReason>), TaskError> {
        let p = &self.params;
        let [x, _, th, thd] = cart_state(robot, &p.cart_joint, &p.pole_joint)?;
        let w = wrap_angle(th);
        let reward = -(w * w + 0.1 * thd * thd + 0.001 * self.force * self.force);
        let terminal = if x.abs() > p.x_limit {
            Some(TerminalReason::PositionLimit)
        } else if step_index >= p.max_steps {
            Some(TerminalReason::StepLimit)
        } else {
            None
        };
        Ok((reward, terminal))
    }

    fn render_text(&self, robot: &dyn RobotInterface) -> Result<String, TaskError> {
        Ok(cart_text(cart_state(
            robot,
            &self.params.cart_joint,
            &self.params.pole_joint,
        )?))
    }
}
