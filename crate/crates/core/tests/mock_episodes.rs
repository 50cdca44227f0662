//! Every task runs a full episode against a scripted robot, through the
//! real-time runtime and a manual clock.

use std::f64::consts::PI;

use robogym::env::TerminalReason;
use robogym::robot::{MockFrame, MockRobot, Reference};
use robogym::runtime::{ClockPacer, MockClock, Runtime, RuntimeConfig};
use robogym::tasks::{self, TaskOptions};
use robogym::{EngineId, Environment};

fn runtime(id: &str, robot: MockRobot) -> Runtime<MockRobot, ClockPacer<MockClock>> {
    let entry = tasks::lookup(id).unwrap();
    let task = (entry.factory)(TaskOptions::default());
    let config = RuntimeConfig::new(
        entry.physics_dt(),
        entry.agent_period(),
        0.0,
        EngineId::EulerSi,
        42,
    )
    .unwrap();
    Runtime::new(id, task, robot, ClockPacer::new(MockClock::new()), config)
}

fn run_episode(env: &mut impl Environment, action: f64) -> (u64, f64, Option<TerminalReason>) {
    env.reset().unwrap();
    let mut total = 0.0;
    loop {
        let s = env.step(&[action]).unwrap();
        assert!(env.metadata().observation_space.contains(&s.observation));
        total += s.reward;
        if s.done {
            return (s.info.step_index, total, s.info.terminal);
        }
    }
}

#[test]
fn balance_runs_to_step_limit_on_a_still_robot() {
    let mut env = runtime(
        "cartpole-balance",
        MockRobot::constant(&["cart_joint", "pole_joint"], 0.0, 0.0),
    );
    assert_eq!(run_episode(&mut env, 0.4), (500, 500.0, Some(TerminalReason::StepLimit)));
    let refs = env.robot().applied_references();
    assert_eq!(refs.len(), 500);
    assert!(refs.iter().all(|r| r[0] == Reference::Force(10.0)));
}

#[test]
fn balance_stops_when_the_pole_falls() {
    let frames: Vec<MockFrame> = (0..40)
        .map(|k| vec![(0.0, 0.0), (0.01 * k as f64, 0.5)])
        .collect();
    let mut env = runtime("cartpole-balance", MockRobot::new(&["cart_joint", "pole_joint"], frames));
    let (steps, total, terminal) = run_episode(&mut env, 0.0);
    assert_eq!(terminal, Some(TerminalReason::AngleLimit));
    assert_eq!(steps, 21);
    assert_eq!(total, 21.0);
}

#[test]
fn cartpole_swingup_episode() {
    let frames: Vec<MockFrame> = (0..600)
        .map(|k| vec![(0.0, 0.0), (PI - 0.01 * k as f64, -0.5)])
        .collect();
    let mut env = runtime("cartpole-swingup", MockRobot::new(&["cart_joint", "pole_joint"], frames));
    let (steps, total, terminal) = run_episode(&mut env, -1.0);
    assert_eq!((steps, terminal), (500, Some(TerminalReason::StepLimit)));
    assert!(total < 0.0);
}

#[test]
fn pendulum_swingup_episode() {
    let frames: Vec<MockFrame> = (0..300).map(|k| vec![(0.02 * k as f64, 1.0)]).collect();
    let mut env = runtime("pendulum-swingup", MockRobot::new(&["pendulum_joint"], frames));
    let (steps, total, terminal) = run_episode(&mut env, 1.0);
    assert_eq!((steps, terminal), (200, Some(TerminalReason::StepLimit)));
    assert!(total < 0.0 && total > -200.0 * (PI * PI + 0.1 + 0.004));
    // The robot saw exactly one reset of its single joint.
    assert_eq!(env.robot().recorded_resets().len(), 1);
}
