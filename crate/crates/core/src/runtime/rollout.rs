use crate::env::{EnvError, Environment, TerminalReason};
use crate::record::StepRecord;
use crate::seed::{SeedTree, SimRng, LABEL_POLICY};
use crate::space::Space;

/// Source of actions for a rollout.
#[derive(Debug, Clone)]
pub enum Policy {
    /// All-zero actions.
    Zero,
    /// Uniform samples of the action space from the `policy` stream.
    Random(Box<SimRng>),
    /// A fixed action sequence, consumed in order.
    Script { actions: Vec<Vec<f64>>, next: usize },
}

impl Policy {
    pub fn random(master_seed: u64) -> Self {
        Policy::Random(Box::new(SeedTree::new(master_seed).rng(LABEL_POLICY)))
    }

    pub fn script(actions: Vec<Vec<f64>>) -> Self {
        Policy::Script { actions, next: 0 }
    }

    /// `n` actions drawn like [`Policy::random`] would draw them.
    pub fn random_script(master_seed: u64, space: &Space, n: usize) -> Vec<Vec<f64>> {
        let mut rng = SeedTree::new(master_seed).rng(LABEL_POLICY);
        (0..n).map(|_| space.sample(&mut rng)).collect()
    }

    pub fn next_action(&mut self, space: &Space) -> Result<Vec<f64>, EnvError> {
        match self {
            Policy::Zero => Ok(vec![0.0; space.dim()]),
            Policy::Random(rng) => Ok(space.sample(rng.as_mut())),
            Policy::Script { actions, next } => {
                let action = actions.get(*next).cloned().ok_or_else(|| {
                    EnvError::Config(format!("action script exhausted after {} actions", actions.len()))
                })?;
                *next += 1;
                Ok(action)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub steps: u64,
    pub total_reward: f64,
    /// `None` when the rollout ended mid-episode.
    pub terminal: Option<TerminalReason>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Rollout {
    pub records: Vec<StepRecord>,
    pub episodes: Vec<EpisodeSummary>,
}

impl Rollout {
    pub fn total_reward(&self) -> f64 {
        self.episodes.iter().map(|e| e.total_reward).sum()
    }
}

/// Runs `steps` environment steps from a fresh reset, resetting again after
/// every terminal step.
pub fn rollout<E: Environment + ?Sized>(
    env: &mut E,
    policy: &mut Policy,
    steps: usize,
) -> Result<Rollout, EnvError> {
    let space = env.metadata().action_space.clone();
    let mut out = Rollout::default();
    let mut episode = EpisodeSummary {
        steps: 0,
        total_reward: 0.0,
        terminal: None,
    };
    let mut needs_reset = true;
    for _ in 0..steps {
        if needs_reset {
            env.reset()?;
            needs_reset = false;
        }
        let action = policy.next_action(&space)?;
        let step = env.step(&action)?;
        episode.steps += 1;
        episode.total_reward += step.reward;
        out.records.push(StepRecord {
            t: step.info.sim_time.as_secs_f64(),
            observation: step.observation,
            action,
            reward: step.reward,
            done: step.done,
        });
        if step.done {
            episode.terminal = step.info.terminal;
            out.episodes.push(std::mem::replace(
                &mut episode,
                EpisodeSummary {
                    steps: 0,
                    total_reward: 0.0,
                    terminal: None,
                },
            ));
            needs_reset = true;
        }
    }
    if episode.steps > 0 {
        out.episodes.push(episode);
    }
    Ok(out)
}
