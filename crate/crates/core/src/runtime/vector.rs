use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::env::{EnvError, Environment, Step};
use crate::seed::{env_label, SeedTree};

use super::{make, EnvOptions, SimulatedRuntime};

/// Outcome of one instance in a vector step.
#[derive(Debug, Clone, PartialEq)]
pub enum VecStep {
    Stepped(Step),
    /// The instance had finished (or failed) on the previous step; it was
    /// reset instead of stepped, and this is its fresh observation. The
    /// action given for it was ignored.
    Reset(Vec<f64>),
}

impl VecStep {
    pub fn observation(&self) -> &[f64] {
        match self {
            VecStep::Stepped(s) => &s.observation,
            VecStep::Reset(obs) => obs,
        }
    }
}

/// `n` independent environments stepped together on a fixed worker pool.
///
/// Instance `i` behaves exactly like a standalone environment seeded with
/// `SeedTree::new(master).child("env-i")`, whatever the worker count.
/// Results are returned in index order. A failing instance reports its error
/// and is reset on the next step; the others are unaffected.
pub struct VectorEnv<E: Environment> {
    envs: Vec<E>,
    needs_reset: Vec<bool>,
    pool: ThreadPool,
}

impl<E: Environment> VectorEnv<E> {
    /// `workers = 0` picks the pool size automatically.
    pub fn from_envs(envs: Vec<E>, workers: usize) -> Result<Self, EnvError> {
        if envs.is_empty() {
            return Err(EnvError::Config("a vector env needs at least one instance".into()));
        }
        let pool = ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("robogym-worker-{i}"))
            .build()
            .map_err(|e| EnvError::Config(format!("worker pool: {e}")))?;
        let n = envs.len();
        Ok(VectorEnv {
            envs,
            needs_reset: vec![true; n],
            pool,
        })
    }

    pub fn len(&self) -> usize {
        self.envs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envs.is_empty()
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn envs(&self) -> &[E] {
        &self.envs
    }

    pub fn reset(&mut self) -> Vec<Result<Vec<f64>, EnvError>> {
        let envs = &mut self.envs;
        let out: Vec<_> = self
            .pool
            .install(|| envs.par_iter_mut().map(|env| env.reset()).collect());
        for (flag, r) in self.needs_reset.iter_mut().zip(&out) {
            *flag = r.is_err();
        }
        out
    }

    pub fn step(
        &mut self,
        actions: &[Vec<f64>],
    ) -> Result<Vec<Result<VecStep, EnvError>>, EnvError> {
        if actions.len() != self.envs.len() {
            return Err(EnvError::Config(format!(
                "expected {} actions, got {}",
                self.envs.len(),
                actions.len()
            )));
        }
        let envs = &mut self.envs;
        let needs_reset = &mut self.needs_reset;
        Ok(self.pool.install(|| {
            envs.par_iter_mut()
                .zip(needs_reset.par_iter_mut())
                .zip(actions.par_iter())
                .map(|((env, reset), action)| {
                    let result = if *reset {
                        env.reset().map(VecStep::Reset)
                    } else {
                        env.step(action).map(VecStep::Stepped)
                    };
                    *reset = match &result {
                        Ok(VecStep::Stepped(s)) => s.done,
                        Ok(VecStep::Reset(_)) => false,
                        Err(_) => true,
                    };
                    result
                })
                .collect()
        }))
    }
}

impl VectorEnv<SimulatedRuntime> {
    /// `n` registered environments; instance `i` is seeded with the
    /// `env-i` child of `options.seed`.
    pub fn make(env_id: &str, options: &EnvOptions, n: usize, workers: usize) -> Result<Self, EnvError> {
        let tree = SeedTree::new(options.seed);
        let envs = (0..n)
            .map(|i| {
                make(
                    env_id,
                    &EnvOptions {
                        seed: tree.child(&env_label(i)),
                        ..options.clone()
                    },
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        VectorEnv::from_envs(envs, workers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_mismatch_rejected() {
        let mut v = VectorEnv::make("cartpole-balance", &EnvOptions::seed(1), 2, 2).unwrap();
        v.reset();
        assert!(matches!(v.step(&[vec![0.0]]), Err(EnvError::Config(_))));
    }

    #[test]
    fn distinct_initial_observations() {
        let mut v = VectorEnv::make("cartpole-balance", &EnvOptions::seed(11), 8, 3).unwrap();
        let obs: Vec<Vec<f64>> = v.reset().into_iter().map(Result::unwrap).collect();
        for i in 0..obs.len() {
            for j in 0..i {
                assert_ne!(obs[i], obs[j]);
            }
        }
    }

    #[test]
    fn single_instance_matches_plain_env() {
        let options = EnvOptions::seed(5);
        let mut v = VectorEnv::make("pendulum-swingup", &options, 1, 1).unwrap();
        let mut plain = make(
            "pendulum-swingup",
            &EnvOptions::seed(SeedTree::new(5).child("env-0")),
        )
        .unwrap();
        assert_eq!(v.reset()[0].as_ref().unwrap(), &plain.reset().unwrap());
        for k in 0..50 {
            let a = vec![((k as f64) * 0.37).sin()];
            let vs = v.step(std::slice::from_ref(&a)).unwrap().remove(0).unwrap();
            assert_eq!(vs, VecStep::Stepped(plain.step(&a).unwrap()));
        }
    }

    #[test]
    fn done_instance_resets_next_step() {
        let mut v = VectorEnv::make("cartpole-balance", &EnvOptions::seed(2), 2, 2).unwrap();
        v.reset();
        let mut saw_reset = false;
        for _ in 0..200 {
            let out = v.step(&[vec![1.0], vec![0.0]]).unwrap();
            if let Ok(VecStep::Reset(obs)) = &out[0] {
                saw_reset = true;
                assert!(obs.iter().all(|x| x.abs() <= 0.05));
                break;
            }
        }
        assert!(saw_reset);
    }
}
