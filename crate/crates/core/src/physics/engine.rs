use crate::time::StepSize;

use super::{Dynamics, EngineId, PhysicsError, PhysicsState};

/// A physics backend: advances a state by one step under a constant
/// generalized force. Implementations must be pure.
pub trait Engine: Send + Sync {
    fn id(&self) -> EngineId;

    /// Returns the state after `dt`. The input is not modified; a non-finite
    /// result is reported as [`PhysicsError::Divergence`].
    fn step(
        &self,
        dynamics: &dyn Dynamics,
        state: &PhysicsState,
        force: &[f64],
        dt: StepSize,
    ) -> Result<PhysicsState, PhysicsError> {
        check_dims(dynamics.dof(), state, force)?;
        let (q, qd) = self.integrate(dynamics, &state.q, &state.qd, force, dt.as_secs_f64());
        let next = PhysicsState {
            q,
            qd,
            time: state.time + dt,
        };
        if next.is_finite() {
            Ok(next)
        } else {
            Err(PhysicsError::Divergence { state: next })
        }
    }

    /// The integration rule proper, on validated inputs.
    fn integrate(
        &self,
        dynamics: &dyn Dynamics,
        q: &[f64],
        qd: &[f64],
        force: &[f64],
        dt: f64,
    ) -> (Vec<f64>, Vec<f64>);
}

fn check_dims(dof: usize, state: &PhysicsState, force: &[f64]) -> Result<(), PhysicsError> {
    for got in [state.q.len(), state.qd.len(), force.len()] {
        if got != dof {
            return Err(PhysicsError::Dimension { expected: dof, got });
        }
    }
    Ok(())
}

/// Semi-implicit Euler: `q̇' = q̇ + dt·f(q, q̇)`, then `q' = q + dt·q̇'`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SemiImplicitEuler;

impl Engine for SemiImplicitEuler {
    fn id(&self) -> EngineId {
        EngineId::EulerSi
    }

    fn integrate(
        &self,
        dynamics: &dyn Dynamics,
        q: &[f64],
        qd: &[f64],
        force: &[f64],
        dt: f64,
    ) -> (Vec<f64>, Vec<f64>) {
        let mut qdd = vec![0.0; q.len()];
        dynamics.forward(q, qd, force, &mut qdd);
        let qd_next: Vec<f64> = qd.iter().zip(&qdd).map(|(v, a)| v + dt * a).collect();
        let q_next = q.iter().zip(&qd_next).map(|(p, v)| p + dt * v).collect();
        (q_next, qd_next)
    }
}

/// Classic fourth-order Runge–Kutta on the first-order system
/// `(q, q̇)' = (q̇, f(q, q̇))`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rk4;

impl Engine for Rk4 {
    fn id(&self) -> EngineId {
        EngineId::Rk4
    }

    fn integrate(
        &self,
        dynamics: &dyn Dynamics,
        q: &[f64],
        qd: &[f64],
        force: &[f64],
        dt: f64,
    ) -> (Vec<f64>, Vec<f64>) {
        let n = q.len();
        let deriv = |q: &[f64], qd: &[f64]| {
            let mut a = vec![0.0; n];
            dynamics.forward(q, qd, force, &mut a);
            (qd.to_vec(), a)
        };
        let offset = |base: &[f64], k: &[f64], h: f64| -> Vec<f64> {
            base.iter().zip(k).map(|(b, k)| b + h * k).collect()
        };

        let (k1q, k1v) = deriv(q, qd);
        let (k2q, k2v) = deriv(&offset(q, &k1q, dt / 2.0), &offset(qd, &k1v, dt / 2.0));
        let (k3q, k3v) = deriv(&offset(q, &k2q, dt / 2.0), &offset(qd, &k2v, dt / 2.0));
        let (k4q, k4v) = deriv(&offset(q, &k3q, dt), &offset(qd, &k3v, dt));

        let combine = |base: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| {
            (0..n)
                .map(|i| base[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect::<Vec<_>>()
        };
        (
            combine(q, &k1q, &k2q, &k3q, &k4q),
            combine(qd, &k1v, &k2v, &k3v, &k4v),
        )
    }
}

/// Steps `state` with the engine named by `engine`.
pub fn engine_step(
    engine: EngineId,
    dynamics: &dyn Dynamics,
    state: &PhysicsState,
    force: &[f64],
    dt: StepSize,
) -> Result<PhysicsState, PhysicsError> {
    engine.engine().step(dynamics, state, force, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{Pendulum, GRAVITY};
    use crate::time::SimTime;

    fn pendulum() -> Pendulum {
        Pendulum {
            mass: 1.0,
            length: 1.0,
            gravity: GRAVITY,
        }
    }

    fn state(q: f64, qd: f64) -> PhysicsState {
        PhysicsState {
            q: vec![q],
            qd: vec![qd],
            time: SimTime::ZERO,
        }
    }

    fn ms() -> StepSize {
        StepSize::from_secs_f64(1e-3).unwrap()
    }

    #[test]
    fn euler_one_step_matches_hand_evaluation() {
        // qd' = −9.81·sin(0.5)·1e-3, q' = 0.5 + 1e-3·qd'
        let next = engine_step(EngineId::EulerSi, &pendulum(), &state(0.5, 0.0), &[0.0], ms())
            .unwrap();
        assert!((next.qd[0] - -0.004703164533707231).abs() < 1e-15);
        assert!((next.q[0] - 0.4999952968354663).abs() < 1e-15);
        assert_eq!(next.time, SimTime::from_nanos(1_000_000));
    }

    #[test]
    fn equilibrium_is_fixed_for_both_engines() {
        for id in EngineId::ALL {
            let s = state(0.0, 0.0);
            let next = engine_step(id, &pendulum(), &s, &[0.0], ms()).unwrap();
            assert_eq!(next.q, s.q);
            assert_eq!(next.qd, s.qd);
            assert_eq!(next.time, SimTime::from_nanos(1_000_000));
        }
    }

    #[test]
    fn engines_agree_on_one_small_step() {
        let s = state(0.5, 0.0);
        let a = engine_step(EngineId::EulerSi, &pendulum(), &s, &[0.0], ms()).unwrap();
        let b = engine_step(EngineId::Rk4, &pendulum(), &s, &[0.0], ms()).unwrap();
        assert!((a.q[0] - b.q[0]).abs() < 1e-4);
        assert!((a.qd[0] - b.qd[0]).abs() < 1e-4);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let err = engine_step(EngineId::Rk4, &pendulum(), &state(0.0, 0.0), &[0.0, 1.0], ms());
        assert_eq!(err, Err(PhysicsError::Dimension { expected: 1, got: 2 }));
    }

    #[test]
    fn divergence_is_reported() {
        let err = engine_step(
            EngineId::EulerSi,
            &pendulum(),
            &state(0.0, 0.0),
            &[f64::INFINITY],
            ms(),
        );
        assert!(matches!(err, Err(PhysicsError::Divergence { .. })));
    }

    #[test]
    fn stepping_is_stateless() {
        let s = state(0.3, -1.2);
        for id in EngineId::ALL {
            let a = engine_step(id, &pendulum(), &s, &[0.7], ms()).unwrap();
            let b = engine_step(id, &pendulum(), &s, &[0.7], ms()).unwrap();
            assert!(a.bit_eq(&b));
        }
    }
}
