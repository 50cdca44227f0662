//! Action and observation domains.

use rand::RngCore;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::{uniform, SimRng};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("box bounds have different lengths ({low} vs {high})")]
    LengthMismatch { low: usize, high: usize },
    #[error("box bound {index} is inverted or NaN: low {low} > high {high}")]
    InvertedBounds { index: usize, low: f64, high: f64 },
    #[error("discrete space needs at least one element")]
    EmptyDiscrete,
}

/// A box of reals or a finite set `{0, .., n-1}`.
///
/// Box bounds may be infinite. Unbounded dimensions are sampled from a
/// standard normal, half-bounded ones from a shifted exponential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Space {
    Box {
        #[serde(with = "bounds")]
        low: Vec<f64>,
        #[serde(with = "bounds")]
        high: Vec<f64>,
    },
    Discrete { n: u64 },
}

impl Space {
    pub fn new_box(low: Vec<f64>, high: Vec<f64>) -> Result<Self, SpaceError> {
        if low.len() != high.len() {
            return Err(SpaceError::LengthMismatch {
                low: low.len(),
                high: high.len(),
            });
        }
        for (index, (&l, &h)) in low.iter().zip(&high).enumerate() {
            // Also rejects NaN.
            if !(l <= h) {
                return Err(SpaceError::InvertedBounds { index, low: l, high: h });
            }
        }
        Ok(Space::Box { low, high })
    }

    /// A box with the same scalar bounds on every dimension.
    pub fn uniform_box(dim: usize, low: f64, high: f64) -> Result<Self, SpaceError> {
        Space::new_box(vec![low; dim], vec![high; dim])
    }

    pub fn discrete(n: u64) -> Result<Self, SpaceError> {
        if n == 0 {
            return Err(SpaceError::EmptyDiscrete);
        }
        Ok(Space::Discrete { n })
    }

    /// Number of reals in a sample. Discrete samples are a single value.
    pub fn dim(&self) -> usize {
        match self {
            Space::Box { low, .. } => low.len(),
            Space::Discrete { .. } => 1,
        }
    }

    /// Membership test. Wrong-dimension samples are simply not members.
    pub fn contains(&self, sample: &[f64]) -> bool {
        match self {
            Space::Box { low, high } => {
                sample.len() == low.len()
                    && sample
                        .iter()
                        .zip(low.iter().zip(high))
                        .all(|(&x, (&l, &h))| l <= x && x <= h)
            }
            Space::Discrete { n } => match sample {
                [x] => x.fract() == 0.0 && *x >= 0.0 && *x < *n as f64,
                _ => false,
            },
        }
    }

    pub fn sample(&self, rng: &mut SimRng) -> Vec<f64> {
        match self {
            Space::Box { low, high } => low
                .iter()
                .zip(high)
                .map(|(&l, &h)| sample_interval(rng, l, h))
                .collect(),
            Space::Discrete { n } => vec![(rng.next_u64() % n) as f64],
        }
    }
}

fn sample_interval(rng: &mut SimRng, low: f64, high: f64) -> f64 {
    match (low.is_finite(), high.is_finite()) {
        (true, true) => uniform(rng, low, high),
        (false, false) => Distribution::<f64>::sample(&StandardNormal, rng),
        (true, false) => low + Distribution::<f64>::sample(&Exp1, rng),
        (false, true) => high - Distribution::<f64>::sample(&Exp1, rng),
    }
}

/// JSON has no infinities; unbounded dimensions are written as `"inf"` /
/// `"-inf"`.
mod bounds {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Bound {
        Finite(f64),
        Named(String),
    }

    pub fn serialize<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
        values
            .iter()
            .map(|&v| match v {
                f64::INFINITY => Bound::Named("inf".into()),
                f64::NEG_INFINITY => Bound::Named("-inf".into()),
                v => Bound::Finite(v),
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Bound>::deserialize(d)?
            .into_iter()
            .map(|b| match b {
                Bound::Finite(v) => Ok(v),
                Bound::Named(n) if n == "inf" => Ok(f64::INFINITY),
                Bound::Named(n) if n == "-inf" => Ok(f64::NEG_INFINITY),
                Bound::Named(n) => Err(D::Error::custom(format!("invalid bound {n:?}"))),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::SeedTree;

    #[test]
    fn box_membership() {
        let s = Space::new_box(vec![-1.0], vec![1.0]).unwrap();
        assert!(s.contains(&[0.0]));
        assert!(!s.contains(&[2.0]));
        assert!(!s.contains(&[0.0, 0.0]));
        assert!(!s.contains(&[f64::NAN]));
    }

    #[test]
    fn invalid_spaces_rejected() {
        assert!(matches!(
            Space::new_box(vec![0.0], vec![]),
            Err(SpaceError::LengthMismatch { .. })
        ));
        assert!(matches!(
            Space::new_box(vec![1.0], vec![0.0]),
            Err(SpaceError::InvertedBounds { index: 0, .. })
        ));
        assert_eq!(Space::discrete(0), Err(SpaceError::EmptyDiscrete));
    }

    #[test]
    fn discrete_membership() {
        let s = Space::discrete(4).unwrap();
        assert!(s.contains(&[3.0]));
        assert!(!s.contains(&[4.0]));
        assert!(!s.contains(&[1.5]));
        assert!(!s.contains(&[-1.0]));
    }

    #[test]
    fn discrete_sampling_is_uniform() {
        let s = Space::discrete(4).unwrap();
        let mut rng = SeedTree::new(11).rng("space");
        let mut counts = [0usize; 4];
        for _ in 0..10_000 {
            let x = s.sample(&mut rng);
            assert!(s.contains(&x));
            counts[x[0] as usize] += 1;
        }
        for c in counts {
            let freq = c as f64 / 10_000.0;
            assert!((0.22..=0.28).contains(&freq), "frequency {freq}");
        }
    }

    #[test]
    fn json_keeps_infinite_bounds() {
        let s = Space::new_box(vec![f64::NEG_INFINITY, -1.0], vec![f64::INFINITY, 1.0]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"kind":"box","low":["-inf",-1.0],"high":["inf",1.0]}"#);
        let back: Space = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn unbounded_dimensions_sample_inside() {
        let s = Space::new_box(
            vec![f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY],
            vec![f64::INFINITY, f64::INFINITY, 1.0],
        )
        .unwrap();
        let mut rng = SeedTree::new(1).rng("space");
        for _ in 0..1000 {
            assert!(s.contains(&s.sample(&mut rng)));
        }
    }
}
