//! Keyed random streams for reproducible replications.
//!
//! Every `(base seed, replication, role)` triple maps to its own ChaCha8
//! stream, so replications can run in any order or in parallel and still
//! produce identical draws, and the environment's draws never depend on the
//! policy's.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Environment,
    Policy,
    /// Monte Carlo verification suites.
    Verify,
}

impl Role {
    fn tag(self) -> u64 {
        match self {
            Role::Environment => 0x656e_7669,
            Role::Policy => 0x706f_6c69,
            Role::Verify => 0x7665_7269,
        }
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    base: u64,
}

impl SeedTree {
    pub fn new(base: u64) -> Self {
        Self { base }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn key(&self, replication: u64, role: Role) -> u64 {
        mix(mix(mix(self.base) ^ replication) ^ role.tag())
    }

    pub fn stream(&self, replication: u64, role: Role) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        let k = self.key(replication, role);
        for (i, chunk) in seed.chunks_mut(8).enumerate() {
            chunk.copy_from_slice(&mix(k ^ i as u64).to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}
