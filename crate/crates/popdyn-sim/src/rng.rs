//! Seeded, stream-partitioned random number generation.
//!
//! Every random draw in the workspace comes from a ChaCha8 generator
//! keyed by a user-supplied base seed, with ChaCha's 64-bit stream field
//! carving the key's output space into independent substreams:
//!
//! ```text
//! stream = (domain << 48) | index
//! ```
//!
//! `domain` names the purpose (setting sampling, per-trajectory simulation,
//! noise, ...) and `index` the unit of work, e.g. the trajectory number.
//! Because a generator never depends on how work was scheduled, results
//! are identical for any worker count. The scheme is fixed: changing it
//! changes every downstream artifact.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tag baked into the stream id; values are stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum StreamDomain {
    /// Initial settings of a dataset (one index per setting).
    Settings = 0,
    /// Hidden-species resampling (one index per replica).
    HiddenInit = 1,
    /// Trajectory simulation (one index per trajectory).
    Simulate = 2,
    /// Generator noise draws.
    Noise = 3,
    /// The training loop's batch/noise/dropout sequence.
    Train = 4,
    /// Network weight initialization.
    Init = 5,
    /// Permutations in statistical tests.
    Permute = 6,
}

const INDEX_BITS: u32 = 48;

/// Generator for (base seed, domain, index). Panics if `index` needs more
/// than 48 bits, which no supported workload approaches.
pub fn stream_rng(base_seed: u64, domain: StreamDomain, index: u64) -> ChaCha8Rng {
    assert!(index < (1 << INDEX_BITS), "stream index {index} exceeds 48 bits");
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(((domain as u64) << INDEX_BITS) | index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_independent_and_reproducible() {
        let mut a = stream_rng(7, StreamDomain::Simulate, 0);
        let mut a2 = stream_rng(7, StreamDomain::Simulate, 0);
        let mut b = stream_rng(7, StreamDomain::Simulate, 1);
        let mut c = stream_rng(7, StreamDomain::Noise, 0);
        let xa: u64 = a.random();
        assert_eq!(xa, a2.random::<u64>());
        assert_ne!(xa, b.random::<u64>());
        assert_ne!(xa, c.random::<u64>());
    }

    #[test]
    fn base_seed_matters() {
        let mut a = stream_rng(1, StreamDomain::Settings, 0);
        let mut b = stream_rng(2, StreamDomain::Settings, 0);
        assert_ne!(a.random::<u64>(), b.random::<u64>());
    }
}
