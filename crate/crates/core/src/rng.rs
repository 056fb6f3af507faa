//! Seeded random streams.
//!
//! Every trial derives one independent ChaCha stream per consumer from its
//! seed, so switching the LLM filter on or off never shifts the draws seen by
//! the environment or the walk chain.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Named consumers of randomness inside a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Environment = 1,
    Walk = 2,
    Sampler = 3,
    Oracle = 4,
}

pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

pub fn substream(seed: u64, stream: Stream) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn draws(mut rng: SimRng) -> Vec<u64> {
        (0..4).map(|_| rng.random()).collect()
    }

    #[test]
    fn substreams_are_distinct_and_reproducible() {
        let a = draws(substream(7, Stream::Environment));
        assert_eq!(a, draws(substream(7, Stream::Environment)));
        assert_ne!(a, draws(substream(7, Stream::Walk)));
        assert_ne!(a, draws(substream(8, Stream::Environment)));
    }
}
