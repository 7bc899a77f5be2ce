//! Named, independently seeded random streams.
//!
//! Each concern of a run (key material, slot phases, mobility, traffic
//! payloads, per-node nonces/padding/cover, adversarial emitters) draws from
//! its own ChaCha20 stream derived from the scenario seed, so changing the
//! amount of randomness one concern consumes never perturbs another.

use rand_chacha::ChaCha20Rng;
use rand_core::SeedableRng;
use sha2::{Digest, Sha256};

/// A concern that owns a random stream.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Stream {
    Keys,
    Phases,
    Mobility,
    Traffic,
    /// Nonces, padding and cover frames of one node.
    Node(u32),
    /// Frames emitted by one adversarial garbage emitter.
    Garbage(u32),
    /// Fold assignment of the distinguishing classifier.
    Classifier,
    /// Free-form stream for tests and tools.
    Custom(u32),
}

impl Stream {
    fn tag(self) -> (u8, u32) {
        match self {
            Stream::Keys => (1, 0),
            Stream::Phases => (2, 0),
            Stream::Mobility => (3, 0),
            Stream::Traffic => (4, 0),
            Stream::Node(i) => (5, i),
            Stream::Garbage(i) => (6, i),
            Stream::Classifier => (7, 0),
            Stream::Custom(i) => (8, i),
        }
    }
}

/// Derives the stream for `concern` from `seed`.
pub fn stream(seed: u64, concern: Stream) -> ChaCha20Rng {
    let (tag, index) = concern.tag();
    let mut hasher = Sha256::new();
    hasher.update(b"adtn-stream-v1");
    hasher.update(seed.to_be_bytes());
    hasher.update([tag]);
    hasher.update(index.to_be_bytes());
    let digest: [u8; 32] = hasher.finalize().into();
    ChaCha20Rng::from_seed(digest)
}
