use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Seeded random stream identified by `(seed, label)`.
///
/// The generator state is a ChaCha8 stream keyed by `SHA-256(seed ‖ label)`,
/// so the same pair yields the same sequence on every platform. Substreams
/// made with [`RngStream::derive`] are keyed the same way from the joined
/// label and never share state with their parent.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    label: String,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, label: impl Into<String>) -> Self {
        let label = label.into();
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update(label.as_bytes());
        let key: [u8; 32] = hasher.finalize().into();
        RngStream {
            seed,
            label,
            inner: ChaCha8Rng::from_seed(key),
        }
    }

    /// Independent stream labelled `"{label}/{sub}"` under the same seed.
    pub fn derive(&self, sub: &str) -> RngStream {
        RngStream::new(self.seed, format!("{}/{}", self.label, sub))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
