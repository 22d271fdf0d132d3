use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded random stream. `(seed, stream)` fully determines the sequence on
/// every platform; independent streams use distinct ChaCha stream ids.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// A sub-stream keyed by `label`, independent of this stream's position.
    /// Used to give each agent its own sequence so that the draw order does
    /// not depend on how the engine interleaves agents.
    pub fn fork(&self, label: u64) -> RngStream {
        let mut key = [0u8; 32];
        let mut x = splitmix64(self.seed) ^ splitmix64(label.wrapping_add(0x5851_F42D_4C95_7F2D));
        for chunk in key.chunks_mut(8) {
            x = splitmix64(x);
            chunk.copy_from_slice(&x.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream);
        RngStream { seed: self.seed, stream: self.stream, rng }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
