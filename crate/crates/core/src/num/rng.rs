use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The one generator used everywhere.
pub type Prng = ChaCha8Rng;

/// Purpose labels for independent random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Init = 1,
    Dropout = 2,
    Shuffle = 3,
    Sampling = 4,
}

/// A seed from which labelled ChaCha8 streams are derived.
///
/// The 256-bit key is `seed ‖ index ‖ 0`; the ChaCha stream id is the label.
/// Identical `(seed, label, index)` always yields the same stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngState {
    seed: u64,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        RngState { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, label: Stream) -> Prng {
        self.substream(label, 0)
    }

    pub fn substream(&self, label: Stream, index: u64) -> Prng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&index.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(label as u64);
        rng
    }
}
