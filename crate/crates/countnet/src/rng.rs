//! Deterministic random streams.
//!
//! Every source of randomness in the crate is a ChaCha8 stream addressed by
//! `(seed, domain, index)`. Work units (a bundle, a scene, an evaluation
//! image) each own a stream, so results are independent of worker count and
//! of the order in which parallel tasks complete.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Namespaces for derived streams. The discriminant is packed into the
/// ChaCha stream id, so two domains never collide even at equal indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum StreamDomain {
    Init = 1,
    BatchSelect = 2,
    Bundle = 3,
    Scene = 4,
    EvalKernel = 5,
    CropCurve = 6,
    Probe = 7,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Expands a user seed into a 256-bit ChaCha key.
pub fn expand_seed(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// RNG for the given work unit. The index must stay below 2^56.
pub fn stream_rng(seed: u64, domain: StreamDomain, index: u64) -> ChaCha8Rng {
    debug_assert!(index < (1 << 56), "stream index overflow");
    let mut rng = ChaCha8Rng::from_seed(expand_seed(seed));
    rng.set_stream(((domain as u64) << 56) | index);
    rng
}
