use rand::distr::{Distribution, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_xoshiro::Xoshiro256PlusPlus;

/// Independent random streams within one realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub(crate) enum Stream {
    Network = 1,
    Users = 2,
}

/// Generator keyed by `(master_seed, realization, attempt, stream, sub)`.
///
/// Distinct keys give independent ChaCha streams, so a realization's draws
/// do not depend on which thread runs it or in what order. `sub` separates
/// spatial tiles within the network stream.
pub(crate) fn stream_rng(master_seed: u64, realization: u64, attempt: u32, stream: Stream, sub: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&realization.to_le_bytes());
    key[16..20].copy_from_slice(&attempt.to_le_bytes());
    key[20..24].copy_from_slice(&(stream as u32).to_le_bytes());
    key[24..].copy_from_slice(&sub.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Unit-mean exponential fading on the link between a user and a base
/// station, addressed by the pair of their keys rather than drawn in
/// sequence, so it does not depend on which other links are evaluated.
pub(crate) fn link_fading(user_key: u64, bs_key: u64) -> f64 {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(user_key ^ bs_key.rotate_left(17));
    let u: f64 = Open01.sample(&mut rng);
    -u.ln()
}
