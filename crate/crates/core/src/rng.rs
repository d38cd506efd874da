//! Counter-based random streams keyed by `(seed, replicate)`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Independent stream for one replicate: the seed selects the key, the
/// replicate index selects the ChaCha stream, so draws do not depend on the
/// order in which replicates are evaluated.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}
