//! Per-trial random substreams.
//!
//! Every trial draws from its own ChaCha8 stream: the master seed selects the
//! key and the trial index selects the stream id. A trial therefore sees the
//! same numbers no matter which thread evaluates it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic RNG for `(master_seed, trial_index)`.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}
