//! Seeded ChaCha streams. Trial `t` of a run with master seed `s` always uses
//! stream `t` of the generator keyed by `s`, independent of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
