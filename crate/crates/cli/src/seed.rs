//! Per-task seeds derived from one master seed.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

/// The first `count` outputs of SplitMix64 started at `master`. Task `i`
/// always gets the `i`-th output, whatever order tasks run in.
pub fn derive_seeds(master: u64, count: usize) -> Vec<u64> {
    let mut sm = SplitMix64::seed_from_u64(master);
    (0..count).map(|_| sm.next_u64()).collect()
}
