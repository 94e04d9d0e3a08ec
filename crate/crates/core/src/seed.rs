//! Deterministic seed derivation.
//!
//! One base seed drives every stochastic stage; child seeds are derived by
//! hashing the base with a label or an index, so adding a stage never shifts
//! the random streams of the others.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type Rng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for a named stage, e.g. `derive_seed(base, "split")`.
pub fn derive_seed(base: u64, label: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    splitmix64(base ^ splitmix64(h))
}

/// Child seed for the `index`-th item of a batch.
pub fn derive_seed_index(base: u64, index: u64) -> u64 {
    splitmix64(splitmix64(base) ^ index.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seeded random permutation of `0..n`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_from_seed(seed));
    idx
}

/// Seeded split of `items` into a leading `fraction` and the rest, each in
/// ascending order of their position in `items`.
pub fn split_fraction<T: Copy>(items: &[T], fraction: f64, seed: u64) -> (Vec<T>, Vec<T>) {
    let n = items.len();
    let n_first = ((fraction * n as f64).round() as usize).min(n);
    let perm = permutation(n, seed);
    let (mut a, mut b): (Vec<usize>, Vec<usize>) = (perm[..n_first].to_vec(), perm[n_first..].to_vec());
    a.sort_unstable();
    b.sort_unstable();
    (a.iter().map(|&i| items[i]).collect(), b.iter().map(|&i| items[i]).collect())
}
