//! Deterministic fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qbmi_core::{ImageSet, MasterKey, Mode};

pub fn image_set(n: u32, m: usize, seed: u64) -> ImageSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let area = 1usize << (2 * n);
    let images = (0..m)
        .map(|_| (0..area).map(|_| rng.gen_range(0..256u16)).collect())
        .collect();
    ImageSet::new(n, 8, images).expect("valid fixture")
}

pub fn demo_key(mode: Mode) -> MasterKey {
    MasterKey::new([49.0, 23.0, 58.0, 120.0, 237.0], 0x5eed, mode).expect("valid fixture")
}
