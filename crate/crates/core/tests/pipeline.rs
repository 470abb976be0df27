use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qbmi_core::cipher::{
    decrypt, derive_schedule, diffuse, encrypt, read_ciphertext, scramble_stage1, scramble_stage2, unscramble_stage1,
    unscramble_stage2, write_ciphertext,
};
use qbmi_core::image_model::{load_manifest, pack, plan_layout, read_pgm, unpack, write_pgm};
use qbmi_core::keystream::{derive_seed, sequences_for};
use qbmi_core::{BitTensor, ImageSet, KeyTable, MasterKey, Mode};

fn random_set(rng: &mut ChaCha8Rng, n: u32, depth: u32, m: usize) -> ImageSet {
    let images = (0..m)
        .map(|_| {
            (0..1usize << (2 * n))
                .map(|_| rng.gen_range(0..1u16 << depth))
                .collect()
        })
        .collect();
    ImageSet::new(n, depth, images).unwrap()
}

fn key(rng: &mut ChaCha8Rng, mode: Mode) -> MasterKey {
    MasterKey::new(std::array::from_fn(|_| rng.gen_range(1.0..300.0)), rng.gen(), mode).unwrap()
}

fn set_strategy() -> impl Strategy<Value = ImageSet> {
    (0u32..=3, 1u32..=8, 1usize..=12).prop_flat_map(|(n, depth, m)| {
        let area = 1usize << (2 * n);
        proptest::collection::vec(proptest::collection::vec(0u16..1 << depth, area), m)
            .prop_map(move |imgs| ImageSet::new(n, depth, imgs).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pack_unpack_roundtrip(set in set_strategy()) {
        let layout = set.layout();
        let t = pack(&set);
        prop_assert_eq!(t.len(), (layout.block_count * layout.images_per_block * layout.images_per_block) << (2 * set.n()));
        prop_assert_eq!(unpack(&t, &layout, set.len()).unwrap(), set);
    }

    #[test]
    fn cipher_roundtrip(set in set_strategy(), seed in any::<u64>(), simplified in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mode = if simplified { Mode::Simplified } else { Mode::NonSimplified };
        let k = key(&mut rng, mode);
        let ct = encrypt(&set, &k).unwrap();
        prop_assert_eq!(ct.tensor.count_ones() <= ct.tensor.len(), true);
        prop_assert_eq!(decrypt(&ct, &k).unwrap(), set);
    }

    #[test]
    fn stages_invert_separately(set in set_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = key(&mut rng, Mode::NonSimplified);
        let layout = set.layout();
        let t = pack(&set);
        let sched = derive_schedule(&k, set.n(), &layout).unwrap();
        let s1 = scramble_stage1(&t, &sched).unwrap();
        prop_assert_eq!(s1.count_ones(), t.count_ones());
        prop_assert_eq!(&unscramble_stage1(&s1, &sched).unwrap(), &t);
        let s2 = scramble_stage2(&s1, &sched).unwrap();
        prop_assert_eq!(&unscramble_stage2(&s2, &sched).unwrap(), &s1);
    }
}

#[test]
fn wrong_key_does_not_decrypt() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let set = random_set(&mut rng, 3, 8, 5);
    let k = key(&mut rng, Mode::NonSimplified);
    let ct = encrypt(&set, &k).unwrap();
    let mut lambdas = k.params.lambdas();
    lambdas[2] += 1e-6;
    let other = MasterKey::new(lambdas, k.schedule_seed, k.mode).unwrap();
    assert_ne!(decrypt(&ct, &other).unwrap(), set);
    let other = MasterKey::new(k.params.lambdas(), k.schedule_seed ^ 1, k.mode).unwrap();
    assert_ne!(decrypt(&ct, &other).unwrap(), set);
}

// Keys reduced mod 2^L̂ leave the high padded bit planes untouched by diffusion.
fn encrypt_narrow(set: &ImageSet, k: &MasterKey) -> BitTensor {
    let layout = set.layout();
    let plain = pack(set);
    let seed = derive_seed(set, &plain).unwrap();
    let seqs = sequences_for(&seed, &k.params, set.n(), &layout).unwrap();
    let keys = KeyTable::build_narrow(&seqs, &layout, set.n());
    let sched = derive_schedule(k, set.n(), &layout).unwrap();
    let s2 = scramble_stage2(&scramble_stage1(&plain, &sched).unwrap(), &sched).unwrap();
    diffuse(&s2, &keys).unwrap()
}

#[test]
fn narrow_keys_halve_sensitivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut wide, mut narrow) = (0.0, 0.0);
    let trials = 20;
    for _ in 0..trials {
        let set = random_set(&mut rng, 4, 8, 8);
        let k = key(&mut rng, Mode::NonSimplified);
        let mut lambdas = k.params.lambdas();
        lambdas[0] += 1e-9;
        let k2 = MasterKey::new(lambdas, k.schedule_seed, k.mode).unwrap();
        let bits = pack(&set).len() as f64;
        wide += encrypt(&set, &k)
            .unwrap()
            .tensor
            .hamming_distance(&encrypt(&set, &k2).unwrap().tensor) as f64
            / bits;
        narrow += encrypt_narrow(&set, &k).hamming_distance(&encrypt_narrow(&set, &k2)) as f64 / bits;
    }
    let (wide, narrow) = (wide / trials as f64, narrow / trials as f64);
    // 3 of 8 planes carry key bits: expected 3/16 of bits flip
    assert!((narrow - 3.0 / 16.0).abs() < 0.02, "narrow {narrow}");
    assert!((wide - 0.5).abs() < 0.02, "wide {wide}");
}

#[test]
fn ciphertext_file_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let set = random_set(&mut rng, 2, 6, 3);
    let k = key(&mut rng, Mode::Simplified);
    let ct = encrypt(&set, &k).unwrap();
    let bytes = write_ciphertext(&ct);
    assert!(bytes.starts_with(b"QBMI-CIPHERTEXT 1\n"));
    let back = read_ciphertext(&bytes).unwrap();
    assert_eq!(back, ct);
    assert_eq!(decrypt(&back, &k).unwrap(), set);
    assert!(read_ciphertext(&bytes[..bytes.len() - 1]).is_err());
    assert!(read_ciphertext(b"not a ciphertext").is_err());
}

#[test]
fn key_file_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let k = key(&mut rng, Mode::NonSimplified);
    let text = k.to_toml();
    assert_eq!(MasterKey::from_toml(&text).unwrap(), k);
    assert!(MasterKey::from_toml("lambdas = [\"0.5\"]").is_err());
}

#[test]
fn pgm_and_manifest() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dir = tempfile::tempdir().unwrap();
    let set = random_set(&mut rng, 3, 8, 3);
    let mut manifest = String::new();
    for (i, img) in set.images().iter().enumerate() {
        let path = dir.path().join(format!("im{i}.pgm"));
        write_pgm(&path, 3, img).unwrap();
        assert_eq!(read_pgm(&path).unwrap(), (3, img.clone()));
        manifest.push_str(&format!("im{i}.pgm\n"));
    }
    let mpath = dir.path().join("list.txt");
    std::fs::write(&mpath, manifest).unwrap();
    assert_eq!(load_manifest(&mpath).unwrap(), set);
    assert!(read_pgm(&dir.path().join("missing.pgm")).unwrap_err().is_io());
}

#[test]
fn layout_examples() {
    for (m, ipb, blocks) in [(1, 8, 1), (8, 8, 1), (9, 8, 2), (64, 8, 8), (200, 8, 32)] {
        let l = plan_layout(m, 8).unwrap();
        assert_eq!((l.images_per_block, l.block_count), (ipb, blocks), "M={m}");
        assert_eq!(l.blank_count, l.padded_total - m as usize);
    }
}
