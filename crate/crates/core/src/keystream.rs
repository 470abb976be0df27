//! Plaintext-dependent seeding and Chebyshev-product key derivation.

use rayon::prelude::*;

use crate::chaos::{chebyshev, generate_sequences, ChaoticSequences, ScmParams, ScmState};
use crate::error::Result;
use crate::image_model::{BitTensor, BlockLayout, ImageSet};

const SCALE: f64 = 1e10;

fn frac(v: f64) -> f64 {
    v - v.floor()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seed {
    pub x0: f64,
    pub y0: f64,
    pub z0: f64,
    pub t0: f64,
    pub w0: f64,
    pub alpha: u64,
    pub beta: u64,
}

impl Seed {
    /// Everything else follows from x0, α and β, so these three are all a
    /// receiver needs.
    pub fn from_parts(x0: f64, alpha: u64, beta: u64) -> Result<Self> {
        let z0 = frac(x0 * 1e3);
        Ok(Self {
            x0,
            y0: chebyshev(alpha, x0)?,
            z0,
            t0: chebyshev(beta, z0)?,
            w0: frac((x0 + z0) * 1e3),
            alpha,
            beta,
        })
    }

    pub fn state(&self) -> ScmState {
        ScmState::new([self.x0, self.y0, self.z0, self.t0, self.w0])
    }
}

/// Normalized total intensity in [0, 1].
pub fn intensity_seed(set: &ImageSet) -> f64 {
    let total: u64 = set.images().iter().flatten().map(|&v| u64::from(v)).sum();
    let area = 1u64 << (2 * set.n());
    let denom = set.len() as u64 * area * ((1u64 << set.depth()) - 1);
    total as f64 / denom as f64
}

/// Floors of the mean and mean square of the per-pixel one counts.
pub fn alpha_beta(tensor: &BitTensor) -> (u64, u64) {
    let side = tensor.side();
    let area = side * side;
    let mut s = vec![0u64; area];
    for plane in tensor.bits().chunks_exact(area) {
        for (acc, &b) in s.iter_mut().zip(plane) {
            *acc += u64::from(b);
        }
    }
    let sum: u64 = s.iter().sum();
    let sq: u64 = s.iter().map(|v| v * v).sum();
    (sum / area as u64, sq / area as u64)
}

pub fn derive_seed(set: &ImageSet, tensor: &BitTensor) -> Result<Seed> {
    let (alpha, beta) = alpha_beta(tensor);
    Seed::from_parts(intensity_seed(set), alpha, beta)
}

/// Lengths (2^n, 2^n, 2^L̂, blocks) of the four key sequences.
pub fn sequence_lengths(n: u32, layout: &BlockLayout) -> [usize; 4] {
    [1 << n, 1 << n, layout.images_per_block, layout.block_count]
}

pub fn sequences_for(seed: &Seed, params: &ScmParams, n: u32, layout: &BlockLayout) -> Result<ChaoticSequences> {
    generate_sequences(seed.state(), params, sequence_lengths(n, layout))
}

/// Reversed, wrapped lookup position for entry `i` of a sequence of `len`.
fn mirror(len: usize, i: usize) -> usize {
    (len - i + 1) % len
}

/// |T_{n_i}(y) T_{k_j}(x) T_{r_m}(t) T_{s_b}(z)| for position (b, m, i, j).
pub fn chebyshev_product(seqs: &ChaoticSequences, b: usize, m: usize, i: usize, j: usize) -> f64 {
    let t = |k: usize, v: f64| chebyshev(k as u64, v).expect("sequence values lie in [-1, 1]");
    let p = t(seqs.ns[i], seqs.ys[mirror(seqs.ys.len(), i)])
        * t(seqs.ks[j], seqs.xs[mirror(seqs.xs.len(), j)])
        * t(seqs.rs[m], seqs.ts[mirror(seqs.ts.len(), b)])
        * t(seqs.ss[b], seqs.zs[mirror(seqs.zs.len(), m)]);
    p.abs()
}

/// floor(|product| · 10^10) mod 2^width.
pub fn key_from_product(product: f64, width: u32) -> u32 {
    let scaled = (product * SCALE).floor() as u64;
    (scaled & ((1u64 << width) - 1)) as u32
}

/// Key for position (b, m, i, j), one bit per padded bit plane.
pub fn key_bits(seqs: &ChaoticSequences, layout: &BlockLayout, b: usize, m: usize, i: usize, j: usize) -> u32 {
    key_from_product(chebyshev_product(seqs, b, m, i, j), layout.images_per_block as u32)
}

/// Key reduced mod 2^L̂ instead: it only reaches the low L̂ bit planes.
pub fn key_bits_narrow(seqs: &ChaoticSequences, layout: &BlockLayout, b: usize, m: usize, i: usize, j: usize) -> u32 {
    key_from_product(chebyshev_product(seqs, b, m, i, j), layout.plane_exp())
}

/// Every key of a layout, indexed by (block, image, x, y).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyTable {
    n: u32,
    images_per_block: usize,
    keys: Vec<u32>,
}

impl KeyTable {
    pub fn build(seqs: &ChaoticSequences, layout: &BlockLayout, n: u32) -> Self {
        Self::build_with(seqs, layout, n, key_bits)
    }

    pub fn build_narrow(seqs: &ChaoticSequences, layout: &BlockLayout, n: u32) -> Self {
        Self::build_with(seqs, layout, n, key_bits_narrow)
    }

    fn build_with(
        seqs: &ChaoticSequences,
        layout: &BlockLayout,
        n: u32,
        f: fn(&ChaoticSequences, &BlockLayout, usize, usize, usize, usize) -> u32,
    ) -> Self {
        let side = 1usize << n;
        let ipb = layout.images_per_block;
        let keys = (0..layout.block_count * ipb * side * side)
            .into_par_iter()
            .map(|idx| {
                let j = idx % side;
                let i = idx / side % side;
                let m = idx / (side * side) % ipb;
                let b = idx / (side * side * ipb);
                f(seqs, layout, b, m, i, j)
            })
            .collect();
        Self {
            n,
            images_per_block: ipb,
            keys,
        }
    }

    pub fn zeros(n: u32, layout: &BlockLayout) -> Self {
        let len = (layout.block_count * layout.images_per_block) << (2 * n);
        Self {
            n,
            images_per_block: layout.images_per_block,
            keys: vec![0; len],
        }
    }

    #[inline]
    pub fn get(&self, b: usize, m: usize, i: usize, j: usize) -> u32 {
        self.keys[((((b * self.images_per_block + m) << self.n) + i) << self.n) + j]
    }

    pub fn set(&mut self, b: usize, m: usize, i: usize, j: usize, k: u32) {
        let idx = ((((b * self.images_per_block + m) << self.n) + i) << self.n) + j;
        self.keys[idx] = k;
    }

    pub fn keys(&self) -> &[u32] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Fraction of entries that differ from `other`.
    pub fn difference(&self, other: &KeyTable) -> f64 {
        assert_eq!(self.keys.len(), other.keys.len(), "key tables of different size");
        let diff = self.keys.iter().zip(&other.keys).filter(|(a, b)| a != b).count();
        diff as f64 / self.keys.len() as f64
    }
}
