//! Two-stage baker-map scrambling, keystream diffusion, and the file formats
//! that carry keys and ciphertexts.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use num_bigint::{BigUint, RandBigInt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baker::{enumerate_admissible, AdmissibleRanker, BakerPartition, Permutation};
use crate::chaos::ScmParams;
use crate::error::{Error, Result};
use crate::image_model::{pack, plan_layout, unpack, BitTensor, BlockLayout, ImageSet};
use crate::keystream::{derive_seed, sequences_for, KeyTable, Seed};

pub const MAX_ITERATIONS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Simplified,
    NonSimplified,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Simplified => "simplified",
            Mode::NonSimplified => "non_simplified",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simplified" => Ok(Mode::Simplified),
            "non_simplified" => Ok(Mode::NonSimplified),
            _ => Err(Error::Parse(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MasterKey {
    pub params: ScmParams,
    pub schedule_seed: u64,
    pub mode: Mode,
}

impl MasterKey {
    pub fn new(lambdas: [f64; 5], schedule_seed: u64, mode: Mode) -> Result<Self> {
        Ok(Self {
            params: ScmParams::new(lambdas)?,
            schedule_seed,
            mode,
        })
    }

    pub fn to_toml(&self) -> String {
        let file = KeyFile {
            lambdas: self.params.lambdas().iter().map(|l| format!("{l:?}")).collect(),
            schedule_seed: self.schedule_seed.to_string(),
            mode: self.mode,
            arithmetic: Some("f64".into()),
        };
        toml::to_string(&file).expect("key file serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: KeyFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if let Some(a) = &file.arithmetic {
            if a != "f64" {
                return Err(Error::Parse(format!("unsupported arithmetic {a:?}")));
            }
        }
        let lambdas: Vec<f64> = file
            .lambdas
            .iter()
            .map(|s| s.trim().parse().map_err(|_| Error::Parse(format!("bad lambda {s:?}"))))
            .collect::<Result<_>>()?;
        let lambdas: [f64; 5] = lambdas
            .try_into()
            .map_err(|v: Vec<f64>| Error::Parse(format!("expected 5 lambdas, got {}", v.len())))?;
        let schedule_seed = file
            .schedule_seed
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad schedule_seed {:?}", file.schedule_seed)))?;
        Self::new(lambdas, schedule_seed, file.mode)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// On-disk key: reals and the 64-bit seed as decimal strings.
#[derive(Debug, Serialize, Deserialize)]
struct KeyFile {
    lambdas: Vec<String>,
    schedule_seed: String,
    mode: Mode,
    #[serde(default)]
    arithmetic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub partition: BakerPartition,
    pub r: u32,
}

/// Per-position baker parameters for both scrambling stages.
///
/// Stage 1 positions are (x, y, t), flattened as `(t * side + y) * side + x`;
/// stage 2 positions are (l, m, t), flattened as `(t * planes + m) * planes + l`.
/// In simplified mode each stage holds a single entry shared by all positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeySchedule {
    pub mode: Mode,
    pub n: u32,
    pub lhat: u32,
    pub block_count: usize,
    stage1_partitions: Vec<BakerPartition>,
    stage1: Vec<(u32, u32)>,
    stage2: Vec<ScheduleEntry>,
}

impl KeySchedule {
    /// Uses `p1` on every (m, l) plane and `p2` on every pixel plane.
    pub fn uniform(n: u32, layout: &BlockLayout, p1: ScheduleEntry, p2: ScheduleEntry) -> Result<Self> {
        let lhat = layout.plane_exp();
        if p1.partition.n() != lhat || p2.partition.n() != n {
            return Err(Error::Dimension("schedule partitions do not fit the squares".into()));
        }
        if !p1.partition.is_admissible() || !p2.partition.is_admissible() {
            return Err(Error::Invalid("schedule partitions must be admissible".into()));
        }
        Ok(Self {
            mode: Mode::Simplified,
            n,
            lhat,
            block_count: layout.block_count,
            stage1_partitions: vec![p1.partition],
            stage1: vec![(0, p1.r)],
            stage2: vec![p2],
        })
    }

    pub fn stage1_positions(&self) -> usize {
        self.block_count << (2 * self.n)
    }

    pub fn stage2_positions(&self) -> usize {
        self.block_count << (2 * self.lhat)
    }

    pub fn stage1(&self, x: usize, y: usize, t: usize) -> ScheduleEntry {
        let (rank, r) = self.stage1[self.slot1(x, y, t)];
        ScheduleEntry {
            partition: self.stage1_partitions[rank as usize].clone(),
            r,
        }
    }

    pub fn stage2(&self, l: usize, m: usize, t: usize) -> &ScheduleEntry {
        &self.stage2[self.slot2(l, m, t)]
    }

    fn slot1(&self, x: usize, y: usize, t: usize) -> usize {
        if self.stage1.len() == 1 {
            0
        } else {
            (((t << self.n) + y) << self.n) + x
        }
    }

    fn slot2(&self, l: usize, m: usize, t: usize) -> usize {
        if self.stage2.len() == 1 {
            0
        } else {
            (((t << self.lhat) + m) << self.lhat) + l
        }
    }
}

fn position_rng(seed: u64, stage: u64, position: u64) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stage.to_le_bytes());
    key[16..24].copy_from_slice(&position.to_le_bytes());
    ChaCha20Rng::from_seed(key)
}

/// Draws (partition rank, iteration count) for one position.
fn draw(rng: &mut ChaCha20Rng, count: &BigUint) -> (BigUint, u32) {
    let idx = rng.gen_biguint_below(count);
    (idx, rng.gen_range(1..=MAX_ITERATIONS))
}

pub fn derive_schedule(key: &MasterKey, n: u32, layout: &BlockLayout) -> Result<KeySchedule> {
    let lhat = layout.plane_exp();
    let small = enumerate_admissible(lhat)?;
    let ranker = AdmissibleRanker::new(n)?;
    let count1 = BigUint::from(small.len());
    let (n1, n2) = match key.mode {
        Mode::Simplified => (1, 1),
        Mode::NonSimplified => (layout.block_count << (2 * n), layout.block_count << (2 * lhat)),
    };
    let seed = key.schedule_seed;
    let stage1 = (0..n1)
        .into_par_iter()
        .map(|pos| {
            let (idx, r) = draw(&mut position_rng(seed, 1, pos as u64), &count1);
            (u32::try_from(idx).expect("small partition rank"), r)
        })
        .collect();
    let stage2 = (0..n2)
        .into_par_iter()
        .map(|pos| {
            let (idx, r) = draw(&mut position_rng(seed, 2, pos as u64), ranker.count());
            ranker.unrank(&idx).map(|partition| ScheduleEntry { partition, r })
        })
        .collect::<Result<_>>()?;
    Ok(KeySchedule {
        mode: key.mode,
        n,
        lhat,
        block_count: layout.block_count,
        stage1_partitions: small,
        stage1,
        stage2,
    })
}

fn entry_table(e: &ScheduleEntry) -> Permutation {
    e.partition.permutation().pow(e.r)
}

fn check_shape(tensor: &BitTensor, sched: &KeySchedule) -> Result<()> {
    if tensor.n() != sched.n || tensor.lhat() != sched.lhat || tensor.block_count() != sched.block_count {
        return Err(Error::Dimension("tensor does not match the key schedule".into()));
    }
    Ok(())
}

/// Permutes the (m, l) bits of every pixel. Point (x, y) of the small
/// square is (m, l).
fn stage1(tensor: &BitTensor, sched: &KeySchedule, forward: bool) -> Result<BitTensor> {
    check_shape(tensor, sched)?;
    let mut tables: HashMap<(u32, u32), Permutation> = HashMap::new();
    for &(rank, r) in &sched.stage1 {
        tables.entry((rank, r)).or_insert_with(|| {
            let e = ScheduleEntry {
                partition: sched.stage1_partitions[rank as usize].clone(),
                r,
            };
            let t = entry_table(&e);
            if forward {
                t
            } else {
                t.inverse()
            }
        });
    }
    let side = tensor.side();
    let area = side * side;
    let planes = tensor.planes();
    let block = planes * planes * area;
    let mut out = tensor.clone();
    out.bits_mut().par_chunks_mut(block).enumerate().for_each(|(t, dst)| {
        let src = &tensor.bits()[t * block..(t + 1) * block];
        for p in 0..area {
            let (yy, xx) = (p / side, p % side);
            let slot = sched.slot1(xx, yy, t);
            let table = &tables[&sched.stage1[slot]];
            for idx in 0..planes * planes {
                dst[table.apply(idx as u32) as usize * area + p] = src[idx * area + p];
            }
        }
    });
    Ok(out)
}

/// Permutes the pixels of every (l, m, t) plane. Pixel (x, y) maps to
/// baker index `(x << n) | y`.
fn stage2(tensor: &BitTensor, sched: &KeySchedule, forward: bool) -> Result<BitTensor> {
    check_shape(tensor, sched)?;
    let n = tensor.n();
    let side = tensor.side();
    let area = side * side;
    let planes = tensor.planes();
    let prepare = |e: &ScheduleEntry| {
        let t = entry_table(e);
        let t = if forward { t } else { t.inverse() };
        // re-express the table on storage positions y * side + x
        let mut pos = vec![0u32; area];
        for (idx, &img) in t.table().iter().enumerate() {
            let (x, y) = (idx >> n, idx & (side - 1));
            let (x2, y2) = ((img >> n) as usize, img as usize & (side - 1));
            pos[y * side + x] = (y2 * side + x2) as u32;
        }
        pos
    };
    let shared = (sched.stage2.len() == 1).then(|| prepare(&sched.stage2[0]));
    let mut out = tensor.clone();
    out.bits_mut().par_chunks_mut(area).enumerate().for_each(|(k, dst)| {
        let src = &tensor.bits()[k * area..(k + 1) * area];
        let own;
        let table = match &shared {
            Some(t) => t,
            None => {
                let (l, m, t) = (k % planes, k / planes % planes, k / (planes * planes));
                own = prepare(sched.stage2(l, m, t));
                &own
            }
        };
        for (p, &bit) in src.iter().enumerate() {
            dst[table[p] as usize] = bit;
        }
    });
    Ok(out)
}

pub fn scramble_stage1(tensor: &BitTensor, sched: &KeySchedule) -> Result<BitTensor> {
    stage1(tensor, sched, true)
}

pub fn unscramble_stage1(tensor: &BitTensor, sched: &KeySchedule) -> Result<BitTensor> {
    stage1(tensor, sched, false)
}

pub fn scramble_stage2(tensor: &BitTensor, sched: &KeySchedule) -> Result<BitTensor> {
    stage2(tensor, sched, true)
}

pub fn unscramble_stage2(tensor: &BitTensor, sched: &KeySchedule) -> Result<BitTensor> {
    stage2(tensor, sched, false)
}

/// XORs bit l of the key at (t, m, x, y) into bit (t, m, x, y, l).
pub fn diffuse(tensor: &BitTensor, keys: &KeyTable) -> Result<BitTensor> {
    let side = tensor.side();
    let area = side * side;
    let planes = tensor.planes();
    if keys.len() != tensor.block_count() * planes * area {
        return Err(Error::Dimension("key table does not cover the tensor".into()));
    }
    let mut out = tensor.clone();
    out.bits_mut().par_chunks_mut(area).enumerate().for_each(|(k, plane)| {
        let (l, m, t) = (k % planes, k / planes % planes, k / (planes * planes));
        for (p, bit) in plane.iter_mut().enumerate() {
            let (yy, xx) = (p / side, p % side);
            *bit ^= ((keys.get(t, m, xx, yy) >> l) & 1) as u8;
        }
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ciphertext {
    pub n: u32,
    pub depth: u32,
    pub image_count: usize,
    pub mode: Mode,
    pub x0: f64,
    pub alpha: u64,
    pub beta: u64,
    pub tensor: BitTensor,
}

impl Ciphertext {
    pub fn layout(&self) -> Result<BlockLayout> {
        plan_layout(self.image_count as u64, self.depth)
    }
}

fn keys_for(seed: &Seed, key: &MasterKey, n: u32, layout: &BlockLayout) -> Result<KeyTable> {
    let seqs = sequences_for(seed, &key.params, n, layout)?;
    Ok(KeyTable::build(&seqs, layout, n))
}

pub fn encrypt(set: &ImageSet, key: &MasterKey) -> Result<Ciphertext> {
    let layout = set.layout();
    let plain = pack(set);
    let seed = derive_seed(set, &plain)?;
    let keys = keys_for(&seed, key, set.n(), &layout)?;
    let sched = derive_schedule(key, set.n(), &layout)?;
    let s1 = scramble_stage1(&plain, &sched)?;
    let s2 = scramble_stage2(&s1, &sched)?;
    Ok(Ciphertext {
        n: set.n(),
        depth: set.depth(),
        image_count: set.len(),
        mode: key.mode,
        x0: seed.x0,
        alpha: seed.alpha,
        beta: seed.beta,
        tensor: diffuse(&s2, &keys)?,
    })
}

/// Undoes `encrypt`. The header's x0, α, β rebuild the keystream; the
/// schedule mode always comes from the key.
pub fn decrypt(ct: &Ciphertext, key: &MasterKey) -> Result<ImageSet> {
    let layout = ct.layout()?;
    let seed = Seed::from_parts(ct.x0, ct.alpha, ct.beta)?;
    let keys = keys_for(&seed, key, ct.n, &layout)?;
    let sched = derive_schedule(key, ct.n, &layout)?;
    let s2 = diffuse(&ct.tensor, &keys)?;
    let s1 = unscramble_stage2(&s2, &sched)?;
    let plain = unscramble_stage1(&s1, &sched)?;
    unpack(&plain, &layout, ct.image_count)
}

const MAGIC: &str = "QBMI-CIPHERTEXT 1";

/// Text header lines, a blank line, then the tensor bits packed LSB-first
/// in (t, m, l, y, x) storage order.
pub fn write_ciphertext(ct: &Ciphertext) -> Vec<u8> {
    let bits = ct.tensor.bits();
    let mut out = format!(
        "{MAGIC}\nn={}\nL={}\nM={}\nblocks={}\nmode={}\nx0={:?}\nalpha={}\nbeta={}\nbits={}\n\n",
        ct.n,
        ct.depth,
        ct.image_count,
        ct.tensor.block_count(),
        ct.mode,
        ct.x0,
        ct.alpha,
        ct.beta,
        bits.len()
    )
    .into_bytes();
    out.extend(
        bits.chunks(8)
            .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | b << i)),
    );
    out
}

pub fn read_ciphertext(data: &[u8]) -> Result<Ciphertext> {
    let bad = |m: &str| Error::Parse(format!("ciphertext: {m}"));
    let split = data
        .windows(2)
        .position(|w| w == b"\n\n")
        .ok_or_else(|| bad("missing header terminator"))?;
    let header = std::str::from_utf8(&data[..split]).map_err(|_| bad("header is not UTF-8"))?;
    let payload = &data[split + 2..];
    let mut lines = header.lines();
    if lines.next() != Some(MAGIC) {
        return Err(bad("wrong magic line"));
    }
    let fields: HashMap<&str, &str> = lines.filter_map(|l| l.split_once('=')).collect();
    let get = |k: &str| fields.get(k).copied().ok_or_else(|| bad(&format!("missing {k}")));
    let num = |k: &str| -> Result<u64> { get(k)?.parse().map_err(|_| bad(&format!("bad {k}"))) };
    let n = num("n")? as u32;
    let depth = num("L")? as u32;
    let image_count = num("M")? as usize;
    let blocks = num("blocks")? as usize;
    let nbits = num("bits")? as usize;
    let x0: f64 = get("x0")?.parse().map_err(|_| bad("bad x0"))?;
    let layout = plan_layout(image_count as u64, depth)?;
    if layout.block_count != blocks {
        return Err(bad("block count disagrees with M and L"));
    }
    if payload.len() != nbits.div_ceil(8) {
        return Err(bad("payload length disagrees with header"));
    }
    let bits: Vec<u8> = (0..nbits).map(|i| payload[i / 8] >> (i % 8) & 1).collect();
    Ok(Ciphertext {
        n,
        depth,
        image_count,
        mode: get("mode")?.parse()?,
        x0,
        alpha: num("alpha")?,
        beta: num("beta")?,
        tensor: BitTensor::from_bits(n, layout.plane_exp(), blocks, bits)?,
    })
}
