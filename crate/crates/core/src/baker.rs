//! Discrete baker maps on a 2^n × 2^n grid.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest side exponent a partition may use.
pub const MAX_N: u32 = 16;
/// Default cap on how many partitions `enumerate_admissible` will materialize.
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BakerPartition {
    n: u32,
    q: Vec<u32>,
}

impl BakerPartition {
    /// Checks the sum condition only; admissibility is a separate query.
    pub fn new(n: u32, q: Vec<u32>) -> Result<Self> {
        if n > MAX_N {
            return Err(Error::Invalid(format!("side exponent {n} exceeds {MAX_N}")));
        }
        if q.is_empty() || q.iter().any(|&e| e > n) {
            return Err(Error::BadSum { n, q: join(&q) });
        }
        let sum: u64 = q.iter().map(|&e| 1u64 << e).sum();
        if sum != 1u64 << n {
            return Err(Error::BadSum { n, q: join(&q) });
        }
        Ok(Self { n, q })
    }

    /// Like `new`, but also rejects non-admissible lists.
    pub fn admissible(n: u32, q: Vec<u32>) -> Result<Self> {
        let p = Self::new(n, q)?;
        if !p.is_admissible() {
            return Err(Error::NotAdmissible(p.to_string()));
        }
        Ok(p)
    }

    /// The single-strip partition (n), whose map is the identity.
    pub fn identity(n: u32) -> Self {
        Self { n, q: vec![n] }
    }

    /// Parses the comma-separated exponent list, e.g. "2,1,1".
    pub fn parse(n: u32, text: &str) -> Result<Self> {
        let q = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad exponent {s:?} in partition {text:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, q)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn exponents(&self) -> &[u32] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// N_{i-1} for every strip: the column where strip i starts.
    pub fn strip_starts(&self) -> Vec<u64> {
        let mut acc = 0u64;
        self.q
            .iter()
            .map(|&e| {
                let s = acc;
                acc += 1 << e;
                s
            })
            .collect()
    }

    pub fn is_admissible(&self) -> bool {
        is_admissible(self)
    }

    /// Strip index (0-based) holding column `x`, with the strip's start column.
    pub fn strip_of(&self, x: u32) -> (usize, u32) {
        let mut start = 0u32;
        for (i, &e) in self.q.iter().enumerate() {
            let end = start + (1 << e);
            if x < end {
                return (i, start);
            }
            start = end;
        }
        panic!("column {x} outside a 2^{} grid", self.n)
    }

    pub fn permutation(&self) -> Permutation {
        let n = self.n;
        let table = (0..1u32 << (2 * n))
            .map(|idx| apply(self, Point::from_index(n, idx)).index(n))
            .collect();
        Permutation::from_table_unchecked(table)
    }
}

impl fmt::Display for BakerPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join(&self.q))
    }
}

fn join(q: &[u32]) -> String {
    q.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: u32,
    pub y: u32,
}

impl Point {
    pub fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }

    /// Packs as `(x << n) | y`, the ordering used by permutation tables.
    pub fn index(self, n: u32) -> u32 {
        (self.x << n) | self.y
    }

    pub fn from_index(n: u32, idx: u32) -> Self {
        Self {
            x: idx >> n,
            y: idx & ((1 << n) - 1),
        }
    }
}

pub fn is_admissible(p: &BakerPartition) -> bool {
    let mut acc = 0u64;
    for (i, &e) in p.q.iter().enumerate() {
        if i > 0 && !acc.is_multiple_of(1u64 << e) {
            return false;
        }
        acc += 1 << e;
    }
    true
}

pub fn apply(p: &BakerPartition, pt: Point) -> Point {
    let n = p.n;
    let (i, start) = p.strip_of(pt.x);
    let w = n - p.q[i];
    let low = pt.y & ((1 << w) - 1);
    Point {
        x: ((pt.x - start) << w) + low,
        y: start + ((pt.y - low) >> w),
    }
}

/// The closed-form strip map M_s.
pub fn apply_ms(s: u32, n: u32, pt: Point) -> Point {
    assert!(s <= n, "M_s needs s <= n");
    let w = n - s;
    let full = (1u64 << n) - 1;
    let low = pt.y & ((1 << w) - 1);
    let x = ((u64::from(pt.x) << w) & full) as u32 + low;
    let y = ((pt.y - low) >> w) + pt.x - (pt.x & ((1 << s) - 1));
    Point { x, y }
}

pub fn iterate(p: &BakerPartition, r: u32, mut pt: Point) -> Point {
    for _ in 0..r {
        pt = apply(p, pt);
    }
    pt
}

pub fn iterate_inverse(p: &BakerPartition, r: u32, pt: Point) -> Point {
    let inv = p.permutation().inverse();
    let mut idx = pt.index(p.n);
    for _ in 0..r {
        idx = inv.apply(idx);
    }
    Point::from_index(p.n, idx)
}

/// Inverse map as a table over `(x << n) | y` indices.
pub fn inverse(p: &BakerPartition) -> Permutation {
    p.permutation().inverse()
}

/// Number of admissible partitions completing each prefix sum, indexed by the sum.
fn completion_counts(n: u32) -> Vec<BigUint> {
    let total = 1usize << n;
    let mut counts = vec![BigUint::zero(); total + 1];
    counts[total] = BigUint::one();
    for s in (0..total).rev() {
        let mut c = BigUint::zero();
        for e in 0..=n {
            let w = 1usize << e;
            if s % w == 0 && s + w <= total {
                c += &counts[s + w];
            }
        }
        counts[s] = c;
    }
    counts
}

pub fn count_admissible(n: u32) -> BigUint {
    assert!(n <= MAX_N, "side exponent too large");
    completion_counts(n).swap_remove(0)
}

pub fn enumerate_admissible(n: u32) -> Result<Vec<BakerPartition>> {
    enumerate_admissible_with_limit(n, DEFAULT_ENUMERATION_LIMIT)
}

/// All admissible partitions in lexicographic order, refusing when there are more than `limit`.
pub fn enumerate_admissible_with_limit(n: u32, limit: u64) -> Result<Vec<BakerPartition>> {
    if n > MAX_N {
        return Err(Error::Invalid(format!("side exponent {n} exceeds {MAX_N}")));
    }
    let count = count_admissible(n);
    if count > BigUint::from(limit) {
        return Err(Error::TooMany {
            n,
            count: count.to_string(),
            limit,
        });
    }
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    walk(n, 0, &mut prefix, &mut out);
    Ok(out)
}

fn walk(n: u32, sum: u64, prefix: &mut Vec<u32>, out: &mut Vec<BakerPartition>) {
    let total = 1u64 << n;
    if sum == total {
        out.push(BakerPartition { n, q: prefix.clone() });
        return;
    }
    for e in 0..=n {
        let w = 1u64 << e;
        if sum.is_multiple_of(w) && sum + w <= total {
            prefix.push(e);
            walk(n, sum + w, prefix, out);
            prefix.pop();
        }
    }
}

/// The `index`-th admissible partition in lexicographic order.
pub fn unrank_admissible(n: u32, index: &BigUint) -> Result<BakerPartition> {
    AdmissibleRanker::new(n)?.unrank(index)
}

/// Lexicographic ranking of admissible partitions without materializing them.
#[derive(Debug, Clone)]
pub struct AdmissibleRanker {
    n: u32,
    counts: Vec<BigUint>,
}

impl AdmissibleRanker {
    pub fn new(n: u32) -> Result<Self> {
        if n > MAX_N {
            return Err(Error::Invalid(format!("side exponent {n} exceeds {MAX_N}")));
        }
        Ok(Self {
            n,
            counts: completion_counts(n),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn count(&self) -> &BigUint {
        &self.counts[0]
    }

    pub fn unrank(&self, index: &BigUint) -> Result<BakerPartition> {
        let n = self.n;
        if index >= self.count() {
            return Err(Error::Invalid(format!("index {index} >= {} partitions", self.count())));
        }
        let total = 1usize << n;
        let mut rest = index.clone();
        let mut s = 0usize;
        let mut q = Vec::new();
        while s < total {
            for e in 0..=n {
                let w = 1usize << e;
                if !s.is_multiple_of(w) || s + w > total {
                    continue;
                }
                let c = &self.counts[s + w];
                if &rest < c {
                    q.push(e);
                    s += w;
                    break;
                }
                rest -= c;
            }
        }
        Ok(BakerPartition { n, q })
    }
}

/// A bijection on `0..len` stored as an image table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    table: Vec<u32>,
}

impl Permutation {
    pub fn identity(len: usize) -> Self {
        Self {
            table: (0..len as u32).collect(),
        }
    }

    pub fn from_table(table: Vec<u32>) -> Result<Self> {
        let mut seen = vec![false; table.len()];
        for &v in &table {
            match seen.get_mut(v as usize) {
                Some(s) if !*s => *s = true,
                _ => return Err(Error::Invalid(format!("table is not a permutation (value {v})"))),
            }
        }
        Ok(Self { table })
    }

    pub(crate) fn from_table_unchecked(table: Vec<u32>) -> Self {
        Self { table }
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    #[inline]
    pub fn apply(&self, i: u32) -> u32 {
        self.table[i as usize]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.table.len()];
        for (i, &v) in self.table.iter().enumerate() {
            inv[v as usize] = i as u32;
        }
        Self { table: inv }
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Permutation) -> Self {
        Self {
            table: self.table.iter().map(|&v| other.table[v as usize]).collect(),
        }
    }

    pub fn pow(&self, r: u32) -> Self {
        let mut out = Self::identity(self.len());
        let mut base = self.clone();
        let mut e = r;
        while e > 0 {
            if e & 1 == 1 {
                out = out.then(&base);
            }
            base = base.then(&base);
            e >>= 1;
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.table.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }

    pub fn cycle_lengths(&self) -> Vec<usize> {
        let mut seen = vec![false; self.table.len()];
        let mut out = Vec::new();
        for start in 0..self.table.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.table[i] as usize;
                len += 1;
            }
            out.push(len);
        }
        out
    }

    /// Smallest r > 0 with self^r = identity.
    pub fn order(&self) -> BigUint {
        self.cycle_lengths().into_iter().fold(BigUint::one(), |acc, c| {
            let c = BigUint::from(c);
            let g = gcd(acc.clone(), c.clone());
            acc / g * c
        })
    }

    /// False for even permutations, true for odd ones.
    pub fn parity(&self) -> bool {
        self.cycle_lengths().iter().map(|c| c - 1).sum::<usize>() % 2 == 1
    }
}

fn gcd(mut a: BigUint, mut b: BigUint) -> BigUint {
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}
