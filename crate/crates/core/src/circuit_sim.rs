//! Basis-state simulation of SWAP / CSWAP circuits.

use rayon::prelude::*;

use crate::baker::{apply, BakerPartition, Permutation, Point};
use crate::circuit::{Circuit, Gate, Register, Wire};
use crate::error::{Error, Result};

/// Largest n for which permutation tables are materialized.
pub const MAX_TABLE_N: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub n: u32,
    pub x: u32,
    pub y: u32,
}

impl BasisState {
    pub fn new(n: u32, x: u32, y: u32) -> Self {
        debug_assert!(x >> n == 0 && y >> n == 0);
        Self { n, x, y }
    }

    pub fn index(self) -> u32 {
        (self.x << self.n) | self.y
    }

    pub fn point(self) -> Point {
        Point::new(self.x, self.y)
    }

    fn read(self, w: Wire) -> u32 {
        let reg = match w.register {
            Register::X => self.x,
            Register::Y => self.y,
        };
        reg >> w.index & 1
    }

    fn write(&mut self, w: Wire, v: u32) {
        let reg = match w.register {
            Register::X => &mut self.x,
            Register::Y => &mut self.y,
        };
        *reg = (*reg & !(1 << w.index)) | (v << w.index);
    }
}

pub fn apply_gate(g: &Gate, s: BasisState) -> BasisState {
    if !g.controls().iter().all(|c| s.read(c.wire) == u32::from(c.value)) {
        return s;
    }
    let (a, b) = g.targets();
    let (va, vb) = (s.read(a), s.read(b));
    let mut out = s;
    out.write(a, vb);
    out.write(b, va);
    out
}

pub fn run(c: &Circuit, s: BasisState) -> BasisState {
    c.gates.iter().fold(s, |s, g| apply_gate(g, s))
}

/// A gate lowered to bit positions of the packed `(x << n) | y` state.
#[derive(Debug, Clone, Copy)]
struct Packed {
    a: u32,
    b: u32,
    mask: u32,
    want: u32,
}

fn lower(c: &Circuit) -> Vec<Packed> {
    let n = c.n();
    c.gates
        .iter()
        .map(|g| {
            let (a, b) = g.targets();
            let (mut mask, mut want) = (0u32, 0u32);
            for ctl in g.controls() {
                mask |= 1 << ctl.wire.bit(n);
                want |= u32::from(ctl.value) << ctl.wire.bit(n);
            }
            Packed {
                a: a.bit(n),
                b: b.bit(n),
                mask,
                want,
            }
        })
        .collect()
}

#[inline]
fn run_packed(gates: &[Packed], mut s: u32) -> u32 {
    for g in gates {
        if s & g.mask == g.want {
            let d = ((s >> g.a) ^ (s >> g.b)) & 1;
            s ^= (d << g.a) | (d << g.b);
        }
    }
    s
}

fn check_size(n: u32) -> Result<()> {
    if n > MAX_TABLE_N {
        return Err(Error::Invalid(format!("n={n} exceeds table limit {MAX_TABLE_N}")));
    }
    Ok(())
}

/// Image of every basis index, evaluated point by point in parallel.
pub fn to_permutation(c: &Circuit) -> Result<Permutation> {
    check_size(c.n())?;
    let gates = lower(c);
    let table: Vec<u32> = (0..1u32 << (2 * c.n()))
        .into_par_iter()
        .map(|i| run_packed(&gates, i))
        .collect();
    Permutation::from_table(table)
}

/// Image of every basis index, computed on all points at once with one
/// bit-vector per wire.
pub fn to_permutation_sliced(c: &Circuit) -> Result<Permutation> {
    check_size(c.n())?;
    Permutation::from_table(sliced_table(c))
}

fn sliced_table(c: &Circuit) -> Vec<u32> {
    let n = c.n();
    let width = 2 * n as usize;
    let points = 1usize << width;
    let words = points.div_ceil(64);
    let mut wires: Vec<Vec<u64>> = (0..width)
        .map(|b| {
            (0..words)
                .map(|w| {
                    (0..64)
                        .filter(|k| w * 64 + k < points && (w * 64 + k) >> b & 1 == 1)
                        .fold(0u64, |acc, k| acc | 1 << k)
                })
                .collect()
        })
        .collect();
    let mut fire = vec![0u64; words];
    for g in &c.gates {
        fire.fill(!0);
        for ctl in g.controls() {
            let v = &wires[ctl.wire.bit(n) as usize];
            for (f, &w) in fire.iter_mut().zip(v) {
                *f &= if ctl.value { w } else { !w };
            }
        }
        let (a, b) = g.targets();
        let (a, b) = (a.bit(n) as usize, b.bit(n) as usize);
        let (lo, hi) = (a.min(b), a.max(b));
        let (left, right) = wires.split_at_mut(hi);
        let (wa, wb) = (&mut left[lo], &mut right[0]);
        for ((va, vb), &f) in wa.iter_mut().zip(wb.iter_mut()).zip(&fire) {
            let t = (*va ^ *vb) & f;
            *va ^= t;
            *vb ^= t;
        }
    }
    let mut table = vec![0u32; points];
    for (b, v) in wires.iter().enumerate() {
        for (w, &word) in v.iter().enumerate() {
            let mut rest = word;
            while rest != 0 {
                let k = rest.trailing_zeros() as usize;
                table[w * 64 + k] |= 1 << b;
                rest &= rest - 1;
            }
        }
    }
    table
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    Mismatch { point: Point, circuit: Point, baker: Point },
}

impl Equivalence {
    pub fn holds(&self) -> bool {
        matches!(self, Equivalence::Equivalent)
    }
}

/// Compares the circuit with the baker map of `p` on every basis point and
/// reports the first differing point in index order.
pub fn equivalence(c: &Circuit, p: &BakerPartition) -> Result<Equivalence> {
    if c.n() != p.n() {
        return Err(Error::Dimension(format!(
            "circuit n={} vs partition n={}",
            c.n(),
            p.n()
        )));
    }
    check_size(c.n())?;
    let n = c.n();
    for (i, &got) in sliced_table(c).iter().enumerate() {
        let pt = Point::from_index(n, i as u32);
        let want = apply(p, pt);
        if want.index(n) != got {
            return Ok(Equivalence::Mismatch {
                point: pt,
                circuit: Point::from_index(n, got),
                baker: want,
            });
        }
    }
    Ok(Equivalence::Equivalent)
}

/// `index,image` lines with a header row.
pub fn permutation_csv(perm: &Permutation) -> String {
    let mut out = String::from("index,image\n");
    for (i, v) in perm.table().iter().enumerate() {
        out.push_str(&format!("{i},{v}\n"));
    }
    out
}

/// Parity of the permutation a single gate induces on all 2^{2n} basis states:
/// half the number of states it actually moves, mod 2.
pub fn gate_parity(g: &Gate, n: u32) -> bool {
    let (a, b) = g.targets();
    let moved = (0..1u32 << (2 * n))
        .filter(|&i| {
            let s = BasisState::new(n, i >> n, i & ((1 << n) - 1));
            apply_gate(g, s) != s
        })
        .count();
    (moved / 2) % 2 == 1 && a != b
}

/// Parity predicted from the gates alone; equals `to_permutation(c).parity()`.
pub fn circuit_parity(c: &Circuit) -> bool {
    c.gates.iter().fold(false, |acc, g| acc ^ gate_parity(g, c.n()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{synthesize, x, y, ControlCondition};

    #[test]
    fn swap_on_one_bit() {
        let g = Gate::swap(x(0), y(0)).unwrap();
        assert_eq!(apply_gate(&g, BasisState::new(1, 1, 0)), BasisState::new(1, 0, 1));
    }

    #[test]
    fn failed_control_leaves_state() {
        let g = Gate::new(x(0), y(0), vec![ControlCondition::new(x(1), true)]).unwrap();
        let s = BasisState::new(2, 0b01, 0);
        assert_eq!(apply_gate(&g, s), s);
        let s = BasisState::new(2, 0b11, 0);
        assert_eq!(apply_gate(&g, s), BasisState::new(2, 0b10, 1));
    }

    #[test]
    fn gates_are_involutions() {
        let g = Gate::new(x(2), y(1), vec![ControlCondition::new(y(0), false)]).unwrap();
        for i in 0..64u32 {
            let s = BasisState::new(3, i >> 3, i & 7);
            assert_eq!(apply_gate(&g, apply_gate(&g, s)), s);
        }
    }

    #[test]
    fn circuit_211_matches_baker() {
        let p = BakerPartition::new(3, vec![2, 1, 1]).unwrap();
        let c = synthesize(&p).unwrap();
        for i in 0..64u32 {
            let s = BasisState::new(3, i >> 3, i & 7);
            assert_eq!(run(&c, s).point(), apply(&p, s.point()));
        }
        assert!(equivalence(&c, &p).unwrap().holds());
    }

    #[test]
    fn sliced_and_pointwise_agree() {
        let p = BakerPartition::new(4, vec![2, 1, 1, 3]).unwrap();
        let c = synthesize(&p).unwrap();
        assert_eq!(to_permutation(&c).unwrap(), to_permutation_sliced(&c).unwrap());
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c = synthesize(&BakerPartition::identity(3)).unwrap();
        assert!(c.is_empty());
        assert!(to_permutation(&c).unwrap().is_identity());
    }

    #[test]
    fn csv_has_header() {
        let csv = permutation_csv(&Permutation::identity(2));
        assert_eq!(csv, "index,image\n0,0\n1,1\n");
    }
}
