//! SWAP / controlled-SWAP circuits implementing admissible baker maps.
//!
//! The x register carries the column bits x_{n-1}..x_0, the y register the
//! row bits. Gates are applied left to right in list order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::baker::BakerPartition;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Register {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Wire {
    pub register: Register,
    pub index: u32,
}

pub fn x(index: u32) -> Wire {
    Wire {
        register: Register::X,
        index,
    }
}

pub fn y(index: u32) -> Wire {
    Wire {
        register: Register::Y,
        index,
    }
}

impl Wire {
    /// Bit position in a state packed as `(x << n) | y`.
    pub fn bit(self, n: u32) -> u32 {
        match self.register {
            Register::X => n + self.index,
            Register::Y => self.index,
        }
    }
}

impl fmt::Display for Wire {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = match self.register {
            Register::X => 'x',
            Register::Y => 'y',
        };
        write!(f, "{r}{}", self.index)
    }
}

impl FromStr for Wire {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad wire {s:?}"));
        let mut chars = s.chars();
        let register = match chars.next() {
            Some('x') => Register::X,
            Some('y') => Register::Y,
            _ => return Err(bad()),
        };
        let index = chars.as_str().parse().map_err(|_| bad())?;
        Ok(Wire { register, index })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ControlCondition {
    pub wire: Wire,
    pub value: bool,
}

impl ControlCondition {
    pub fn new(wire: Wire, value: bool) -> Self {
        Self { wire, value }
    }
}

impl fmt::Display for ControlCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.wire, u8::from(self.value))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    Swap,
    ControlledSwap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    targets: (Wire, Wire),
    controls: Vec<ControlCondition>,
}

impl Gate {
    pub fn swap(a: Wire, b: Wire) -> Result<Self> {
        Self::new(a, b, Vec::new())
    }

    /// Rejects equal targets, controls on a target, and contradictory controls.
    pub fn new(a: Wire, b: Wire, controls: Vec<ControlCondition>) -> Result<Self> {
        Self::build(a, b, controls, false)
    }

    /// Like `new` but lets a control sit on a target (read before the swap),
    /// as `synthesize_literal` emits for narrow strips.
    pub fn new_overlapping(a: Wire, b: Wire, controls: Vec<ControlCondition>) -> Result<Self> {
        Self::build(a, b, controls, true)
    }

    fn build(a: Wire, b: Wire, controls: Vec<ControlCondition>, overlap: bool) -> Result<Self> {
        if a == b {
            return Err(Error::Invalid(format!("gate targets {a} twice")));
        }
        let mut seen: BTreeMap<Wire, bool> = BTreeMap::new();
        for c in &controls {
            if !overlap && (c.wire == a || c.wire == b) {
                return Err(Error::Invalid(format!("control {} sits on a target", c.wire)));
            }
            if let Some(&v) = seen.get(&c.wire) {
                if v != c.value {
                    return Err(Error::Invalid(format!("wire {} constrained to both 0 and 1", c.wire)));
                }
            }
            seen.insert(c.wire, c.value);
        }
        Ok(Self {
            targets: (a, b),
            controls,
        })
    }

    fn unchecked(a: Wire, b: Wire, controls: Vec<ControlCondition>) -> Self {
        Self {
            targets: (a, b),
            controls,
        }
    }

    pub fn kind(&self) -> GateKind {
        if self.controls.is_empty() {
            GateKind::Swap
        } else {
            GateKind::ControlledSwap
        }
    }

    pub fn targets(&self) -> (Wire, Wire) {
        self.targets
    }

    pub fn controls(&self) -> &[ControlCondition] {
        &self.controls
    }

    pub fn max_index(&self) -> u32 {
        let (a, b) = self.targets;
        self.controls
            .iter()
            .map(|c| c.wire.index)
            .chain([a.index, b.index])
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.targets;
        if self.controls.is_empty() {
            return write!(f, "SWAP {a} {b}");
        }
        write!(f, "CSWAP {a} {b} ?")?;
        for c in &self.controls {
            write!(f, " {c}")?;
        }
        Ok(())
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let (head, tail) = match line.split_once('?') {
            Some((h, t)) => (h, Some(t)),
            None => (line, None),
        };
        let parts: Vec<&str> = head.split_whitespace().collect();
        let [op, a, b] = parts[..] else {
            return Err(Error::Parse(format!("bad gate line {line:?}")));
        };
        let controls = match (op, tail) {
            ("SWAP", None) => Vec::new(),
            ("CSWAP", Some(t)) => t
                .split_whitespace()
                .map(|tok| {
                    let (w, v) = tok
                        .split_once('=')
                        .ok_or_else(|| Error::Parse(format!("bad control {tok:?}")))?;
                    let value = match v {
                        "0" => false,
                        "1" => true,
                        _ => return Err(Error::Parse(format!("bad control value {tok:?}"))),
                    };
                    Ok(ControlCondition::new(w.parse()?, value))
                })
                .collect::<Result<_>>()?,
            _ => return Err(Error::Parse(format!("bad gate line {line:?}"))),
        };
        Gate::new_overlapping(a.parse()?, b.parse()?, controls)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub partition: BakerPartition,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn n(&self) -> u32 {
        self.partition.n()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# n={} partition={}\n", self.n(), self.partition);
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty circuit file".into()))?;
        let partition = parse_header(header)?;
        let n = partition.n();
        let mut gates = Vec::new();
        for line in lines.filter(|l| !l.starts_with('#')) {
            let g: Gate = line.parse()?;
            if g.max_index() >= n {
                return Err(Error::Parse(format!("{line:?} uses a wire outside n={n}")));
            }
            gates.push(g);
        }
        Ok(Circuit { partition, gates })
    }
}

fn parse_header(line: &str) -> Result<BakerPartition> {
    let bad = || Error::Parse(format!("bad circuit header {line:?}"));
    let body = line.strip_prefix('#').ok_or_else(bad)?;
    let mut n = None;
    let mut q = None;
    for tok in body.split_whitespace() {
        if let Some(v) = tok.strip_prefix("n=") {
            n = Some(v.parse::<u32>().map_err(|_| bad())?);
        } else if let Some(v) = tok.strip_prefix("partition=") {
            q = Some(v);
        }
    }
    match (n, q) {
        (Some(n), Some(q)) => BakerPartition::parse(n, q),
        _ => Err(bad()),
    }
}

/// Gates of the first subfunction, which realizes M_{q1} on the whole grid.
pub fn synth_f1(n: u32, q1: u32) -> Vec<Gate> {
    assert!(q1 <= n, "q1 must not exceed n");
    let mut g = Vec::new();
    let sw = |a, b| Gate::unchecked(a, b, Vec::new());
    for i in 0..n - q1 {
        g.push(sw(x(i), y(i)));
    }
    if 2 * q1 <= n {
        for i in 0..q1 {
            g.push(sw(x(n - q1 + i), y(i)));
        }
        for i in 0..q1 {
            g.push(sw(y(n - q1 + i), y(i)));
        }
    } else {
        for j in 0..q1 {
            for i in 0..n - q1 {
                g.push(sw(y(n - q1 - i + j), y(n - q1 - i - 1 + j)));
            }
        }
        for i in q1..n {
            g.push(sw(x(i), y(i)));
        }
        for j in 0..n - q1 {
            for i in 0..2 * q1 - n {
                g.push(sw(x(q1 - i + j), x(q1 - i - 1 + j)));
            }
        }
    }
    g
}

/// Binary expansion of the prefix sum Σ 2^{q_i}, highest exponent first.
pub fn reduce_to_distinct(prefix: &[u32]) -> Vec<u32> {
    let sum: u64 = prefix.iter().map(|&e| 1u64 << e).sum();
    (0..64).rev().filter(|&j| sum >> j & 1 == 1).collect()
}

/// Where bit j of the column sits after the first subfunction has run.
fn relocated(n: u32, q1: u32, j: u32) -> Wire {
    if j >= q1 {
        y(j)
    } else {
        x(n - q1 + j)
    }
}

/// Strip-selection controls for subfunction `r` (1-based, r >= 2).
pub fn controls_for(r: usize, p: &BakerPartition) -> Result<Vec<ControlCondition>> {
    let q = p.exponents();
    if r < 2 || r > q.len() {
        return Err(Error::Invalid(format!("subfunction index {r} outside 2..={}", q.len())));
    }
    let (n, q1, qr) = (p.n(), q[0], q[r - 1]);
    let js = reduce_to_distinct(&q[..r - 1]);
    let mut c: Vec<ControlCondition> = js
        .iter()
        .map(|&j| ControlCondition::new(relocated(n, q1, j), true))
        .collect();
    if r < q.len() {
        c.extend(
            (qr..n)
                .filter(|j| !js.contains(j))
                .map(|j| ControlCondition::new(relocated(n, q1, j), false)),
        );
    }
    Ok(c)
}

/// Uncontrolled D/E/F family gates for a strip of exponent `qi` after a first strip `q1`.
fn strip_families(n: u32, q1: u32, qi: u32) -> Vec<(Wire, Wire)> {
    let mut g = Vec::new();
    if qi == q1 {
        return g;
    }
    if qi > q1 {
        for k in 0..q1 {
            for l in 0..qi - q1 {
                g.push((x(n - q1 - l + k), x(n - q1 - l + k - 1)));
            }
        }
        for l in 0..qi - q1 {
            g.push((x(n - 1 - l), y(qi - 1 - l)));
        }
        for k in 0..qi - q1 {
            for l in 0..q1 {
                g.push((y(q1 - l + k), y(q1 - l - 1 + k)));
            }
        }
        return g;
    }
    let d1 = |g: &mut Vec<_>| {
        for l in 1..=q1 - qi {
            g.push((x(n - l), y(q1 - l)));
        }
    };
    let d2 = |g: &mut Vec<_>| {
        for l in 1..=qi {
            g.push((x(n - l), x(n - l + qi - q1)));
        }
    };
    if 2 * qi < q1 {
        for l in 0..qi {
            g.push((y(l), y(q1 - qi + l)));
        }
        d1(&mut g);
        d2(&mut g);
    } else if 2 * qi == q1 {
        d1(&mut g);
        for l in 0..qi {
            g.push((y(l), x(n - qi + l)));
        }
        d2(&mut g);
    } else {
        for l in qi..q1 {
            g.push((y(l), x(n - q1 + l)));
        }
        for k in 0..q1 - qi {
            for l in 0..qi {
                g.push((x(n - q1 + qi - l + k), x(n - q1 + qi - l + k - 1)));
            }
        }
        for l in 0..q1 - qi {
            g.push((y(l), x(n - q1 + l)));
        }
        for k in 0..2 * qi - q1 {
            for l in 0..q1 - qi {
                g.push((y(q1 - qi - l + k), y(q1 - qi - l + k - 1)));
            }
        }
    }
    g
}

/// Subfunction `i` (1-based, i >= 2): the D/E/F family for q_i with the
/// prefix-sum controls of `controls_for` on every gate.
pub fn synth_fi(i: usize, p: &BakerPartition) -> Result<Vec<Gate>> {
    let c = controls_for(i, p)?;
    let q = p.exponents();
    Ok(strip_families(p.n(), q[0], q[i - 1])
        .into_iter()
        .map(|(a, b)| Gate::unchecked(a, b, c.clone()))
        .collect())
}

/// f_1 followed by `synth_fi` for every later strip. Its length always equals
/// `gate_count`, but it only realizes the baker map when no strip is narrower
/// than the first.
pub fn synthesize_literal(p: &BakerPartition) -> Result<Circuit> {
    check(p)?;
    let mut gates = synth_f1(p.n(), p.exponents()[0]);
    for i in 2..=p.len() {
        gates.extend(synth_fi(i, p)?);
    }
    Ok(Circuit {
        partition: p.clone(),
        gates,
    })
}

/// A baker circuit that is exact for every admissible partition.
///
/// f_1 and the subfunctions with q_i >= q_1 are the same as in `synthesize_literal`.
/// A strip narrower than the first is handled in two steps. The column bits
/// j in [q_i, q_1) are constant on the strip; each one sits on x_{n-q1+j}
/// after f_1 and must end on y_j. That swap is shared by every strip of the
/// same 2^{j+1}-aligned column block, so it is issued once, by the first such
/// strip, controlled on the higher constant bits wherever they currently sit.
/// The remaining free bits are then routed by swap cycles controlled on the
/// strip's now-relocated constant bits.
pub fn synthesize(p: &BakerPartition) -> Result<Circuit> {
    check(p)?;
    let n = p.n();
    let q = p.exponents();
    let q1 = q[0];
    let mut gates = synth_f1(n, q1);
    let starts = p.strip_starts();
    for r in 2..=q.len() {
        let qr = q[r - 1];
        if qr == q1 {
            continue;
        }
        if qr > q1 {
            gates.extend(synth_fi(r, p)?);
            continue;
        }
        let np = starts[r - 1];
        let bit = |j: u32| np >> j & 1 == 1;
        let aligned = |j: u32| np.is_multiple_of(1u64 << (j + 1));
        let stable: Vec<ControlCondition> = (q1..n).map(|j| ControlCondition::new(y(j), bit(j))).collect();

        for i in qr..q1 {
            if !aligned(i) {
                continue;
            }
            let mut c = stable.clone();
            for ip in i + 1..q1 {
                let w = if aligned(ip) { x(n - q1 + ip) } else { y(ip) };
                c.push(ControlCondition::new(w, bit(ip)));
            }
            gates.push(Gate::unchecked(x(n - q1 + i), y(i), c));
        }

        let mut c = stable;
        c.extend((qr..q1).map(|j| ControlCondition::new(y(j), bit(j))));
        let d = q1 - qr;
        let xs = |j: u32| x(n - q1 + j);
        let land = |j: u32| if j < d { xs(j) } else { y(j - d) };
        let mut dest: BTreeMap<Wire, Wire> = BTreeMap::new();
        for j in 0..qr {
            dest.insert(xs(j), xs(d + j));
            dest.insert(y(j), land(j));
        }
        for j in qr..q1 {
            dest.insert(xs(j), land(j));
        }
        let mut seen = BTreeSet::new();
        for &w in dest.keys() {
            if !seen.insert(w) {
                continue;
            }
            let mut v = dest[&w];
            while v != w {
                seen.insert(v);
                gates.push(Gate::unchecked(w, v, c.clone()));
                v = dest[&v];
            }
        }
    }
    Ok(Circuit {
        partition: p.clone(),
        gates,
    })
}

fn check(p: &BakerPartition) -> Result<()> {
    if p.is_admissible() {
        Ok(())
    } else {
        Err(Error::NotAdmissible(p.to_string()))
    }
}

/// Closed-form gate count of f_1.
pub fn n1_count(n: u32, q1: u32) -> u64 {
    let (n, q1) = (u64::from(n), u64::from(q1));
    if 2 * q1 <= n {
        n + q1
    } else {
        (n - q1) * (3 * q1 - n + 2)
    }
}

/// Closed-form gate count of f_i, i >= 2.
pub fn ni_count(q1: u32, qi: u32) -> u64 {
    let (q1, qi) = (u64::from(q1), u64::from(qi));
    if qi == q1 {
        0
    } else if 2 * qi <= q1 {
        q1 + qi
    } else if qi < q1 {
        (q1 - qi) * (3 * qi - q1 + 2)
    } else {
        (qi - q1) * (2 * q1 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateCount {
    pub per_subfunction: Vec<u64>,
    pub total: u64,
}

pub fn gate_count(p: &BakerPartition) -> GateCount {
    let q = p.exponents();
    let mut per = vec![n1_count(p.n(), q[0])];
    per.extend(q[1..].iter().map(|&qi| ni_count(q[0], qi)));
    let total = per.iter().sum();
    GateCount {
        per_subfunction: per,
        total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(n: u32, q: &[u32]) -> BakerPartition {
        BakerPartition::new(n, q.to_vec()).unwrap()
    }

    fn pairs(g: &[Gate]) -> Vec<(Wire, Wire)> {
        g.iter().map(Gate::targets).collect()
    }

    #[test]
    fn f1_small() {
        assert_eq!(pairs(&synth_f1(2, 1)), vec![(x(0), y(0)), (x(1), y(0)), (y(1), y(0))]);
        assert_eq!(synth_f1(3, 2).len(), 5);
        assert_eq!(n1_count(3, 2), 5);
        assert!(synth_f1(4, 4).is_empty());
    }

    #[test]
    fn distinct_reduction() {
        assert_eq!(reduce_to_distinct(&[2, 1]), vec![2, 1]);
        assert_eq!(reduce_to_distinct(&[3, 2, 2, 2]), vec![4, 2]);
        assert_eq!(reduce_to_distinct(&[5]), vec![5]);
    }

    #[test]
    fn controls_for_211() {
        let p = part(3, &[2, 1, 1]);
        // r=2: prefix 4 = 2^2; bit 2 -> y2 = 1, bit 1 -> x2 = 0
        assert_eq!(
            controls_for(2, &p).unwrap(),
            vec![ControlCondition::new(y(2), true), ControlCondition::new(x(2), false)]
        );
        // r=3: prefix 6 = 2^2 + 2^1, value-1 conditions only
        assert_eq!(
            controls_for(3, &p).unwrap(),
            vec![ControlCondition::new(y(2), true), ControlCondition::new(x(2), true)]
        );
        assert!(controls_for(1, &p).is_err());
    }

    #[test]
    fn literal_211_has_eleven_gates() {
        let p = part(3, &[2, 1, 1]);
        assert_eq!(synth_fi(2, &p).unwrap().len(), 3);
        assert_eq!(synthesize_literal(&p).unwrap().len(), 11);
        assert_eq!(gate_count(&p).per_subfunction, vec![5, 3, 3]);
    }

    #[test]
    fn equal_strips_need_nothing() {
        let p = part(3, &[2, 2]);
        assert!(synth_fi(2, &p).unwrap().is_empty());
        assert_eq!(gate_count(&p).per_subfunction[1], 0);
        assert_eq!(synthesize(&BakerPartition::identity(5)).unwrap().len(), 0);
    }

    #[test]
    fn reference_counts() {
        let cases: [(u32, &[u32], u64); 5] = [
            (3, &[2, 1, 1], 11),
            (5, &[3, 2, 2, 2, 2, 1, 1, 1, 1], 48),
            (7, &[4, 3, 3, 3, 2, 2, 3, 2, 2, 6], 91),
            (8, &[6, 6, 2, 2, 3, 4, 5, 6], 76),
            (6, &[5, 1, 1, 2, 3, 4], 51),
        ];
        for (n, q, want) in cases {
            let p = BakerPartition::admissible(n, q.to_vec()).unwrap();
            assert_eq!(gate_count(&p).total, want, "{p}");
            assert_eq!(synthesize_literal(&p).unwrap().len() as u64, want);
        }
    }

    #[test]
    fn rejects_non_admissible() {
        assert!(synthesize(&part(2, &[0, 1, 0])).is_err());
    }

    #[test]
    fn text_roundtrip() {
        let c = synthesize(&part(3, &[2, 1, 1])).unwrap();
        let text = c.to_text();
        assert!(text.starts_with("# n=3 partition=2,1,1\n"));
        assert_eq!(Circuit::parse(&text).unwrap(), c);
    }

    #[test]
    fn gate_line_format() {
        let g: Gate = "CSWAP x0 y2 ? y4=1 x5=0".parse().unwrap();
        assert_eq!(g.kind(), GateKind::ControlledSwap);
        assert_eq!(g.to_string(), "CSWAP x0 y2 ? y4=1 x5=0");
        let g: Gate = "SWAP x3 y1".parse().unwrap();
        assert_eq!(g.kind(), GateKind::Swap);
        assert!("SWAP x3 x3".parse::<Gate>().is_err());
        let g: Gate = "CSWAP x0 y2 ? x0=1".parse().unwrap();
        assert_eq!(g.to_string(), "CSWAP x0 y2 ? x0=1");
        assert!(Gate::new(x(0), y(2), g.controls().to_vec()).is_err());
        assert!("CSWAP x0 y2 ? x1=1 x1=0".parse::<Gate>().is_err());
        assert!("SWAP x0 y2 ? x1=1".parse::<Gate>().is_err());
        assert!("NOT x0".parse::<Gate>().is_err());
    }

    #[test]
    fn parse_rejects_out_of_range_wires() {
        assert!(Circuit::parse("# n=2 partition=1,1\nSWAP x2 y0\n").is_err());
        assert!(Circuit::parse("SWAP x0 y0\n").is_err());
    }
}
