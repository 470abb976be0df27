//! Qubit widths, circuit depths and the four-column comparison table.

use std::fmt::Write as _;

use crate::baker::BakerPartition;
use crate::circuit::{gate_count, synthesize};
use crate::error::{Error, Result};
use crate::image_model::ceil_log2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// One register indexes every image directly.
    P1,
    /// Images are grouped in blocks of 2^⌈log₂L⌉.
    P2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolParams {
    pub protocol: Protocol,
    pub n: u32,
    pub m: u64,
    pub l: u32,
    /// Partition of the 2^n pixel square.
    pub pixel: BakerPartition,
    /// Partition of the ⌈log₂M⌉ square (P1) or the ⌈log₂L⌉ square (P2).
    pub index: BakerPartition,
}

impl ProtocolParams {
    pub fn new(
        protocol: Protocol,
        n: u32,
        m: u64,
        l: u32,
        pixel: BakerPartition,
        index: BakerPartition,
    ) -> Result<Self> {
        if m == 0 || l == 0 {
            return Err(Error::Invalid("M and L must be positive".into()));
        }
        let want = match protocol {
            Protocol::P1 => ceil_log2(m),
            Protocol::P2 => ceil_log2(u64::from(l)),
        };
        if pixel.n() != n || index.n() != want {
            return Err(Error::Dimension(format!(
                "pixel partition must be on n={n}, index partition on n={want}"
            )));
        }
        if !pixel.is_admissible() || !index.is_admissible() {
            return Err(Error::Invalid("partitions must be admissible".into()));
        }
        Ok(Self {
            protocol,
            n,
            m,
            l,
            pixel,
            index,
        })
    }

    pub fn lm(&self) -> u32 {
        ceil_log2(self.m)
    }

    pub fn ll(&self) -> u32 {
        ceil_log2(u64::from(self.l))
    }
}

pub fn qubit_width(protocol: Protocol, n: u32, m: u64, l: u32) -> u32 {
    let (lm, ll) = (ceil_log2(m), ceil_log2(u64::from(l)));
    match protocol {
        Protocol::P1 => 2 * (n + lm) + 1,
        Protocol::P2 => 2 * n + lm + ll + 1,
    }
}

/// Gate count of one shared pixel-square circuit plus one shared index-square circuit.
pub fn simplified_depth(p: &ProtocolParams) -> u64 {
    gate_count(&p.index).total + gate_count(&p.pixel).total
}

/// Depth when every position gets its own controlled circuit. `n1` is the
/// per-circuit count on the pixel square, `other` the count on the index square.
pub fn nonsimplified_depth(protocol: Protocol, n: u32, m: u64, l: u32, n1: u64, other: u64) -> u64 {
    let (lm, ll) = (ceil_log2(m), ceil_log2(u64::from(l)));
    match protocol {
        Protocol::P1 => (n1 << (2 * lm)) + (other << (2 * n)),
        Protocol::P2 => (n1 << (lm + ll)) + ((other << (2 * n)) << lm.saturating_sub(ll)),
    }
}

pub fn nonsimplified_depth_for(p: &ProtocolParams) -> u64 {
    nonsimplified_depth(
        p.protocol,
        p.n,
        p.m,
        p.l,
        gate_count(&p.pixel).total,
        gate_count(&p.index).total,
    )
}

/// Truncates to one decimal.
pub fn one_decimal(v: f64) -> f64 {
    (v * 10.0).floor() / 10.0
}

pub const TABLE_N: u32 = 8;
pub const TABLE_L: u32 = 8;
pub const TABLE_M: [u64; 4] = [30, 64, 128, 200];
/// Pixel-square partition shared by all four columns.
pub const PIXEL_PARTITION: &[u32] = &[6, 6, 2, 2, 3, 4, 5, 6];
/// Partition of the ⌈log₂L⌉ square used by P2.
pub const BLOCK_PARTITION: &[u32] = &[2, 1, 1];
/// Image-index partitions (i)–(iv) used by P1, one per column.
pub const INDEX_PARTITIONS: [&[u32]; 4] = [
    &[3, 2, 2, 2, 2, 1, 1, 1, 1],
    &[5, 1, 1, 2, 3, 4],
    &[4, 3, 3, 3, 2, 2, 3, 2, 2, 6],
    &[6, 6, 2, 2, 3, 4, 5, 6],
];

/// Values as printed in the reference table, one entry per column.
pub struct Reference {
    pub index_counts: [u64; 4],
    pub pixel_count: u64,
    pub block_count: u64,
    pub width_p1: [u32; 4],
    pub width_p2: [u32; 4],
    pub simplified_p1: [u64; 4],
    pub simplified_p2: [u64; 4],
    pub nonsimplified_p1: [u64; 4],
    pub nonsimplified_p2: [u64; 4],
    pub ratio: [f64; 4],
}

pub const REFERENCE: Reference = Reference {
    index_counts: [48, 45, 91, 76],
    pixel_count: 76,
    block_count: 11,
    width_p1: [27, 29, 31, 33],
    width_p2: [25, 26, 27, 28],
    simplified_p1: [124, 121, 167, 152],
    simplified_p2: [87, 87, 87, 87],
    nonsimplified_p1: [3_223_552, 3_260_416, 7_208_960, 9_961_472],
    nonsimplified_p2: [2_903_040, 5_806_080, 11_612_160, 23_224_320],
    ratio: [0.9, 1.7, 1.6, 2.3],
};

/// A depth cell: the closed-form value, the value obtained from the
/// reference per-circuit counts, and the printed value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub formula: u64,
    pub from_reference_counts: u64,
    pub printed: u64,
}

impl Cell {
    pub fn flagged(&self) -> bool {
        self.formula != self.printed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub m: u64,
    pub index_partition: BakerPartition,
    pub index_count: u64,
    /// Length of the exact circuit from `synthesize`.
    pub index_synthesized: u64,
    pub width_p1: u32,
    pub width_p2: u32,
    pub simplified_p1: Cell,
    pub simplified_p2: Cell,
    pub nonsimplified_p1: Cell,
    pub nonsimplified_p2: Cell,
    /// P2 / P1 non-simplified, from the formula cells.
    pub ratio: f64,
    /// P2 / P1 non-simplified, from the reference-count cells.
    pub ratio_from_reference_counts: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1 {
    pub pixel_count: u64,
    pub pixel_synthesized: u64,
    pub block_count: u64,
    pub block_synthesized: u64,
    pub columns: Vec<Column>,
}

pub fn table1() -> Table1 {
    let part = |n, q: &[u32]| BakerPartition::admissible(n, q.to_vec()).expect("table partitions are admissible");
    let synth_len = |p: &BakerPartition| synthesize(p).expect("admissible").len() as u64;
    let pixel = part(TABLE_N, PIXEL_PARTITION);
    let block = part(ceil_log2(u64::from(TABLE_L)), BLOCK_PARTITION);
    let n1 = gate_count(&pixel).total;
    let n3 = gate_count(&block).total;
    let r = &REFERENCE;
    let columns = TABLE_M
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let index = part(ceil_log2(m), INDEX_PARTITIONS[k]);
            let n2 = gate_count(&index).total;
            let ns = |proto, a, b| nonsimplified_depth(proto, TABLE_N, m, TABLE_L, a, b);
            let np1 = Cell {
                formula: ns(Protocol::P1, n1, n2),
                from_reference_counts: ns(Protocol::P1, r.pixel_count, r.index_counts[k]),
                printed: r.nonsimplified_p1[k],
            };
            let np2 = Cell {
                formula: ns(Protocol::P2, n1, n3),
                from_reference_counts: ns(Protocol::P2, r.pixel_count, r.block_count),
                printed: r.nonsimplified_p2[k],
            };
            Column {
                m,
                index_synthesized: synth_len(&index),
                index_count: n2,
                index_partition: index,
                width_p1: qubit_width(Protocol::P1, TABLE_N, m, TABLE_L),
                width_p2: qubit_width(Protocol::P2, TABLE_N, m, TABLE_L),
                simplified_p1: Cell {
                    formula: n2 + n1,
                    from_reference_counts: r.index_counts[k] + r.pixel_count,
                    printed: r.simplified_p1[k],
                },
                simplified_p2: Cell {
                    formula: n3 + n1,
                    from_reference_counts: r.block_count + r.pixel_count,
                    printed: r.simplified_p2[k],
                },
                ratio: np2.formula as f64 / np1.formula as f64,
                ratio_from_reference_counts: np2.from_reference_counts as f64 / np1.from_reference_counts as f64,
                nonsimplified_p1: np1,
                nonsimplified_p2: np2,
            }
        })
        .collect();
    Table1 {
        pixel_count: n1,
        pixel_synthesized: synth_len(&pixel),
        block_count: n3,
        block_synthesized: synth_len(&block),
        columns,
    }
}

type CellOf = fn(&Column) -> &Cell;

impl Table1 {
    pub fn discrepancies(&self) -> usize {
        self.columns
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let cells = [
                    &c.simplified_p1,
                    &c.simplified_p2,
                    &c.nonsimplified_p1,
                    &c.nonsimplified_p2,
                ];
                let widths =
                    usize::from(c.width_p1 != REFERENCE.width_p1[k]) + usize::from(c.width_p2 != REFERENCE.width_p2[k]);
                let ratio = usize::from(one_decimal(c.ratio) != REFERENCE.ratio[k]);
                cells.iter().filter(|cell| cell.flagged()).count() + widths + ratio
            })
            .sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let label = 34;
        let _ = write!(out, "{:<label$}", "M");
        for c in &self.columns {
            let _ = write!(out, "{:>24}", c.m);
        }
        out.push('\n');
        let mut row = |name: &str, cells: Vec<String>| {
            let _ = write!(out, "{name:<label$}");
            for c in cells {
                let _ = write!(out, "{c:>24}");
            }
            out.push('\n');
        };
        let mark = |ok: bool| if ok { "" } else { " *" };
        row(
            "width P1 / P2",
            self.columns
                .iter()
                .map(|c| format!("{} / {}", c.width_p1, c.width_p2))
                .collect(),
        );
        row(
            "index partition",
            self.columns.iter().map(|c| c.index_partition.to_string()).collect(),
        );
        row(
            "index gates (formula / exact)",
            self.columns
                .iter()
                .map(|c| format!("{} / {}", c.index_count, c.index_synthesized))
                .collect(),
        );
        let cells: [(&str, CellOf); 4] = [
            ("simplified P1", |c| &c.simplified_p1),
            ("simplified P2", |c| &c.simplified_p2),
            ("non-simplified P1", |c| &c.nonsimplified_p1),
            ("non-simplified P2", |c| &c.nonsimplified_p2),
        ];
        for (name, get) in cells {
            row(
                name,
                self.columns
                    .iter()
                    .map(|c| format!("{}{}", get(c).formula, mark(!get(c).flagged())))
                    .collect(),
            );
            row(
                &format!("  {name} (reference)"),
                self.columns.iter().map(|c| get(c).printed.to_string()).collect(),
            );
        }
        row(
            "ratio P2/P1",
            self.columns
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let ok = one_decimal(c.ratio) == REFERENCE.ratio[k];
                    format!("{:.1} ({:.4}){}", one_decimal(c.ratio), c.ratio, mark(ok))
                })
                .collect(),
        );
        row(
            "  ratio P2/P1 (reference)",
            REFERENCE.ratio.iter().map(|r| format!("{r:.1}")).collect(),
        );
        let _ = writeln!(
            out,
            "pixel partition {} : {} gates (exact circuit {}); block partition {} : {} gates (exact circuit {})",
            PIXEL_PARTITION.iter().map(u32::to_string).collect::<Vec<_>>().join(","),
            self.pixel_count,
            self.pixel_synthesized,
            BLOCK_PARTITION.iter().map(u32::to_string).collect::<Vec<_>>().join(","),
            self.block_count,
            self.block_synthesized,
        );
        let _ = writeln!(
            out,
            "cells marked * differ from the reference table ({} total)",
            self.discrepancies()
        );
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,protocol,M,formula,from_reference_counts,reference,flag\n");
        for (k, c) in self.columns.iter().enumerate() {
            let line = |out: &mut String, q: &str, p: &str, f: String, rc: String, r: String, flag: bool| {
                let _ = writeln!(out, "{q},{p},{},{f},{rc},{r},{}", c.m, u8::from(flag));
            };
            line(
                &mut out,
                "width",
                "P1",
                c.width_p1.to_string(),
                c.width_p1.to_string(),
                REFERENCE.width_p1[k].to_string(),
                c.width_p1 != REFERENCE.width_p1[k],
            );
            line(
                &mut out,
                "width",
                "P2",
                c.width_p2.to_string(),
                c.width_p2.to_string(),
                REFERENCE.width_p2[k].to_string(),
                c.width_p2 != REFERENCE.width_p2[k],
            );
            for (q, p, cell) in [
                ("simplified", "P1", &c.simplified_p1),
                ("simplified", "P2", &c.simplified_p2),
                ("non_simplified", "P1", &c.nonsimplified_p1),
                ("non_simplified", "P2", &c.nonsimplified_p2),
            ] {
                line(
                    &mut out,
                    q,
                    p,
                    cell.formula.to_string(),
                    cell.from_reference_counts.to_string(),
                    cell.printed.to_string(),
                    cell.flagged(),
                );
            }
            line(
                &mut out,
                "ratio",
                "P2/P1",
                format!("{:.4}", c.ratio),
                format!("{:.4}", c.ratio_from_reference_counts),
                format!("{:.1}", REFERENCE.ratio[k]),
                one_decimal(c.ratio) != REFERENCE.ratio[k],
            );
        }
        out
    }
}
