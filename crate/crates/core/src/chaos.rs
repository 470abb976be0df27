//! Sine-chaotified 5D hyperchaotic map, sequence extraction and ranking.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Coefficients (a, b, c, d, e, f, g) of the underlying hyperchaotic system.
pub const BASE: [f64; 7] = [30.0, 10.0, 15.7, 5.0, 2.5, 4.45, 38.5];
pub const BURN_IN: u64 = 100;
pub const MAX_STEPS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScmParams {
    lambdas: [f64; 5],
}

impl ScmParams {
    pub fn new(lambdas: [f64; 5]) -> Result<Self> {
        if let Some(l) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 1.0)) {
            return Err(Error::Invalid(format!("lambda {l} must be finite and >= 1")));
        }
        Ok(Self { lambdas })
    }

    pub fn lambdas(&self) -> [f64; 5] {
        self.lambdas
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScmState {
    pub v: [f64; 5],
}

impl ScmState {
    pub fn new(v: [f64; 5]) -> Self {
        Self { v }
    }
}

/// Right-hand sides of the base system.
pub fn phi(v: &[f64; 5]) -> [f64; 5] {
    let [a, b, c, d, e, f, g] = BASE;
    let [x1, x2, x3, x4, x5] = *v;
    [
        a * (x2 - x1) + x2 * x3 * x4,
        b * (x1 + x2) + x5 - x1 * x3 * x4,
        -c * x2 - d * x3 - e * x4 + x1 * x2 * x4,
        -f * x4 + x1 * x2 * x3,
        -g * (x1 + x2),
    ]
}

pub fn scm_step(s: &ScmState, p: &ScmParams) -> ScmState {
    let f = phi(&s.v);
    let mut v = [0.0; 5];
    for i in 0..5 {
        v[i] = (PI * p.lambdas[i] * f[i]).sin();
    }
    ScmState { v }
}

/// `steps + 1` states starting with `start` itself.
pub fn trajectory(start: ScmState, p: &ScmParams, steps: usize) -> Vec<ScmState> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut s = start;
    out.push(s);
    for _ in 0..steps {
        s = scm_step(&s, p);
        out.push(s);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaoticSequences {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub zs: Vec<f64>,
    pub ts: Vec<f64>,
    pub ns: Vec<usize>,
    pub ks: Vec<usize>,
    pub rs: Vec<usize>,
    pub ss: Vec<usize>,
}

/// Burns in, then fills xs, ys, zs, ts from state components 1..4, skipping
/// any value already present in its sequence.
pub fn generate_sequences(seed: ScmState, p: &ScmParams, lengths: [usize; 4]) -> Result<ChaoticSequences> {
    let mut s = seed;
    for _ in 0..BURN_IN {
        s = scm_step(&s, p);
    }
    let mut seqs: [Vec<f64>; 4] = lengths.map(Vec::with_capacity);
    let mut steps = BURN_IN;
    while seqs.iter().zip(&lengths).any(|(q, &len)| q.len() < len) {
        if steps >= MAX_STEPS {
            let (got, needed) = seqs
                .iter()
                .zip(&lengths)
                .find(|(q, &len)| q.len() < len)
                .map(|(q, &len)| (q.len(), len))
                .unwrap_or_default();
            return Err(Error::Stalled { steps, got, needed });
        }
        s = scm_step(&s, p);
        steps += 1;
        for (k, q) in seqs.iter_mut().enumerate() {
            let v = s.v[k];
            if q.len() < lengths[k] && !q.contains(&v) {
                q.push(v);
            }
        }
    }
    let [xs, ys, zs, ts] = seqs;
    Ok(ChaoticSequences {
        ns: rank(&xs)?,
        ks: rank(&ys)?,
        rs: rank(&zs)?,
        ss: rank(&ts)?,
        xs,
        ys,
        zs,
        ts,
    })
}

/// `out[i]` = number of values strictly below `values[i]`.
pub fn rank(values: &[f64]) -> Result<Vec<usize>> {
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Invalid("NaN in rank input".into()));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    if order.windows(2).any(|w| values[w[0]] == values[w[1]]) {
        return Err(Error::Duplicate);
    }
    let mut out = vec![0; values.len()];
    for (pos, &i) in order.iter().enumerate() {
        out[i] = pos;
    }
    Ok(out)
}

pub fn chebyshev(k: u64, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(x));
    }
    Ok(match k {
        0 => 1.0,
        1 => x,
        _ => (k as f64 * x.acos()).cos(),
    })
}
