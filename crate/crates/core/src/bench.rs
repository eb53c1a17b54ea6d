//! Benchmark function families: Greater-Than, Inner Product, Set
//! Disjointness, and Noisy Partial Matching with its correlated input
//! distribution.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::table::{FunctionTable, JointDistribution};
use crate::{Error, Result};

/// Default limit on the bit width `n` of GT/IP/DISJ (tables are `2ⁿ × 2ⁿ`).
pub const DEFAULT_MAX_BITS: u32 = 12;
/// Default limit on the number of Bob inputs of NPM.
pub const DEFAULT_MAX_NPM_Y: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BenchmarkKind {
    /// `GT(x, y) = 1` iff `x > y` as unsigned integers.
    GreaterThan,
    /// `IP(x, y) = ⟨x, y⟩ mod 2`.
    InnerProduct,
    /// `DISJ(x, y) = 1` iff `x AND y = 0`.
    Disjointness,
}

impl BenchmarkKind {
    pub fn name(self) -> &'static str {
        match self {
            BenchmarkKind::GreaterThan => "gt",
            BenchmarkKind::InnerProduct => "ip",
            BenchmarkKind::Disjointness => "disj",
        }
    }

    fn eval(self, x: u64, y: u64) -> u32 {
        match self {
            BenchmarkKind::GreaterThan => (x > y) as u32,
            BenchmarkKind::InnerProduct => (x & y).count_ones() & 1,
            BenchmarkKind::Disjointness => (x & y == 0) as u32,
        }
    }
}

pub fn benchmark(kind: BenchmarkKind, n: u32) -> Result<FunctionTable> {
    benchmark_with_limit(kind, n, DEFAULT_MAX_BITS)
}

pub fn benchmark_with_limit(kind: BenchmarkKind, n: u32, max_bits: u32) -> Result<FunctionTable> {
    if n == 0 {
        return Err(Error::InvalidArgument("bit width must be at least 1".into()));
    }
    if n > max_bits || n >= usize::BITS / 2 {
        return Err(Error::cap("bit width", n, max_bits));
    }
    let size = 1usize << n;
    FunctionTable::from_fn(size, size, 2, |x, y| kind.eval(x as u64, y as u64))
}

/// All perfect matchings on `{0, …, vertices−1}` in canonical order: the
/// smallest unmatched vertex is paired with each larger unmatched vertex in
/// increasing order, recursively. Edges of each matching are listed by their
/// smaller endpoint.
pub fn perfect_matchings(vertices: usize) -> Vec<Vec<(usize, usize)>> {
    fn recurse(
        free: &mut Vec<usize>,
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if free.is_empty() {
            out.push(current.clone());
            return;
        }
        let first = free.remove(0);
        for i in 0..free.len() {
            let partner = free.remove(i);
            current.push((first, partner));
            recurse(free, current, out);
            current.pop();
            free.insert(i, partner);
        }
        free.insert(0, first);
    }
    let mut out = Vec::new();
    if vertices % 2 == 1 {
        return out;
    }
    recurse(&mut (0..vertices).collect(), &mut Vec::new(), &mut out);
    out
}

/// `(2n − 1)!!`, the number of perfect matchings on `2n` vertices.
pub fn matching_count(n: u32) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, i| acc.checked_mul(2 * i - 1))
}

/// Noisy Partial Matching on `n`-bit strings.
#[derive(Clone, Debug)]
pub struct NoisyPartialMatching {
    pub n: u32,
    pub matchings: Vec<Vec<(usize, usize)>>,
    pub table: FunctionTable,
    pub distribution: JointDistribution,
}

impl NoisyPartialMatching {
    /// Hamming radius `⌊n/3⌋`.
    pub fn radius(&self) -> u32 {
        self.n / 3
    }

    /// Bob's input index for matching `matching` and string `w`.
    pub fn y_index(&self, matching: usize, w: u64) -> usize {
        matching << self.n | w as usize
    }

    /// Inverse of [`y_index`](Self::y_index).
    pub fn decode_y(&self, y: usize) -> (usize, u64) {
        (y >> self.n, (y & ((1usize << self.n) - 1)) as u64)
    }
}

/// The string `Mx`: bit `e` is `x_i ⊕ x_j` for the `e`-th edge `(i, j)`.
///
/// Alice's `n`-bit input is read cyclically on the `2n` matched vertices:
/// vertex `v` carries bit `v mod n` of `x`.
pub fn matched_parities(matching: &[(usize, usize)], x: u64, n: u32) -> u64 {
    let bit = |v: usize| (x >> (v % n as usize)) & 1;
    matching
        .iter()
        .enumerate()
        .fold(0u64, |acc, (e, &(i, j))| acc | ((bit(i) ^ bit(j)) << e))
}

pub fn noisy_partial_matching(n: u32) -> Result<NoisyPartialMatching> {
    noisy_partial_matching_with_limit(n, DEFAULT_MAX_NPM_Y)
}

/// Builds NPM_n and its correlated distribution: `x` uniform, `M` uniform,
/// and with probability ½ each, `w` uniform in the Hamming ball of radius
/// `⌊n/3⌋` around `Mx` or around its complement.
///
/// The output is `b` when `(Mx) ⊕ bⁿ` is within the radius of `w`, and `0`
/// when neither bit qualifies.
pub fn noisy_partial_matching_with_limit(n: u32, max_y: u64) -> Result<NoisyPartialMatching> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "NPM needs n >= 2 (got {n})"
        )));
    }
    let y_size = matching_count(n)
        .filter(|_| n < 32)
        .and_then(|c| c.checked_mul(1u64 << n))
        .unwrap_or(u64::MAX);
    if y_size > max_y {
        return Err(Error::cap("NPM y_size", y_size, max_y));
    }
    let matchings = perfect_matchings(2 * n as usize);
    let x_size = 1usize << n;
    let y_size = y_size as usize;
    let radius = n / 3;
    let ball: f64 = (0..=radius).map(|i| binomial(n, i)).sum();
    let all_ones = (1u64 << n) - 1;
    let base = 1.0 / (x_size as f64 * matchings.len() as f64);

    let mut values = Vec::with_capacity(x_size * y_size);
    let mut p = vec![0.0; x_size * y_size];
    for x in 0..x_size {
        for (mi, matching) in matchings.iter().enumerate() {
            let mx = matched_parities(matching, x as u64, n);
            for w in 0..(1u64 << n) {
                let d0 = (mx ^ w).count_ones();
                let d1 = (mx ^ all_ones ^ w).count_ones();
                values.push(Some(if d0 > radius && d1 <= radius { 1 } else { 0 }));
                let y = mi << n | w as usize;
                let mut mass = 0.0;
                if d0 <= radius {
                    mass += 0.5 / ball;
                }
                if d1 <= radius {
                    mass += 0.5 / ball;
                }
                p[x * y_size + y] = base * mass;
            }
        }
    }
    let table = FunctionTable::new(x_size, y_size, 2, false, values)?;
    let distribution = JointDistribution::new(x_size, y_size, p)?;
    Ok(NoisyPartialMatching {
        n,
        matchings,
        table,
        distribution,
    })
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
