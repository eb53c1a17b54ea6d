//! Optimal deterministic one-way protocols by set-partition search.
//!
//! A deterministic one-way protocol with `B` messages partitions `X` into
//! `B` blocks; Bob answers each `(block, y)` with its μ-majority value. The
//! search walks restricted growth strings depth-first, keeping per-block
//! column tallies and pruning once the accumulated error exceeds ε (adding
//! a row never lowers a block's error).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::table::{FunctionTable, JointDistribution};
use crate::{Error, Result};

/// Default cap on `|X|`; the search visits up to Bell(|X|) partitions.
pub const DEFAULT_MAX_OPTIMAL_ROWS: usize = 12;

const FEASIBILITY_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimalProtocol {
    /// `⌈log₂ B⌉`.
    pub bits: u32,
    /// Number of nonempty blocks in the witness.
    pub blocks: usize,
    /// Block index of each row.
    pub assignment: Vec<usize>,
    /// Bob's answer per block and column.
    pub responses: Vec<Vec<u32>>,
    /// μ-probability of a wrong answer.
    pub error: f64,
}

struct Search<'a> {
    f: &'a FunctionTable,
    mu: &'a JointDistribution,
    eps: f64,
    max_blocks: usize,
    width: usize,
    /// `tallies[b][y·(k+1) + z]`, slot `k` for undefined cells.
    tallies: Vec<Vec<f64>>,
    /// Per-block error mass.
    errors: Vec<f64>,
    assignment: Vec<usize>,
}

impl Search<'_> {
    fn block_error(&self, b: usize) -> f64 {
        let k = self.width - 1;
        self.tallies[b]
            .chunks(self.width)
            .map(|c| {
                let total: f64 = c.iter().sum();
                total - c[k] - c[..k].iter().copied().fold(0.0, f64::max)
            })
            .sum::<f64>()
            .max(0.0)
    }

    fn apply(&mut self, x: usize, b: usize, sign: f64) {
        let k = self.width - 1;
        for (y, &p) in self.mu.row(x).iter().enumerate() {
            let slot = self.f.get(x, y).map_or(k, |v| v as usize);
            self.tallies[b][y * self.width + slot] += sign * p;
        }
        self.errors[b] = self.block_error(b);
    }

    fn total_error(&self) -> f64 {
        self.errors.iter().sum()
    }

    fn dfs(&mut self, x: usize, used: usize) -> bool {
        if self.total_error() > self.eps + FEASIBILITY_SLACK {
            return false;
        }
        if x == self.f.x_size() {
            return true;
        }
        for b in 0..=used.min(self.max_blocks - 1) {
            self.apply(x, b, 1.0);
            self.assignment[x] = b;
            if self.dfs(x + 1, used.max(b + 1)) {
                return true;
            }
            self.apply(x, b, -1.0);
        }
        false
    }
}

pub fn optimal_oneway(f: &FunctionTable, mu: &JointDistribution, eps: f64) -> Result<OptimalProtocol> {
    optimal_oneway_with_limit(f, mu, eps, DEFAULT_MAX_OPTIMAL_ROWS)
}

/// The fewest bits of any deterministic one-way protocol with μ-error at
/// most ε, with a witness partition and response table.
pub fn optimal_oneway_with_limit(
    f: &FunctionTable,
    mu: &JointDistribution,
    eps: f64,
    max_rows: usize,
) -> Result<OptimalProtocol> {
    f.require_matches(mu)?;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps {eps} outside [0, 1]")));
    }
    let n = f.x_size();
    if n > max_rows {
        return Err(Error::cap("x_size", n as u64, max_rows as u64));
    }
    let width = f.z_size() + 1;
    let mut bits = 0u32;
    loop {
        let max_blocks = (1usize << bits).min(n);
        let mut search = Search {
            f,
            mu,
            eps,
            max_blocks,
            width,
            tallies: vec![vec![0.0; f.y_size() * width]; max_blocks],
            errors: vec![0.0; max_blocks],
            assignment: vec![0; n],
        };
        if search.dfs(0, 0) {
            let blocks = search.assignment.iter().max().map_or(0, |b| b + 1);
            let responses = (0..blocks)
                .map(|b| {
                    search.tallies[b]
                        .chunks(width)
                        .map(|c| {
                            let mut best = 0;
                            for z in 1..width - 1 {
                                if c[z] > c[best] {
                                    best = z;
                                }
                            }
                            best as u32
                        })
                        .collect()
                })
                .collect();
            return Ok(OptimalProtocol {
                bits,
                blocks,
                error: search.total_error(),
                assignment: search.assignment,
                responses,
            });
        }
        if max_blocks == n {
            // Singletons have zero error, so this only triggers for eps < 0.
            return Err(Error::Infeasible(format!(
                "error {eps} is below the minimum achievable error 0"
            )));
        }
        bits += 1;
    }
}
