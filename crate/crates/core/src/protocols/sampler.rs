//! Greedy rejection sampling with shared randomness.
//!
//! Both parties read the same stream of proposals `y₁, y₂, … ~ q` and
//! uniforms `u₁, u₂, …`. Round `i` carries a scalar state `(C, s)`: the mass
//! already allotted to target `y` is `min(p(y), q(y)·C)` and `s` is the
//! target mass still unallotted. The proposal is accepted when
//! `uᵢ·q(yᵢ)·s < min(p(yᵢ), q(yᵢ)(C+s)) − min(p(yᵢ), q(yᵢ)C)`. The accepted
//! index is what the sender transmits.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::information::MassFunction;
use crate::{Error, Result};

/// Below this residual mass the acceptance rule switches to the floor rule.
const RESIDUAL_FLOOR: f64 = 1e-12;

/// The shared proposal distribution.
#[derive(Clone, Debug)]
pub struct Proposal {
    q: Vec<f64>,
    index: WeightedIndex<f64>,
}

impl Proposal {
    pub fn new(q: &MassFunction) -> Self {
        let index = WeightedIndex::new(q.probs()).expect("a mass function has positive total weight");
        Self {
            q: q.probs().to_vec(),
            index,
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.q
    }
}

/// Sampler for one target `p` against a shared [`Proposal`].
#[derive(Clone, Debug)]
pub struct GreedyRejectionSampler {
    proposal: Arc<Proposal>,
    p: Vec<f64>,
    /// `p/q` over the proposal support, ascending.
    ratios: Vec<f64>,
    /// `prefix_p[j]` is the target mass of the first `j` sorted entries.
    prefix_p: Vec<f64>,
    /// `suffix_q[j]` is the proposal mass of the entries from `j` on.
    suffix_q: Vec<f64>,
}

impl GreedyRejectionSampler {
    pub fn new(p: &MassFunction, proposal: Arc<Proposal>) -> Result<Self> {
        let q = proposal.probs();
        if p.len() != q.len() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "target has {} outcomes, proposal {}",
                p.len(),
                q.len()
            )));
        }
        if let Some(y) = (0..q.len()).find(|&y| p.probs()[y] > 0.0 && q[y] <= 0.0) {
            return Err(Error::SupportViolation(y));
        }
        let mut order: Vec<(f64, f64, f64)> = (0..q.len())
            .filter(|&y| q[y] > 0.0)
            .map(|y| (p.probs()[y] / q[y], p.probs()[y], q[y]))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = order.len();
        let mut prefix_p = Vec::with_capacity(n + 1);
        prefix_p.push(0.0);
        for &(_, py, _) in &order {
            prefix_p.push(prefix_p.last().unwrap() + py);
        }
        let mut suffix_q = vec![0.0; n + 1];
        for j in (0..n).rev() {
            suffix_q[j] = suffix_q[j + 1] + order[j].2;
        }
        Ok(Self {
            proposal,
            p: p.probs().to_vec(),
            ratios: order.iter().map(|t| t.0).collect(),
            prefix_p,
            suffix_q,
        })
    }

    /// `Σ_y min(p(y), q(y)·c)`.
    fn allotted(&self, c: f64) -> f64 {
        let j = self.ratios.partition_point(|&r| r <= c);
        self.prefix_p[j] + c * self.suffix_q[j]
    }

    fn max_ratio(&self) -> f64 {
        self.ratios.last().copied().unwrap_or(0.0)
    }

    /// Runs the protocol on the shared stream and returns the accepted
    /// 1-based index and the sample.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (u64, usize) {
        let q = &self.proposal.q;
        let max_ratio = self.max_ratio();
        let (mut c, mut s) = (0.0f64, 1.0f64);
        let mut i = 1u64;
        loop {
            let y = self.proposal.index.sample(rng);
            let u: f64 = rng.random();
            let (py, qy) = (self.p[y], q[y]);
            let accept = if s > RESIDUAL_FLOOR {
                let gain = py.min(qy * (c + s)) - py.min(qy * c);
                u * qy * s < gain
            } else {
                py > qy * c || (c >= max_ratio && py > 0.0)
            };
            if accept {
                return (i, y);
            }
            c += s;
            s = (1.0 - self.allotted(c)).max(0.0);
            i += 1;
        }
    }
}

/// Length of the Elias-gamma code of `i ≥ 1`: `2⌊log₂ i⌋ + 1`.
pub fn index_code_length(i: u64) -> u32 {
    assert!(i >= 1, "Elias-gamma codes positive integers");
    2 * i.ilog2() + 1
}

/// Elias-gamma code of `i ≥ 1`: `⌊log₂ i⌋` zeros, then `i` in binary.
pub fn encode_index(i: u64) -> Vec<bool> {
    assert!(i >= 1, "Elias-gamma codes positive integers");
    let n = i.ilog2();
    let mut bits = vec![false; n as usize];
    bits.extend((0..=n).rev().map(|b| i >> b & 1 == 1));
    bits
}

/// Decodes one Elias-gamma codeword from the front of `bits`, returning the
/// value and the number of bits consumed.
pub fn decode_index(bits: &[bool]) -> Option<(u64, usize)> {
    let zeros = bits.iter().position(|&b| b)?;
    if zeros >= 64 || bits.len() < 2 * zeros + 1 {
        return None;
    }
    let value = bits[zeros..=2 * zeros]
        .iter()
        .fold(0u64, |acc, &b| acc << 1 | b as u64);
    Some((value, 2 * zeros + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{mass_function, trial_rng};

    fn sampler(p: &[f64], q: &[f64]) -> GreedyRejectionSampler {
        let proposal = Arc::new(Proposal::new(&MassFunction::new(q.to_vec()).unwrap()));
        GreedyRejectionSampler::new(&MassFunction::new(p.to_vec()).unwrap(), proposal).unwrap()
    }

    #[test]
    fn identical_target_accepts_first() {
        let s = sampler(&[0.2, 0.3, 0.5], &[0.2, 0.3, 0.5]);
        let mut rng = trial_rng(1, 0, 1);
        for _ in 0..1000 {
            assert_eq!(s.sample(&mut rng).0, 1);
        }
    }

    #[test]
    fn point_target_index_is_geometric() {
        let s = sampler(&[1.0, 0.0], &[0.5, 0.5]);
        let mut rng = trial_rng(2, 0, 1);
        let draws = 100_000;
        let mut total = 0u64;
        for _ in 0..draws {
            let (i, y) = s.sample(&mut rng);
            assert_eq!(y, 0);
            total += i;
        }
        let mean = total as f64 / draws as f64;
        // Geometric(1/2): mean 2, standard deviation √2.
        assert!((mean - 2.0).abs() < 5.0 * 2f64.sqrt() / (draws as f64).sqrt());
    }

    #[test]
    fn sampler_is_exact() {
        let mut gen = trial_rng(3, 0, 0);
        for pair in 0..5 {
            let p = mass_function(8, &mut gen);
            let q = mass_function(8, &mut gen);
            let s = GreedyRejectionSampler::new(&p, Arc::new(Proposal::new(&q))).unwrap();
            let mut rng = trial_rng(3, pair, 1);
            let mut counts = [0u32; 8];
            let draws = 100_000;
            for _ in 0..draws {
                counts[s.sample(&mut rng).1] += 1;
            }
            let l1: f64 = (0..8)
                .map(|y| (counts[y] as f64 / draws as f64 - p.probs()[y]).abs())
                .sum();
            assert!(l1 <= 0.02, "l1 = {l1}");
        }
    }

    #[test]
    fn support_violation_is_rejected() {
        let proposal = Arc::new(Proposal::new(&MassFunction::new(vec![1.0, 0.0]).unwrap()));
        let p = MassFunction::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(
            GreedyRejectionSampler::new(&p, proposal).unwrap_err(),
            Error::SupportViolation(1)
        );
    }

    #[test]
    fn elias_gamma() {
        assert_eq!(index_code_length(1), 1);
        assert_eq!(index_code_length(2), 3);
        assert_eq!(index_code_length(5), 5);
        assert_eq!(encode_index(5), vec![false, false, true, false, true]);
        for i in 1..2000u64 {
            let code = encode_index(i);
            assert_eq!(code.len() as u32, index_code_length(i));
            assert_eq!(decode_index(&code), Some((i, code.len())));
        }
    }

    #[test]
    fn elias_gamma_is_prefix_free() {
        let codes: Vec<Vec<bool>> = (1..300u64).map(encode_index).collect();
        for (a, ca) in codes.iter().enumerate() {
            for (b, cb) in codes.iter().enumerate() {
                if a != b {
                    assert!(!cb.starts_with(ca));
                }
            }
        }
    }
}
