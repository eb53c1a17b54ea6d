//! Monte Carlo execution of the sample-and-learn protocols.
//!
//! In each trial Alice holds `x`, Bob holds `y`, `(x, y) ~ μ`. Alice uses
//! correlation sampling to give both parties `m` samples `y₁, …, y_m ~ μ_x`
//! (message M₁: the accepted indices), then sends `f(x, yᵢ)` for each
//! sample (message M₂). Bob picks a row consistent with the labelled
//! sample and answers with it.
//!
//! Trial `t` draws its input from stream 0 and the shared coins from
//! stream 1 of [`trial_rng`]; aggregate statistics are integer sums, so a
//! run gives the same result in any execution order.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use super::learning::{sample_size_boolean, sample_size_nonboolean};
use super::sampler::{index_code_length, GreedyRejectionSampler, Proposal};
use crate::dimensions::{pseudo_dimension, vc_dimension};
use crate::information::{infadd_expand_with_limit, mutual_information};
use crate::random::trial_rng;
use crate::table::{FunctionTable, JointDistribution};
use crate::{Error, Result};

/// Largest product space `y_sizeᵐ` allowed in joint mode.
pub const DEFAULT_JOINT_LIMIT: usize = 1_000_000;
/// Largest sample count a run accepts.
pub const DEFAULT_MAX_M: u64 = 1_000_000;
/// Largest `x_size · y_sizeᵐ` table precomputed in joint mode.
const JOINT_TABLE_LIMIT: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplingMode {
    /// `m` separate sampler runs on `Y`.
    Independent,
    /// One sampler run on the product space `Yᵐ`.
    Joint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputKind {
    /// Consistent-hypothesis learner, one bit per sample.
    Boolean,
    /// Empirical L1 minimizer, `⌈log₂ k⌉` bits per sample.
    NonBoolean,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolParams {
    /// Sample count; computed from the learning bound when `None`.
    pub m: Option<u64>,
    /// Constant of the learning sample-size bound.
    pub c0: f64,
    /// Per-run overhead constant of correlation sampling, in bits.
    pub l_const: f64,
    pub eps: f64,
    /// Abort (answering 0) when M₁ exceeds `2c/ε`.
    pub truncate: bool,
    pub mode: SamplingMode,
    pub trials: u64,
    pub seed: u64,
    /// Overrides the VC or pseudo-dimension used for the sample size.
    pub dimension: Option<usize>,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            m: None,
            c0: 1.0,
            l_const: 16.0,
            eps: 0.1,
            truncate: false,
            mode: SamplingMode::Independent,
            trials: 1000,
            seed: 0,
            dimension: None,
        }
    }
}

impl ProtocolParams {
    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(Error::InvalidArgument(format!("eps {} outside (0, 1/2)", self.eps)));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.m == Some(0) {
            return Err(Error::InvalidArgument("m must be at least 1".into()));
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) || !(self.l_const >= 0.0 && self.l_const.is_finite()) {
            return Err(Error::InvalidArgument("c0 must be positive and l finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub m1_bits: u64,
    pub error: bool,
    pub aborted: bool,
}

/// Order-independent running sums over trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StatsAccumulator {
    pub trials: u64,
    pub sum_m1_bits: u128,
    pub max_m1_bits: u64,
    pub errors: u64,
    pub aborts: u64,
}

impl StatsAccumulator {
    pub fn add(mut self, o: TrialOutcome) -> Self {
        self.trials += 1;
        self.sum_m1_bits += o.m1_bits as u128;
        self.max_m1_bits = self.max_m1_bits.max(o.m1_bits);
        self.errors += o.error as u64;
        self.aborts += o.aborted as u64;
        self
    }

    pub fn merge(self, o: Self) -> Self {
        Self {
            trials: self.trials + o.trials,
            sum_m1_bits: self.sum_m1_bits + o.sum_m1_bits,
            max_m1_bits: self.max_m1_bits.max(o.max_m1_bits),
            errors: self.errors + o.errors,
            aborts: self.aborts + o.aborts,
        }
    }

    pub fn finish(self, m2_bits: u64) -> TranscriptStats {
        let n = self.trials.max(1) as f64;
        TranscriptStats {
            trials: self.trials,
            mean_m1_bits: self.sum_m1_bits as f64 / n,
            max_m1_bits: self.max_m1_bits,
            m2_bits,
            error_rate: self.errors as f64 / n,
            abort_rate: self.aborts as f64 / n,
            errors: self.errors,
            aborts: self.aborts,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TranscriptStats {
    pub trials: u64,
    pub mean_m1_bits: f64,
    pub max_m1_bits: u64,
    /// Length of M₂, the same in every trial.
    pub m2_bits: u64,
    pub error_rate: f64,
    pub abort_rate: f64,
    pub errors: u64,
    pub aborts: u64,
}

/// Everything a trial needs, precomputed once per configuration.
#[derive(Debug)]
pub struct ProtocolSetup {
    kind: OutputKind,
    f: FunctionTable,
    eps: f64,
    mode: SamplingMode,
    seed: u64,
    trials: u64,
    m: u64,
    dimension: Option<usize>,
    mi_bits: f64,
    threshold: Option<f64>,
    m2_bits: u64,
    input: WeightedIndex<f64>,
    /// One sampler per row of positive mass, over `Y` or `Yᵐ`.
    samplers: Vec<Option<GreedyRejectionSampler>>,
    /// Per column, the rows where the value is 1, as 64-bit words.
    ones: Vec<Vec<u64>>,
}

impl ProtocolSetup {
    pub fn new(
        f: &FunctionTable,
        mu: &JointDistribution,
        params: &ProtocolParams,
        kind: OutputKind,
    ) -> Result<Self> {
        params.validate()?;
        f.require_matches(mu)?;
        match kind {
            OutputKind::Boolean => f.require_boolean_total()?,
            OutputKind::NonBoolean => f.require_total()?,
        }
        let k = f.z_size();
        // The dimension only feeds the sample size; with m given, a search
        // that exceeds its cap leaves it unknown.
        let dimension = match (params.dimension, kind) {
            (Some(d), _) => Ok(d),
            (None, OutputKind::Boolean) => vc_dimension(f).map(|r| r.0),
            (None, OutputKind::NonBoolean) => {
                let gamma = params.eps * params.eps / (576.0 * (k * k) as f64);
                pseudo_dimension(f, gamma).map(|r| r.0)
            }
        };
        let (m, dimension) = match (params.m, dimension) {
            (Some(m), Ok(d)) => (m, Some(d)),
            (Some(m), Err(e)) if e.is_infeasible() => (m, None),
            (_, Err(e)) => return Err(e),
            (None, Ok(d)) => {
                let m = match kind {
                    OutputKind::Boolean => {
                        sample_size_boolean(d, params.eps / 4.0, params.eps / 4.0, params.c0)
                    }
                    OutputKind::NonBoolean => {
                        sample_size_nonboolean(d, params.eps / k as f64, params.eps, params.c0)
                    }
                };
                (m.max(1), Some(d))
            }
        };
        if m > DEFAULT_MAX_M {
            return Err(Error::cap("m", m, DEFAULT_MAX_M));
        }
        let mi_bits = mutual_information(mu);
        let value_bits = (k as u64).next_power_of_two().trailing_zeros() as u64;
        let m2_bits = match kind {
            OutputKind::Boolean => m,
            OutputKind::NonBoolean => m * value_bits,
        };
        let threshold = params.truncate.then(|| {
            // Independent mode pays the overhead once per sample.
            let overhead = match params.mode {
                SamplingMode::Independent => m as f64 * params.l_const,
                SamplingMode::Joint => params.l_const,
            };
            2.0 * (4.0 * m as f64 * mi_bits + overhead) / params.eps
        });
        let samplers = match params.mode {
            SamplingMode::Independent => row_samplers(mu)?,
            SamplingMode::Joint => {
                let m32 = u32::try_from(m).map_err(|_| Error::cap("m", m, u32::MAX))?;
                let size = (mu.y_size() as u128).checked_pow(m32).unwrap_or(u128::MAX);
                if size > DEFAULT_JOINT_LIMIT as u128 {
                    return Err(Error::cap("y_size^m", size, DEFAULT_JOINT_LIMIT as u128));
                }
                let entries = size * mu.x_size() as u128;
                if entries > JOINT_TABLE_LIMIT as u128 {
                    return Err(Error::cap("x_size * y_size^m", entries, JOINT_TABLE_LIMIT as u128));
                }
                row_samplers(&infadd_expand_with_limit(mu, m32, DEFAULT_JOINT_LIMIT)?)?
            }
        };
        let words = f.x_size().div_ceil(64);
        let ones = match kind {
            OutputKind::Boolean => (0..f.y_size())
                .map(|y| {
                    let mut col = vec![0u64; words];
                    for x in 0..f.x_size() {
                        if f.value(x, y) == 1 {
                            col[x / 64] |= 1 << (x % 64);
                        }
                    }
                    col
                })
                .collect(),
            OutputKind::NonBoolean => Vec::new(),
        };
        Ok(Self {
            kind,
            f: f.clone(),
            eps: params.eps,
            mode: params.mode,
            seed: params.seed,
            trials: params.trials,
            m,
            dimension,
            mi_bits,
            threshold,
            m2_bits,
            input: WeightedIndex::new(mu.probs()).expect("a distribution has positive mass"),
            samplers,
            ones,
        })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// VC dimension (boolean) or pseudo-dimension (non-boolean); `None`
    /// when `m` was given and the search exceeded its cap.
    pub fn dimension(&self) -> Option<usize> {
        self.dimension
    }

    pub fn mi_bits(&self) -> f64 {
        self.mi_bits
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn mode(&self) -> SamplingMode {
        self.mode
    }

    pub fn kind(&self) -> OutputKind {
        self.kind
    }

    /// The M₁ length above which the truncated protocol aborts.
    pub fn abort_threshold(&self) -> Option<f64> {
        self.threshold
    }

    pub fn m2_bits(&self) -> u64 {
        self.m2_bits
    }

    pub fn run_trial(&self, trial: u64) -> TrialOutcome {
        let y_size = self.f.y_size();
        let cell = self.input.sample(&mut trial_rng(self.seed, trial, 0));
        let (x, y) = (cell / y_size, cell % y_size);
        let sampler = self.samplers[x]
            .as_ref()
            .expect("inputs are drawn from rows of positive mass");
        let mut shared = trial_rng(self.seed, trial, 1);
        let m = self.m as usize;
        let mut samples = Vec::with_capacity(m);
        let mut m1_bits = 0u64;
        match self.mode {
            SamplingMode::Independent => {
                for _ in 0..m {
                    let (index, s) = sampler.sample(&mut shared);
                    m1_bits += index_code_length(index) as u64;
                    samples.push(s);
                }
            }
            SamplingMode::Joint => {
                let (index, mut s) = sampler.sample(&mut shared);
                m1_bits = index_code_length(index) as u64;
                samples.resize(m, 0);
                for slot in samples.iter_mut().rev() {
                    *slot = s % y_size;
                    s /= y_size;
                }
            }
        }
        let truth = self.f.value(x, y);
        let aborted = self.threshold.is_some_and(|t| m1_bits as f64 > t);
        let answer = if aborted {
            0
        } else {
            let guess = match self.kind {
                OutputKind::Boolean => self.consistent_row(x, &samples),
                OutputKind::NonBoolean => self.l1_row(x, &samples),
            };
            self.f.value(guess, y)
        };
        TrialOutcome {
            m1_bits,
            error: answer != truth,
            aborted,
        }
    }

    /// First row agreeing with row `x` on every sample.
    fn consistent_row(&self, x: usize, samples: &[usize]) -> usize {
        let mut alive = vec![u64::MAX; self.f.x_size().div_ceil(64)];
        for &s in samples {
            let col = &self.ones[s];
            if self.f.value(x, s) == 1 {
                alive.iter_mut().zip(col).for_each(|(a, c)| *a &= c);
            } else {
                alive.iter_mut().zip(col).for_each(|(a, c)| *a &= !c);
            }
        }
        alive
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
            .expect("row x is always consistent")
    }

    /// Row minimizing the empirical L1 loss against row `x`; ties go to the
    /// smaller index. The affine scaling of values does not change the
    /// minimizer, so integer distances suffice.
    fn l1_row(&self, x: usize, samples: &[usize]) -> usize {
        let mut best = (u64::MAX, 0);
        for cand in 0..self.f.x_size() {
            let loss: u64 = samples
                .iter()
                .map(|&s| self.f.value(cand, s).abs_diff(self.f.value(x, s)) as u64)
                .sum();
            if loss < best.0 {
                best = (loss, cand);
            }
        }
        best.1
    }

    /// Runs all trials sequentially.
    pub fn run(&self) -> TranscriptStats {
        (0..self.trials)
            .fold(StatsAccumulator::default(), |acc, t| acc.add(self.run_trial(t)))
            .finish(self.m2_bits)
    }
}

fn row_samplers(mu: &JointDistribution) -> Result<Vec<Option<GreedyRejectionSampler>>> {
    let proposal = Arc::new(Proposal::new(&mu.y_marginal()));
    (0..mu.x_size())
        .map(|x| {
            if mu.row_mass(x) <= 0.0 {
                return Ok(None);
            }
            GreedyRejectionSampler::new(&mu.conditional_row(x)?, proposal.clone()).map(Some)
        })
        .collect()
}

pub fn run_boolean_protocol(
    f: &FunctionTable,
    mu: &JointDistribution,
    params: &ProtocolParams,
) -> Result<TranscriptStats> {
    Ok(ProtocolSetup::new(f, mu, params, OutputKind::Boolean)?.run())
}

pub fn run_nonboolean_protocol(
    f: &FunctionTable,
    mu: &JointDistribution,
    params: &ProtocolParams,
) -> Result<TranscriptStats> {
    Ok(ProtocolSetup::new(f, mu, params, OutputKind::NonBoolean)?.run())
}

/// Smallest `m ≤ max_m` whose error rate, as reported by `eval`, is at most
/// `target`: doubling from 1, then binary search on the last gap.
pub fn calibrate_m<F>(target: f64, max_m: u64, mut eval: F) -> Result<u64>
where
    F: FnMut(u64) -> Result<f64>,
{
    if max_m == 0 {
        return Err(Error::InvalidArgument("max_m must be at least 1".into()));
    }
    let mut failing = 0u64;
    let mut m = 1u64;
    loop {
        if eval(m)? <= target {
            break;
        }
        if m >= max_m {
            return Err(Error::Infeasible(format!(
                "error target {target} not met for any m up to {max_m}"
            )));
        }
        failing = m;
        m = (m * 2).min(max_m);
    }
    let (mut lo, mut hi) = (failing + 1, m);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if eval(mid)? <= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(hi)
}
