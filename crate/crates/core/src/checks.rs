//! Randomized verification suites for the inequalities the library relies
//! on. Each instance is generated from its own seeded stream, so suites can
//! be split across workers and still aggregate to the same report.
//!
//! A margin is `bound − value`, or minus the deviation for equalities; an
//! instance violates its check when a margin falls below
//! `−COMPARISON_TOLERANCE`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::dimensions::{sauer_bound, vc_dimension};
use crate::information::{
    binary_entropy, chain_rule_terms, conditional_entropy_x_given_y, fano_bound,
    infadd_expand, mutual_information, LabeledJoint,
};
use crate::quantum::{
    guessing_probability, helstrom_measurement, helstrom_success, holevo_chi, largeinf_gap,
    measure, QuantumEnsemble,
};
use crate::random::{self, trial_rng};
use crate::{Result, COMPARISON_TOLERANCE};

/// Grid step of the small-entropy suite.
const SSMALL_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    /// Helstrom's formula: attained by the positive-eigenspace projector and
    /// never beaten by random two-outcome measurements.
    Helstrom,
    /// Measured mutual information never exceeds the Holevo quantity.
    Holevo,
    /// `I(Z:Z') ≥ S(c) − S(d)` for binary qubit ensembles under the
    /// Helstrom measurement.
    Largeinf,
    /// `S(Pe) + Pe·log₂(|X| − 1) ≥ S(X|Y)`.
    Fano,
    /// `S(½ + δ) ≤ 1 − 2δ²` and `S(δ) ≤ 2√δ` on a grid over `[0, ½]`.
    Ssmall,
    /// `I(X:Y) ≥ 0`.
    MiNonnegative,
    /// Chain-rule terms sum to the total mutual information.
    ChainRule,
    /// `I(X':Y') ≤ m·I(X:Y)` for `m = 1, 2, 3`.
    Infadd,
    /// Distinct rows are at most Sauer's bound.
    Sauer,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Helstrom,
        Suite::Holevo,
        Suite::Largeinf,
        Suite::Fano,
        Suite::Ssmall,
        Suite::MiNonnegative,
        Suite::ChainRule,
        Suite::Infadd,
        Suite::Sauer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Helstrom => "helstrom",
            Suite::Holevo => "holevo",
            Suite::Largeinf => "largeinf",
            Suite::Fano => "fano",
            Suite::Ssmall => "ssmall",
            Suite::MiNonnegative => "mi-nonnegative",
            Suite::ChainRule => "chain-rule",
            Suite::Infadd => "infadd",
            Suite::Sauer => "sauer",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Instance count for a requested trial count; the grid suite ignores
    /// the request.
    pub fn instances(self, trials: u64) -> u64 {
        match self {
            Suite::Ssmall => libm::round(0.5 / SSMALL_STEP) as u64 + 1,
            _ => trials,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub instances: u64,
    pub violations: u64,
    pub worst_margin: f64,
}

/// Running summary of margins; merging is order-independent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarginSummary {
    pub instances: u64,
    pub violations: u64,
    pub worst_margin: f64,
}

impl Default for MarginSummary {
    fn default() -> Self {
        Self {
            instances: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
        }
    }
}

impl MarginSummary {
    pub fn add(mut self, margins: &[f64]) -> Self {
        self.instances += 1;
        if margins.iter().any(|&m| m < -COMPARISON_TOLERANCE) {
            self.violations += 1;
        }
        self.worst_margin = margins.iter().copied().fold(self.worst_margin, f64::min);
        self
    }

    pub fn merge(self, o: Self) -> Self {
        Self {
            instances: self.instances + o.instances,
            violations: self.violations + o.violations,
            worst_margin: self.worst_margin.min(o.worst_margin),
        }
    }

    pub fn report(self, suite: Suite) -> SuiteReport {
        SuiteReport {
            suite: suite.name(),
            instances: self.instances,
            violations: self.violations,
            worst_margin: self.worst_margin,
        }
    }
}

/// Parameters shared by the instance generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckConfig {
    pub seed: u64,
    /// Random competing measurements per Helstrom instance.
    pub helstrom_measurements: u32,
}

impl CheckConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            helstrom_measurements: 1000,
        }
    }
}

fn mi_of(j: &LabeledJoint) -> Result<f64> {
    Ok(j.group_entropy(&[0])? + j.group_entropy(&[1])? - j.group_entropy(&[0, 1])?)
}

/// Margins of instance `t` of `suite`.
pub fn check_instance(suite: Suite, cfg: &CheckConfig, t: u64) -> Result<Vec<f64>> {
    let mut rng = trial_rng(cfg.seed, t, 0);
    match suite {
        Suite::Holevo => {
            let dim = rng.random_range(2..=4);
            let members = rng.random_range(2..=4);
            let states = (0..members)
                .map(|_| {
                    let rank = rng.random_range(1..=dim);
                    random::density_matrix(dim, rank, &mut rng)
                })
                .collect::<Vec<_>>();
            let priors = random::mass_function(members, &mut rng);
            let e = QuantumEnsemble::new(priors.probs().iter().copied().zip(states).collect())?;
            let outcomes = rng.random_range(2..=4);
            let ops = random::povm(dim, outcomes, &mut rng);
            Ok(vec![holevo_chi(&e) - mi_of(&measure(&e, &ops)?)?])
        }
        Suite::Helstrom => {
            let dim = rng.random_range(2..=4);
            let r0 = random::density_matrix(dim, rng.random_range(1..=dim), &mut rng);
            let r1 = random::density_matrix(dim, rng.random_range(1..=dim), &mut rng);
            let p0: f64 = rng.random();
            let p1 = 1.0 - p0;
            let best = helstrom_success(p0, &r0, p1, &r1)?;
            let [proj, _] = helstrom_measurement(p0, &r0, p1, &r1)?;
            let attained = guessing_probability(p0, &r0, p1, &r1, &proj);
            let mut margins = vec![-(attained - best).abs()];
            let mut beaten = f64::INFINITY;
            for _ in 0..cfg.helstrom_measurements {
                let ops = random::povm(dim, 2, &mut rng);
                beaten = beaten.min(best - guessing_probability(p0, &r0, p1, &r1, &ops[0]));
            }
            margins.push(beaten);
            Ok(margins)
        }
        Suite::Largeinf => {
            let r0 = random::density_matrix(2, rng.random_range(1..=2), &mut rng);
            let r1 = random::density_matrix(2, rng.random_range(1..=2), &mut rng);
            let p0: f64 = rng.random_range(0.05..0.95);
            let ops = helstrom_measurement(p0, &r0, 1.0 - p0, &r1)?;
            let e = QuantumEnsemble::new(vec![(p0, r0), (1.0 - p0, r1)])?;
            let gap = largeinf_gap(&e, &ops)?;
            Ok(vec![gap.information - gap.bound])
        }
        Suite::Fano => {
            let size = rng.random_range(2..=6);
            let mu = random::joint(size, size, &mut rng);
            let pe: f64 = 1.0 - (0..size).map(|i| mu.prob(i, i)).sum::<f64>();
            let bound = fano_bound(pe.clamp(0.0, 1.0), size)?;
            Ok(vec![bound - conditional_entropy_x_given_y(&mu)])
        }
        Suite::Ssmall => {
            let delta = (t as f64 * SSMALL_STEP).min(0.5);
            let near_half = (1.0 - 2.0 * delta * delta) - binary_entropy(0.5 + delta)?;
            let small = 2.0 * libm::sqrt(delta) - binary_entropy(delta)?;
            Ok(vec![near_half, small])
        }
        Suite::MiNonnegative => {
            let (nx, ny) = (rng.random_range(2..=6), rng.random_range(2..=6));
            let mu = if rng.random::<bool>() {
                random::joint(nx, ny, &mut rng)
            } else {
                random::sparse_joint(nx, ny, 0.5, &mut rng)
            };
            Ok(vec![mutual_information(&mu)])
        }
        Suite::ChainRule => {
            let xs = rng.random_range(2..=3);
            let axes: Vec<usize> = (0..=xs).map(|_| rng.random_range(2..=3)).collect();
            let j = random::labeled_joint(&axes, &mut rng);
            let x_axes: Vec<usize> = (0..xs).collect();
            let terms = chain_rule_terms(&j, &x_axes, &[xs])?;
            let total = j.group_entropy(&x_axes)? + j.group_entropy(&[xs])?
                - j.group_entropy(&(0..=xs).collect::<Vec<_>>())?;
            let diff = (terms.iter().sum::<f64>() - total).abs();
            let mut margins = vec![-diff];
            margins.extend(terms.iter().copied());
            Ok(margins)
        }
        Suite::Infadd => {
            let mu = random::joint(3, 3, &mut rng);
            let base = mutual_information(&mu);
            (1..=3u32)
                .map(|m| Ok(m as f64 * base - mutual_information(&infadd_expand(&mu, m)?)))
                .collect()
        }
        Suite::Sauer => {
            let (nx, ny) = (rng.random_range(1..=12), rng.random_range(1..=12));
            let f = random::boolean_table(nx, ny, &mut rng);
            let d = vc_dimension(&f)?.0;
            let bound = sauer_bound(ny as u64, d as u64)?;
            Ok(vec![bound as f64 - f.distinct_rows() as f64])
        }
    }
}

/// Runs `suite` sequentially over its instances.
pub fn run_suite(suite: Suite, trials: u64, cfg: &CheckConfig) -> Result<SuiteReport> {
    let mut summary = MarginSummary::default();
    for t in 0..suite.instances(trials) {
        summary = summary.add(&check_instance(suite, cfg, t)?);
    }
    Ok(summary.report(suite))
}
