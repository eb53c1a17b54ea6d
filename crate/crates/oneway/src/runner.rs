//! Parallel drivers for protocol trials and verification suites.
//!
//! Trials draw from per-trial streams and aggregate through order-free sums,
//! so results do not depend on the worker count.

use oneway_core::checks::{check_instance, CheckConfig, MarginSummary, Suite, SuiteReport};
use oneway_core::protocols::{calibrate_m, OutputKind, ProtocolParams, ProtocolSetup, StatsAccumulator, TranscriptStats};
use oneway_core::{FunctionTable, JointDistribution};
use rayon::prelude::*;

use crate::Result;

/// Runs `f` on a pool of `threads` workers, or the global pool when `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(f)),
    }
}

pub fn run_protocol(setup: &ProtocolSetup) -> TranscriptStats {
    (0..setup.trials())
        .into_par_iter()
        .fold(StatsAccumulator::default, |acc, t| acc.add(setup.run_trial(t)))
        .reduce(StatsAccumulator::default, StatsAccumulator::merge)
        .finish(setup.m2_bits())
}

pub fn run_suite(suite: Suite, trials: u64, cfg: &CheckConfig) -> Result<SuiteReport> {
    let summary = (0..suite.instances(trials))
        .into_par_iter()
        .map(|t| check_instance(suite, cfg, t))
        .try_fold(MarginSummary::default, |acc, margins| Ok::<_, oneway_core::Error>(acc.add(&margins?)))
        .try_reduce(MarginSummary::default, |a, b| Ok(a.merge(b)))?;
    Ok(summary.report(suite))
}

/// Smallest `m ≤ max_m` whose empirical error over `params.trials` trials
/// (seeded by `params.seed`) is at most `target`, with its error rate.
pub fn calibrate(
    f: &FunctionTable,
    mu: &JointDistribution,
    params: &ProtocolParams,
    kind: OutputKind,
    target: f64,
    max_m: u64,
) -> Result<(u64, f64)> {
    let eval = |m: u64| -> oneway_core::Result<f64> {
        let p = ProtocolParams {
            m: Some(m),
            ..params.clone()
        };
        Ok(run_protocol(&ProtocolSetup::new(f, mu, &p, kind)?).error_rate)
    };
    let m = calibrate_m(target, max_m, eval)?;
    let rate = eval(m)?;
    Ok((m, rate))
}
