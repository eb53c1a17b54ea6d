//! Strong-extractor audits for boolean `h: {0,1}ⁿ × {0,1}ᵐ → {0,1}`.
//!
//! The bias of a source `X` is `‖h(X,Y)Y − U⊗Y‖₁ = E_y |2·Pr[h(X,y)=1] − 1|`
//! for uniform `Y`. It is convex in the distribution of `X`, and the sources
//! with min-entropy at least `k` form a polytope whose vertices are the flat
//! sources on `2ᵏ` points, so the worst case is attained by a flat source.
//! For a fixed sign pattern `σ` on the columns the bias is linear in `X`,
//! and the best flat source takes the `2ᵏ` rows with the largest
//! `Σ_y σ_y (2h(x,y) − 1)`. Maximizing over all `2^(2ᵐ)` patterns is exact.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;

use crate::information::{binary_entropy, mutual_information};
use crate::quantum::{holevo_chi, trace_norm, DensityMatrix, QuantumEnsemble};
use crate::random::{trial_rng, C64};
use crate::rectangles::rec_exact;
use crate::table::{FunctionTable, JointDistribution};
use crate::{Error, Result};

/// Options for the worst-flat-source search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    /// Largest `m` searched exactly.
    pub max_exact_m: u32,
    /// Beyond `max_exact_m`, run coordinate ascent instead of refusing.
    pub allow_greedy: bool,
    pub restarts: u32,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            max_exact_m: 4,
            allow_greedy: false,
            restarts: 32,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractorAudit {
    pub n: u32,
    pub m: u32,
    pub k: u32,
    /// Sorted support of the worst flat source found.
    pub worst_set: Vec<usize>,
    pub bias: f64,
    /// `bias < 2ε`.
    pub is_strong: bool,
    /// False when the greedy search ran; `bias` is then a lower bound on the
    /// worst bias.
    pub exact: bool,
}

fn log2_size(len: usize, what: &str) -> Result<u32> {
    if !len.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "{what} size {len} is not a power of two"
        )));
    }
    Ok(len.trailing_zeros())
}

/// `(n, m)` with `|X| = 2ⁿ`, `|Y| = 2ᵐ`.
fn shape(h: &FunctionTable) -> Result<(u32, u32)> {
    h.require_boolean_total()?;
    Ok((log2_size(h.x_size(), "X")?, log2_size(h.y_size(), "Y")?))
}

/// Bias of the flat source on `rows`: `(1/|Y|)·Σ_y |2p_y − 1|` where `p_y`
/// is the fraction of rows with `h(x, y) = 1`.
pub fn flat_source_bias(h: &FunctionTable, rows: &[usize]) -> Result<f64> {
    h.require_boolean_total()?;
    if rows.is_empty() {
        return Err(Error::InvalidArgument("source support is empty".into()));
    }
    if let Some(&x) = rows.iter().find(|&&x| x >= h.x_size()) {
        return Err(Error::InvalidArgument(format!("row {x} out of range")));
    }
    let total: u64 = (0..h.y_size())
        .map(|y| {
            let ones = rows.iter().filter(|&&x| h.value(x, y) == 1).count() as i64;
            (2 * ones - rows.len() as i64).unsigned_abs()
        })
        .sum();
    Ok(total as f64 / (rows.len() * h.y_size()) as f64)
}

/// `±1` encoding of `h`: `signs[x][y] = 2h(x, y) − 1`.
fn signs(h: &FunctionTable) -> Vec<Vec<i64>> {
    (0..h.x_size())
        .map(|x| (0..h.y_size()).map(|y| 2 * h.value(x, y) as i64 - 1).collect())
        .collect()
}

/// Top `size` rows by score, ties to smaller index; returns the summed score
/// and the sorted rows.
fn top_rows(scores: &[i64], size: usize, order: &mut [usize]) -> (i64, Vec<usize>) {
    order.sort_by(|&a, &b| scores[b].cmp(&scores[a]).then(a.cmp(&b)));
    let mut rows = order[..size].to_vec();
    let total = rows.iter().map(|&x| scores[x]).sum();
    rows.sort_unstable();
    (total, rows)
}

fn better(candidate: &(i64, Vec<usize>), best: &Option<(i64, Vec<usize>)>) -> bool {
    match best {
        None => true,
        Some((t, rows)) => candidate.0 > *t || (candidate.0 == *t && candidate.1 < *rows),
    }
}

/// Worst flat source of size `2ᵏ`, exactly when `m ≤ max_exact_m`.
pub fn worst_flat_source(h: &FunctionTable, k: u32, opts: &SearchOptions) -> Result<(Vec<usize>, f64, bool)> {
    let (n, m) = shape(h)?;
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {n}")));
    }
    let size = 1usize << k;
    let s = signs(h);
    let cols = h.y_size();
    let mut order: Vec<usize> = (0..h.x_size()).collect();
    let mut best: Option<(i64, Vec<usize>)> = None;
    let exact = m <= opts.max_exact_m;
    if exact {
        // Gray-code walk over σ ∈ {±1}^cols, starting from all +1.
        let mut sigma = vec![1i64; cols];
        let mut scores: Vec<i64> = s.iter().map(|row| row.iter().sum()).collect();
        let patterns = 1u64 << cols;
        for i in 0..patterns {
            if i > 0 {
                let y = i.trailing_zeros() as usize;
                sigma[y] = -sigma[y];
                for (score, row) in scores.iter_mut().zip(&s) {
                    *score += 2 * sigma[y] * row[y];
                }
            }
            let cand = top_rows(&scores, size, &mut order);
            if better(&cand, &best) {
                best = Some(cand);
            }
        }
    } else if opts.allow_greedy {
        for r in 0..opts.restarts.max(1) {
            let mut rng = trial_rng(opts.seed, r as u64, 2);
            let mut sigma: Vec<i64> = (0..cols).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
            let score_of = |sigma: &[i64]| -> Vec<i64> {
                s.iter().map(|row| row.iter().zip(sigma).map(|(a, b)| a * b).sum()).collect()
            };
            let mut current = top_rows(&score_of(&sigma), size, &mut order);
            loop {
                let mut improved = false;
                for y in 0..cols {
                    sigma[y] = -sigma[y];
                    let cand = top_rows(&score_of(&sigma), size, &mut order);
                    if cand.0 > current.0 {
                        current = cand;
                        improved = true;
                    } else {
                        sigma[y] = -sigma[y];
                    }
                }
                if !improved {
                    break;
                }
            }
            if better(&current, &best) {
                best = Some(current);
            }
        }
    } else {
        return Err(Error::cap("m for exact search", m, opts.max_exact_m));
    }
    let (total, rows) = best.expect("at least one pattern is scored");
    Ok((rows, total as f64 / (size * cols) as f64, exact))
}

pub fn audit(h: &FunctionTable, k: u32, eps: f64, opts: &SearchOptions) -> Result<ExtractorAudit> {
    check_eps(eps)?;
    let (n, m) = shape(h)?;
    let (worst_set, bias, exact) = worst_flat_source(h, k, opts)?;
    Ok(ExtractorAudit {
        n,
        m,
        k,
        worst_set,
        bias,
        is_strong: bias < 2.0 * eps,
        exact,
    })
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidArgument(format!("eps {eps} outside (0, 1/2)")));
    }
    Ok(())
}

/// Audits for every `k = 0, …, n`.
pub fn audit_all(h: &FunctionTable, eps: f64, opts: &SearchOptions) -> Result<Vec<ExtractorAudit>> {
    let (n, _) = shape(h)?;
    (0..=n).map(|k| audit(h, k, eps, opts)).collect()
}

/// Smallest `k` at which `h` is a strong `(k, ε)`-extractor, or `None`.
pub fn extractor_threshold(h: &FunctionTable, eps: f64, opts: &SearchOptions) -> Result<Option<u32>> {
    let (n, _) = shape(h)?;
    for k in 0..=n {
        if audit(h, k, eps, opts)?.is_strong {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LargerecRow {
    pub k: u32,
    pub bias: f64,
    /// Rectangle bound at error `½ − ε` under the uniform product input.
    pub rec: f64,
    /// `rec − (n − k)`; positive when the inequality holds.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LargerecReport {
    pub n: u32,
    /// One row per `k` at which `h` is a strong extractor.
    pub rows: Vec<LargerecRow>,
    pub holds: bool,
}

/// Checks that a strong `(k, ε)`-extractor has one-way rectangle bound
/// greater than `n − k` at error `½ − ε` under the uniform input.
pub fn largerec_check(h: &FunctionTable, eps: f64, opts: &SearchOptions) -> Result<LargerecReport> {
    let audits = audit_all(h, eps, opts)?;
    let n = audits[0].n;
    let strong: Vec<&ExtractorAudit> = audits.iter().filter(|a| a.is_strong).collect();
    let mut rows = Vec::new();
    if !strong.is_empty() {
        let mu = JointDistribution::uniform(h.x_size(), h.y_size())?;
        let rec = rec_exact(h, &mu, 0.5 - eps)?.value;
        for a in strong {
            rows.push(LargerecRow {
                k: a.k,
                bias: a.bias,
                rec,
                margin: rec - (n - a.k) as f64,
            });
        }
    }
    let holds = rows.iter().all(|r| r.margin > 0.0);
    Ok(LargerecReport { n, rows, holds })
}

/// `a(ε) = ¼(½ − ε)³`.
pub fn side_info_a(eps: f64) -> f64 {
    0.25 * libm::pow(0.5 - eps, 3.0)
}

/// `b(ε) = ε·(S(¼ − ε/2) − S(⅛ − ε/4))`.
pub fn side_info_b(eps: f64) -> Result<f64> {
    Ok(eps * (binary_entropy(0.25 - eps / 2.0)? - binary_entropy(0.125 - eps / 4.0)?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SideInfoReport {
    /// `I(X:M)` in bits (Holevo χ for quantum side information).
    pub information: f64,
    /// `‖h(X,Y)YM − U⊗YM‖₁`.
    pub dist: f64,
    pub a: f64,
    pub b: f64,
    /// Extractor threshold of `h`.
    pub k: u32,
    pub n: u32,
    /// `dist > 1 − a(ε)`.
    pub distinguishable: bool,
    /// `dist > 1 − a(ε)` implies `I(X:M) > b(ε)(n − k)`.
    pub implication_ok: bool,
}

fn side_info_report(
    h: &FunctionTable,
    eps: f64,
    opts: &SearchOptions,
    information: f64,
    dist: f64,
) -> Result<SideInfoReport> {
    let (n, _) = shape(h)?;
    let k = extractor_threshold(h, eps, opts)?
        .ok_or_else(|| Error::Infeasible(format!("h is not a strong extractor for eps {eps} at any k")))?;
    let a = side_info_a(eps);
    let b = side_info_b(eps)?;
    let distinguishable = dist > 1.0 - a;
    Ok(SideInfoReport {
        information,
        dist,
        a,
        b,
        k,
        n,
        distinguishable,
        implication_ok: !distinguishable || information > b * (n - k) as f64,
    })
}

/// Classical side information `M = leak(X)` with `X`, `Y` uniform and
/// independent.
pub fn side_info_experiment(
    h: &FunctionTable,
    eps: f64,
    leak: &[usize],
    opts: &SearchOptions,
) -> Result<SideInfoReport> {
    check_eps(eps)?;
    shape(h)?;
    if leak.len() != h.x_size() {
        return Err(Error::DimensionMismatch(format!(
            "leak covers {} inputs, h has {}",
            leak.len(),
            h.x_size()
        )));
    }
    let labels = leak.iter().max().map_or(0, |&v| v + 1);
    let mut w = vec![0.0; h.x_size() * labels];
    for (x, &l) in leak.iter().enumerate() {
        w[x * labels + l] = 1.0;
    }
    let joint = JointDistribution::from_weights(h.x_size(), labels, w)?;
    let information = mutual_information(&joint);
    let mut dist = 0.0;
    for l in 0..labels {
        let rows: Vec<usize> = (0..h.x_size()).filter(|&x| leak[x] == l).collect();
        if !rows.is_empty() {
            dist += rows.len() as f64 / h.x_size() as f64 * flat_source_bias(h, &rows)?;
        }
    }
    side_info_report(h, eps, opts, information, dist)
}

/// Quantum side information: `X` is encoded in `states[x]`, `I(X:M)` is the
/// Holevo quantity and
/// `dist = Σ_y Pr[y]·‖Σ_{h(x,y)=0} Pr[x]ρ_x − Σ_{h(x,y)=1} Pr[x]ρ_x‖₁`.
pub fn side_info_quantum(
    h: &FunctionTable,
    eps: f64,
    states: &[DensityMatrix],
    opts: &SearchOptions,
) -> Result<SideInfoReport> {
    check_eps(eps)?;
    shape(h)?;
    if states.len() != h.x_size() {
        return Err(Error::DimensionMismatch(format!(
            "{} states for {} inputs",
            states.len(),
            h.x_size()
        )));
    }
    let px = 1.0 / h.x_size() as f64;
    let ensemble = QuantumEnsemble::new(states.iter().map(|r| (px, r.clone())).collect())?;
    let information = holevo_chi(&ensemble);
    let dim = ensemble.dim();
    let mut dist = 0.0;
    for y in 0..h.y_size() {
        let mut diff = DMatrix::<C64>::zeros(dim, dim);
        for (x, rho) in states.iter().enumerate() {
            let sign = if h.value(x, y) == 0 { px } else { -px };
            diff += rho.matrix().map(|z| z * sign);
        }
        dist += trace_norm(&diff)? / h.y_size() as f64;
    }
    side_info_report(h, eps, opts, information, dist)
}

/// The leak revealing the first `t` of `n` bits of `x` (most significant
/// first).
pub fn prefix_leak(n: u32, t: u32) -> Vec<usize> {
    (0..1usize << n).map(|x| x >> (n - t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{benchmark, BenchmarkKind};
    use crate::random::boolean_table;

    fn constant(n: u32, m: u32) -> FunctionTable {
        FunctionTable::from_fn(1 << n, 1 << m, 2, |_, _| 1).unwrap()
    }

    fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
        (0u32..1 << n)
            .filter(|s| s.count_ones() as usize == size)
            .map(|s| (0..n).filter(|&i| s >> i & 1 == 1).collect())
            .collect()
    }

    #[test]
    fn bias_examples() {
        assert_eq!(flat_source_bias(&constant(2, 2), &[0, 3]).unwrap(), 1.0);
        let ip = benchmark(BenchmarkKind::InnerProduct, 3).unwrap();
        let all: Vec<usize> = (0..8).collect();
        assert!((flat_source_bias(&ip, &all).unwrap() - 0.125).abs() < 1e-15);
        // Rows 0 and 3 of XOR-like h(x, y) = x ⊕ y on one bit balance every column.
        let xor = FunctionTable::from_fn(2, 2, 2, |x, y| (x ^ y) as u32).unwrap();
        assert_eq!(flat_source_bias(&xor, &[0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn worst_source_examples() {
        let ip = benchmark(BenchmarkKind::InnerProduct, 3).unwrap();
        let opts = SearchOptions::default();
        let (set, bias, exact) = worst_flat_source(&ip, 3, &opts).unwrap();
        assert!(exact);
        assert_eq!(set, (0..8).collect::<Vec<_>>());
        assert_eq!(bias, flat_source_bias(&ip, &set).unwrap());
        for k in 0..=2 {
            assert_eq!(worst_flat_source(&constant(2, 2), k, &opts).unwrap().1, 1.0);
        }
        assert_eq!(worst_flat_source(&ip, 0, &opts).unwrap().1, 1.0);
    }

    #[test]
    fn sign_patterns_agree_with_subset_brute_force() {
        let opts = SearchOptions::default();
        let mut rng = trial_rng(8, 0, 0);
        for _ in 0..20 {
            for (n, m) in [(2u32, 1u32), (3, 2), (3, 1), (2, 2)] {
                let h = boolean_table(1 << n, 1 << m, &mut rng);
                for k in 0..=n {
                    let (set, bias, _) = worst_flat_source(&h, k, &opts).unwrap();
                    let mut brute: Option<(f64, Vec<usize>)> = None;
                    for s in subsets(1 << n, 1 << k) {
                        let b = flat_source_bias(&h, &s).unwrap();
                        let wins = brute.as_ref().is_none_or(|(bb, bs)| {
                            b > *bb + 1e-15 || ((b - *bb).abs() <= 1e-15 && s < *bs)
                        });
                        if wins {
                            brute = Some((b, s));
                        }
                    }
                    let (bb, bs) = brute.unwrap();
                    assert!((bias - bb).abs() < 1e-12);
                    assert_eq!(set, bs);
                }
            }
        }
    }

    #[test]
    fn greedy_is_a_lower_bound() {
        let mut rng = trial_rng(2, 0, 0);
        let h = boolean_table(16, 8, &mut rng);
        let exact = worst_flat_source(&h, 2, &SearchOptions::default()).unwrap();
        let opts = SearchOptions {
            max_exact_m: 2,
            allow_greedy: true,
            ..SearchOptions::default()
        };
        let greedy = worst_flat_source(&h, 2, &opts).unwrap();
        assert!(!greedy.2);
        assert!(greedy.1 <= exact.1 + 1e-15);
        assert_eq!(greedy.1, flat_source_bias(&h, &greedy.0).unwrap());
        let refuse = SearchOptions {
            max_exact_m: 2,
            ..SearchOptions::default()
        };
        assert!(matches!(
            worst_flat_source(&h, 2, &refuse),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn thresholds() {
        let opts = SearchOptions::default();
        assert_eq!(extractor_threshold(&constant(3, 2), 0.25, &opts).unwrap(), None);
        // h(x, y) = parity of x: every column is balanced over all of X.
        let parity = FunctionTable::from_fn(8, 4, 2, |x, _| x.count_ones() % 2).unwrap();
        assert_eq!(audit(&parity, 3, 0.1, &opts).unwrap().bias, 0.0);
        assert_eq!(extractor_threshold(&parity, 0.1, &opts).unwrap(), Some(3));
        let ip4 = benchmark(BenchmarkKind::InnerProduct, 4).unwrap();
        let k = extractor_threshold(&ip4, 0.25, &opts).unwrap().unwrap();
        assert!(audit(&ip4, k, 0.25, &opts).unwrap().is_strong);
        assert!(k == 0 || !audit(&ip4, k - 1, 0.25, &opts).unwrap().is_strong);
    }

    #[test]
    fn largerec_on_ip4() {
        let ip4 = benchmark(BenchmarkKind::InnerProduct, 4).unwrap();
        let report = largerec_check(&ip4, 0.2, &SearchOptions::default()).unwrap();
        assert!(!report.rows.is_empty());
        assert!(report.holds);
        let vacuous = largerec_check(&constant(2, 2), 0.2, &SearchOptions::default()).unwrap();
        assert!(vacuous.rows.is_empty() && vacuous.holds);
    }

    #[test]
    fn side_information_examples() {
        let ip4 = benchmark(BenchmarkKind::InnerProduct, 4).unwrap();
        let opts = SearchOptions::default();
        let identity: Vec<usize> = (0..16).collect();
        let r = side_info_experiment(&ip4, 0.2, &identity, &opts).unwrap();
        assert!((r.information - 4.0).abs() < 1e-12);
        assert!((r.dist - 1.0).abs() < 1e-12);
        assert!(r.implication_ok);
        let r = side_info_experiment(&ip4, 0.2, &[0; 16], &opts).unwrap();
        assert_eq!(r.information, 0.0);
        assert!((r.dist - 1.0 / 16.0).abs() < 1e-12);
        assert!(r.implication_ok);
        for t in 0..=4 {
            let r = side_info_experiment(&ip4, 0.2, &prefix_leak(4, t), &opts).unwrap();
            assert!((r.information - t as f64).abs() < 1e-12);
            assert!(r.implication_ok);
        }
    }

    #[test]
    fn side_info_constants() {
        for i in 1..50 {
            let eps = i as f64 / 100.0;
            let a = side_info_a(eps);
            assert!((a - (0.5 - eps).powi(3) / 4.0).abs() < 1e-15);
            let s = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
            let b = side_info_b(eps).unwrap();
            assert!((b - eps * (s(0.25 - eps / 2.0) - s(0.125 - eps / 4.0))).abs() < 1e-12);
            assert!(b > 0.0 && b < 1.0);
        }
    }

    #[test]
    fn quantum_side_info_matches_classical_encoding() {
        let ip4 = benchmark(BenchmarkKind::InnerProduct, 4).unwrap();
        let opts = SearchOptions::default();
        for t in 0..=2u32 {
            let leak = prefix_leak(4, t);
            let dim = 1usize << t;
            let states: Vec<DensityMatrix> = leak
                .iter()
                .map(|&l| {
                    let mut d = vec![0.0; dim.max(2)];
                    d[l] = 1.0;
                    DensityMatrix::from_diagonal(&d).unwrap()
                })
                .collect();
            let q = side_info_quantum(&ip4, 0.2, &states, &opts).unwrap();
            let c = side_info_experiment(&ip4, 0.2, &leak, &opts).unwrap();
            assert!((q.information - c.information).abs() < 1e-9);
            assert!((q.dist - c.dist).abs() < 1e-9);
        }
    }
}
