//! Exact VC dimension, Sauer's bound and γ-pseudo-dimension of the row
//! family `{f_x : x ∈ X}` of a function table.
//!
//! Both searches go level by level over column subsets. Shattering is
//! hereditary, so a subset is only tried when its prefix (all but its
//! largest column) was shattered on the previous level, and the search
//! stops at the first empty level. Within a level, candidates are produced
//! in lexicographic order, so the first shattered set of the last non-empty
//! level is the lexicographically smallest maximal witness.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::table::FunctionTable;
use crate::{Error, Result};

/// Search caps; the searches refuse rather than approximate beyond them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DimensionLimits {
    pub max_columns: usize,
    pub max_dimension: usize,
}

impl Default for DimensionLimits {
    fn default() -> Self {
        Self {
            max_columns: 24,
            max_dimension: 20,
        }
    }
}

/// A shattered column set, with per-column thresholds for pseudo-dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct ShatterWitness {
    pub columns: Vec<usize>,
    pub thresholds: Option<Vec<f64>>,
}

/// Distinct rows as byte vectors.
fn distinct_boolean_rows(f: &FunctionTable) -> Vec<Vec<u8>> {
    let mut rows: Vec<Vec<u8>> = (0..f.x_size())
        .map(|x| (0..f.y_size()).map(|y| f.value(x, y) as u8).collect())
        .collect();
    rows.sort_unstable();
    rows.dedup();
    rows
}

/// Reusable bitset of seen patterns.
struct PatternSet {
    words: Vec<u64>,
    count: usize,
}

impl PatternSet {
    fn new() -> Self {
        Self {
            words: Vec::new(),
            count: 0,
        }
    }

    fn reset(&mut self, bits: usize) {
        let n = bits.div_ceil(64);
        self.words.clear();
        self.words.resize(n, 0);
        self.count = 0;
    }

    /// Inserts `p`, returning the number of distinct patterns so far.
    fn insert(&mut self, p: usize) -> usize {
        let (w, b) = (p / 64, p % 64);
        if self.words[w] >> b & 1 == 0 {
            self.words[w] |= 1 << b;
            self.count += 1;
        }
        self.count
    }
}

fn shattered_by(rows: &[Vec<u8>], cols: &[usize], seen: &mut PatternSet) -> bool {
    let s = cols.len();
    if s >= usize::BITS as usize - 1 || rows.len() < 1usize << s {
        return false;
    }
    let need = 1usize << s;
    seen.reset(need);
    for row in rows {
        let p = cols
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, &c)| acc | (row[c] as usize) << j);
        if seen.insert(p) == need {
            return true;
        }
    }
    false
}

fn check_columns(f: &FunctionTable, cols: &[usize]) -> Result<()> {
    for (i, &c) in cols.iter().enumerate() {
        if c >= f.y_size() {
            return Err(Error::InvalidArgument(format!(
                "column {c} out of range 0..{}",
                f.y_size()
            )));
        }
        if cols[..i].contains(&c) {
            return Err(Error::InvalidArgument(format!("column {c} listed twice")));
        }
    }
    Ok(())
}

/// Whether the rows of a boolean total table realize every sign pattern on
/// the given columns.
pub fn shatters(f: &FunctionTable, cols: &[usize]) -> Result<bool> {
    f.require_boolean_total()?;
    check_columns(f, cols)?;
    let rows = distinct_boolean_rows(f);
    Ok(shattered_by(&rows, cols, &mut PatternSet::new()))
}

/// Level-wise search: `test(set)` decides whether a candidate is shattered.
fn levelwise_search<T>(
    y_size: usize,
    max_level: usize,
    limits: &DimensionLimits,
    mut test: impl FnMut(&[usize]) -> Option<T>,
) -> Result<(usize, Vec<usize>, Option<T>)> {
    let mut level: Vec<Vec<usize>> = vec![Vec::new()];
    let mut best: (Vec<usize>, Option<T>) = (Vec::new(), None);
    let mut size = 0;
    while size < max_level {
        let mut next = Vec::new();
        let mut first: Option<T> = None;
        for set in &level {
            let start = set.last().map_or(0, |&c| c + 1);
            for c in start..y_size {
                let mut cand = set.clone();
                cand.push(c);
                if let Some(info) = test(&cand) {
                    if next.is_empty() {
                        first = Some(info);
                    }
                    next.push(cand);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        size += 1;
        if size > limits.max_dimension {
            return Err(Error::cap(
                "shattered set size",
                size as u64,
                limits.max_dimension as u64,
            ));
        }
        best = (next[0].clone(), first);
        level = next;
    }
    Ok((size, best.0, best.1))
}

pub fn vc_dimension(f: &FunctionTable) -> Result<(usize, ShatterWitness)> {
    vc_dimension_with(f, &DimensionLimits::default())
}

/// Exact VC dimension with the lexicographically smallest maximal witness.
pub fn vc_dimension_with(
    f: &FunctionTable,
    limits: &DimensionLimits,
) -> Result<(usize, ShatterWitness)> {
    f.require_boolean_total()?;
    if f.y_size() > limits.max_columns {
        return Err(Error::cap(
            "y_size",
            f.y_size() as u64,
            limits.max_columns as u64,
        ));
    }
    let rows = distinct_boolean_rows(f);
    // 2^d distinct rows are needed to shatter d columns.
    let max_level = (usize::BITS - 1 - rows.len().leading_zeros()) as usize;
    let mut seen = PatternSet::new();
    let (d, columns, _) = levelwise_search(f.y_size(), max_level, limits, |cand| {
        shattered_by(&rows, cand, &mut seen).then_some(())
    })?;
    Ok((
        d,
        ShatterWitness {
            columns,
            thresholds: None,
        },
    ))
}

/// Sauer's bound `Σ_{i=0}^{d} C(m, i)` in exact integer arithmetic.
pub fn sauer_bound(m: u64, d: u64) -> Result<u128> {
    if d > m {
        return Err(Error::InvalidArgument(format!(
            "dimension {d} exceeds domain size {m}"
        )));
    }
    let overflow = || Error::InvalidArgument(format!("Σ C({m}, i≤{d}) overflows 128 bits"));
    let mut term: u128 = 1;
    let mut total: u128 = 1;
    for i in 0..d as u128 {
        // C(m, i+1) = C(m, i) (m − i) / (i + 1), exact at every step.
        term = term.checked_mul(m as u128 - i).ok_or_else(overflow)? / (i + 1);
        total = total.checked_add(term).ok_or_else(overflow)?;
    }
    Ok(total)
}

/// Per-column threshold candidates and per-row classification.
struct ColumnThresholds {
    thresholds: Vec<f64>,
    /// `status[t][row]`: 1 above, 0 below, 2 inside the margin.
    status: Vec<Vec<u8>>,
}

fn column_thresholds(values: &[f64], gamma: f64) -> ColumnThresholds {
    let mut distinct = values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut thresholds = Vec::new();
    for (a, &lo) in distinct.iter().enumerate() {
        // The closest value strictly more than 2γ above `lo` gives the
        // least restrictive split with `lo` on the low side.
        if let Some(&hi) = distinct[a + 1..].iter().find(|&&v| v - lo > 2.0 * gamma) {
            thresholds.push(0.5 * (lo + hi));
        }
    }
    let status = thresholds
        .iter()
        .map(|&w| values.iter().map(|&v| classify(v, w, gamma)).collect())
        .collect();
    ColumnThresholds { thresholds, status }
}

#[inline]
fn classify(v: f64, w: f64, gamma: f64) -> u8 {
    if v > w + gamma {
        1
    } else if v < w - gamma {
        0
    } else {
        2
    }
}

fn scaled_rows(f: &FunctionTable) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<u32>> = (0..f.x_size())
        .map(|x| (0..f.y_size()).map(|y| f.value(x, y)).collect())
        .collect();
    rows.sort_unstable();
    rows.dedup();
    let k = f.z_size() as f64;
    rows.into_iter()
        .map(|r| r.into_iter().map(|v| (v as f64 + 1.0) / k).collect())
        .collect()
}

/// Whether `thresholds` witnesses that `cols` is γ-shattered by the rows of
/// the scaled table `f' = (f + 1) / k`: for every subset `R` some row is
/// above `w_s + γ` on `s ∈ R` and below `w_s − γ` on `s ∉ R`.
pub fn gamma_shatters(
    f: &FunctionTable,
    cols: &[usize],
    thresholds: &[f64],
    gamma: f64,
) -> Result<bool> {
    f.require_total()?;
    check_columns(f, cols)?;
    if thresholds.len() != cols.len() {
        return Err(Error::InvalidArgument(
            "one threshold per column is required".into(),
        ));
    }
    let s = cols.len();
    if s >= usize::BITS as usize - 1 {
        return Ok(false);
    }
    let rows = scaled_rows(f);
    let mut seen = PatternSet::new();
    seen.reset(1 << s);
    'rows: for row in &rows {
        let mut p = 0usize;
        for (j, (&c, &w)) in cols.iter().zip(thresholds).enumerate() {
            match classify(row[c], w, gamma) {
                2 => continue 'rows,
                b => p |= (b as usize) << j,
            }
        }
        if seen.insert(p) == 1 << s {
            return Ok(true);
        }
    }
    Ok(s == 0)
}

pub fn pseudo_dimension(f: &FunctionTable, gamma: f64) -> Result<(usize, ShatterWitness)> {
    pseudo_dimension_with(f, gamma, &DimensionLimits::default())
}

/// Exact γ-pseudo-dimension of the scaled rows `(f + 1) / k`.
///
/// Thresholds are drawn from a finite candidate set per column: for each
/// distinct value `lo`, the midpoint between `lo` and the nearest value more
/// than `2γ` above it. Any threshold induces a split dominated by one of
/// these, so the search is exhaustive.
pub fn pseudo_dimension_with(
    f: &FunctionTable,
    gamma: f64,
    limits: &DimensionLimits,
) -> Result<(usize, ShatterWitness)> {
    f.require_total()?;
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma must be positive (got {gamma})"
        )));
    }
    if f.y_size() > limits.max_columns {
        return Err(Error::cap(
            "y_size",
            f.y_size() as u64,
            limits.max_columns as u64,
        ));
    }
    let rows = scaled_rows(f);
    let columns: Vec<ColumnThresholds> = (0..f.y_size())
        .map(|c| {
            let values: Vec<f64> = rows.iter().map(|r| r[c]).collect();
            column_thresholds(&values, gamma)
        })
        .collect();
    let max_level = (usize::BITS - 1 - rows.len().leading_zeros()) as usize;
    let mut seen = PatternSet::new();
    let mut choice = Vec::new();
    let (d, cols, thresholds) = levelwise_search(f.y_size(), max_level, limits, |cand| {
        find_thresholds(&columns, cand, rows.len(), &mut seen, &mut choice)
    })?;
    Ok((
        d,
        ShatterWitness {
            columns: cols,
            thresholds: Some(thresholds.unwrap_or_default()),
        },
    ))
}

/// Tries every combination of candidate thresholds on `cand`, in odometer
/// order, and returns the first that γ-shatters it.
fn find_thresholds(
    columns: &[ColumnThresholds],
    cand: &[usize],
    n_rows: usize,
    seen: &mut PatternSet,
    choice: &mut Vec<usize>,
) -> Option<Vec<f64>> {
    let s = cand.len();
    if n_rows < 1 << s || cand.iter().any(|&c| columns[c].thresholds.is_empty()) {
        return None;
    }
    choice.clear();
    choice.resize(s, 0);
    loop {
        seen.reset(1 << s);
        'rows: for r in 0..n_rows {
            let mut p = 0usize;
            for (j, &c) in cand.iter().enumerate() {
                match columns[c].status[choice[j]][r] {
                    2 => continue 'rows,
                    b => p |= (b as usize) << j,
                }
            }
            if seen.insert(p) == 1 << s {
                return Some(
                    cand.iter()
                        .zip(choice.iter())
                        .map(|(&c, &t)| columns[c].thresholds[t])
                        .collect(),
                );
            }
        }
        // Advance the odometer, last column fastest.
        let mut j = s;
        loop {
            if j == 0 {
                return None;
            }
            j -= 1;
            choice[j] += 1;
            if choice[j] < columns[cand[j]].thresholds.len() {
                break;
            }
            choice[j] = 0;
        }
    }
}
