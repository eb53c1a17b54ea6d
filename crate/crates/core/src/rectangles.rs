//! The one-way rectangle (corruption) bound.
//!
//! A one-way rectangle is `S × Y` for nonempty `S ⊆ X`. It is
//! ε-monochromatic when some response `g: Y → Z` is correct with
//! probability at least `1 − ε` under `μ` conditioned on the rectangle;
//! undefined cells count as correct for every response. The bound is the
//! minimum of `log₂ 1/μ(S × Y)` over ε-monochromatic rectangles of positive
//! mass.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::table::{FunctionTable, JointDistribution};
use crate::{Error, Result, CONSTRUCTION_TOLERANCE};

/// Default cap on `|X|` for exact enumeration.
pub const DEFAULT_MAX_ROWS: usize = 24;

/// Slack allowed when comparing a best-response error against ε.
const FEASIBILITY_SLACK: f64 = 1e-12;

/// Gray-code steps flipping this bit or higher rebuild the tallies from
/// scratch to bound accumulated rounding.
const REBUILD_BIT: u32 = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct RectangleCertificate {
    /// Sorted row indices of `S`.
    pub rows: Vec<usize>,
    /// Bob's response for every column.
    pub g: Vec<u32>,
    /// Best-response error under the conditioned distribution.
    pub error: f64,
    /// `μ(S × Y)`.
    pub mass: f64,
    /// `log₂ 1/mass` in bits.
    pub value: f64,
}

impl RectangleCertificate {
    fn from_rows(f: &FunctionTable, mu: &JointDistribution, rows: Vec<usize>) -> Result<Self> {
        let (g, error) = best_response(f, mu, &rows)?;
        let mass: f64 = rows.iter().map(|&x| mu.row_mass(x)).sum();
        Ok(Self {
            rows,
            g,
            error,
            mass,
            value: -libm::log2(mass),
        })
    }

    /// Recomputes the certificate's error and mass and checks it is
    /// ε-monochromatic.
    pub fn verify(&self, f: &FunctionTable, mu: &JointDistribution, eps: f64) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::InvalidArgument("certificate has an empty row set".into()));
        }
        if self.g.len() != f.y_size() {
            return Err(Error::InvalidArgument(format!(
                "response covers {} columns, table has {}",
                self.g.len(),
                f.y_size()
            )));
        }
        let error = response_error(f, mu, &self.rows, &self.g)?;
        let mass: f64 = self.rows.iter().map(|&x| mu.row_mass(x)).sum();
        if (error - self.error).abs() > CONSTRUCTION_TOLERANCE {
            return Err(Error::Infeasible(format!(
                "recorded error {} but recomputed {error}",
                self.error
            )));
        }
        if (mass - self.mass).abs() > CONSTRUCTION_TOLERANCE
            || (self.value + libm::log2(mass)).abs() > 1e-9
        {
            return Err(Error::Infeasible("recorded mass or value is stale".into()));
        }
        if error > eps + FEASIBILITY_SLACK {
            return Err(Error::Infeasible(format!(
                "rectangle error {error} exceeds {eps}"
            )));
        }
        Ok(())
    }
}

fn check_inputs(f: &FunctionTable, mu: &JointDistribution, eps: f64) -> Result<()> {
    f.require_matches(mu)?;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps {eps} outside [0, 1]")));
    }
    Ok(())
}

fn check_rows(f: &FunctionTable, rows: &[usize]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("row set is empty".into()));
    }
    if let Some(&x) = rows.iter().find(|&&x| x >= f.x_size()) {
        return Err(Error::InvalidArgument(format!(
            "row {x} out of range 0..{}",
            f.x_size()
        )));
    }
    Ok(())
}

/// Error of a fixed response `g` on the rectangle `rows × Y`.
pub fn response_error(
    f: &FunctionTable,
    mu: &JointDistribution,
    rows: &[usize],
    g: &[u32],
) -> Result<f64> {
    f.require_matches(mu)?;
    check_rows(f, rows)?;
    let mut mass = 0.0;
    let mut wrong = 0.0;
    for &x in rows {
        for (y, &gy) in g.iter().enumerate() {
            let p = mu.prob(x, y);
            mass += p;
            if let Some(v) = f.get(x, y) {
                if v != gy {
                    wrong += p;
                }
            }
        }
    }
    if mass <= 0.0 {
        return Err(Error::ZeroMassRectangle);
    }
    Ok(wrong / mass)
}

/// Per-column masses of each output value inside a rectangle; slot `k`
/// holds `⋆` mass.
struct Tallies {
    k: usize,
    counts: Vec<f64>,
    mass: f64,
}

impl Tallies {
    fn new(f: &FunctionTable) -> Self {
        Self {
            k: f.z_size(),
            counts: vec![0.0; f.y_size() * (f.z_size() + 1)],
            mass: 0.0,
        }
    }

    fn clear(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0.0);
        self.mass = 0.0;
    }

    fn add_row(&mut self, f: &FunctionTable, mu: &JointDistribution, x: usize, sign: f64) {
        let width = self.k + 1;
        for (y, &p) in mu.row(x).iter().enumerate() {
            let slot = f.get(x, y).map_or(self.k, |v| v as usize);
            self.counts[y * width + slot] += sign * p;
            self.mass += sign * p;
        }
    }

    /// Mass answered correctly by the best response.
    fn correct_mass(&self) -> f64 {
        self.counts
            .chunks(self.k + 1)
            .map(|c| c[self.k] + c[..self.k].iter().copied().fold(0.0, f64::max))
            .sum()
    }

    fn error(&self) -> Option<f64> {
        (self.mass > 0.0).then(|| ((self.mass - self.correct_mass()) / self.mass).max(0.0))
    }
}

/// Bob's best response on `rows × Y` and its error. Ties go to the smaller
/// output value.
pub fn best_response(
    f: &FunctionTable,
    mu: &JointDistribution,
    rows: &[usize],
) -> Result<(Vec<u32>, f64)> {
    f.require_matches(mu)?;
    check_rows(f, rows)?;
    let mut t = Tallies::new(f);
    for &x in rows {
        t.add_row(f, mu, x, 1.0);
    }
    if t.mass <= 0.0 {
        return Err(Error::ZeroMassRectangle);
    }
    let k = f.z_size();
    let g: Vec<u32> = t
        .counts
        .chunks(k + 1)
        .map(|c| {
            let mut best = 0;
            for z in 1..k {
                if c[z] > c[best] {
                    best = z;
                }
            }
            best as u32
        })
        .collect();
    let error = response_error(f, mu, rows, &g)?;
    Ok((g, error))
}

/// Whether sorted set `a` precedes sorted set `b` lexicographically, for
/// sets encoded as bitmasks.
fn lex_less(a: u64, b: u64) -> bool {
    let diff = a ^ b;
    if diff == 0 {
        return false;
    }
    let d = diff.trailing_zeros();
    // Whoever holds element d continues with d; the other continues with a
    // larger element or ends.
    if a >> d & 1 == 1 {
        b >> d != 0
    } else {
        a >> d == 0
    }
}

fn mask_rows(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

pub fn rec_exact(f: &FunctionTable, mu: &JointDistribution, eps: f64) -> Result<RectangleCertificate> {
    rec_exact_with_limit(f, mu, eps, DEFAULT_MAX_ROWS)
}

/// Exact rectangle bound by enumerating every nonempty `S ⊆ X` in Gray-code
/// order with incremental per-column tallies. Among optimal rectangles the
/// lexicographically smallest `S` is returned.
pub fn rec_exact_with_limit(
    f: &FunctionTable,
    mu: &JointDistribution,
    eps: f64,
    max_rows: usize,
) -> Result<RectangleCertificate> {
    check_inputs(f, mu, eps)?;
    let n = f.x_size();
    if n > max_rows.min(40) {
        return Err(Error::cap("x_size", n as u64, max_rows.min(40) as u64));
    }
    let mut tallies = Tallies::new(f);
    let mut mask = 0u64;
    let mut best: Option<(u64, f64)> = None;
    for i in 1u64..(1u64 << n) {
        let bit = i.trailing_zeros();
        let adding = mask >> bit & 1 == 0;
        mask ^= 1 << bit;
        if bit >= REBUILD_BIT {
            tallies.clear();
            for x in mask_rows(mask) {
                tallies.add_row(f, mu, x, 1.0);
            }
        } else {
            tallies.add_row(f, mu, bit as usize, if adding { 1.0 } else { -1.0 });
        }
        let mass = tallies.mass;
        if mass <= CONSTRUCTION_TOLERANCE * 1e-3 {
            continue;
        }
        let better = match best {
            None => true,
            Some((bm, bmass)) => {
                mass > bmass + CONSTRUCTION_TOLERANCE
                    || ((mass - bmass).abs() <= CONSTRUCTION_TOLERANCE && lex_less(mask, bm))
            }
        };
        if better && tallies.error().is_some_and(|e| e <= eps + FEASIBILITY_SLACK) {
            best = Some((mask, mass));
        }
    }
    let (mask, _) = best.ok_or_else(|| {
        Error::Infeasible(format!("no rectangle of positive mass is {eps}-monochromatic"))
    })?;
    let cert = RectangleCertificate::from_rows(f, mu, mask_rows(mask))?;
    if cert.error > eps + FEASIBILITY_SLACK {
        return Err(Error::Infeasible(format!(
            "best rectangle failed re-verification (error {})",
            cert.error
        )));
    }
    Ok(cert)
}

/// Number of seeds tried by [`rec_greedy`].
const GREEDY_SEEDS: usize = 5;

/// A valid (feasible) rectangle found greedily; its value upper-bounds the
/// exact rectangle bound.
///
/// From each of the heaviest rows, rows are added one at a time choosing the
/// candidate with the smallest resulting error per unit of mass gained,
/// among those that keep the rectangle ε-monochromatic.
pub fn rec_greedy(f: &FunctionTable, mu: &JointDistribution, eps: f64) -> Result<RectangleCertificate> {
    check_inputs(f, mu, eps)?;
    let row_mass: Vec<f64> = (0..f.x_size()).map(|x| mu.row_mass(x)).collect();
    let mut order: Vec<usize> = (0..f.x_size()).filter(|&x| row_mass[x] > 0.0).collect();
    order.sort_by(|&a, &b| row_mass[b].total_cmp(&row_mass[a]).then(a.cmp(&b)));
    let mut best: Option<(Vec<usize>, f64)> = None;
    for &seed in order.iter().take(GREEDY_SEEDS) {
        let mut rows = vec![seed];
        let mut tallies = Tallies::new(f);
        tallies.add_row(f, mu, seed, 1.0);
        if tallies.error().is_none_or(|e| e > eps + FEASIBILITY_SLACK) {
            continue;
        }
        let mut inside = vec![false; f.x_size()];
        inside[seed] = true;
        loop {
            let mut pick: Option<(usize, f64)> = None;
            for &x in &order {
                if inside[x] {
                    continue;
                }
                tallies.add_row(f, mu, x, 1.0);
                let err = tallies.error().unwrap_or(f64::INFINITY);
                tallies.add_row(f, mu, x, -1.0);
                if err > eps + FEASIBILITY_SLACK {
                    continue;
                }
                let score = err / row_mass[x];
                // Ties favour heavier rows, then smaller indices (order is
                // already sorted that way).
                if pick.is_none_or(|(_, s)| score < s) {
                    pick = Some((x, score));
                }
            }
            let Some((x, _)) = pick else { break };
            tallies.add_row(f, mu, x, 1.0);
            inside[x] = true;
            rows.push(x);
        }
        rows.sort_unstable();
        let mass: f64 = rows.iter().map(|&x| row_mass[x]).sum();
        if best.as_ref().is_none_or(|(_, m)| mass > *m) {
            best = Some((rows, mass));
        }
    }
    let (rows, _) = best.ok_or_else(|| {
        Error::Infeasible(format!("no rectangle of positive mass is {eps}-monochromatic"))
    })?;
    RectangleCertificate::from_rows(f, mu, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{benchmark, BenchmarkKind};

    fn xor() -> FunctionTable {
        FunctionTable::from_fn(2, 2, 2, |x, y| (x ^ y) as u32).unwrap()
    }

    #[test]
    fn best_response_examples() {
        let mu = JointDistribution::uniform(2, 2).unwrap();
        let (g, e) = best_response(&xor(), &mu, &[1]).unwrap();
        assert_eq!((g, e), (vec![1, 0], 0.0));
        let constant = FunctionTable::from_fn(2, 2, 2, |_, _| 1).unwrap();
        assert_eq!(best_response(&constant, &mu, &[0, 1]).unwrap().1, 0.0);
        let (g, e) = best_response(&xor(), &mu, &[0, 1]).unwrap();
        assert_eq!(g, vec![0, 0]);
        assert!((e - 0.5).abs() < 1e-15);
        let point = JointDistribution::new(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(best_response(&xor(), &point, &[1]), Err(Error::ZeroMassRectangle));
    }

    #[test]
    fn partial_cells_count_as_correct() {
        let f = FunctionTable::new(2, 1, 2, true, vec![Some(1), None]).unwrap();
        let mu = JointDistribution::uniform(2, 1).unwrap();
        assert_eq!(best_response(&f, &mu, &[0, 1]).unwrap(), (vec![1], 0.0));
    }

    #[test]
    fn rec_exact_examples() {
        let mu = JointDistribution::uniform(2, 2).unwrap();
        let cert = rec_exact(&xor(), &mu, 0.1).unwrap();
        assert_eq!(cert.value, 1.0);
        assert_eq!(cert.rows, vec![0]);
        cert.verify(&xor(), &mu, 0.1).unwrap();
        let constant = FunctionTable::from_fn(3, 3, 2, |_, _| 0).unwrap();
        let mu3 = JointDistribution::uniform(3, 3).unwrap();
        let cert = rec_exact(&constant, &mu3, 0.0).unwrap();
        assert_eq!(cert.value, 0.0);
        assert_eq!(cert.rows, vec![0, 1, 2]);
    }

    /// Exhaustive oracle written independently of the Gray-code search:
    /// every subset, per-column majority recomputed from scratch.
    fn brute_rec(f: &FunctionTable, mu: &JointDistribution, eps: f64) -> f64 {
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << f.x_size()) {
            let rows: Vec<usize> = (0..f.x_size()).filter(|&x| mask >> x & 1 == 1).collect();
            let mass: f64 = rows.iter().flat_map(|&x| mu.row(x).iter()).sum();
            if mass <= 0.0 {
                continue;
            }
            let mut right = 0.0;
            for y in 0..f.y_size() {
                let mut by_z = vec![0.0; f.z_size()];
                let mut star = 0.0;
                for &x in &rows {
                    match f.get(x, y) {
                        Some(z) => by_z[z as usize] += mu.prob(x, y),
                        None => star += mu.prob(x, y),
                    }
                }
                right += star + by_z.iter().copied().fold(0.0, f64::max);
            }
            if 1.0 - right / mass <= eps + 1e-12 {
                best = best.min(-libm::log2(mass));
            }
        }
        best
    }

    #[test]
    fn rec_exact_ip2_fixture() {
        let ip = benchmark(BenchmarkKind::InnerProduct, 2).unwrap();
        let mu = JointDistribution::uniform(4, 4).unwrap();
        let cert = rec_exact(&ip, &mu, 0.1).unwrap();
        assert!((cert.value - brute_rec(&ip, &mu, 0.1)).abs() < 1e-12);
        // Two distinct rows of IP_2 disagree on half the columns, so only
        // singletons are 0.1-monochromatic.
        assert_eq!(cert.value, 2.0);
        assert_eq!(cert.rows, vec![0]);
        // At 0.25 three rows fit: {0, 1, 2} errs only on column 3.
        let cert = rec_exact(&ip, &mu, 0.25).unwrap();
        assert!((cert.value - brute_rec(&ip, &mu, 0.25)).abs() < 1e-12);
        assert!((cert.value - libm::log2(4.0 / 3.0)).abs() < 1e-12);
        assert_eq!(cert.rows, vec![0, 1, 2]);
    }

    #[test]
    fn rec_exact_matches_brute_force() {
        let mut rng = crate::random::trial_rng(11, 0, 0);
        for i in 0..30 {
            let f = crate::random::table(3 + i % 4, 4, 2 + i % 3, &mut rng);
            let mu = crate::random::sparse_joint(f.x_size(), 4, 0.3, &mut rng);
            let eps = [0.0, 0.1, 0.3][i % 3];
            let cert = rec_exact(&f, &mu, eps).unwrap();
            assert!((cert.value - brute_rec(&f, &mu, eps)).abs() < 1e-9);
            cert.verify(&f, &mu, eps).unwrap();
        }
    }

    #[test]
    fn rec_exact_respects_cap() {
        let gt = benchmark(BenchmarkKind::GreaterThan, 3).unwrap();
        let mu = JointDistribution::uniform(8, 8).unwrap();
        assert!(matches!(
            rec_exact_with_limit(&gt, &mu, 0.1, 4),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn greedy_is_valid_upper_bound() {
        let ip = benchmark(BenchmarkKind::InnerProduct, 3).unwrap();
        let mu = JointDistribution::uniform(8, 8).unwrap();
        let exact = rec_exact(&ip, &mu, 0.1).unwrap();
        let greedy = rec_greedy(&ip, &mu, 0.1).unwrap();
        greedy.verify(&ip, &mu, 0.1).unwrap();
        assert!(greedy.value >= exact.value - 1e-12);
        let constant = FunctionTable::from_fn(3, 3, 2, |_, _| 0).unwrap();
        let mu3 = JointDistribution::uniform(3, 3).unwrap();
        assert_eq!(rec_greedy(&constant, &mu3, 0.0).unwrap().value, 0.0);
    }

    #[test]
    fn lex_order_on_masks() {
        // {0, 2} < {1}
        assert!(lex_less(0b101, 0b010));
        // {0} < {0, 1}
        assert!(lex_less(0b001, 0b011));
        assert!(!lex_less(0b011, 0b001));
        // {1, 2} < {1, 3}
        assert!(lex_less(0b0110, 0b1010));
        assert!(!lex_less(0b0110, 0b0110));
    }
}
