//! Exact Shannon quantities on explicit finite distributions, in bits.
//!
//! Entropies use the convention `0 · log 0 = 0`. Quantities that are
//! mathematically non-negative (mutual information and its conditional
//! form) are clamped at zero after floating-point evaluation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::table::JointDistribution;
use crate::{Error, Result, CONSTRUCTION_TOLERANCE};

/// Default cap on `y_size^m` for [`infadd_expand`].
pub const DEFAULT_EXPANSION_LIMIT: usize = 1_000_000;

/// A probability mass function on `{0, …, n−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MassFunction {
    probs: Vec<f64>,
}

impl MassFunction {
    /// Validates non-negative finite entries summing to one within `1e-12`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        validate_masses(&probs)?;
        Ok(Self { probs })
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || !(total > 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be non-negative with positive total".into(),
            ));
        }
        Ok(Self::from_weights_unchecked(weights))
    }

    pub(crate) fn from_weights_unchecked(mut weights: Vec<f64>) -> Self {
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self { probs: weights }
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point(n: usize, at: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

fn validate_masses(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution("empty support".into()));
    }
    if let Some(i) = probs.iter().position(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "entry {i} = {} is not a non-negative real",
            probs[i]
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > CONSTRUCTION_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "total mass {total} differs from 1"
        )));
    }
    Ok(())
}

/// `−Σ p log₂ p` over the given masses.
pub(crate) fn shannon(probs: impl IntoIterator<Item = f64>) -> f64 {
    let h: f64 = probs
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * libm::log2(p))
        .sum();
    h.max(0.0)
}

/// Maps rounding noise below the construction tolerance (including small
/// negatives) to exactly 0.
#[inline]
pub(crate) fn clamp_nonnegative(v: f64) -> f64 {
    if v >= CONSTRUCTION_TOLERANCE {
        v
    } else {
        0.0
    }
}

pub fn entropy(p: &MassFunction) -> f64 {
    shannon(p.probs.iter().copied())
}

/// Binary entropy `S(p) = −p log p − (1−p) log(1−p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "binary entropy argument {p} outside [0, 1]"
        )));
    }
    Ok(shannon([p, 1.0 - p]))
}

/// `I(X:Y) = S(X) + S(Y) − S(XY)`.
pub fn mutual_information(mu: &JointDistribution) -> f64 {
    let hx = entropy(&mu.x_marginal());
    let hy = entropy(&mu.y_marginal());
    let hxy = shannon(mu.probs().iter().copied());
    clamp_nonnegative(hx + hy - hxy)
}

/// `S(X | Y) = S(XY) − S(Y)`.
pub fn conditional_entropy_x_given_y(mu: &JointDistribution) -> f64 {
    let hy = entropy(&mu.y_marginal());
    let hxy = shannon(mu.probs().iter().copied());
    clamp_nonnegative(hxy - hy)
}

/// Fano's bound `S(Pe) + Pe · log₂(alphabet − 1)`.
pub fn fano_bound(pe: f64, alphabet: usize) -> Result<f64> {
    if alphabet < 2 {
        return Err(Error::InvalidArgument(format!(
            "alphabet size must be at least 2 (got {alphabet})"
        )));
    }
    Ok(binary_entropy(pe)? + pe * libm::log2((alphabet - 1) as f64))
}

/// `−log₂ max_i P(i)`.
pub fn min_entropy(p: &MassFunction) -> f64 {
    let max = p.probs.iter().copied().fold(0.0, f64::max);
    clamp_nonnegative(-libm::log2(max))
}

/// `Σ |p − q|`.
pub fn l1_distance(p: &MassFunction, q: &MassFunction) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "support sizes {} and {}",
            p.len(),
            q.len()
        )));
    }
    Ok(p.probs
        .iter()
        .zip(&q.probs)
        .map(|(a, b)| (a - b).abs())
        .sum())
}

/// Relative entropy `KL(p ‖ q)` in bits; infinite when `p` is not
/// absolutely continuous with respect to `q`.
pub fn kl_divergence(p: &MassFunction, q: &MassFunction) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "support sizes {} and {}",
            p.len(),
            q.len()
        )));
    }
    let mut d = 0.0;
    for (&a, &b) in p.probs.iter().zip(&q.probs) {
        if a > 0.0 {
            if b <= 0.0 {
                return Ok(f64::INFINITY);
            }
            d += a * libm::log2(a / b);
        }
    }
    Ok(clamp_nonnegative(d))
}

/// The joint of `X'` and `Y' = (Y₁, …, Y_m)` where `X'` is distributed as
/// `X` and `Y' | X'=x` is `m` independent copies of `Y | X=x`.
///
/// `Y'` is indexed in base `y_size` with `Y₁` as the most significant digit.
pub fn infadd_expand(mu: &JointDistribution, m: u32) -> Result<JointDistribution> {
    infadd_expand_with_limit(mu, m, DEFAULT_EXPANSION_LIMIT)
}

pub fn infadd_expand_with_limit(
    mu: &JointDistribution,
    m: u32,
    limit: usize,
) -> Result<JointDistribution> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let ny = mu.y_size();
    let size = (ny as u128).checked_pow(m).unwrap_or(u128::MAX);
    if size > limit as u128 {
        return Err(Error::cap("y_size^m", size, limit as u128));
    }
    let size = size as usize;
    let mut p = Vec::with_capacity(mu.x_size() * size);
    for x in 0..mu.x_size() {
        let mass = mu.row_mass(x);
        if mass <= 0.0 {
            p.extend(core::iter::repeat_n(0.0, size));
            continue;
        }
        let cond: Vec<f64> = mu.row(x).iter().map(|v| v / mass).collect();
        // Expand one digit at a time; the first factor ends up most significant.
        let mut row = vec![mass];
        for _ in 0..m {
            let mut next = Vec::with_capacity(row.len() * ny);
            for &r in &row {
                next.extend(cond.iter().map(|&c| r * c));
            }
            row = next;
        }
        p.extend(row);
    }
    JointDistribution::from_weights(mu.x_size(), size, p)
}

/// A joint mass function over several labeled axes, stored row-major with
/// the first axis varying slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledJoint {
    axes: Vec<usize>,
    probs: Vec<f64>,
}

impl LabeledJoint {
    pub fn new(axes: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        Self::check_axes(&axes, probs.len())?;
        validate_masses(&probs)?;
        Ok(Self { axes, probs })
    }

    pub fn from_weights(axes: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        Self::check_axes(&axes, weights.len())?;
        let mf = MassFunction::from_weights(weights)?;
        Ok(Self {
            axes,
            probs: mf.probs,
        })
    }

    fn check_axes(axes: &[usize], len: usize) -> Result<()> {
        if axes.is_empty() || axes.contains(&0) {
            return Err(Error::InvalidDistribution(
                "axes must be a non-empty list of positive sizes".into(),
            ));
        }
        let expected = axes
            .iter()
            .try_fold(1usize, |acc, &a| acc.checked_mul(a))
            .ok_or_else(|| Error::InvalidDistribution("axis sizes overflow".into()))?;
        if expected != len {
            return Err(Error::InvalidDistribution(format!(
                "axes {axes:?} need {expected} entries, got {len}"
            )));
        }
        Ok(())
    }

    pub fn from_joint(mu: &JointDistribution) -> Self {
        Self {
            axes: vec![mu.x_size(), mu.y_size()],
            probs: mu.probs().to_vec(),
        }
    }

    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Marginal masses of the listed axes, row-major in the listed order.
    pub fn marginal(&self, group: &[usize]) -> Result<Vec<f64>> {
        for (i, &a) in group.iter().enumerate() {
            if a >= self.axes.len() {
                return Err(Error::InvalidArgument(format!(
                    "axis {a} out of range 0..{}",
                    self.axes.len()
                )));
            }
            if group[..i].contains(&a) {
                return Err(Error::InvalidArgument(format!("axis {a} listed twice")));
            }
        }
        // Stride of each source axis inside the marginal's flat index.
        let mut stride = vec![0usize; self.axes.len()];
        let mut size = 1usize;
        for &a in group.iter().rev() {
            stride[a] = size;
            size *= self.axes[a];
        }
        let mut out = vec![0.0; size];
        let mut digits = vec![0usize; self.axes.len()];
        let mut target = 0usize;
        for &p in &self.probs {
            out[target] += p;
            // Odometer increment on the source multi-index.
            for a in (0..self.axes.len()).rev() {
                digits[a] += 1;
                target += stride[a];
                if digits[a] < self.axes[a] {
                    break;
                }
                target -= stride[a] * digits[a];
                digits[a] = 0;
            }
        }
        Ok(out)
    }

    /// Joint entropy of the listed axes.
    pub fn group_entropy(&self, group: &[usize]) -> Result<f64> {
        Ok(shannon(self.marginal(group)?))
    }
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v = a.to_vec();
    v.extend_from_slice(b);
    v
}

/// `I(A:B | C) = S(AC) + S(BC) − S(ABC) − S(C)` for disjoint axis groups.
pub fn conditional_mutual_information(
    joint: &LabeledJoint,
    a: &[usize],
    b: &[usize],
    c: &[usize],
) -> Result<f64> {
    let all = union(&union(a, b), c);
    // marginal() rejects repeated or out-of-range axes.
    joint.marginal(&all)?;
    let hac = joint.group_entropy(&union(a, c))?;
    let hbc = joint.group_entropy(&union(b, c))?;
    let habc = joint.group_entropy(&all)?;
    let hc = joint.group_entropy(c)?;
    Ok(clamp_nonnegative(hac + hbc - habc - hc))
}

/// The chain-rule terms `I(X_i : M | X_1 … X_{i−1})`, one per entry of `xs`.
pub fn chain_rule_terms(joint: &LabeledJoint, xs: &[usize], m: &[usize]) -> Result<Vec<f64>> {
    (0..xs.len())
        .map(|i| conditional_mutual_information(joint, &xs[i..=i], m, &xs[..i]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn entropy_examples() {
        assert!(close(entropy(&MassFunction::uniform(8)), 3.0, 1e-12));
        assert_eq!(entropy(&MassFunction::point(5, 2)), 0.0);
        let p = MassFunction::new(vec![0.25, 0.75]).unwrap();
        // -0.25 log 0.25 - 0.75 log 0.75 = 0.5 + 0.75 * 0.415037...
        assert!(close(entropy(&p), 0.811_278_124_459_132_9, 1e-12));
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!(close(binary_entropy(0.25).unwrap(), 0.811_278_124_459_132_9, 1e-12));
        assert!(binary_entropy(1.2).is_err());
        assert!(binary_entropy(-0.1).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let u = MassFunction::new(vec![0.3, 0.7]).unwrap();
        let v = MassFunction::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert!(mutual_information(&JointDistribution::product(&u, &v)) < 1e-12);
        let corr = JointDistribution::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(close(mutual_information(&corr), 1.0, 1e-12));
        let noisy = JointDistribution::new(2, 2, vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        let expected = 1.0 - binary_entropy(0.2).unwrap();
        assert!(close(mutual_information(&noisy), expected, 1e-12));
        assert!(close(mutual_information(&noisy), 0.278_071_905_112_638, 1e-12));
    }

    #[test]
    fn fano_examples() {
        assert_eq!(fano_bound(0.0, 3).unwrap(), 0.0);
        assert!(close(fano_bound(0.5, 2).unwrap(), 1.0, 1e-12));
        assert!(close(fano_bound(0.25, 5).unwrap(), 1.311_278_124_459_133, 1e-12));
        assert!(fano_bound(0.1, 1).is_err());
    }

    #[test]
    fn min_entropy_examples() {
        assert!(close(min_entropy(&MassFunction::uniform(16)), 4.0, 1e-12));
        assert_eq!(min_entropy(&MassFunction::point(3, 0)), 0.0);
        let p = MassFunction::new(vec![0.5, 0.25, 0.25]).unwrap();
        assert_eq!(min_entropy(&p), 1.0);
    }

    #[test]
    fn l1_examples() {
        let p = MassFunction::new(vec![0.7, 0.3]).unwrap();
        let q = MassFunction::uniform(2);
        assert_eq!(l1_distance(&p, &p).unwrap(), 0.0);
        assert_eq!(
            l1_distance(&MassFunction::point(2, 0), &MassFunction::point(2, 1)).unwrap(),
            2.0
        );
        assert!(close(l1_distance(&p, &q).unwrap(), 0.4, 1e-12));
        assert!(l1_distance(&p, &MassFunction::uniform(3)).is_err());
    }

    #[test]
    fn cmi_with_trivial_condition_is_mi() {
        let noisy = JointDistribution::new(2, 2, vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        let j = LabeledJoint::new(vec![2, 2, 1], noisy.probs().to_vec()).unwrap();
        let cmi = conditional_mutual_information(&j, &[0], &[1], &[2]).unwrap();
        assert!(close(cmi, mutual_information(&noisy), 1e-12));
    }

    #[test]
    fn cmi_zero_for_conditional_independence() {
        // C uniform bit; A and B independent noisy copies of C.
        let mut w = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let pa = if a == c { 0.8 } else { 0.2 };
                    let pb = if b == c { 0.6 } else { 0.4 };
                    w.push(0.5 * pa * pb);
                }
            }
        }
        let j = LabeledJoint::new(vec![2, 2, 2], w).unwrap();
        assert!(conditional_mutual_information(&j, &[0], &[1], &[2]).unwrap() < 1e-12);
        // Unconditionally they are correlated.
        assert!(conditional_mutual_information(&j, &[0], &[1], &[]).unwrap() > 1e-3);
    }

    #[test]
    fn cmi_matches_expectation_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let j = random::labeled_joint(&[2, 2, 2], &mut rng);
            let direct = conditional_mutual_information(&j, &[0], &[1], &[2]).unwrap();
            // Oracle: Σ_c Pr[C=c] · I(A:B | C=c) from the definition.
            let mut expect = 0.0;
            for c in 0..2 {
                let slice: Vec<f64> = (0..4).map(|ab| j.probs()[ab * 2 + c]).collect();
                let pc: f64 = slice.iter().sum();
                let cond = JointDistribution::from_weights(2, 2, slice).unwrap();
                expect += pc * mutual_information(&cond);
            }
            assert!(close(direct, expect, 1e-12), "{direct} vs {expect}");
        }
    }

    #[test]
    fn chain_rule_sums_to_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let j = random::labeled_joint(&[2, 2, 2], &mut rng);
        let terms = chain_rule_terms(&j, &[0, 1], &[2]).unwrap();
        let total = conditional_mutual_information(&j, &[0, 1], &[2], &[]).unwrap();
        assert!(close(terms.iter().sum::<f64>(), total, 1e-9));
        let single = chain_rule_terms(&j, &[0], &[2]).unwrap();
        assert_eq!(single.len(), 1);
        assert!(close(
            single[0],
            conditional_mutual_information(&j, &[0], &[2], &[]).unwrap(),
            1e-15
        ));
    }

    #[test]
    fn chain_rule_independent_message() {
        let px = MassFunction::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let pm = MassFunction::new(vec![0.5, 0.25, 0.25]).unwrap();
        let mu = JointDistribution::product(&px, &pm);
        let j = LabeledJoint::new(vec![2, 2, 3], mu.probs().to_vec()).unwrap();
        for t in chain_rule_terms(&j, &[0, 1], &[2]).unwrap() {
            assert!(t < 1e-12);
        }
    }

    #[test]
    fn cmi_rejects_overlap() {
        let j = LabeledJoint::new(vec![2, 2], vec![0.25; 4]).unwrap();
        assert!(conditional_mutual_information(&j, &[0], &[0], &[]).is_err());
        assert!(conditional_mutual_information(&j, &[0], &[2], &[]).is_err());
    }

    #[test]
    fn marginal_ordering() {
        let j = LabeledJoint::new(vec![2, 3], vec![0.1, 0.2, 0.0, 0.3, 0.25, 0.15]).unwrap();
        let m = j.marginal(&[1, 0]).unwrap();
        assert_eq!(m.len(), 6);
        assert!(close(m[0], 0.1, 1e-15) && close(m[1], 0.3, 1e-15));
        assert!(close(m[2], 0.2, 1e-15) && close(m[5], 0.15, 1e-15));
        let my = j.marginal(&[1]).unwrap();
        assert!(close(my[1], 0.45, 1e-15));
    }

    #[test]
    fn infadd_examples() {
        let mu = JointDistribution::new(2, 2, vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        assert_eq!(infadd_expand(&mu, 1).unwrap(), mu);
        let e2 = infadd_expand(&mu, 2).unwrap();
        assert_eq!(e2.y_size(), 4);
        assert!(close(e2.prob(0, 0), 0.5 * 0.8 * 0.8, 1e-15));
        assert!(close(e2.prob(0, 1), 0.5 * 0.8 * 0.2, 1e-15));
        assert!(mutual_information(&e2) <= 2.0 * mutual_information(&mu) + 1e-9);
        let prod = JointDistribution::uniform(3, 2).unwrap();
        assert!(mutual_information(&infadd_expand(&prod, 3).unwrap()) < 1e-12);
        assert!(matches!(
            infadd_expand_with_limit(&mu, 5, 16),
            Err(Error::CapExceeded { .. })
        ));
    }
}
