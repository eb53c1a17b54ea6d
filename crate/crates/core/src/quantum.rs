//! Small dense density matrices: von Neumann entropy, trace norm, the Holevo
//! quantity and optimal binary discrimination.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::information::{binary_entropy, clamp_nonnegative, shannon, LabeledJoint};
use crate::{Error, Result};

pub type C64 = Complex<f64>;

/// Largest supported Hilbert-space dimension.
pub const MAX_DIM: usize = 16;
/// Tolerance for Hermiticity, trace, positivity and completeness checks.
pub const OPERATOR_TOLERANCE: f64 = 1e-10;

/// Eigenvalues and eigenvectors (as columns) of a Hermitian matrix.
pub fn hermitian_eigen(a: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = SymmetricEigen::new(a.clone());
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

pub(crate) fn modulus(z: C64) -> f64 {
    libm::hypot(z.re, z.im)
}

fn hermiticity_defect(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max(modulus(a[(i, j)] - a[(j, i)].conj()));
        }
    }
    worst
}

fn check_hermitian(a: &DMatrix<C64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidOperator(format!(
            "matrix is {}x{}, not square",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() == 0 || a.nrows() > MAX_DIM {
        return Err(Error::cap("dimension", a.nrows() as u64, MAX_DIM as u64));
    }
    let defect = hermiticity_defect(a);
    if defect > OPERATOR_TOLERANCE {
        return Err(Error::InvalidOperator(format!(
            "not Hermitian (defect {defect:e})"
        )));
    }
    Ok(())
}

/// A positive semi-definite, unit-trace Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    rho: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(rho: DMatrix<C64>) -> Result<Self> {
        check_hermitian(&rho)?;
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > OPERATOR_TOLERANCE || tr.im.abs() > OPERATOR_TOLERANCE {
            return Err(Error::InvalidOperator(format!("trace {tr} is not 1")));
        }
        let (vals, _) = hermitian_eigen(&rho);
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -OPERATOR_TOLERANCE {
            return Err(Error::InvalidOperator(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(Self { rho })
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        let n = probs.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(probs[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// The pure state `|ψ⟩⟨ψ|` for the normalized `ψ`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm = libm::sqrt(psi.iter().map(|z| z.norm_sqr()).sum::<f64>());
        if !(norm > 0.0) {
            return Err(Error::InvalidOperator("zero state vector".into()));
        }
        let n = psi.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj() / (norm * norm)))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::from_diagonal(&alloc::vec![1.0 / dim as f64; dim])
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    /// Eigenvalues clipped to `[0, 1]`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.rho)
            .0
            .into_iter()
            .map(|v| v.clamp(0.0, 1.0))
            .collect()
    }
}

/// `S(ρ) = −Tr ρ log ρ` in bits.
pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    shannon(rho.eigenvalues())
}

/// `‖A‖₁ = Σ |λ_i|` for Hermitian `A`.
pub fn trace_norm(a: &DMatrix<C64>) -> Result<f64> {
    check_hermitian(a)?;
    Ok(hermitian_eigen(a).0.iter().map(|v| v.abs()).sum())
}

/// A finite ensemble `{(p_x, ρ_x)}` of states of equal dimension.
#[derive(Clone, Debug)]
pub struct QuantumEnsemble {
    members: Vec<(f64, DensityMatrix)>,
}

impl QuantumEnsemble {
    pub fn new(members: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        let Some((_, first)) = members.first() else {
            return Err(Error::InvalidArgument("empty ensemble".into()));
        };
        let dim = first.dim();
        if let Some((_, bad)) = members.iter().find(|(_, r)| r.dim() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "ensemble mixes dimensions {dim} and {}",
                bad.dim()
            )));
        }
        if members.iter().any(|(p, _)| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidArgument("negative ensemble weight".into()));
        }
        let total: f64 = members.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > OPERATOR_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "ensemble weights sum to {total}"
            )));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(f64, DensityMatrix)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].1.dim()
    }

    pub fn priors(&self) -> Vec<f64> {
        self.members.iter().map(|(p, _)| *p).collect()
    }

    /// `Σ p_x ρ_x`.
    pub fn average_state(&self) -> DensityMatrix {
        let d = self.dim();
        let avg = self
            .members
            .iter()
            .fold(DMatrix::<C64>::zeros(d, d), |acc, (p, r)| {
                acc + r.matrix().map(|z| z * *p)
            });
        DensityMatrix { rho: avg }
    }
}

/// The Holevo quantity `χ = S(Σ p_x ρ_x) − Σ p_x S(ρ_x)`, which equals
/// `I(X:M)` for the classical-quantum state built from the ensemble.
pub fn holevo_chi(e: &QuantumEnsemble) -> f64 {
    let avg = vn_entropy(&e.average_state());
    let parts: f64 = e.members.iter().map(|(p, r)| p * vn_entropy(r)).sum();
    clamp_nonnegative(avg - parts)
}

fn weighted_difference(p0: f64, rho0: &DensityMatrix, p1: f64, rho1: &DensityMatrix) -> Result<DMatrix<C64>> {
    if rho0.dim() != rho1.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states of dimension {} and {}",
            rho0.dim(),
            rho1.dim()
        )));
    }
    if p0 < 0.0 || p1 < 0.0 || (p0 + p1 - 1.0).abs() > OPERATOR_TOLERANCE {
        return Err(Error::InvalidArgument(format!(
            "priors {p0} and {p1} do not form a distribution"
        )));
    }
    Ok(rho0.matrix().map(|z| z * p0) - rho1.matrix().map(|z| z * p1))
}

/// Optimal probability of guessing a bit from a quantum system:
/// `½ + ½ ‖p₀ρ₀ − p₁ρ₁‖₁`.
pub fn helstrom_success(p0: f64, rho0: &DensityMatrix, p1: f64, rho1: &DensityMatrix) -> Result<f64> {
    let diff = weighted_difference(p0, rho0, p1, rho1)?;
    let norm: f64 = hermitian_eigen(&diff).0.iter().map(|v| v.abs()).sum();
    Ok((0.5 + 0.5 * norm).min(1.0))
}

/// The measurement attaining [`helstrom_success`]: the projector onto the
/// positive eigenspace of `p₀ρ₀ − p₁ρ₁` (guess 0) and its complement.
pub fn helstrom_measurement(
    p0: f64,
    rho0: &DensityMatrix,
    p1: f64,
    rho1: &DensityMatrix,
) -> Result<[DMatrix<C64>; 2]> {
    let diff = weighted_difference(p0, rho0, p1, rho1)?;
    let d = diff.nrows();
    let (vals, vecs) = hermitian_eigen(&diff);
    let mut proj = DMatrix::<C64>::zeros(d, d);
    for (k, &v) in vals.iter().enumerate() {
        if v > 0.0 {
            let col = vecs.column(k);
            proj += col * col.adjoint();
        }
    }
    let rest = DMatrix::<C64>::identity(d, d) - &proj;
    Ok([proj, rest])
}

/// Success probability of guessing `X` when outcome `j` of the two-outcome
/// measurement `(m0, I − m0)` is read as the guess `j`.
pub fn guessing_probability(
    p0: f64,
    rho0: &DensityMatrix,
    p1: f64,
    rho1: &DensityMatrix,
    m0: &DMatrix<C64>,
) -> f64 {
    let t0 = (m0 * rho0.matrix()).trace().re;
    let t1 = (m0 * rho1.matrix()).trace().re;
    p0 * t0 + p1 * (1.0 - t1)
}

fn check_measurement(ops: &[DMatrix<C64>], dim: usize) -> Result<()> {
    if ops.is_empty() {
        return Err(Error::InvalidOperator("measurement has no outcomes".into()));
    }
    let mut sum = DMatrix::<C64>::zeros(dim, dim);
    for (j, op) in ops.iter().enumerate() {
        if op.nrows() != dim {
            return Err(Error::DimensionMismatch(format!(
                "operator {j} has dimension {}, states have {dim}",
                op.nrows()
            )));
        }
        check_hermitian(op)?;
        let min = hermitian_eigen(op).0.into_iter().fold(f64::INFINITY, f64::min);
        if min < -OPERATOR_TOLERANCE {
            return Err(Error::InvalidOperator(format!(
                "operator {j} has negative eigenvalue {min:e}"
            )));
        }
        sum += op;
    }
    let defect = (sum - DMatrix::<C64>::identity(dim, dim)).iter().map(|&z| modulus(z)).fold(0.0, f64::max);
    if defect > OPERATOR_TOLERANCE {
        return Err(Error::InvalidOperator(format!(
            "measurement is incomplete (deviation {defect:e})"
        )));
    }
    Ok(())
}

/// Measures each ensemble member: the joint `Pr[x, j] = p_x Tr(M_j ρ_x)` over
/// axes `(X, outcome)`.
pub fn measure(e: &QuantumEnsemble, ops: &[DMatrix<C64>]) -> Result<LabeledJoint> {
    check_measurement(ops, e.dim())?;
    let mut w = Vec::with_capacity(e.len() * ops.len());
    for (p, rho) in &e.members {
        for op in ops {
            w.push(clamp_nonnegative(p * (op * rho.matrix()).trace().re));
        }
    }
    LabeledJoint::from_weights(alloc::vec![e.len(), ops.len()], w)
}

/// Both sides of `I(Z:Z') ≥ S(c) − S(d)` for a binary ensemble `Z` measured
/// by a two-outcome measurement whose outcome is the guess `Z'`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LargeinfGap {
    /// `I(Z:Z')` in bits.
    pub information: f64,
    /// `S(c) − S(d)` in bits.
    pub bound: f64,
    /// `c`, the smaller prior.
    pub min_prior: f64,
    /// `d = Pr[Z ≠ Z']`.
    pub error: f64,
}

pub fn largeinf_gap(e: &QuantumEnsemble, ops: &[DMatrix<C64>]) -> Result<LargeinfGap> {
    if e.len() != 2 || ops.len() != 2 {
        return Err(Error::InvalidArgument(
            "needs a binary ensemble and a two-outcome measurement".into(),
        ));
    }
    let joint = measure(e, ops)?;
    let pr = joint.probs();
    let error = pr[1] + pr[2];
    let priors = e.priors();
    let c = priors[0].min(priors[1]);
    let bound = if (error - c).abs() <= 1e-12 {
        0.0
    } else if error < c {
        binary_entropy(c)? - binary_entropy(error)?
    } else {
        return Err(Error::BoundNotApplicable(format!(
            "measurement error {error} exceeds the smaller prior {c}"
        )));
    };
    let information = clamp_nonnegative(
        joint.group_entropy(&[0])? + joint.group_entropy(&[1])? - joint.group_entropy(&[0, 1])?,
    );
    Ok(LargeinfGap {
        information,
        bound,
        min_prior: c,
        error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use alloc::vec;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn qubit(theta: f64) -> DensityMatrix {
        DensityMatrix::pure(&[c(libm::cos(theta)), c(libm::sin(theta))]).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert!(vn_entropy(&qubit(0.3)) < 1e-10);
        assert!((vn_entropy(&DensityMatrix::maximally_mixed(4).unwrap()) - 2.0).abs() < 1e-12);
        let d = DensityMatrix::from_diagonal(&[0.25, 0.75]).unwrap();
        assert!((vn_entropy(&d) - binary_entropy(0.25).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_states() {
        assert!(DensityMatrix::from_diagonal(&[0.5, 0.6]).is_err());
        assert!(DensityMatrix::from_diagonal(&[1.5, -0.5]).is_err());
        let m = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.1), c(0.2), c(0.5)]);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn trace_norm_examples() {
        assert_eq!(trace_norm(&DMatrix::<C64>::zeros(2, 2)).unwrap(), 0.0);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.5), c(-0.5)]));
        assert!((trace_norm(&d).unwrap() - 1.0).abs() < 1e-12);
        // Two pure states at angle θ have overlap cos θ; ‖ρ₀ − ρ₁‖₁ = 2 sin θ.
        let theta = 0.4;
        let diff = qubit(0.0).matrix() - qubit(theta).matrix();
        assert!((trace_norm(&diff).unwrap() - 2.0 * libm::sin(theta)).abs() < 1e-12);
        let skew = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(trace_norm(&skew).is_err());
    }

    #[test]
    fn holevo_examples() {
        let same = QuantumEnsemble::new(vec![(0.3, qubit(0.2)), (0.7, qubit(0.2))]).unwrap();
        assert!(holevo_chi(&same) < 1e-10);
        let orth = QuantumEnsemble::new(vec![(0.5, qubit(0.0)), (0.5, qubit(core::f64::consts::FRAC_PI_2))]).unwrap();
        assert!((holevo_chi(&orth) - 1.0).abs() < 1e-10);
        let q = core::f64::consts::FRAC_PI_4;
        let bb84 = QuantumEnsemble::new(vec![
            (0.25, qubit(0.0)),
            (0.25, qubit(2.0 * q)),
            (0.25, qubit(q)),
            (0.25, qubit(-q)),
        ])
        .unwrap();
        assert!((holevo_chi(&bb84) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn helstrom_examples() {
        let h = core::f64::consts::FRAC_PI_2;
        assert!((helstrom_success(0.5, &qubit(0.0), 0.5, &qubit(h)).unwrap() - 1.0).abs() < 1e-12);
        assert!((helstrom_success(0.5, &qubit(0.3), 0.5, &qubit(0.3)).unwrap() - 0.5).abs() < 1e-12);
        let theta = 0.7;
        let s = helstrom_success(0.5, &qubit(0.0), 0.5, &qubit(theta)).unwrap();
        assert!((s - (0.5 + 0.5 * libm::sin(theta))).abs() < 1e-12);
        assert!(helstrom_success(0.5, &qubit(0.0), 0.6, &qubit(theta)).is_err());
    }

    #[test]
    fn helstrom_projector_attains_optimum() {
        let mut rng = random::trial_rng(9, 0, 0);
        for _ in 0..50 {
            let r0 = random::density_matrix(3, 2, &mut rng);
            let r1 = random::density_matrix(3, 3, &mut rng);
            let m = helstrom_measurement(0.4, &r0, 0.6, &r1).unwrap();
            let opt = helstrom_success(0.4, &r0, 0.6, &r1).unwrap();
            assert!((guessing_probability(0.4, &r0, 0.6, &r1, &m[0]) - opt).abs() < 1e-9);
            let e = QuantumEnsemble::new(vec![(0.4, r0), (0.6, r1)]).unwrap();
            let j = measure(&e, &m).unwrap();
            assert!((j.probs()[0] + j.probs()[3] - opt).abs() < 1e-9);
        }
    }

    #[test]
    fn measurement_examples() {
        let e = QuantumEnsemble::new(vec![
            (0.5, DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap()),
            (0.5, DensityMatrix::from_diagonal(&[0.2, 0.8]).unwrap()),
        ])
        .unwrap();
        let z0 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(0.0)]));
        let z1 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0), c(1.0)]));
        let j = measure(&e, &[z0.clone(), z1]).unwrap();
        let expect = [0.45, 0.05, 0.1, 0.4];
        for (a, b) in j.probs().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let single = measure(&e, &[DMatrix::identity(2, 2)]).unwrap();
        let mi = single.group_entropy(&[0]).unwrap() + single.group_entropy(&[1]).unwrap()
            - single.group_entropy(&[0, 1]).unwrap();
        assert!(mi.abs() < 1e-12);
        assert!(measure(&e, &[z0]).is_err());
    }

    #[test]
    fn largeinf_examples() {
        let h = core::f64::consts::FRAC_PI_2;
        let e = QuantumEnsemble::new(vec![(0.5, qubit(0.0)), (0.5, qubit(h))]).unwrap();
        let m = helstrom_measurement(0.5, &qubit(0.0), 0.5, &qubit(h)).unwrap();
        let g = largeinf_gap(&e, &m).unwrap();
        assert!((g.bound - 1.0).abs() < 1e-9 && (g.information - 1.0).abs() < 1e-9);
        // Guessing from a useless measurement: error equals the smaller prior.
        let e = QuantumEnsemble::new(vec![(0.3, qubit(0.1)), (0.7, qubit(0.1))]).unwrap();
        let never = [DMatrix::zeros(2, 2), DMatrix::identity(2, 2)];
        let g = largeinf_gap(&e, &never).unwrap();
        assert_eq!(g.bound, 0.0);
        let always = [DMatrix::identity(2, 2), DMatrix::zeros(2, 2)];
        assert!(matches!(largeinf_gap(&e, &always), Err(Error::BoundNotApplicable(_))));
    }
}
