//! Seeded generators for random instances and per-trial random streams.

use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::information::{LabeledJoint, MassFunction};
use crate::quantum::{hermitian_eigen, DensityMatrix};
use crate::table::{FunctionTable, JointDistribution};

pub type C64 = Complex<f64>;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the random stream `stream` of trial `trial`:
/// `splitmix64(master ⊕ splitmix64(trial ⊕ splitmix64(stream)))`.
pub fn trial_seed(master: u64, trial: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(trial ^ splitmix64(stream)))
}

/// A ChaCha8 generator for one trial's stream.
pub fn trial_rng(master: u64, trial: u64, stream: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(trial_seed(master, trial, stream))
}

fn dirichlet_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect()
}

/// A flat-Dirichlet random mass function.
pub fn mass_function<R: Rng + ?Sized>(n: usize, rng: &mut R) -> MassFunction {
    MassFunction::from_weights_unchecked(dirichlet_weights(n, rng))
}

/// A flat-Dirichlet random joint distribution on `x_size × y_size`.
pub fn joint<R: Rng + ?Sized>(x_size: usize, y_size: usize, rng: &mut R) -> JointDistribution {
    JointDistribution::from_weights(x_size, y_size, dirichlet_weights(x_size * y_size, rng))
        .expect("exponential weights are positive")
}

/// Like [`joint`] but each entry is zeroed with probability `sparsity`
/// (at least one entry survives).
pub fn sparse_joint<R: Rng + ?Sized>(
    x_size: usize,
    y_size: usize,
    sparsity: f64,
    rng: &mut R,
) -> JointDistribution {
    let mut w = dirichlet_weights(x_size * y_size, rng);
    let keep = rng.random_range(0..w.len());
    for (i, v) in w.iter_mut().enumerate() {
        if i != keep && rng.random::<f64>() < sparsity {
            *v = 0.0;
        }
    }
    JointDistribution::from_weights(x_size, y_size, w).expect("one entry kept")
}

pub fn labeled_joint<R: Rng + ?Sized>(axes: &[usize], rng: &mut R) -> LabeledJoint {
    let n = axes.iter().product();
    LabeledJoint::from_weights(axes.to_vec(), dirichlet_weights(n, rng))
        .expect("exponential weights are positive")
}

/// A uniformly random total table with outputs in `0..z_size`.
pub fn table<R: Rng + ?Sized>(x_size: usize, y_size: usize, z_size: usize, rng: &mut R) -> FunctionTable {
    FunctionTable::from_fn(x_size, y_size, z_size, |_, _| rng.random_range(0..z_size as u32))
        .expect("valid shape")
}

pub fn boolean_table<R: Rng + ?Sized>(x_size: usize, y_size: usize, rng: &mut R) -> FunctionTable {
    table(x_size, y_size, 2, rng)
}

/// A `rows × cols` matrix of independent standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

/// A random density matrix `G G† / Tr(G G†)` with `G` of shape `dim × rank`.
pub fn density_matrix<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(dim, rank.max(1), rng);
    let a = &g * g.adjoint();
    let tr = a.trace().re;
    let mut rho = a.map(|z| z / tr);
    symmetrize(&mut rho);
    DensityMatrix::new(rho).expect("Gram matrices are density matrices after normalization")
}

pub fn pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    density_matrix(dim, 1, rng)
}

/// A random POVM with `outcomes` elements: `M_j = S^{-1/2} A_j S^{-1/2}`
/// where `A_j = G_j G_j†` and `S = Σ A_j`.
pub fn povm<R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R) -> Vec<DMatrix<C64>> {
    let parts: Vec<DMatrix<C64>> = (0..outcomes)
        .map(|_| {
            let g = ginibre(dim, dim, rng);
            &g * g.adjoint()
        })
        .collect();
    let total = parts
        .iter()
        .fold(DMatrix::<C64>::zeros(dim, dim), |acc, a| acc + a);
    let (vals, vecs) = hermitian_eigen(&total);
    let inv_sqrt = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        dim,
        vals.iter().map(|&v| C64::new(1.0 / libm::sqrt(v.max(1e-300)), 0.0)),
    ));
    let t = &vecs * inv_sqrt * vecs.adjoint();
    let mut out: Vec<DMatrix<C64>> = parts.iter().map(|a| &t * a * &t).collect();
    out.iter_mut().for_each(symmetrize);
    // Absorb the residual completeness error into the last element.
    let sum = out
        .iter()
        .take(outcomes - 1)
        .fold(DMatrix::<C64>::zeros(dim, dim), |acc, a| acc + a);
    if let Some(last) = out.last_mut() {
        if outcomes > 1 {
            *last = DMatrix::<C64>::identity(dim, dim) - sum;
            symmetrize(last);
        } else {
            *last = DMatrix::<C64>::identity(dim, dim);
        }
    }
    out
}

/// Replaces `a` by `(a + a†) / 2`.
pub(crate) fn symmetrize(a: &mut DMatrix<C64>) {
    let h = (&*a + a.adjoint()).map(|z| z * 0.5);
    *a = h;
}
