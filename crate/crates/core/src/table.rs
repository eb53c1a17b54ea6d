//! Dense function tables and joint input distributions.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::information::MassFunction;
use crate::{Error, Result, MASS_TOLERANCE};

/// Raw encoding of an undefined (`⋆`) cell.
const STAR: u32 = u32::MAX;

/// A finite, possibly partial, possibly non-boolean function
/// `f: X × Y → {0, …, k−1} ∪ {⋆}` stored as a dense row-major matrix.
///
/// Row `x` is the function `f_x: Y → Z` held by Alice on input `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionTable {
    x_size: usize,
    y_size: usize,
    z_size: usize,
    partial: bool,
    values: Vec<u32>,
}

impl FunctionTable {
    /// Builds a table from row-major cells, `None` marking `⋆`.
    pub fn new(
        x_size: usize,
        y_size: usize,
        z_size: usize,
        partial: bool,
        cells: Vec<Option<u32>>,
    ) -> Result<Self> {
        check_shape(x_size, y_size, z_size)?;
        if cells.len() != x_size * y_size {
            return Err(Error::InvalidTable(format!(
                "expected {} cells, got {}",
                x_size * y_size,
                cells.len()
            )));
        }
        let mut values = Vec::with_capacity(cells.len());
        for (i, cell) in cells.into_iter().enumerate() {
            let (x, y) = (i / y_size, i % y_size);
            match cell {
                None if !partial => {
                    return Err(Error::InvalidTable(format!(
                        "cell ({x}, {y}) is undefined but the table is not partial"
                    )))
                }
                None => values.push(STAR),
                Some(v) if v as usize >= z_size => {
                    return Err(Error::InvalidTable(format!(
                        "cell ({x}, {y}) = {v} is outside 0..{z_size}"
                    )))
                }
                Some(v) => values.push(v),
            }
        }
        Ok(Self {
            x_size,
            y_size,
            z_size,
            partial,
            values,
        })
    }

    /// Builds a total table by evaluating `f` on every cell.
    pub fn from_fn(
        x_size: usize,
        y_size: usize,
        z_size: usize,
        mut f: impl FnMut(usize, usize) -> u32,
    ) -> Result<Self> {
        check_shape(x_size, y_size, z_size)?;
        let mut values = Vec::with_capacity(x_size * y_size);
        for x in 0..x_size {
            for y in 0..y_size {
                let v = f(x, y);
                if v as usize >= z_size {
                    return Err(Error::InvalidTable(format!(
                        "cell ({x}, {y}) = {v} is outside 0..{z_size}"
                    )));
                }
                values.push(v);
            }
        }
        Ok(Self {
            x_size,
            y_size,
            z_size,
            partial: false,
            values,
        })
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    /// Number of output values `k`.
    pub fn z_size(&self) -> usize {
        self.z_size
    }

    /// Whether the table was declared partial (it may still have no `⋆`).
    pub fn is_partial(&self) -> bool {
        self.partial
    }

    pub fn is_boolean(&self) -> bool {
        self.z_size == 2
    }

    /// True when no cell is `⋆`.
    pub fn is_total(&self) -> bool {
        !self.partial || self.values.iter().all(|&v| v != STAR)
    }

    /// The value at `(x, y)`, `None` for `⋆`.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<u32> {
        let v = self.values[x * self.y_size + y];
        (v != STAR).then_some(v)
    }

    /// The value at `(x, y)` of a table known to be total.
    #[inline]
    pub(crate) fn value(&self, x: usize, y: usize) -> u32 {
        self.values[x * self.y_size + y]
    }

    pub fn row(&self, x: usize) -> impl Iterator<Item = Option<u32>> + '_ {
        self.values[x * self.y_size..(x + 1) * self.y_size]
            .iter()
            .map(|&v| (v != STAR).then_some(v))
    }

    pub fn cells(&self) -> impl Iterator<Item = Option<u32>> + '_ {
        self.values.iter().map(|&v| (v != STAR).then_some(v))
    }

    /// The scaled value `f'(x, y) = (f(x, y) + 1) / k` in `(0, 1]`.
    pub fn scaled(&self, x: usize, y: usize) -> Option<f64> {
        self.get(x, y)
            .map(|v| (v as f64 + 1.0) / self.z_size as f64)
    }

    /// Number of pairwise distinct rows.
    pub fn distinct_rows(&self) -> usize {
        let mut rows: Vec<&[u32]> = self.values.chunks(self.y_size).collect();
        rows.sort_unstable();
        rows.dedup();
        rows.len()
    }

    pub(crate) fn require_total(&self) -> Result<()> {
        if self.is_total() {
            Ok(())
        } else {
            Err(Error::NotTotal)
        }
    }

    pub(crate) fn require_boolean_total(&self) -> Result<()> {
        if !self.is_boolean() {
            return Err(Error::NotBoolean);
        }
        self.require_total()
    }

    pub(crate) fn require_matches(&self, mu: &JointDistribution) -> Result<()> {
        if self.x_size != mu.x_size() || self.y_size != mu.y_size() {
            return Err(Error::DimensionMismatch(format!(
                "function is {}x{} but distribution is {}x{}",
                self.x_size,
                self.y_size,
                mu.x_size(),
                mu.y_size()
            )));
        }
        Ok(())
    }
}

fn check_shape(x_size: usize, y_size: usize, z_size: usize) -> Result<()> {
    if x_size == 0 || y_size == 0 {
        return Err(Error::InvalidTable(format!(
            "x_size and y_size must be positive (got {x_size}x{y_size})"
        )));
    }
    if z_size < 2 {
        return Err(Error::InvalidTable(format!(
            "z_size must be at least 2 (got {z_size})"
        )));
    }
    Ok(())
}

/// A probability mass matrix over `X × Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    x_size: usize,
    y_size: usize,
    p: Vec<f64>,
}

impl JointDistribution {
    /// Validates a row-major mass matrix: finite, non-negative entries whose
    /// total is within `1e-9` of one.
    pub fn new(x_size: usize, y_size: usize, p: Vec<f64>) -> Result<Self> {
        if x_size == 0 || y_size == 0 {
            return Err(Error::InvalidDistribution(format!(
                "x_size and y_size must be positive (got {x_size}x{y_size})"
            )));
        }
        if p.len() != x_size * y_size {
            return Err(Error::InvalidDistribution(format!(
                "expected {} entries, got {}",
                x_size * y_size,
                p.len()
            )));
        }
        for (i, &v) in p.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "entry ({}, {}) = {v} is not a non-negative real",
                    i / y_size,
                    i % y_size
                )));
            }
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "total mass {total} differs from 1 by more than {MASS_TOLERANCE}"
            )));
        }
        Ok(Self { x_size, y_size, p })
    }

    /// Normalizes non-negative weights into a distribution.
    pub fn from_weights(x_size: usize, y_size: usize, mut w: Vec<f64>) -> Result<Self> {
        let total: f64 = w.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidDistribution(
                "weights must have positive finite total".into(),
            ));
        }
        w.iter_mut().for_each(|v| *v /= total);
        Self::new(x_size, y_size, w)
    }

    pub fn uniform(x_size: usize, y_size: usize) -> Result<Self> {
        let n = x_size * y_size;
        Self::new(x_size, y_size, vec![1.0 / n as f64; n])
    }

    /// The product distribution `px ⊗ py`.
    pub fn product(px: &MassFunction, py: &MassFunction) -> Self {
        let mut p = Vec::with_capacity(px.len() * py.len());
        for &a in px.probs() {
            p.extend(py.probs().iter().map(|&b| a * b));
        }
        Self {
            x_size: px.len(),
            y_size: py.len(),
            p,
        }
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.p[x * self.y_size + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.p[x * self.y_size..(x + 1) * self.y_size]
    }

    /// Row-major masses.
    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn total_mass(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn row_mass(&self, x: usize) -> f64 {
        self.row(x).iter().sum()
    }

    pub fn x_marginal(&self) -> MassFunction {
        MassFunction::from_weights_unchecked(
            (0..self.x_size).map(|x| self.row_mass(x)).collect(),
        )
    }

    pub fn y_marginal(&self) -> MassFunction {
        let mut w = vec![0.0; self.y_size];
        for row in self.p.chunks(self.y_size) {
            for (acc, &v) in w.iter_mut().zip(row) {
                *acc += v;
            }
        }
        MassFunction::from_weights_unchecked(w)
    }

    /// The conditional distribution of `Y` given `X = x`.
    pub fn conditional_row(&self, x: usize) -> Result<MassFunction> {
        if x >= self.x_size {
            return Err(Error::InvalidArgument(format!(
                "row {x} out of range 0..{}",
                self.x_size
            )));
        }
        let mass = self.row_mass(x);
        if mass <= 0.0 {
            return Err(Error::ZeroMassRow(x));
        }
        Ok(MassFunction::from_weights_unchecked(
            self.row(x).iter().map(|&v| v / mass).collect(),
        ))
    }

    /// True when every entry is within `tol` of the product of its marginals.
    pub fn is_product(&self, tol: f64) -> bool {
        let px = self.x_marginal();
        let py = self.y_marginal();
        self.p.chunks(self.y_size).enumerate().all(|(x, row)| {
            let a = px.probs()[x];
            row.iter()
                .zip(py.probs())
                .all(|(&v, &b)| (v - a * b).abs() <= tol)
        })
    }
}
