//! Finite-dimensional real Hilbert spaces described by a Gram matrix in a
//! fixed coordinate basis.

use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, PivotPolicy};

/// Coefficients of an element of a [`HilbertSpace`] in the space's basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(DVector<f64>);

impl Vector {
    pub fn new(coeffs: DVector<f64>) -> Self {
        Self(coeffs)
    }

    pub fn from_vec(coeffs: Vec<f64>) -> Self {
        Self(DVector::from_vec(coeffs))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    /// The `i`-th basis element `e_i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[i] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn scale(&self, lambda: f64) -> Self {
        Self(&self.0 * lambda)
    }

    /// `self + lambda * other`.
    pub fn axpy(&self, lambda: f64, other: &Vector) -> Self {
        Self(&self.0 + &other.0 * lambda)
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        Vector(&self.0 + &rhs.0)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        Vector(&self.0 - &rhs.0)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector(-&self.0)
    }
}

impl Mul<&Vector> for f64 {
    type Output = Vector;
    fn mul(self, rhs: &Vector) -> Vector {
        Vector(&rhs.0 * self)
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Self::from_vec(v)
    }
}

impl Serialize for Vector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Vec::<f64>::deserialize(d).map(Vector::from_vec)
    }
}

/// A real inner-product space `ℝⁿ` with `⟨u, v⟩ = uᵀ G v`.
///
/// The Gram matrix `G` is symmetric bit-for-bit and positive definite; its
/// Cholesky factor is computed once at construction and reused by every
/// solve against `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertSpace {
    gram: DMatrix<f64>,
    chol: Cholesky,
}

impl HilbertSpace {
    /// Validates `gram` and caches its Cholesky factor.
    pub fn new(gram: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = gram.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::InvalidArgument("gram matrix must be nonempty".into()));
        }
        for j in 0..cols {
            for i in 0..rows {
                if !gram[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        for i in 0..rows {
            for j in (i + 1)..cols {
                if gram[(i, j)] != gram[(j, i)] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        let chol = Cholesky::factor(&gram, PivotPolicy::Positive)?;
        Ok(Self { gram, chol })
    }

    /// Builds a space from row-major nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    /// `ℝⁿ` with the Euclidean inner product.
    pub fn euclidean(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim)).expect("identity is SPD")
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    pub fn check_dim(&self, v: &Vector) -> Result<()> {
        check_len(self.dim(), v.dim())
    }

    pub fn inner(&self, u: &Vector, v: &Vector) -> Result<f64> {
        self.check_dim(u)?;
        self.check_dim(v)?;
        Ok(self.inner_unchecked(u.coeffs(), v.coeffs()))
    }

    pub(crate) fn inner_unchecked(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(&(&self.gram * v))
    }

    /// `√⟨u, u⟩`. Clamped at zero so rounding never produces a NaN.
    pub fn norm(&self, u: &Vector) -> Result<f64> {
        self.check_dim(u)?;
        Ok(self.norm_unchecked(u.coeffs()))
    }

    pub(crate) fn norm_unchecked(&self, u: &DVector<f64>) -> f64 {
        self.inner_unchecked(u, u).max(0.0).sqrt()
    }

    pub fn distance(&self, u: &Vector, v: &Vector) -> Result<f64> {
        self.check_dim(u)?;
        self.check_dim(v)?;
        Ok(self.norm_unchecked(&(u.coeffs() - v.coeffs())))
    }

    /// Solves `G x = b`.
    pub fn solve_gram(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }
}

/// Tolerance scale `max(1, values...)`.
pub fn scale_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(1.0, f64::max)
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Row-major nested rows to a dense matrix; rows must be equally long.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch { expected: ncols, found: bad.len() });
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    dim: usize,
    gram: Vec<Vec<f64>>,
}

impl Serialize for HilbertSpace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpaceRepr { dim: self.dim(), gram: matrix_to_rows(&self.gram) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HilbertSpace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SpaceRepr::deserialize(d)?;
        if repr.gram.len() != repr.dim {
            return Err(D::Error::custom(format!(
                "dim {} does not match {} gram rows",
                repr.dim,
                repr.gram.len()
            )));
        }
        HilbertSpace::from_rows(&repr.gram).map_err(D::Error::custom)
    }
}
