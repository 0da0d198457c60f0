//! Seeded generators for randomized instances.
//!
//! Everything is driven by `ChaCha8Rng` so a seed reproduces the same
//! instance on every platform.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operators::{BilinearForm, LinearForm};
use crate::space::{HilbertSpace, Vector};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_dvector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn normal_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vector {
    Vector::new(normal_dvector(rng, n))
}

pub fn normal_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Copies the lower triangle onto the upper one so the result is
/// symmetric bit for bit.
pub fn symmetrize_lower(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            m[(i, j)] = m[(j, i)];
        }
    }
}

/// Random SPD Gram matrix `AᵀA/n + shift·I`.
pub fn spd_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, shift: f64) -> DMatrix<f64> {
    let a = normal_matrix(rng, n, n);
    let mut g = a.transpose() * &a / n as f64;
    for i in 0..n {
        g[(i, i)] += shift;
    }
    symmetrize_lower(&mut g);
    g
}

pub fn hilbert_space<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HilbertSpace {
    HilbertSpace::new(spd_matrix(rng, n, 0.5)).expect("shifted Gram matrix is SPD")
}

/// Nonsymmetric coercive form on `space`.
///
/// In whitened coordinates the form is `S + K` with `S` SPD (eigenvalues at
/// least 1) and `K` skew with entries of size `skew / √n`; pulled back with
/// the Cholesky factor `L` of the Gram matrix this is `M = L (S + K) Lᵀ`.
pub fn coercive_form<R: Rng + ?Sized>(rng: &mut R, space: &HilbertSpace, skew: f64) -> BilinearForm {
    let n = space.dim();
    let s = spd_matrix(rng, n, 1.0);
    let b = normal_matrix(rng, n, n) * (skew / (n as f64).sqrt());
    let k = (&b - b.transpose()) * 0.5;
    let l = space.cholesky().factor_matrix();
    BilinearForm::new(l * (s + k) * l.transpose())
}

pub fn linear_form<R: Rng + ?Sized>(rng: &mut R, n: usize) -> LinearForm {
    LinearForm::new(normal_dvector(rng, n))
}

/// Random well-conditioned `n × m` basis: orthonormal columns mixed by a
/// unit upper-triangular matrix with entries in `[-0.5, 0.5]`, then scaled
/// column-wise by factors in `[0.5, 2]`.
pub fn basis<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> DMatrix<f64> {
    let q = normal_matrix(rng, n, m).qr().q();
    let mut mix = DMatrix::<f64>::identity(m, m);
    for j in 0..m {
        for i in 0..j {
            mix[(i, j)] = rng.random_range(-0.5..0.5);
        }
    }
    let mut b = q * mix;
    for j in 0..m {
        let s: f64 = rng.random_range(0.5..2.0);
        b.column_mut(j).scale_mut(s);
    }
    b
}
