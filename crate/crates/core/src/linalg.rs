//! Dense kernels shared by the rest of the crate: a pivot-checked Cholesky
//! factorization with triangular solves, and thin wrappers around the
//! nalgebra symmetric eigensolver and LU factorization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    l: DMatrix<f64>,
}

/// How small a pivot may get before the factorization is rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PivotPolicy {
    /// Every pivot must be strictly positive.
    Positive,
    /// Every pivot must exceed `rel` times the largest diagonal entry.
    RelativeToDiagonal(f64),
}

impl Cholesky {
    /// Factorizes the symmetric matrix `a`, reading only its lower triangle.
    ///
    /// On failure returns the index and value of the offending pivot as
    /// `NotPositiveDefinite`; callers remap it to their own error.
    pub fn factor(a: &DMatrix<f64>, policy: PivotPolicy) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::NotSquare { rows: n, cols: a.ncols() });
        }
        let threshold = match policy {
            PivotPolicy::Positive => 0.0,
            PivotPolicy::RelativeToDiagonal(rel) => {
                let max_diag = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
                rel * max_diag
            }
        };
        let mut l = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > threshold) {
                return Err(Error::NotPositiveDefinite { index: j, pivot: d });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn factor_matrix(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Solves `L y = b`.
    pub fn solve_lower(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut y = b.clone();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// Solves `Lᵀ x = y`.
    pub fn solve_upper(&self, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut x = y.clone();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// `L⁻¹ M L⁻ᵀ`, the matrix `M` expressed in an orthonormal basis of the
    /// geometry whose Gram matrix was factored.
    pub fn whiten(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.dim();
        // Z = L⁻¹ M, column by column
        let mut z = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let col = self.solve_lower(&m.column(j).into_owned());
            z.set_column(j, &col);
        }
        // N = Z L⁻ᵀ = (L⁻¹ Zᵀ)ᵀ
        let zt = z.transpose();
        let mut nt = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let col = self.solve_lower(&zt.column(j).into_owned());
            nt.set_column(j, &col);
        }
        nt.transpose()
    }
}

/// Extreme eigenvalues `(λ_min, λ_max)` of a symmetric matrix.
///
/// The input is symmetrized before the decomposition so callers may pass
/// matrices carrying rounding-level asymmetry.
pub fn symmetric_extreme_eigenvalues(a: &DMatrix<f64>) -> (f64, f64) {
    if a.nrows() == 0 {
        return (0.0, 0.0);
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

/// Eigenpair of the smallest eigenvalue of a symmetric matrix.
pub fn symmetric_min_eigenpair(a: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let (idx, val) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    (val, eig.eigenvectors.column(idx).into_owned())
}

/// Largest singular value, from the top eigenvalue of `AᵀA`.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let ata = a.transpose() * a;
    let (_, max) = symmetric_extreme_eigenvalues(&ata);
    max.max(0.0).sqrt()
}

/// Solves a general square system by LU with partial pivoting.
pub fn lu_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let lu = a.clone().lu();
    let x = lu.solve(b).ok_or(Error::SingularSystem)?;
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::SingularSystem)
    }
}
