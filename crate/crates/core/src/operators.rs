//! Linear and bilinear forms on a [`HilbertSpace`], their norms and
//! constants, and the Riesz map.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, symmetric_extreme_eigenvalues, symmetric_min_eigenpair};
use crate::projection::{project, Subspace};
use crate::random;
use crate::space::{check_len, matrix_from_rows, matrix_to_rows, HilbertSpace, Vector};

/// `φ(v) = covector · coeffs(v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    covector: DVector<f64>,
}

impl LinearForm {
    pub fn new(covector: DVector<f64>) -> Self {
        Self { covector }
    }

    pub fn from_vec(covector: Vec<f64>) -> Self {
        Self::new(DVector::from_vec(covector))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(DVector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.covector.len()
    }

    pub fn covector(&self) -> &DVector<f64> {
        &self.covector
    }

    pub fn is_zero(&self) -> bool {
        self.covector.iter().all(|&c| c == 0.0)
    }

    /// `⟨φ|v⟩`.
    pub fn apply(&self, v: &Vector) -> Result<f64> {
        check_len(self.dim(), v.dim())?;
        Ok(self.covector.dot(v.coeffs()))
    }

    /// `αφ + βψ`.
    pub fn combine(&self, alpha: f64, other: &LinearForm, beta: f64) -> Result<LinearForm> {
        check_len(self.dim(), other.dim())?;
        Ok(Self::new(&self.covector * alpha + &other.covector * beta))
    }
}

/// `a(u, v) = coeffs(u)ᵀ M coeffs(v)`; `M` need not be symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearForm {
    matrix: DMatrix<f64>,
}

impl BilinearForm {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    /// Checked constructor: square with finite entries.
    pub fn try_new(matrix: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if let Some(idx) = matrix.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: idx % rows, col: idx / rows });
        }
        Ok(Self::new(matrix))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::try_new(matrix_from_rows(rows)?)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, u: &Vector, v: &Vector) -> Result<f64> {
        check_len(self.dim(), u.dim())?;
        check_len(self.dim(), v.dim())?;
        Ok(u.coeffs().dot(&(&self.matrix * v.coeffs())))
    }
}

/// Continuity constant `C` and coercivity constant `α` of a bilinear form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormConstants {
    pub continuity_c: f64,
    /// Nonpositive when the form is not coercive.
    pub coercivity_alpha: f64,
}

impl FormConstants {
    /// Tight constants of `bform` in the geometry of `space`.
    ///
    /// When `M` equals the Gram matrix the form is the inner product
    /// itself and `α = C = 1` exactly, without going through an
    /// eigensolver.
    pub fn compute(space: &HilbertSpace, bform: &BilinearForm) -> Result<Self> {
        check_len(space.dim(), bform.dim())?;
        if bform.matrix() == space.gram() {
            return Ok(Self { continuity_c: 1.0, coercivity_alpha: 1.0 });
        }
        Ok(Self {
            continuity_c: continuity_constant(space, bform)?,
            coercivity_alpha: coercivity_constant(space, bform)?,
        })
    }

    /// `C / α`, the quasi-optimality factor of Galerkin approximations.
    pub fn cea_factor(&self) -> f64 {
        self.continuity_c / self.coercivity_alpha
    }
}

/// `sup_{u≠0} |φ(u)| / ‖u‖ = √(fᵀ G⁻¹ f)`.
pub fn dual_norm(space: &HilbertSpace, form: &LinearForm) -> Result<f64> {
    check_len(space.dim(), form.dim())?;
    let y = space.cholesky().solve_lower(form.covector());
    Ok(y.norm())
}

/// Largest `|φ(ξ)|` over `n_samples` random unit vectors `ξ`; a sampled
/// lower bound on [`dual_norm`].
pub fn sampled_sup_ratio(space: &HilbertSpace, form: &LinearForm, n_samples: usize, rng_seed: u64) -> Result<f64> {
    check_len(space.dim(), form.dim())?;
    let mut rng = random::rng(rng_seed);
    let mut best = 0.0_f64;
    let mut drawn = 0;
    while drawn < n_samples {
        let xi = random::normal_dvector(&mut rng, space.dim());
        let norm = space.norm_unchecked(&xi);
        if norm == 0.0 {
            continue;
        }
        drawn += 1;
        best = best.max((form.covector().dot(&xi) / norm).abs());
    }
    Ok(best)
}

/// `L⁻¹ M L⁻ᵀ` with `G = LLᵀ`: the form's matrix in a `G`-orthonormal basis.
pub fn whitened(space: &HilbertSpace, bform: &BilinearForm) -> Result<DMatrix<f64>> {
    check_len(space.dim(), bform.dim())?;
    Ok(space.cholesky().whiten(bform.matrix()))
}

/// Least `C` with `|a(u, v)| ≤ C ‖u‖ ‖v‖`: the largest singular value of the
/// whitened matrix.
pub fn continuity_constant(space: &HilbertSpace, bform: &BilinearForm) -> Result<f64> {
    Ok(spectral_norm(&whitened(space, bform)?))
}

/// Largest `α` with `a(u, u) ≥ α ‖u‖²`: the smallest eigenvalue of the
/// symmetric part of the whitened matrix. May be `≤ 0`.
pub fn coercivity_constant(space: &HilbertSpace, bform: &BilinearForm) -> Result<f64> {
    let (min, _) = symmetric_extreme_eigenvalues(&whitened(space, bform)?);
    Ok(min)
}

/// A unit vector (in `space`) attaining `a(u, u) = α ‖u‖²`.
pub fn coercivity_witness(space: &HilbertSpace, bform: &BilinearForm) -> Result<Vector> {
    let (_, z) = symmetric_min_eigenpair(&whitened(space, bform)?);
    // u = L⁻ᵀ z has ‖u‖_G = ‖z‖ = 1
    Ok(Vector::new(space.cholesky().solve_upper(&z)))
}

/// `A(u) = a(u, ·)`, with covector `Mᵀ coeffs(u)`.
pub fn representation(space: &HilbertSpace, bform: &BilinearForm, u: &Vector) -> Result<LinearForm> {
    check_len(space.dim(), bform.dim())?;
    space.check_dim(u)?;
    Ok(LinearForm::new(bform.matrix().tr_mul(u.coeffs())))
}

/// Riesz representative `τ(φ) = G⁻¹ f`, the vector with `φ(v) = ⟨τ(φ), v⟩`.
pub fn riesz(space: &HilbertSpace, form: &LinearForm) -> Result<Vector> {
    check_len(space.dim(), form.dim())?;
    Ok(Vector::new(space.solve_gram(form.covector())))
}

/// Riesz representative built the long way round: project a vector off the
/// kernel of `φ`, normalize it to `ξ₀`, and return `φ(ξ₀) ξ₀`.
pub fn riesz_constructive(space: &HilbertSpace, form: &LinearForm) -> Result<Vector> {
    check_len(space.dim(), form.dim())?;
    let n = space.dim();
    if form.is_zero() {
        return Ok(Vector::zeros(n));
    }
    let f = form.covector();
    let pivot = f.iamax();
    let u0 = Vector::basis(n, pivot);
    let v0 = if n == 1 {
        // Ker φ = {0}
        u0
    } else {
        let kernel = kernel_basis(f, pivot);
        let sub = Subspace::new(space, kernel)?;
        &u0 - &project(&sub, &u0)?
    };
    let xi0 = v0.scale(1.0 / space.norm(&v0)?);
    Ok(xi0.scale(form.apply(&xi0)?))
}

/// The `n − 1` vectors `e_i − (f_i / f_j) e_j`, `i ≠ j`, spanning `Ker φ`.
fn kernel_basis(f: &DVector<f64>, pivot: usize) -> DMatrix<f64> {
    let n = f.len();
    let mut b = DMatrix::<f64>::zeros(n, n - 1);
    for (col, i) in (0..n).filter(|&i| i != pivot).enumerate() {
        b[(i, col)] = 1.0;
        b[(pivot, col)] = -f[i] / f[pivot];
    }
    b
}

/// `|‖τ(φ)‖ − ‖φ‖′|`.
pub fn riesz_isometry_gap(space: &HilbertSpace, form: &LinearForm) -> Result<f64> {
    let u = riesz(space, form)?;
    Ok((space.norm(&u)? - dual_norm(space, form)?).abs())
}

/// Random member of the dual with covector entries drawn standard normal.
pub fn random_form<R: Rng + ?Sized>(rng: &mut R, n: usize) -> LinearForm {
    random::linear_form(rng, n)
}

impl Serialize for LinearForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            covector: &'a [f64],
        }
        Repr { covector: self.covector.as_slice() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            covector: Vec<f64>,
        }
        Ok(LinearForm::from_vec(Repr::deserialize(d)?.covector))
    }
}

impl Serialize for BilinearForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            matrix: Vec<Vec<f64>>,
        }
        Repr { matrix: matrix_to_rows(&self.matrix) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BilinearForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        struct Repr {
            matrix: Vec<Vec<f64>>,
        }
        let repr = Repr::deserialize(d)?;
        BilinearForm::from_rows(&repr.matrix).map_err(D::Error::custom)
    }
}
