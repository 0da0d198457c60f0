//! Subspaces and orthogonal projection in Gram geometry.
//!
//! Two independent routes to `P_F(u)`: the normal equations
//! `(BᵀGB) c = BᵀG u` ([`project`]) and a monotone minimizing sequence for
//! `w ↦ ‖u − w‖²` over `F` ([`project_minseq`]).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_extreme_eigenvalues, Cholesky, PivotPolicy};
use crate::random;
use crate::space::{HilbertSpace, Vector};

/// Relative pivot floor for the reduced Gram matrix `BᵀGB`.
pub const RANK_PIVOT_REL: f64 = 1e-12;

/// `F = span{b_1, …, b_m}` inside an ambient space, with independent columns.
#[derive(Debug, Clone)]
pub struct Subspace<'a> {
    ambient: &'a HilbertSpace,
    basis: DMatrix<f64>,
    reduced_gram: DMatrix<f64>,
    reduced_chol: Cholesky,
}

impl<'a> Subspace<'a> {
    /// `basis` is `dim × m`; its columns are coefficient vectors of the
    /// spanning elements. Rejects dependent columns instead of silently
    /// dropping rank.
    pub fn new(ambient: &'a HilbertSpace, basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() != ambient.dim() {
            return Err(Error::DimensionMismatch { expected: ambient.dim(), found: basis.nrows() });
        }
        if basis.ncols() == 0 || basis.ncols() > ambient.dim() {
            return Err(Error::RankDeficientBasis { index: 0, pivot: 0.0 });
        }
        if basis.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("subspace basis has non-finite entries".into()));
        }
        let mut reduced_gram = basis.transpose() * ambient.gram() * &basis;
        random::symmetrize_lower(&mut reduced_gram);
        let reduced_chol = Cholesky::factor(&reduced_gram, PivotPolicy::RelativeToDiagonal(RANK_PIVOT_REL))
            .map_err(|e| match e {
                Error::NotPositiveDefinite { index, pivot } => Error::RankDeficientBasis { index, pivot },
                other => other,
            })?;
        Ok(Self { ambient, basis, reduced_gram, reduced_chol })
    }

    pub fn from_vectors(ambient: &'a HilbertSpace, vectors: &[Vector]) -> Result<Self> {
        for v in vectors {
            ambient.check_dim(v)?;
        }
        let basis = DMatrix::from_fn(ambient.dim(), vectors.len(), |i, j| vectors[j][i]);
        Self::new(ambient, basis)
    }

    /// `Line(u) = {λu}`.
    pub fn line(ambient: &'a HilbertSpace, u: &Vector) -> Result<Self> {
        Self::from_vectors(ambient, std::slice::from_ref(u))
    }

    /// The whole ambient space, spanned by the coordinate basis.
    pub fn full(ambient: &'a HilbertSpace) -> Self {
        let n = ambient.dim();
        Self::new(ambient, DMatrix::identity(n, n)).expect("coordinate basis is independent")
    }

    /// `F + Line(u)`.
    pub fn extended(&self, u: &Vector) -> Result<Subspace<'a>> {
        self.ambient.check_dim(u)?;
        let m = self.dim();
        let mut basis = self.basis.clone().resize_horizontally(m + 1, 0.0);
        basis.set_column(m, u.coeffs());
        Subspace::new(self.ambient, basis)
    }

    pub fn ambient(&self) -> &'a HilbertSpace {
        self.ambient
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_vector(&self, j: usize) -> Vector {
        Vector::new(self.basis.column(j).into_owned())
    }

    /// `BᵀGB`, the Gram matrix of the subspace in its own basis.
    pub fn reduced_gram(&self) -> &DMatrix<f64> {
        &self.reduced_gram
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Ambient coordinates of `Σ c_j b_j`.
    pub fn lift(&self, c: &DVector<f64>) -> Vector {
        Vector::new(&self.basis * c)
    }

    /// A member with standard normal subspace coordinates.
    pub fn random_member<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        self.lift(&random::normal_dvector(rng, self.dim()))
    }

    /// `BᵀG u`, the inner products of `u` with each basis vector.
    fn moments(&self, u: &Vector) -> DVector<f64> {
        self.basis.transpose() * (self.ambient.gram() * u.coeffs())
    }

    /// Subspace coordinates of `P_F(u)`.
    pub fn projection_coords(&self, u: &Vector) -> Result<DVector<f64>> {
        self.ambient.check_dim(u)?;
        Ok(self.reduced_chol.solve(&self.moments(u)))
    }
}

/// Orthogonal projection of `u` onto `sub`: the unique `v ∈ F` with
/// `⟨v, w⟩ = ⟨u, w⟩` for every `w ∈ F`.
pub fn project(sub: &Subspace<'_>, u: &Vector) -> Result<Vector> {
    Ok(sub.lift(&sub.projection_coords(u)?))
}

/// `(P_F(u), u − P_F(u))`, the splitting of `u` along `F ⊕ F⊥`.
pub fn decompose(sub: &Subspace<'_>, u: &Vector) -> Result<(Vector, Vector)> {
    let v = project(sub, u)?;
    let w = u - &v;
    Ok((v, w))
}

/// Largest `|⟨u − v, b_j⟩| / (‖u‖·‖b_j‖)` over the basis of `sub`; zero when
/// `v` satisfies the projection characterization exactly.
pub fn characterization_residual(sub: &Subspace<'_>, u: &Vector, v: &Vector) -> Result<f64> {
    let space = sub.ambient();
    let diff = u - v;
    let scale = space.norm(u)?.max(f64::MIN_POSITIVE);
    let mut worst = 0.0_f64;
    for j in 0..sub.dim() {
        let b = sub.basis_vector(j);
        let r = space.inner(&diff, &b)?.abs() / (scale * space.norm(&b)?);
        worst = worst.max(r);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinSeqReport {
    /// Ambient coordinates of `w_0, w_1, …`.
    pub iterates: Vec<Vector>,
    /// `‖u − w_n‖` for each iterate.
    pub distances: Vec<f64>,
    pub limit: Vector,
    /// Final distance, the computed approximation of `inf_{w∈F} ‖u − w‖`.
    pub delta: f64,
}

/// Minimizing sequence for `w ↦ ‖u − w‖²` over `F`, built by fixed-step
/// gradient descent in subspace coordinates with step `1/λ_max(BᵀGB)`.
///
/// Stops once `√(rᵀr / λ_min) ≤ tol`, where `r = BᵀGB c − BᵀG u` is the
/// gradient; that quantity bounds `‖w_n − P_F(u)‖` in the ambient norm.
pub fn project_minseq(sub: &Subspace<'_>, u: &Vector, tol: f64, step_budget: usize) -> Result<MinSeqReport> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidTolerance(tol));
    }
    let space = sub.ambient();
    space.check_dim(u)?;
    let k = sub.reduced_gram();
    let (lambda_min, lambda_max) = symmetric_extreme_eigenvalues(k);
    let rhs = sub.moments(u);
    let step = 1.0 / lambda_max;

    let mut c = DVector::<f64>::zeros(sub.dim());
    let mut iterates = Vec::new();
    let mut distances = Vec::new();
    let mut record = |c: &DVector<f64>| {
        let w = sub.lift(c);
        distances.push(space.norm_unchecked(&(u.coeffs() - w.coeffs())));
        iterates.push(w);
    };
    record(&c);
    let mut steps = 0;
    loop {
        let grad = k * &c - &rhs;
        if (grad.norm_squared() / lambda_min).sqrt() <= tol {
            break;
        }
        if steps >= step_budget {
            let report = finish_minseq(iterates, distances);
            return Err(Error::BudgetExceeded { report: Box::new(report) });
        }
        c -= grad * step;
        steps += 1;
        record(&c);
    }
    Ok(finish_minseq(iterates, distances))
}

fn finish_minseq(iterates: Vec<Vector>, distances: Vec<f64>) -> MinSeqReport {
    let limit = iterates.last().cloned().expect("sequence starts with w_0");
    let delta = *distances.last().expect("sequence starts with w_0");
    MinSeqReport { iterates, distances, limit, delta }
}
