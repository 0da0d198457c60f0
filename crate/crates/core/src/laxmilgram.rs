//! Coercive variational problems `a(u, v) = f(v)` for all `v`, solved as the
//! fixed point of `g(v) = v − ρ τ(A(v)) + ρ τ(f)`.
//!
//! For `0 < ρ < 2α/C²` the map `g` is a contraction with factor
//! `√(1 − 2ρα + ρ²C²)`, so [`fixed_point::iterate`] converges to the unique
//! solution. [`solve_direct`] is the dense-factorization oracle and
//! [`galerkin_solve`] applies the same solver on a subspace and audits
//! Galerkin orthogonality and the Céa bound.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed_point::{self, ContractionMap, IterateOptions};
use crate::linalg::lu_solve;
use crate::operators::{dual_norm, BilinearForm, FormConstants, LinearForm};
use crate::projection::{project, Subspace};
use crate::random;
use crate::space::{check_len, matrix_from_rows, matrix_to_rows, HilbertSpace, Vector};

/// Relative slack allowed when checking `α ≤ C`.
const CONSTANT_SLACK: f64 = 1e-12;

/// `a(u, v) = f(v)` on `space`, with the form constants it was built with.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalProblem {
    pub space: HilbertSpace,
    pub a: BilinearForm,
    pub f: LinearForm,
    pub constants: FormConstants,
}

impl VariationalProblem {
    /// Computes tight constants for `a` in the geometry of `space`.
    pub fn new(space: HilbertSpace, a: BilinearForm, f: LinearForm) -> Result<Self> {
        Self::with_constants(space, a, f, None, None)
    }

    /// Uses caller-supplied `α` and/or `C` where given, computing the rest.
    /// A supplied `α` larger than `C` is lowered to `C`.
    pub fn with_constants(
        space: HilbertSpace,
        a: BilinearForm,
        f: LinearForm,
        alpha: Option<f64>,
        continuity: Option<f64>,
    ) -> Result<Self> {
        check_len(space.dim(), a.dim())?;
        check_len(space.dim(), f.dim())?;
        let mut constants = match (alpha, continuity) {
            (Some(alpha), Some(c)) => FormConstants { continuity_c: c, coercivity_alpha: alpha },
            _ => {
                let computed = FormConstants::compute(&space, &a)?;
                FormConstants {
                    continuity_c: continuity.unwrap_or(computed.continuity_c),
                    coercivity_alpha: alpha.unwrap_or(computed.coercivity_alpha),
                }
            }
        };
        if !constants.continuity_c.is_finite() || !constants.coercivity_alpha.is_finite() {
            return Err(Error::InvalidArgument("form constants must be finite".into()));
        }
        if constants.coercivity_alpha > constants.continuity_c {
            constants.coercivity_alpha = constants.continuity_c;
        }
        Ok(Self { space, a, f, constants })
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn alpha(&self) -> f64 {
        self.constants.coercivity_alpha
    }

    pub fn continuity(&self) -> f64 {
        self.constants.continuity_c
    }

    /// `‖f‖′`.
    pub fn rhs_dual_norm(&self) -> f64 {
        dual_norm(&self.space, &self.f).expect("dimensions checked at construction")
    }

    /// `max_i |a(u, e_i) − f(e_i)| = ‖Mᵀu − f‖∞`.
    pub fn residual(&self, u: &Vector) -> Result<f64> {
        self.space.check_dim(u)?;
        let r = self.a.matrix().tr_mul(u.coeffs()) - self.f.covector();
        Ok(r.amax())
    }

    /// The same problem posed on `sub`, in subspace coordinates:
    /// Gram `BᵀGB`, form `BᵀMB`, load `Bᵀf`.
    pub fn restrict(&self, sub: &Subspace<'_>) -> Result<VariationalProblem> {
        check_len(self.dim(), sub.ambient().dim())?;
        let b = sub.basis();
        let space = HilbertSpace::new(sub.reduced_gram().clone())?;
        let a = BilinearForm::new(b.transpose() * self.a.matrix() * b);
        let f = LinearForm::new(b.tr_mul(self.f.covector()));
        VariationalProblem::new(space, a, f)
    }
}

/// Problem file layout: `{"gram": [[…]], "a": [[…]], "f": […], "alpha"?, "C"?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub gram: Vec<Vec<f64>>,
    pub a: Vec<Vec<f64>>,
    pub f: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, rename = "C", skip_serializing_if = "Option::is_none")]
    pub continuity: Option<f64>,
}

impl ProblemSpec {
    pub fn into_problem(self) -> Result<VariationalProblem> {
        let space = HilbertSpace::from_rows(&self.gram)?;
        let a = BilinearForm::try_new(matrix_from_rows(&self.a)?)?;
        if self.f.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("f has non-finite entries".into()));
        }
        let f = LinearForm::from_vec(self.f);
        VariationalProblem::with_constants(space, a, f, self.alpha, self.continuity)
    }

    pub fn from_problem(problem: &VariationalProblem) -> Self {
        Self {
            gram: matrix_to_rows(problem.space.gram()),
            a: matrix_to_rows(problem.a.matrix()),
            f: problem.f.covector().iter().copied().collect(),
            alpha: Some(problem.alpha()),
            continuity: Some(problem.continuity()),
        }
    }
}

/// Admissible step sizes for the contraction iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoPolicy {
    /// Open interval `(0, 2α/C²)`.
    pub interval: (f64, f64),
    /// `α/C²`, minimizer of `1 − 2ρα + ρ²C²`.
    pub rho_star: f64,
    /// `√(1 − α²/C²)`, the contraction factor at `rho_star`.
    pub k_star: f64,
}

fn check_constants(alpha: f64, continuity: f64) -> Result<()> {
    if !(alpha > 0.0) {
        return Err(Error::NotCoercive { alpha });
    }
    if alpha > continuity * (1.0 + CONSTANT_SLACK) {
        return Err(Error::InconsistentConstants { alpha, continuity });
    }
    Ok(())
}

pub fn rho_policy(alpha: f64, continuity: f64) -> Result<RhoPolicy> {
    check_constants(alpha, continuity)?;
    let c2 = continuity * continuity;
    let ratio = (alpha / continuity).min(1.0);
    Ok(RhoPolicy {
        interval: (0.0, 2.0 * alpha / c2),
        rho_star: alpha / c2,
        k_star: ((1.0 - ratio) * (1.0 + ratio)).max(0.0).sqrt(),
    })
}

/// `√(1 − 2ρα + ρ²C²)` for any `ρ`, clamped below at 0.
pub fn contraction_factor_unchecked(rho: f64, alpha: f64, continuity: f64) -> f64 {
    (1.0 - 2.0 * rho * alpha + rho * rho * continuity * continuity).max(0.0).sqrt()
}

/// Contraction factor of `g` for an admissible `ρ`.
pub fn contraction_factor(rho: f64, alpha: f64, continuity: f64) -> Result<f64> {
    check_constants(alpha, continuity)?;
    let upper = 2.0 * alpha / (continuity * continuity);
    if !(rho > 0.0 && rho < upper) {
        return Err(Error::RhoOutOfRange { rho, upper });
    }
    Ok(contraction_factor_unchecked(rho, alpha, continuity))
}

/// `g(c) = c − ρ G⁻¹ Mᵀ c + ρ G⁻¹ f` as a contraction on `problem.space`.
pub fn iteration_map(problem: &VariationalProblem, rho: f64) -> Result<ContractionMap<'_>> {
    let k = contraction_factor(rho, problem.alpha(), problem.continuity())?;
    let space = &problem.space;
    let m = problem.a.matrix();
    let tau_f = space.solve_gram(problem.f.covector());
    ContractionMap::new(space, k, move |v: &Vector| {
        let tau_av = space.solve_gram(&m.tr_mul(v.coeffs()));
        Vector::new(v.coeffs() - (tau_av - &tau_f) * rho)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub rho: Option<f64>,
    /// Absolute tolerance on the ambient-norm error bound.
    pub tol: f64,
    pub max_iter: Option<usize>,
    pub x0: Option<Vector>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { rho: None, tol: 1e-10, max_iter: None, x0: None }
    }
}

impl SolveOptions {
    pub fn tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub solution: Vector,
    pub rho: f64,
    pub contraction_k: f64,
    pub iterations: usize,
    /// `‖u‖`.
    pub estimate_lhs: f64,
    /// `‖f‖′ / α`.
    pub estimate_rhs: f64,
    /// `max_i |a(u, e_i) − f(e_i)|`.
    pub residual: f64,
    /// `‖g(u) − u‖`.
    pub fixed_point_residual: f64,
    pub alpha: f64,
    #[serde(rename = "C")]
    pub continuity: f64,
}

impl SolveReport {
    pub fn estimate_holds(&self, rel: f64) -> bool {
        self.estimate_lhs <= self.estimate_rhs * (1.0 + rel)
    }
}

/// Solves the problem by contraction iteration. `ρ` defaults to `α/C²`.
pub fn solve(problem: &VariationalProblem, opts: &SolveOptions) -> Result<SolveReport> {
    let alpha = problem.alpha();
    let continuity = problem.continuity();
    let policy = rho_policy(alpha, continuity)?;
    let rho = opts.rho.unwrap_or(policy.rho_star);
    let map = iteration_map(problem, rho)?;
    let x0 = opts.x0.clone().unwrap_or_else(|| Vector::zeros(problem.dim()));
    let mut it = IterateOptions::new(opts.tol);
    it.max_iter = opts.max_iter;
    let fp = fixed_point::iterate(&map, &x0, it)?;
    let solution = fp.fixed_point;
    Ok(SolveReport {
        estimate_lhs: problem.space.norm(&solution)?,
        estimate_rhs: problem.rhs_dual_norm() / alpha,
        residual: problem.residual(&solution)?,
        fixed_point_residual: fp.residual,
        solution,
        rho,
        contraction_k: map.k(),
        iterations: fp.iterations,
        alpha,
        continuity,
    })
}

/// Oracle: testing the problem against each basis vector gives `Mᵀ c = f`.
pub fn solve_direct(problem: &VariationalProblem) -> Result<Vector> {
    let mt = problem.a.matrix().transpose();
    Ok(Vector::new(lu_solve(&mt, problem.f.covector())?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinOptions {
    /// Random subspace members tried in the Céa audit, in addition to `P_F(u)`.
    pub cea_candidates: usize,
    pub seed: u64,
    /// Subspace solver tolerance relative to the a priori bound `‖f_h‖′/α_h`.
    pub rel_tol: f64,
}

impl Default for GalerkinOptions {
    fn default() -> Self {
        Self { cea_candidates: 16, seed: 0, rel_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CeaCheck {
    pub v_h: Vector,
    /// `‖u − u_h‖`.
    pub lhs: f64,
    /// `(C/α) ‖u − v_h‖`.
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GalerkinReport {
    /// Galerkin solution in ambient coordinates.
    pub u_h: Vector,
    /// Subspace coordinates of `u_h`.
    pub coords: Vector,
    /// Ambient solution from the direct oracle.
    pub u: Vector,
    /// Columns of the subspace basis, one row per basis vector.
    pub subspace: Vec<Vec<f64>>,
    pub iterations: usize,
    /// `max_b |a(u − u_h, b)| / ((‖u − u_h‖ + ‖u‖)·‖b‖)` over the basis.
    pub orthogonality_residual: f64,
    pub cea_checks: Vec<CeaCheck>,
    pub cea_factor: f64,
    /// Absolute accuracy of `u_h`, the additive slack of [`Self::cea_holds`].
    pub solver_tol: f64,
}

impl GalerkinReport {
    /// Every Céa check satisfies `lhs ≤ rhs·(1 + rel) + solver_tol`.
    pub fn cea_holds(&self, rel: f64) -> bool {
        self.cea_checks.iter().all(|c| c.lhs <= c.rhs * (1.0 + rel) + self.solver_tol)
    }

    /// Largest `lhs / rhs` over the checks with nonzero `rhs`.
    pub fn worst_cea_ratio(&self) -> f64 {
        self.cea_checks
            .iter()
            .filter(|c| c.rhs > 0.0)
            .map(|c| c.lhs / c.rhs)
            .fold(0.0, f64::max)
    }
}

/// Galerkin approximation on `sub`: solves the restricted problem with the
/// contraction solver, lifts it to ambient coordinates, and audits
/// orthogonality and the Céa bound against the direct ambient solution.
pub fn galerkin_solve(
    problem: &VariationalProblem,
    sub: &Subspace<'_>,
    opts: &GalerkinOptions,
) -> Result<GalerkinReport> {
    check_constants(problem.alpha(), problem.continuity())?;
    let reduced = problem.restrict(sub)?;
    let scale = reduced.rhs_dual_norm() / reduced.alpha();
    let solver_tol = (opts.rel_tol * scale).max(f64::MIN_POSITIVE);
    let sub_report = solve(&reduced, &SolveOptions::tol(solver_tol))?;
    let coords = sub_report.solution;
    let u_h = sub.lift(coords.coeffs());
    let u = solve_direct(problem)?;

    let space = &problem.space;
    let err = &u - &u_h;
    let err_norm = space.norm(&err)?;
    let u_norm = space.norm(&u)?;
    let mut orthogonality_residual = 0.0_f64;
    for j in 0..sub.dim() {
        let b = sub.basis_vector(j);
        let num = problem.a.apply(&err, &b)?.abs();
        let den = (err_norm + u_norm) * space.norm(&b)?;
        if den > 0.0 {
            orthogonality_residual = orthogonality_residual.max(num / den);
        } else if num > 0.0 {
            orthogonality_residual = f64::INFINITY;
        }
    }

    let cea_factor = problem.constants.cea_factor();
    let mut rng = random::rng(opts.seed);
    let mut candidates = vec![project(sub, &u)?];
    candidates.extend((0..opts.cea_candidates).map(|_| sub.random_member(&mut rng)));
    let cea_checks = candidates
        .into_iter()
        .map(|v_h| {
            let rhs = cea_factor * space.distance(&u, &v_h)?;
            Ok(CeaCheck { v_h, lhs: err_norm, rhs })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(GalerkinReport {
        u_h,
        coords,
        u,
        subspace: (0..sub.dim()).map(|j| sub.basis().column(j).iter().copied().collect()).collect(),
        iterations: sub_report.iterations,
        orthogonality_residual,
        cea_checks,
        cea_factor,
        solver_tol,
    })
}

/// `ρ (f − A(u))` pulled back by `τ`: equals `g(u) − u`.
pub fn fixed_point_defect(problem: &VariationalProblem, rho: f64, u: &Vector) -> Result<Vector> {
    problem.space.check_dim(u)?;
    let r: DVector<f64> = problem.f.covector() - problem.a.matrix().tr_mul(u.coeffs());
    Ok(Vector::new(problem.space.solve_gram(&r) * rho))
}
