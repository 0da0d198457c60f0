//! Coercive variational problems `a(u, v) = f(v)` on finite-dimensional real
//! Hilbert spaces.
//!
//! The solver follows the classical existence argument step by step: the
//! Riesz map turns the problem into a fixed-point equation, a suitable
//! step `ρ` makes that equation a contraction, and Banach iteration finds
//! the solution. Each quantitative estimate along the way (contraction
//! factor, solution bound, Galerkin orthogonality, Céa's bound) is exposed
//! so it can be checked numerically, and [`fem1d`] instantiates the whole
//! chain for P1 finite elements on the unit interval.
//!
//! Inner products are encoded by an SPD Gram matrix in a fixed basis; see
//! [`HilbertSpace`].

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fem1d;
pub mod fixed_point;
pub mod json;
pub mod laxmilgram;
pub mod linalg;
pub mod operators;
pub mod projection;
pub mod random;
pub mod space;
pub mod suite;

pub use error::{Error, Result};
pub use fixed_point::{a_priori_tail_bound, estimate_lipschitz, iterate, ContractionMap, FixedPointReport, IterateOptions};
pub use laxmilgram::{
    contraction_factor, galerkin_solve, rho_policy, solve, solve_direct, GalerkinOptions, GalerkinReport, ProblemSpec,
    RhoPolicy, SolveOptions, SolveReport, VariationalProblem,
};
pub use operators::{
    coercivity_constant, continuity_constant, dual_norm, representation, riesz, riesz_constructive, riesz_isometry_gap,
    sampled_sup_ratio, BilinearForm, FormConstants, LinearForm,
};
pub use projection::{decompose, project, project_minseq, MinSeqReport, Subspace};
pub use space::{HilbertSpace, Vector};
