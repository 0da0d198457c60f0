//! P1 finite elements on `(0, 1)` with homogeneous Dirichlet conditions.
//!
//! The weak form is `∫ u′v′ + β u′v + c uv = ∫ f v` over `H¹₀`. The space
//! carries the `H¹₀` inner product `∫ u′v′` on interior-node coefficients, so
//! the pure Poisson problem (`β = c = 0`) has `α = C = 1`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laxmilgram::{solve, SolveOptions, VariationalProblem};
use crate::operators::{BilinearForm, LinearForm};
use crate::space::{HilbertSpace, Vector};

/// Strictly increasing nodes `0 = x_0 < x_1 < … < x_n = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mesh1D {
    nodes: Vec<f64>,
}

impl Mesh1D {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::MeshInvalid(format!(
                "need at least 2 cells (one interior node), got {}",
                nodes.len().saturating_sub(1)
            )));
        }
        if nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 {
            return Err(Error::MeshInvalid("endpoints must be 0 and 1".into()));
        }
        if let Some(i) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::MeshInvalid(format!("nodes not strictly increasing at index {}", i + 1)));
        }
        Ok(Self { nodes })
    }

    pub fn uniform(n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::MeshInvalid(format!("need at least 2 cells, got {n_cells}")));
        }
        let mut nodes: Vec<f64> = (0..=n_cells).map(|i| i as f64 / n_cells as f64).collect();
        nodes[n_cells] = 1.0;
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn n_interior(&self) -> usize {
        self.nodes.len() - 2
    }

    pub fn h_max(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    fn cells(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.nodes.windows(2).enumerate().map(|(i, w)| (i, w[0], w[1]))
    }

    /// Interior unknown index of node `i`, if it is not a boundary node.
    fn dof(&self, node: usize) -> Option<usize> {
        (node > 0 && node < self.nodes.len() - 1).then(|| node - 1)
    }

    /// Value at `x` of the piecewise-linear function with interior nodal
    /// values `coeffs` and zero boundary values.
    pub fn evaluate(&self, coeffs: &[f64], x: f64) -> f64 {
        let cell = self.nodes.partition_point(|&p| p <= x).clamp(1, self.n_cells()) - 1;
        let (a, b) = (self.nodes[cell], self.nodes[cell + 1]);
        let va = self.dof(cell).map_or(0.0, |d| coeffs[d]);
        let vb = self.dof(cell + 1).map_or(0.0, |d| coeffs[d]);
        va + (vb - va) * (x - a) / (b - a)
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `−u″ + β u′ + c u = f` on `(0, 1)` with `u(0) = u(1) = 0`.
#[derive(Clone)]
pub struct Pde1D {
    pub beta: f64,
    pub reaction: f64,
    rhs: ScalarFn,
}

impl Pde1D {
    pub fn new<F>(beta: f64, reaction: f64, rhs: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !beta.is_finite() || !reaction.is_finite() || reaction < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "need finite beta and finite reaction >= 0, got beta={beta}, c={reaction}"
            )));
        }
        Ok(Self { beta, reaction, rhs: Arc::new(rhs) })
    }

    pub fn poisson<F>(rhs: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(0.0, 0.0, rhs).expect("zero coefficients are valid")
    }

    pub fn rhs(&self, x: f64) -> f64 {
        (self.rhs)(x)
    }
}

impl std::fmt::Debug for Pde1D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pde1D").field("beta", &self.beta).field("reaction", &self.reaction).finish_non_exhaustive()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_rule(points: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let rule = match points {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let x = 1.0 / 3f64.sqrt();
            (vec![-x, x], vec![1.0, 1.0])
        }
        3 => {
            let x = (0.6f64).sqrt();
            (vec![-x, 0.0, x], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let a = (3.0 / 7.0 - 2.0 / 7.0 * (1.2f64).sqrt()).sqrt();
            let b = (3.0 / 7.0 + 2.0 / 7.0 * (1.2f64).sqrt()).sqrt();
            let wa = (18.0 + 30f64.sqrt()) / 36.0;
            let wb = (18.0 - 30f64.sqrt()) / 36.0;
            (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
        }
        _ => return Err(Error::InvalidArgument(format!("no {points}-point Gauss rule"))),
    };
    Ok(rule)
}

/// `∫ g` over `[a, b]` with a Gauss rule.
fn integrate<F: Fn(f64) -> f64>(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64, g: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.0.iter().zip(&rule.1).map(|(&t, &w)| w * g(mid + half * t)).sum::<f64>() * half
}

/// Interior-node `H¹₀` Gram matrix `∫ φ_i′ φ_j′`.
pub fn stiffness(mesh: &Mesh1D) -> DMatrix<f64> {
    assemble_local(mesh, |h| [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]])
}

/// `∫ φ_i φ_j`.
pub fn mass(mesh: &Mesh1D) -> DMatrix<f64> {
    assemble_local(mesh, |h| [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]])
}

/// `M[j][k] = ∫ φ_j′ φ_k`, so that `a(u, v) = uᵀ M v` has the `u′v` term.
pub fn advection(mesh: &Mesh1D) -> DMatrix<f64> {
    assemble_local(mesh, |_| [[-0.5, -0.5], [0.5, 0.5]])
}

fn assemble_local<F: Fn(f64) -> [[f64; 2]; 2]>(mesh: &Mesh1D, local: F) -> DMatrix<f64> {
    let n = mesh.n_interior();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (cell, a, b) in mesh.cells() {
        let k = local(b - a);
        let dofs = [mesh.dof(cell), mesh.dof(cell + 1)];
        for (p, dp) in dofs.iter().enumerate() {
            for (q, dq) in dofs.iter().enumerate() {
                if let (Some(i), Some(j)) = (dp, dq) {
                    m[(*i, *j)] += k[p][q];
                }
            }
        }
    }
    m
}

/// `∫ f φ_i` with a `points`-point Gauss rule per cell.
pub fn load(pde: &Pde1D, mesh: &Mesh1D, points: usize) -> Result<DVector<f64>> {
    let rule = gauss_rule(points)?;
    let mut f = DVector::<f64>::zeros(mesh.n_interior());
    for (cell, a, b) in mesh.cells() {
        let h = b - a;
        if let Some(i) = mesh.dof(cell) {
            f[i] += integrate(&rule, a, b, |x| pde.rhs(x) * (b - x) / h);
        }
        if let Some(j) = mesh.dof(cell + 1) {
            f[j] += integrate(&rule, a, b, |x| pde.rhs(x) * (x - a) / h);
        }
    }
    Ok(f)
}

/// Discrete variational problem: `H¹₀` Gram, `M = K + β·B + c·Mass`, and a
/// 2-point Gauss load. With `β = c = 0`, `M` is the Gram matrix itself.
pub fn assemble(pde: &Pde1D, mesh: &Mesh1D) -> Result<VariationalProblem> {
    let gram = stiffness(mesh);
    let mut m = gram.clone();
    if pde.beta != 0.0 {
        m += advection(mesh) * pde.beta;
    }
    if pde.reaction != 0.0 {
        m += mass(mesh) * pde.reaction;
    }
    let f = load(pde, mesh, 2)?;
    VariationalProblem::new(HilbertSpace::new(gram)?, BilinearForm::new(m), LinearForm::new(f))
}

/// Coefficients, in the fine interior basis, of each coarse interior hat.
/// Requires every coarse node to be a fine node.
pub fn nested_basis(coarse: &Mesh1D, fine: &Mesh1D) -> Result<DMatrix<f64>> {
    for &x in coarse.nodes() {
        if fine.nodes().binary_search_by(|p| p.total_cmp(&x)).is_err() {
            return Err(Error::MeshInvalid(format!("coarse node {x} is not a fine node")));
        }
    }
    let n_coarse = coarse.n_interior();
    let mut b = DMatrix::<f64>::zeros(fine.n_interior(), n_coarse);
    for j in 0..n_coarse {
        let mut unit = vec![0.0; n_coarse];
        unit[j] = 1.0;
        for (i, &x) in fine.nodes()[1..fine.nodes().len() - 1].iter().enumerate() {
            b[(i, j)] = coarse.evaluate(&unit, x);
        }
    }
    Ok(b)
}

/// A known smooth solution with its derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSolution {
    pub case: ManufacturedCase,
}

impl ExactSolution {
    pub fn value(&self, x: f64) -> f64 {
        match self.case {
            ManufacturedCase::PoissonParabola => 0.5 * x * (1.0 - x),
            ManufacturedCase::PoissonSine => (PI * x).sin(),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self.case {
            ManufacturedCase::PoissonParabola => 0.5 - x,
            ManufacturedCase::PoissonSine => PI * (PI * x).cos(),
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match self.case {
            ManufacturedCase::PoissonParabola => -1.0,
            ManufacturedCase::PoissonSine => -PI * PI * (PI * x).sin(),
        }
    }

    /// `|u|²_{H¹} = ∫ (u′)²`.
    pub fn h1_seminorm_sq(&self) -> f64 {
        match self.case {
            ManufacturedCase::PoissonParabola => 1.0 / 12.0,
            ManufacturedCase::PoissonSine => PI * PI / 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ManufacturedCase {
    PoissonParabola,
    PoissonSine,
}

impl ManufacturedCase {
    pub const ALL: [ManufacturedCase; 2] = [ManufacturedCase::PoissonParabola, ManufacturedCase::PoissonSine];

    pub fn parse(case_id: &str) -> Result<Self> {
        match case_id {
            "poisson-parabola" => Ok(Self::PoissonParabola),
            "poisson-sine" => Ok(Self::PoissonSine),
            other => Err(Error::UnknownCase(other.to_string())),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::PoissonParabola => "poisson-parabola",
            Self::PoissonSine => "poisson-sine",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Manufactured {
    pub pde: Pde1D,
    pub exact: ExactSolution,
    /// `|u|_{H¹}`.
    pub h1_seminorm: f64,
}

/// Pure Poisson instance of a manufactured case.
pub fn manufactured(case_id: &str) -> Result<Manufactured> {
    manufactured_with(case_id, 0.0, 0.0)
}

/// Manufactured case with advection `beta` and reaction `c`; the right-hand
/// side `f = −u″ + β u′ + c u` is recomputed from the exact solution.
pub fn manufactured_with(case_id: &str, beta: f64, c: f64) -> Result<Manufactured> {
    let exact = ExactSolution { case: ManufacturedCase::parse(case_id)? };
    let pde = Pde1D::new(beta, c, move |x| {
        -exact.second_derivative(x) + beta * exact.derivative(x) + c * exact.value(x)
    })?;
    Ok(Manufactured { pde, exact, h1_seminorm: exact.h1_seminorm_sq().sqrt() })
}

/// `|u − w|_{H¹}` for piecewise-linear `w` with interior values `coeffs`,
/// by 3-point Gauss per cell.
pub fn h1_seminorm_error(mesh: &Mesh1D, exact: &ExactSolution, coeffs: &[f64]) -> f64 {
    let rule = gauss_rule(3).expect("3-point rule exists");
    let mut total = 0.0;
    for (cell, a, b) in mesh.cells() {
        let va = mesh.dof(cell).map_or(0.0, |d| coeffs[d]);
        let vb = mesh.dof(cell + 1).map_or(0.0, |d| coeffs[d]);
        let slope = (vb - va) / (b - a);
        total += integrate(&rule, a, b, |x| (exact.derivative(x) - slope).powi(2));
    }
    total.sqrt()
}

/// Nodal interpolant of the exact solution on the interior nodes.
pub fn interpolant(mesh: &Mesh1D, exact: &ExactSolution) -> Vec<f64> {
    mesh.nodes()[1..mesh.nodes().len() - 1].iter().map(|&x| exact.value(x)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n_cells: usize,
    pub h: f64,
    pub h1_error: f64,
    /// `ln(e_prev/e) / ln(h_prev/h)`; `None` on the first level.
    pub rate: Option<f64>,
    pub nodal_max_error: f64,
    /// `|u − I_h u|_{H¹}`.
    pub interpolation_error: f64,
    pub alpha: f64,
    #[serde(rename = "C")]
    pub continuity: f64,
    pub iterations: usize,
    pub contraction_k: f64,
}

impl ConvergenceRow {
    /// `|u − u_h| ≤ (C/α)·|u − I_h u|`, with relative slack `rel`.
    pub fn cea_holds(&self, rel: f64) -> bool {
        self.h1_error <= self.continuity / self.alpha * self.interpolation_error * (1.0 + rel)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub case: &'static str,
    pub beta: f64,
    pub c: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// `n_cells,h,h1_error,rate`, with the rate blank on the first row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n_cells,h,h1_error,rate\n");
        for r in &self.rows {
            let rate = r.rate.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{}", r.n_cells, r.h, r.h1_error, rate);
        }
        out
    }
}

/// Absolute tolerance used by the iterative solves of a study.
pub const STUDY_TOL: f64 = 1e-12;

/// Solves a manufactured case on uniform meshes with the contraction solver
/// and tabulates `H¹` errors and observed rates.
pub fn convergence_study(case_id: &str, levels: &[usize], beta: f64, c: f64) -> Result<ConvergenceTable> {
    if levels.is_empty() {
        return Err(Error::InvalidArgument("no levels given".into()));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("levels must be strictly increasing".into()));
    }
    let case = manufactured_with(case_id, beta, c)?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels.len());
    for &n_cells in levels {
        let mesh = Mesh1D::uniform(n_cells)?;
        let problem = assemble(&case.pde, &mesh)?;
        let report = solve(&problem, &SolveOptions::tol(STUDY_TOL))?;
        let coeffs = report.solution.as_slice();
        let h1_error = h1_seminorm_error(&mesh, &case.exact, coeffs);
        let interp = interpolant(&mesh, &case.exact);
        let nodal_max_error = coeffs.iter().zip(&interp).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let h = mesh.h_max();
        let rate = rows.last().map(|prev| (prev.h1_error / h1_error).ln() / (prev.h / h).ln());
        rows.push(ConvergenceRow {
            n_cells,
            h,
            h1_error,
            rate,
            nodal_max_error,
            interpolation_error: h1_seminorm_error(&mesh, &case.exact, &interp),
            alpha: report.alpha,
            continuity: report.continuity,
            iterations: report.iterations,
            contraction_k: report.contraction_k,
        });
    }
    Ok(ConvergenceTable { case: case.exact.case.id(), beta, c, rows })
}

/// Solution coefficients as a [`Vector`] of the assembled space.
pub fn solve_on_mesh(pde: &Pde1D, mesh: &Mesh1D, tol: f64) -> Result<Vector> {
    let problem = assemble(pde, mesh)?;
    Ok(solve(&problem, &SolveOptions::tol(tol))?.solution)
}
