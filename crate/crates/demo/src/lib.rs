//! Browser bindings for three interactive views: the contraction factor as a
//! function of the step size, orthogonal projection in a skewed 2D geometry,
//! and the 1D finite element convergence study.
//!
//! Every export returns a JSON string. The `*_json` functions hold the logic
//! and are plain Rust, so they run under `cargo test` on the host.

use laxmilgram::fem1d::{self, Mesh1D};
use laxmilgram::laxmilgram::{contraction_factor_unchecked, rho_policy};
use laxmilgram::projection::{characterization_residual, decompose, Subspace};
use laxmilgram::space::{HilbertSpace, Vector};
use laxmilgram::{json, Error, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct ContractionCurve {
    alpha: f64,
    #[serde(rename = "C")]
    continuity: f64,
    rho_max: f64,
    rho_star: f64,
    k_star: f64,
    rho: Vec<f64>,
    k: Vec<f64>,
}

/// `k(ρ) = √(1 − 2ρα + ρ²C²)` sampled on `[0, 2α/C²]`.
pub fn contraction_curve_json(alpha: f64, continuity: f64, samples: usize) -> Result<String> {
    let policy = rho_policy(alpha, continuity)?;
    let samples = samples.clamp(2, 10_000);
    let rho_max = policy.interval.1;
    let rho: Vec<f64> = (0..samples).map(|i| rho_max * i as f64 / (samples - 1) as f64).collect();
    let k = rho.iter().map(|&r| contraction_factor_unchecked(r, alpha, continuity)).collect();
    let curve = ContractionCurve {
        alpha,
        continuity,
        rho_max,
        rho_star: policy.rho_star,
        k_star: policy.k_star,
        rho,
        k,
    };
    encode(&curve)
}

#[derive(Serialize)]
struct Projection2D {
    direction: Vector,
    projection: Vector,
    complement: Vector,
    distance: f64,
    characterization_residual: f64,
    /// Points on the unit sphere `{x : ⟨x, x⟩ = 1}`, an ellipse in the plane.
    unit_ellipse: Vec<[f64; 2]>,
}

/// Projects `u` onto the line at angle `theta` under the Gram matrix
/// `[[g11, g12], [g12, g22]]`.
pub fn projection_2d_json(g11: f64, g12: f64, g22: f64, theta: f64, ux: f64, uy: f64) -> Result<String> {
    let space = HilbertSpace::from_rows(&[vec![g11, g12], vec![g12, g22]])?;
    let direction = Vector::from_vec(vec![theta.cos(), theta.sin()]);
    let sub = Subspace::line(&space, &direction)?;
    let u = Vector::from_vec(vec![ux, uy]);
    let (projection, complement) = decompose(&sub, &u)?;
    let unit_ellipse = (0..=96)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / 96.0;
            let d = Vector::from_vec(vec![t.cos(), t.sin()]);
            let r = space.norm(&d).map(|n| 1.0 / n).unwrap_or(0.0);
            [r * t.cos(), r * t.sin()]
        })
        .collect();
    let out = Projection2D {
        distance: space.norm(&complement)?,
        characterization_residual: characterization_residual(&sub, &u, &projection)?,
        direction,
        projection,
        complement,
        unit_ellipse,
    };
    encode(&out)
}

#[derive(Serialize)]
struct PoissonDemo {
    table: fem1d::ConvergenceTable,
    /// Finest mesh nodes and discrete solution values, boundary included.
    nodes: Vec<f64>,
    discrete: Vec<f64>,
    /// Exact solution sampled on a fine grid.
    exact_x: Vec<f64>,
    exact_u: Vec<f64>,
}

pub fn poisson_json(case: &str, beta: f64, c: f64, levels: &[usize]) -> Result<String> {
    if levels.len() > 12 || levels.iter().any(|&n| n > 4096) {
        return Err(Error::InvalidArgument("at most 12 levels of at most 4096 cells".into()));
    }
    let table = fem1d::convergence_study(case, levels, beta, c)?;
    let finest = *levels.iter().max().expect("convergence_study rejects empty levels");
    let mesh = Mesh1D::uniform(finest)?;
    let problem = fem1d::manufactured_with(case, beta, c)?;
    let interior = fem1d::solve_on_mesh(&problem.pde, &mesh, fem1d::STUDY_TOL)?;
    let mut discrete = vec![0.0];
    discrete.extend_from_slice(interior.as_slice());
    discrete.push(0.0);
    let exact_x: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
    let exact_u = exact_x.iter().map(|&x| problem.exact.value(x)).collect();
    let out = PoissonDemo { table, nodes: mesh.nodes().to_vec(), discrete, exact_x, exact_u };
    encode(&out)
}

fn encode<T: Serialize>(value: &T) -> Result<String> {
    json::to_string(value).map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = contractionCurve)]
pub fn contraction_curve(alpha: f64, continuity: f64, samples: usize) -> std::result::Result<String, JsError> {
    js(contraction_curve_json(alpha, continuity, samples))
}

#[wasm_bindgen(js_name = projection2d)]
pub fn projection_2d(g11: f64, g12: f64, g22: f64, theta: f64, ux: f64, uy: f64) -> std::result::Result<String, JsError> {
    js(projection_2d_json(g11, g12, g22, theta, ux, uy))
}

#[wasm_bindgen(js_name = poissonStudy)]
pub fn poisson_study(case: &str, beta: f64, c: f64, levels: Vec<u32>) -> std::result::Result<String, JsError> {
    let levels: Vec<usize> = levels.into_iter().map(|n| n as usize).collect();
    js(poisson_json(case, beta, c, &levels))
}
