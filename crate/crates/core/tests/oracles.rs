//! Worked examples checked against independent oracles: brute-force
//! sweeps, hand-solved systems, cross-algorithm agreement.

use laxmilgram::fem1d::{self, Mesh1D, Pde1D};
use laxmilgram::fixed_point::{self, ContractionMap, IterateOptions};
use laxmilgram::laxmilgram::{
    contraction_factor, fixed_point_defect, galerkin_solve, iteration_map, rho_policy, solve, solve_direct,
    GalerkinOptions, SolveOptions, VariationalProblem,
};
use laxmilgram::operators::{
    coercivity_constant, coercivity_witness, continuity_constant, dual_norm, representation, riesz,
    riesz_constructive, riesz_isometry_gap, BilinearForm, LinearForm,
};
use laxmilgram::projection::{characterization_residual, project, project_minseq, Subspace};
use laxmilgram::random;
use laxmilgram::space::{scale_of, HilbertSpace, Vector};
use nalgebra::DMatrix;
use rand::Rng;

fn random_problem(seed: u64, n: usize) -> VariationalProblem {
    let mut rng = random::rng(seed);
    let s = random::hilbert_space(&mut rng, n);
    let a = random::coercive_form(&mut rng, &s, 1.0);
    let f = random::linear_form(&mut rng, n);
    VariationalProblem::new(s, a, f).unwrap()
}

/// For a sequence `x_0, x_1, …` and each `ε` in a grid, there is an `N` with
/// `d(x_p, x_{p+j}) ≤ ε` for every tested `p ≥ N`, `j ≤ 20`.
fn assert_cauchy(space: &HilbertSpace, xs: &[Vector], grid: &[f64]) {
    for &eps in grid {
        let ok_from = |n: usize| {
            (n..xs.len()).all(|p| (1..=20).filter(|j| p + j < xs.len()).all(|j| space.distance(&xs[p], &xs[p + j]).unwrap() <= eps))
        };
        assert!((0..xs.len()).any(ok_from), "no N for eps={eps}");
    }
}

#[test]
fn affine_contraction_iterates_are_cauchy() {
    let s = HilbertSpace::euclidean(2);
    let shift = Vector::from_vec(vec![0.5, 0.0]);
    let m = ContractionMap::new(&s, 0.5, move |x| x.scale(0.5).axpy(1.0, &shift)).unwrap();
    let r = fixed_point::iterate(&m, &Vector::zeros(2), IterateOptions::new(1e-12).with_history()).unwrap();
    assert_cauchy(&s, &r.iterates, &[1e-1, 1e-3, 1e-6, 1e-9, 1e-11]);
}

#[test]
fn fixed_point_uniqueness_from_different_starts() {
    let p = random_problem(11, 8);
    let rho = rho_policy(p.alpha(), p.continuity()).unwrap().rho_star;
    let g = iteration_map(&p, rho).unwrap();
    let tol = 1e-11;
    let a = fixed_point::iterate(&g, &Vector::zeros(8), IterateOptions::new(tol)).unwrap();
    let b = fixed_point::iterate(&g, &Vector::from_vec(vec![5.0; 8]), IterateOptions::new(tol)).unwrap();
    assert!(p.space.distance(&a.fixed_point, &b.fixed_point).unwrap() <= 2.0 * tol);
    assert!(a.residual <= tol && b.residual <= tol);
}

#[test]
fn step_norms_nonincreasing_for_contractions() {
    let p = random_problem(5, 10);
    let rho = rho_policy(p.alpha(), p.continuity()).unwrap().rho_star;
    let g = iteration_map(&p, rho).unwrap();
    let r = fixed_point::iterate(&g, &Vector::zeros(10), IterateOptions::new(1e-12)).unwrap();
    // ‖x_{n+1} − x_{n+2}‖ ≤ k ‖x_n − x_{n+1}‖; compare only while steps are above rounding
    for w in r.step_norms.windows(2).filter(|w| w[0] > 1e-13) {
        assert!(w[1] <= w[0] * (1.0 + 1e-10), "{} > {}", w[1], w[0]);
    }
}

#[test]
fn projection_minseq_matches_normal_equations_on_fifty_seeds() {
    for seed in 0..50 {
        let mut rng = random::rng(1000 + seed);
        let s = random::hilbert_space(&mut rng, 6);
        let sub = Subspace::new(&s, random::basis(&mut rng, 6, 3)).unwrap();
        let u = random::normal_vector(&mut rng, 6);
        let direct = project(&sub, &u).unwrap();
        let seq = project_minseq(&sub, &u, 1e-8, 5_000_000).unwrap();
        assert!(s.distance(&seq.limit, &direct).unwrap() <= 1e-6, "seed {seed}");
        let scale = scale_of(&[seq.distances[0]]);
        assert!(seq.distances.windows(2).all(|w| w[1] <= w[0] + 1e-13 * scale), "seed {seed}");
        let min = seq.distances.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(seq.delta - min <= 1e-8);
        assert_cauchy(&s, &seq.iterates, &[1e-2, 1e-4, 1e-6]);
    }
}

#[test]
fn projection_characterization_and_uniqueness() {
    let mut rng = random::rng(77);
    let s = random::hilbert_space(&mut rng, 7);
    let sub = Subspace::new(&s, random::basis(&mut rng, 7, 3)).unwrap();
    let u = random::normal_vector(&mut rng, 7);
    let v = project(&sub, &u).unwrap();
    assert!(characterization_residual(&sub, &u, &v).unwrap() <= 1e-10);
    // a second member satisfying the characterization, via the minimizing sequence
    let v2 = project_minseq(&sub, &u, 1e-13, 5_000_000).unwrap().limit;
    assert!(characterization_residual(&sub, &u, &v2).unwrap() <= 1e-10);
    assert!(s.distance(&v, &v2).unwrap() <= 1e-10 * scale_of(&[s.norm(&u).unwrap()]));
}

#[test]
fn sum_with_line_equals_sum_with_orthogonalized_line() {
    let mut rng = random::rng(3);
    for _ in 0..20 {
        let s = random::hilbert_space(&mut rng, 6);
        let f = Subspace::new(&s, random::basis(&mut rng, 6, 2)).unwrap();
        let u = random::normal_vector(&mut rng, 6);
        let u_perp = &u - &project(&f, &u).unwrap();
        let left = f.extended(&u).unwrap();
        let right = f.extended(&u_perp).unwrap();
        for _ in 0..10 {
            let x = left.random_member(&mut rng);
            let y = right.random_member(&mut rng);
            let sx = scale_of(&[s.norm(&x).unwrap()]);
            let sy = scale_of(&[s.norm(&y).unwrap()]);
            assert!(s.distance(&project(&right, &x).unwrap(), &x).unwrap() <= 1e-10 * sx);
            assert!(s.distance(&project(&left, &y).unwrap(), &y).unwrap() <= 1e-10 * sy);
        }
    }
}

#[test]
fn riesz_isometry_on_random_twenty_dim_spaces() {
    for seed in 0..100 {
        let mut rng = random::rng(seed);
        let s = random::hilbert_space(&mut rng, 20);
        let f = random::linear_form(&mut rng, 20);
        let dn = dual_norm(&s, &f).unwrap();
        assert!(riesz_isometry_gap(&s, &f).unwrap() <= 1e-11 * dn, "seed {seed}");
    }
}

#[test]
fn riesz_constructive_agrees_with_direct() {
    for seed in 0..50 {
        let mut rng = random::rng(500 + seed);
        let n = rng.random_range(1..=10);
        let s = random::hilbert_space(&mut rng, n);
        let f = random::linear_form(&mut rng, n);
        let d = s.distance(&riesz(&s, &f).unwrap(), &riesz_constructive(&s, &f).unwrap()).unwrap();
        assert!(d <= 1e-10 * f.covector().norm(), "seed {seed}: {d}");
    }
}

#[test]
fn riesz_of_zero_norm_vector_means_zero_form() {
    let mut rng = random::rng(8);
    let s = random::hilbert_space(&mut rng, 5);
    let f = LinearForm::zeros(5);
    assert_eq!(s.norm(&riesz(&s, &f).unwrap()).unwrap(), 0.0);
    assert!(dual_norm(&s, &f).unwrap() <= 1e-11);
}

#[test]
fn continuity_constant_audit_on_random_matrices() {
    let mut rng = random::rng(21);
    let s = random::hilbert_space(&mut rng, 6);
    let m = BilinearForm::new(random::normal_matrix(&mut rng, 6, 6));
    let c = continuity_constant(&s, &m).unwrap();
    for _ in 0..100 {
        let u = random::normal_vector(&mut rng, 6);
        let v = random::normal_vector(&mut rng, 6);
        let bound = c * s.norm(&u).unwrap() * s.norm(&v).unwrap() * (1.0 + 1e-12);
        assert!(m.apply(&u, &v).unwrap().abs() <= bound);
        let au = representation(&s, &m, &u).unwrap();
        assert!(dual_norm(&s, &au).unwrap() <= c * s.norm(&u).unwrap() * (1.0 + 1e-12));
    }
}

#[test]
fn coercivity_constant_is_attained() {
    let mut rng = random::rng(22);
    let s = random::hilbert_space(&mut rng, 6);
    let m = random::coercive_form(&mut rng, &s, 1.0);
    let alpha = coercivity_constant(&s, &m).unwrap();
    for _ in 0..100 {
        let u = random::normal_vector(&mut rng, 6);
        let nu = s.norm(&u).unwrap();
        assert!(m.apply(&u, &u).unwrap() >= alpha * nu * nu * (1.0 - 1e-12));
    }
    let w = coercivity_witness(&s, &m).unwrap();
    let nw = s.norm(&w).unwrap();
    assert!(m.apply(&w, &w).unwrap() <= (alpha + 1e-6) * nw * nw);
}

#[test]
fn iteration_map_lipschitz_below_formula() {
    let p = random_problem(31, 6);
    let policy = rho_policy(p.alpha(), p.continuity()).unwrap();
    for frac in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let rho = policy.interval.1 * frac;
        let k = contraction_factor(rho, p.alpha(), p.continuity()).unwrap();
        let g = iteration_map(&p, rho).unwrap();
        let est = fixed_point::estimate_lipschitz(&g, 500, 4).unwrap();
        assert!(est <= k + 1e-10, "rho={rho}: {est} > {k}");
    }
}

#[test]
fn fixed_point_defect_matches_residual() {
    // ‖g(u) − u‖ = ρ ‖f − A(u)‖′, so the fixed-point gap and the residual vanish together
    let p = random_problem(12, 7);
    let rho = rho_policy(p.alpha(), p.continuity()).unwrap().rho_star;
    let r = solve(&p, &SolveOptions::tol(1e-12)).unwrap();
    let defect = fixed_point_defect(&p, rho, &r.solution).unwrap();
    assert!((p.space.norm(&defect).unwrap() - r.fixed_point_residual).abs() <= 1e-14);
    let residual_form = LinearForm::new(p.f.covector() - p.a.matrix().tr_mul(r.solution.coeffs()));
    let gap = rho * dual_norm(&p.space, &residual_form).unwrap();
    assert!((gap - r.fixed_point_residual).abs() <= 1e-14);
    assert!(r.fixed_point_residual <= 1e-12);
    assert!(r.residual <= 1e-10);
}

#[test]
fn solve_large_random_problems() {
    for seed in 0..20 {
        let p = random_problem(seed, 50);
        let fnorm = p.rhs_dual_norm();
        let r = solve(&p, &SolveOptions::tol(1e-11 * fnorm)).unwrap();
        assert!(r.residual <= 1e-9 * fnorm, "seed {seed}: residual {}", r.residual);
        assert!(r.estimate_lhs <= fnorm / p.alpha() * (1.0 + 1e-10));
        let d = solve_direct(&p).unwrap();
        assert!(p.space.distance(&d, &r.solution).unwrap() <= 10.0 * 1e-11 * fnorm);
    }
}

#[test]
fn solutions_agree_across_starts_and_steps() {
    let p = random_problem(40, 9);
    let policy = rho_policy(p.alpha(), p.continuity()).unwrap();
    let tol = 1e-11;
    let a = solve(&p, &SolveOptions::tol(tol)).unwrap();
    let b = solve(
        &p,
        &SolveOptions { rho: Some(policy.interval.1 * 0.3), x0: Some(Vector::from_vec(vec![-2.0; 9])), ..SolveOptions::tol(tol) },
    )
    .unwrap();
    assert!(p.space.distance(&a.solution, &b.solution).unwrap() <= 20.0 * tol);
}

#[test]
fn galerkin_symmetric_form_is_energy_projection() {
    let mut rng = random::rng(60);
    let n = 7;
    let s = random::hilbert_space(&mut rng, n);
    let sym = random::spd_matrix(&mut rng, n, 1.0);
    let p = VariationalProblem::new(s.clone(), BilinearForm::new(sym.clone()), random::linear_form(&mut rng, n)).unwrap();
    let sub = Subspace::new(&p.space, random::basis(&mut rng, n, 3)).unwrap();
    let r = galerkin_solve(&p, &sub, &GalerkinOptions::default()).unwrap();
    let energy = |x: &Vector| x.coeffs().dot(&(&sym * x.coeffs())).sqrt();
    let e_h = energy(&(&r.u - &r.u_h));
    for _ in 0..2000 {
        let v = sub.random_member(&mut rng);
        assert!(e_h <= energy(&(&r.u - &v)) * (1.0 + 1e-12));
    }
    // small perturbations of u_h inside the subspace, the hardest competitors
    for _ in 0..200 {
        let v = r.u_h.axpy(1e-3, &sub.random_member(&mut rng));
        assert!(e_h <= energy(&(&r.u - &v)) * (1.0 + 1e-12));
    }
    assert!(r.orthogonality_residual <= 1e-10);
    assert!(r.cea_checks.iter().all(|c| c.lhs <= c.rhs * (1.0 + 1e-10)));
}

#[test]
fn fem_galerkin_orthogonality_against_finer_nested_mesh() {
    let case = fem1d::manufactured_with("poisson-sine", 0.5, 1.0).unwrap();
    for n in [4, 8, 16] {
        let coarse = Mesh1D::uniform(n).unwrap();
        let fine = Mesh1D::uniform(4 * n).unwrap();
        let p = fem1d::assemble(&case.pde, &fine).unwrap();
        let sub = Subspace::new(&p.space, fem1d::nested_basis(&coarse, &fine).unwrap()).unwrap();
        let r = galerkin_solve(&p, &sub, &GalerkinOptions::default()).unwrap();
        let scale = scale_of(&[p.space.norm(&r.u).unwrap()]);
        for j in 0..sub.dim() {
            let hat = sub.basis_vector(j);
            let err = &r.u - &r.u_h;
            assert!(p.a.apply(&err, &hat).unwrap().abs() <= 1e-9 * scale, "n={n} j={j}");
        }
        assert!(r.cea_holds(1e-10));
    }
}

#[test]
fn fem_restricted_operator_equals_coarse_assembly() {
    // exact element integrals nest: Bᵀ M_fine B = M_coarse
    let pde = Pde1D::new(0.7, 2.0, |x| x).unwrap();
    let coarse = Mesh1D::uniform(5).unwrap();
    let fine = Mesh1D::uniform(20).unwrap();
    let b = fem1d::nested_basis(&coarse, &fine).unwrap();
    let pf = fem1d::assemble(&pde, &fine).unwrap();
    let pc = fem1d::assemble(&pde, &coarse).unwrap();
    let restricted = b.transpose() * pf.a.matrix() * &b;
    assert!((restricted - pc.a.matrix()).amax() <= 1e-12);
}

#[test]
fn fem_load_quadrature_error_scales_like_h_to_the_fourth() {
    // each entry is off by O(h⁵); summed over the O(1/h) entries this is O(h⁴)
    let pde = Pde1D::poisson(|x: f64| (3.0 * x).exp() * (5.0 * x).sin());
    let diffs: Vec<f64> = [8, 16, 32, 64]
        .iter()
        .map(|&n| {
            let mesh = Mesh1D::uniform(n).unwrap();
            let f2 = fem1d::load(&pde, &mesh, 2).unwrap();
            let f4 = fem1d::load(&pde, &mesh, 4).unwrap();
            (f2 - f4).lp_norm(1)
        })
        .collect();
    for w in diffs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio} from {diffs:?}");
    }
}

#[test]
fn fem_parabola_is_nodally_exact() {
    let t = fem1d::convergence_study("poisson-parabola", &[3, 5, 8, 16, 33], 0.0, 0.0).unwrap();
    for r in &t.rows {
        assert!(r.nodal_max_error <= 1e-12, "n={}: {}", r.n_cells, r.nodal_max_error);
    }
    // non-uniform mesh too: the discrete Green's function argument is mesh independent
    let case = fem1d::manufactured("poisson-parabola").unwrap();
    let mesh = Mesh1D::new(vec![0.0, 0.05, 0.3, 0.31, 0.7, 0.95, 1.0]).unwrap();
    let u = fem1d::solve_on_mesh(&case.pde, &mesh, 1e-13).unwrap();
    for (c, x) in u.as_slice().iter().zip(&mesh.nodes()[1..]) {
        assert!((c - case.exact.value(*x)).abs() <= 1e-12);
    }
}

#[test]
fn fem_sine_rate_and_one_step_solves() {
    let t = fem1d::convergence_study("poisson-sine", &[8, 16, 32, 64], 0.0, 0.0).unwrap();
    assert_eq!(t.rows.len(), 4);
    assert!(t.rows[0].rate.is_none());
    for r in &t.rows {
        assert_eq!(r.iterations, 1);
        assert_eq!(r.contraction_k, 0.0);
        if let Some(rate) = r.rate {
            assert!((0.9..=1.1).contains(&rate), "rate {rate}");
        }
    }
}

#[test]
fn fem_advection_reaction_cea_audit() {
    let t = fem1d::convergence_study("poisson-sine", &[8, 16, 32, 64], 0.5, 1.0).unwrap();
    for r in &t.rows {
        assert!(r.alpha > 0.0 && r.alpha <= r.continuity);
        assert!(r.cea_holds(1e-10), "n={}: {} vs {}", r.n_cells, r.h1_error, r.interpolation_error);
        assert!(r.iterations > 1);
    }
}

#[test]
fn fem_error_matches_seminorm_for_zero_solution() {
    let mesh = Mesh1D::uniform(10).unwrap();
    for case in fem1d::ManufacturedCase::ALL {
        let exact = fem1d::ExactSolution { case };
        let e = fem1d::h1_seminorm_error(&mesh, &exact, &vec![0.0; mesh.n_interior()]);
        assert!((e - exact.h1_seminorm_sq().sqrt()).abs() < 1e-4);
    }
}

#[test]
fn whitened_identity_for_gram_form() {
    let mut rng = random::rng(2);
    let s = random::hilbert_space(&mut rng, 5);
    let w = laxmilgram::operators::whitened(&s, &BilinearForm::new(s.gram().clone())).unwrap();
    assert!((w - DMatrix::<f64>::identity(5, 5)).amax() <= 1e-13);
    assert!((continuity_constant(&s, &BilinearForm::new(s.gram().clone())).unwrap() - 1.0).abs() <= 1e-12);
    assert!((coercivity_constant(&s, &BilinearForm::new(s.gram().clone())).unwrap() - 1.0).abs() <= 1e-12);
}
