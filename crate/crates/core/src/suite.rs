//! Randomized invariant suite: every identity, inequality and cross-check of
//! the crate, run on seeded random instances and tallied per check.

use rand::Rng;
use serde::Serialize;

use crate::fem1d;
use crate::fixed_point::{self, a_priori_tail_bound, ContractionMap, IterateOptions};
use crate::laxmilgram::{
    contraction_factor, galerkin_solve, iteration_map, rho_policy, solve, solve_direct, GalerkinOptions,
    SolveOptions, VariationalProblem,
};
use crate::operators::{
    coercivity_constant, continuity_constant, dual_norm, representation, riesz, riesz_constructive,
    riesz_isometry_gap,
};
use crate::projection::{decompose, project, project_minseq, Subspace};
use crate::random::{self, SeededRng};
use crate::space::{scale_of, Vector};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// Largest `lhs − rhs` seen; nonpositive when every trial passed.
    pub worst_excess: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.trials > 0
    }
}

struct Tally {
    name: &'static str,
    trials: usize,
    failures: usize,
    worst_excess: f64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self { name, trials: 0, failures: 0, worst_excess: f64::NEG_INFINITY }
    }

    /// One trial of `lhs ≤ rhs`.
    fn le(&mut self, lhs: f64, rhs: f64) {
        self.trials += 1;
        let excess = lhs - rhs;
        if !(lhs <= rhs) {
            self.failures += 1;
        }
        if excess.is_nan() {
            self.worst_excess = f64::INFINITY;
        } else {
            self.worst_excess = self.worst_excess.max(excess);
        }
    }

    fn check(&mut self, r: Result<(f64, f64)>) {
        match r {
            Ok((lhs, rhs)) => self.le(lhs, rhs),
            Err(_) => {
                self.trials += 1;
                self.failures += 1;
                self.worst_excess = f64::INFINITY;
            }
        }
    }

    fn done(self) -> CheckOutcome {
        CheckOutcome { name: self.name, trials: self.trials, failures: self.failures, worst_excess: self.worst_excess }
    }
}

/// Instance counts for one suite run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteSize {
    pub identity_trials: usize,
    pub problems: usize,
    pub max_dim: usize,
}

impl Default for SuiteSize {
    fn default() -> Self {
        Self { identity_trials: 2000, problems: 30, max_dim: 12 }
    }
}

pub fn run(seed: u64) -> Vec<CheckOutcome> {
    run_with(seed, SuiteSize::default())
}

pub fn run_with(seed: u64, size: SuiteSize) -> Vec<CheckOutcome> {
    let mut rng = random::rng(seed);
    let mut out = Vec::new();
    out.extend(space_identities(&mut rng, size));
    out.extend(fixed_point_checks(&mut rng, size));
    out.extend(projection_checks(&mut rng, size));
    out.extend(operator_checks(&mut rng, size));
    out.extend(solver_checks(&mut rng, size));
    out.extend(fem_checks());
    out
}

fn dim<R: Rng>(rng: &mut R, size: SuiteSize) -> usize {
    rng.random_range(1..=size.max_dim)
}

fn space_identities(rng: &mut SeededRng, size: SuiteSize) -> Vec<CheckOutcome> {
    let mut cs = Tally::new("cauchy-schwarz");
    let mut para = Tally::new("parallelogram");
    let mut rev = Tally::new("reverse-triangle");
    let mut tri = Tally::new("triangle");
    let mut sq = Tally::new("square-expansion");
    let mut zero = Tally::new("inner-with-zero");
    let mut hom = Tally::new("norm-homogeneity");
    for _ in 0..size.identity_trials {
        let n = dim(rng, size);
        let s = random::hilbert_space(rng, n);
        let u = random::normal_vector(rng, n);
        let v = random::normal_vector(rng, n);
        let w = random::normal_vector(rng, n);
        let (nu, nv) = (s.norm(&u).unwrap(), s.norm(&v).unwrap());
        let uv = s.inner(&u, &v).unwrap();
        cs.le(uv * uv, nu * nu * nv * nv * (1.0 + 1e-12));
        let sum = &u + &v;
        let diff = &u - &v;
        let (ns, nd) = (s.norm(&sum).unwrap(), s.norm(&diff).unwrap());
        let base = nu * nu + nv * nv;
        para.le((ns * ns + nd * nd - 2.0 * base).abs(), 1e-12 * base);
        let scale = scale_of(&[nu, nv]);
        rev.le((nu - nv).abs(), nd + 1e-12 * scale);
        let (duv, dvw, duw) =
            (s.distance(&u, &v).unwrap(), s.distance(&v, &w).unwrap(), s.distance(&u, &w).unwrap());
        tri.le(duw, duv + dvw + 1e-12 * scale_of(&[duv, dvw]));
        sq.le((ns * ns - (nu * nu + 2.0 * uv + nv * nv)).abs(), 1e-12 * scale_of(&[base + 2.0 * uv.abs()]));
        zero.le(s.inner(&Vector::zeros(n), &u).unwrap().abs(), 1e-15 * nu);
        let lambda: f64 = rng.random_range(-10.0..10.0);
        hom.le((s.norm(&u.scale(lambda)).unwrap() - lambda.abs() * nu).abs(), 1e-13 * lambda.abs() * nu);
    }
    [cs, para, rev, tri, sq, zero, hom].into_iter().map(Tally::done).collect()
}

fn fixed_point_checks(rng: &mut SeededRng, size: SuiteSize) -> Vec<CheckOutcome> {
    let mut tail = Tally::new("fixed-point-tail-bound");
    let mut resid = Tally::new("fixed-point-residual");
    let mut uniq = Tally::new("fixed-point-uniqueness");
    for _ in 0..size.problems {
        let n = dim(rng, size);
        let s = random::hilbert_space(rng, n);
        // affine map x ↦ Tx + b with ‖T‖_G = k exactly: T = k · L⁻ᵀ Q Lᵀ with Q orthogonal
        let k: f64 = rng.random_range(0.0..0.95);
        let q = random::normal_matrix(rng, n, n).qr().q();
        let l = s.cholesky().factor_matrix().clone();
        let linv_t = l.clone().try_inverse().unwrap().transpose();
        let t = &linv_t * q * l.transpose() * k;
        let b = random::normal_dvector(rng, n);
        let map = ContractionMap::new(&s, k, move |x: &Vector| Vector::new(&t * x.coeffs() + &b)).unwrap();
        let tol = 1e-12;
        let run = |x0: &Vector| fixed_point::iterate(&map, x0, IterateOptions::new(tol).with_history());
        let (Ok(r1), Ok(r2)) = (run(&random::normal_vector(rng, n)), run(&random::normal_vector(rng, n))) else {
            tail.check(Err(crate::Error::SingularSystem));
            continue;
        };
        let star = &r1.fixed_point;
        let d01 = r1.step_norms[0];
        for (p, x) in r1.iterates.iter().enumerate() {
            tail.check(a_priori_tail_bound(k, d01, p).map(|bound| (s.distance(x, star).unwrap(), bound + 1e-12)));
        }
        resid.le(r1.residual, tol);
        uniq.le(s.distance(&r1.fixed_point, &r2.fixed_point).unwrap(), 2.0 * tol);
    }
    [tail, resid, uniq].into_iter().map(Tally::done).collect()
}

fn projection_checks(rng: &mut SeededRng, size: SuiteSize) -> Vec<CheckOutcome> {
    let mut idem = Tally::new("projection-idempotent");
    let mut lin = Tally::new("projection-linear");
    let mut nonexp = Tally::new("projection-nonexpansive");
    let mut best = Tally::new("projection-best-approximation");
    let mut pyth = Tally::new("projection-pythagoras");
    let mut orth = Tally::new("projection-complement-orthogonal");
    let mut minseq = Tally::new("projection-minseq-agreement");
    for _ in 0..size.problems {
        let n = rng.random_range(2..=size.max_dim.clamp(2, 8));
        let m = rng.random_range(1..n.min(4) + 1);
        let s = random::hilbert_space(rng, n);
        let Ok(sub) = Subspace::new(&s, random::basis(rng, n, m)) else {
            continue;
        };
        let u = random::normal_vector(rng, n);
        let v = random::normal_vector(rng, n);
        let nu = s.norm(&u).unwrap();
        let pu = project(&sub, &u).unwrap();
        let ppu = project(&sub, &pu).unwrap();
        idem.le(s.distance(&ppu, &pu).unwrap(), 1e-12 * scale_of(&[nu]));
        let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let combo = project(&sub, &u.scale(a).axpy(b, &v)).unwrap();
        let split = pu.scale(a).axpy(b, &project(&sub, &v).unwrap());
        lin.le(s.distance(&combo, &split).unwrap(), 1e-11 * scale_of(&[s.norm(&split).unwrap()]));
        nonexp.le(s.norm(&pu).unwrap(), nu * (1.0 + 1e-12));
        let d = s.distance(&u, &pu).unwrap();
        for _ in 0..100 {
            let w = sub.random_member(rng);
            best.le(d, s.distance(&u, &w).unwrap() + 1e-12 * scale_of(&[nu]));
        }
        let (p, w) = decompose(&sub, &u).unwrap();
        let (np, nw) = (s.norm(&p).unwrap(), s.norm(&w).unwrap());
        pyth.le((nu * nu - np * np - nw * nw).abs(), 1e-11 * scale_of(&[nu * nu]));
        for j in 0..sub.dim() {
            let bj = sub.basis_vector(j);
            orth.le(s.inner(&w, &bj).unwrap().abs(), 1e-10 * scale_of(&[nu * s.norm(&bj).unwrap()]));
        }
        minseq.check(project_minseq(&sub, &u, 1e-8, 2_000_000).map(|r| (s.distance(&r.limit, &pu).unwrap(), 1e-6)));
    }
    [idem, lin, nonexp, best, pyth, orth, minseq].into_iter().map(Tally::done).collect()
}

fn operator_checks(rng: &mut SeededRng, size: SuiteSize) -> Vec<CheckOutcome> {
    let mut iso = Tally::new("riesz-isometry");
    let mut cons = Tally::new("riesz-constructive-agreement");
    let mut rep = Tally::new("riesz-representation");
    let mut rlin = Tally::new("riesz-linear");
    let mut abound = Tally::new("representation-bound");
    let mut cont = Tally::new("continuity-audit");
    let mut coer = Tally::new("coercivity-audit");
    let mut ac = Tally::new("alpha-le-c");
    for _ in 0..size.problems {
        let n = dim(rng, size);
        let s = random::hilbert_space(rng, n);
        let f = random::linear_form(rng, n);
        let g = random::linear_form(rng, n);
        let fnorm = dual_norm(&s, &f).unwrap();
        iso.le(riesz_isometry_gap(&s, &f).unwrap(), 1e-11 * fnorm.max(1.0));
        let direct = riesz(&s, &f).unwrap();
        let built = riesz_constructive(&s, &f).unwrap();
        cons.le(s.distance(&direct, &built).unwrap(), 1e-10 * f.covector().norm());
        let v = random::normal_vector(rng, n);
        rep.le(
            (f.apply(&v).unwrap() - s.inner(&direct, &v).unwrap()).abs(),
            1e-12 * scale_of(&[fnorm * s.norm(&v).unwrap()]),
        );
        let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let lhs = riesz(&s, &f.combine(a, &g, b).unwrap()).unwrap();
        let rhs = direct.scale(a).axpy(b, &riesz(&s, &g).unwrap());
        rlin.le(s.distance(&lhs, &rhs).unwrap(), 1e-11 * scale_of(&[s.norm(&rhs).unwrap()]));

        let form = random::coercive_form(rng, &s, 1.0);
        let c = continuity_constant(&s, &form).unwrap();
        let alpha = coercivity_constant(&s, &form).unwrap();
        if alpha > 0.0 {
            ac.le(alpha, c * (1.0 + 1e-12));
        }
        for _ in 0..10 {
            let u = random::normal_vector(rng, n);
            let w = random::normal_vector(rng, n);
            let (nu, nw) = (s.norm(&u).unwrap(), s.norm(&w).unwrap());
            cont.le(form.apply(&u, &w).unwrap().abs(), c * nu * nw * (1.0 + 1e-12));
            coer.le(alpha * nu * nu * (1.0 - 1e-12), form.apply(&u, &u).unwrap());
            let au = representation(&s, &form, &u).unwrap();
            abound.le(dual_norm(&s, &au).unwrap(), c * nu * (1.0 + 1e-12));
        }
    }
    [iso, cons, rep, rlin, abound, cont, coer, ac].into_iter().map(Tally::done).collect()
}

fn random_problem(rng: &mut SeededRng, n: usize) -> VariationalProblem {
    let s = random::hilbert_space(rng, n);
    let a = random::coercive_form(rng, &s, 1.0);
    let f = random::linear_form(rng, n);
    VariationalProblem::new(s, a, f).expect("generated problem is well formed")
}

fn solver_checks(rng: &mut SeededRng, size: SuiteSize) -> Vec<CheckOutcome> {
    let mut est = Tally::new("lax-milgram-estimate");
    let mut agree = Tally::new("iterative-direct-agreement");
    let mut lip = Tally::new("contraction-rate");
    let mut orth = Tally::new("galerkin-orthogonality");
    let mut cea = Tally::new("cea-bound");
    let tol = 1e-10;
    for i in 0..size.problems {
        let n = dim(rng, size);
        let p = random_problem(rng, n);
        match solve(&p, &SolveOptions::tol(tol)) {
            Ok(r) => {
                est.le(r.estimate_lhs, r.estimate_rhs * (1.0 + 1e-10));
                agree.check(solve_direct(&p).map(|d| (p.space.distance(&d, &r.solution).unwrap(), 10.0 * tol)));
            }
            Err(e) => {
                est.check(Err(e));
            }
        }
        let policy = rho_policy(p.alpha(), p.continuity()).unwrap();
        let rho = policy.interval.1 * rng.random_range(0.05..0.95);
        let k = contraction_factor(rho, p.alpha(), p.continuity()).unwrap();
        let g = iteration_map(&p, rho).unwrap();
        lip.check(fixed_point::estimate_lipschitz_with(&g, 50, rng).map(|est| (est, k + 1e-9)));
        if n >= 2 {
            let m = rng.random_range(1..n);
            if let Ok(sub) = Subspace::new(&p.space, random::basis(rng, n, m)) {
                let opts = GalerkinOptions { cea_candidates: 10, seed: i as u64, ..GalerkinOptions::default() };
                match galerkin_solve(&p, &sub, &opts) {
                    Ok(r) => {
                        orth.le(r.orthogonality_residual, 1e-10);
                        for c in &r.cea_checks {
                            cea.le(c.lhs, c.rhs * (1.0 + 1e-10));
                        }
                    }
                    Err(e) => orth.check(Err(e)),
                }
            }
        }
    }
    [est, agree, lip, orth, cea].into_iter().map(Tally::done).collect()
}

fn fem_checks() -> Vec<CheckOutcome> {
    let mut rate = Tally::new("fem-sine-rate");
    let mut nodal = Tally::new("fem-parabola-nodal");
    let mut one = Tally::new("fem-poisson-one-iteration");
    let mut cea = Tally::new("fem-cea");
    match fem1d::convergence_study("poisson-sine", &[8, 16, 32, 64], 0.0, 0.0) {
        Ok(t) => {
            for r in t.rows.iter().filter_map(|r| r.rate) {
                rate.le((r - 1.0).abs(), 0.1);
            }
            for r in &t.rows {
                one.le(r.iterations as f64, 1.0);
            }
        }
        Err(e) => rate.check(Err(e)),
    }
    match fem1d::convergence_study("poisson-parabola", &[4, 8, 16, 32], 0.0, 0.0) {
        Ok(t) => t.rows.iter().for_each(|r| nodal.le(r.nodal_max_error, 1e-12)),
        Err(e) => nodal.check(Err(e)),
    }
    match fem1d::convergence_study("poisson-sine", &[8, 16, 32], 0.5, 1.0) {
        Ok(t) => t.rows.iter().for_each(|r| {
            cea.le(r.h1_error, r.continuity / r.alpha * r.interpolation_error * (1.0 + 1e-10))
        }),
        Err(e) => cea.check(Err(e)),
    }
    [rate, nodal, one, cea].into_iter().map(Tally::done).collect()
}
