//! Banach fixed-point iteration on a [`HilbertSpace`].
//!
//! A [`ContractionMap`] pairs a self-map of the space with a claimed
//! Lipschitz constant `k`. [`iterate`] runs `x_{n+1} = f(x_n)` and stops on
//! the a posteriori test `k/(1-k) · d(x_n, x_{n+1}) ≤ tol`, which bounds the
//! true distance to the fixed point, not merely the step length.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::random;
use crate::space::{HilbertSpace, Vector};

type MapFn<'a> = Box<dyn Fn(&Vector) -> Vector + Send + Sync + 'a>;

/// A self-map of a Hilbert space together with a claimed Lipschitz constant.
pub struct ContractionMap<'a> {
    space: &'a HilbertSpace,
    apply: MapFn<'a>,
    k: f64,
}

impl<'a> ContractionMap<'a> {
    /// `k` must be finite and nonnegative; it may be `≥ 1`, in which case
    /// the map can be sampled but not iterated.
    pub fn new<F>(space: &'a HilbertSpace, k: f64, apply: F) -> Result<Self>
    where
        F: Fn(&Vector) -> Vector + Send + Sync + 'a,
    {
        if !k.is_finite() || k < 0.0 {
            return Err(Error::InvalidLipschitz { k });
        }
        Ok(Self { space, apply: Box::new(apply), k })
    }

    pub fn space(&self) -> &HilbertSpace {
        self.space
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        self.space.check_dim(x)?;
        let y = (self.apply)(x);
        self.space.check_dim(&y)?;
        Ok(y)
    }
}

impl std::fmt::Debug for ContractionMap<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ContractionMap").field("dim", &self.space.dim()).field("k", &self.k).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub fixed_point: Vector,
    pub iterations: usize,
    pub step_norms: Vec<f64>,
    pub a_priori_bound_at_stop: f64,
    /// `d(x*, f(x*))` for the returned point.
    pub residual: f64,
    /// `x_0, x_1, …` when history recording was requested.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub iterates: Vec<Vector>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateOptions {
    pub tol: f64,
    /// Iteration budget; `None` derives one from `k`, `d(x_0, x_1)` and `tol`.
    pub max_iter: Option<usize>,
    pub record_history: bool,
}

impl IterateOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, max_iter: None, record_history: false }
    }

    pub fn max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = Some(max_iter);
        self
    }

    pub fn with_history(mut self) -> Self {
        self.record_history = true;
        self
    }
}

const DEGENERATE_RETRIES: usize = 100;

/// Largest ratio `d(f(x), f(x')) / d(x, x')` over `sample_pairs` random
/// pairs with standard normal coordinates. A lower bound on the Lipschitz
/// constant, never a certificate.
pub fn estimate_lipschitz(map: &ContractionMap<'_>, sample_pairs: usize, rng_seed: u64) -> Result<f64> {
    if sample_pairs == 0 {
        return Err(Error::InvalidArgument("sample_pairs must be at least 1".into()));
    }
    let mut rng = random::rng(rng_seed);
    estimate_lipschitz_with(map, sample_pairs, &mut rng)
}

pub fn estimate_lipschitz_with<R: Rng + ?Sized>(
    map: &ContractionMap<'_>,
    sample_pairs: usize,
    rng: &mut R,
) -> Result<f64> {
    let space = map.space;
    let n = space.dim();
    let mut best = 0.0_f64;
    for _ in 0..sample_pairs {
        let mut retries = 0;
        let (x, y, d) = loop {
            let x = random::normal_vector(rng, n);
            let y = random::normal_vector(rng, n);
            let d = space.distance(&x, &y)?;
            if d > 0.0 {
                break (x, y, d);
            }
            retries += 1;
            if retries >= DEGENERATE_RETRIES {
                return Err(Error::DegenerateSample { retries });
            }
        };
        let ratio = space.distance(&map.apply(&x)?, &map.apply(&y)?)? / d;
        best = best.max(ratio);
    }
    Ok(best)
}

/// `k^p / (1 - k) · d01`, the tail bound on `d(x_p, x*)`.
pub fn a_priori_tail_bound(k: f64, d01: f64, p: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&k) || !(d01 >= 0.0) {
        return Err(Error::InvalidContraction { k, d01 });
    }
    if d01 == 0.0 || k == 0.0 {
        return Ok(if p == 0 { d01 / (1.0 - k) } else { 0.0 });
    }
    let exp = i32::try_from(p).unwrap_or(i32::MAX);
    Ok(k.powi(exp) * d01 / (1.0 - k))
}

/// Budget of ten times the a priori iteration count, clamped to `[16, 10⁶]`.
pub fn default_max_iter(k: f64, d01: f64, tol: f64) -> usize {
    const MIN: usize = 16;
    const MAX: usize = 1_000_000;
    if k <= 0.0 {
        return MIN;
    }
    let needed = ((tol * (1.0 - k) / d01.max(tol)).ln() / k.ln()).ceil();
    if !needed.is_finite() {
        return MAX;
    }
    let budget = 10.0 * needed.max(0.0);
    (budget as usize).clamp(MIN, MAX)
}

/// Picard iteration from `x0` until the a posteriori error bound drops
/// below `opts.tol`, or an iterate repeats its predecessor exactly.
pub fn iterate(map: &ContractionMap<'_>, x0: &Vector, opts: IterateOptions) -> Result<FixedPointReport> {
    let k = map.k;
    if k >= 1.0 {
        return Err(Error::NotAContraction { k });
    }
    if !(opts.tol > 0.0) || !opts.tol.is_finite() {
        return Err(Error::InvalidTolerance(opts.tol));
    }
    let space = map.space;
    space.check_dim(x0)?;

    let mut history = Vec::new();
    if opts.record_history {
        history.push(x0.clone());
    }
    let mut step_norms = Vec::new();
    let mut x = x0.clone();
    let mut budget = opts.max_iter;
    let mut d01 = 0.0;
    let factor = k / (1.0 - k);

    loop {
        let next = map.apply(&x)?;
        let stationary = next == x;
        let step = if stationary { 0.0 } else { space.distance(&x, &next)? };
        if step_norms.is_empty() {
            d01 = step;
            if budget.is_none() {
                budget = Some(default_max_iter(k, d01, opts.tol));
            }
        }
        step_norms.push(step);
        x = next;
        if opts.record_history {
            history.push(x.clone());
        }
        let iterations = step_norms.len();
        if stationary || step * factor <= opts.tol {
            break;
        }
        if iterations >= budget.unwrap_or(usize::MAX) {
            let report = finish(map, x, step_norms, d01, history)?;
            return Err(Error::MaxIterationsExceeded { report: Box::new(report) });
        }
    }
    finish(map, x, step_norms, d01, history)
}

fn finish(
    map: &ContractionMap<'_>,
    x: Vector,
    step_norms: Vec<f64>,
    d01: f64,
    iterates: Vec<Vector>,
) -> Result<FixedPointReport> {
    let residual = map.space.distance(&x, &map.apply(&x)?)?;
    let iterations = step_norms.len();
    let a_priori_bound_at_stop = a_priori_tail_bound(map.k, d01, iterations)?;
    Ok(FixedPointReport { fixed_point: x, iterations, step_norms, a_priori_bound_at_stop, residual, iterates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn euclid2() -> HilbertSpace {
        HilbertSpace::euclidean(2)
    }

    #[test]
    fn halving_map_lipschitz_estimate() {
        let s = euclid2();
        let m = ContractionMap::new(&s, 0.5, |x| x.scale(0.5)).unwrap();
        let est = estimate_lipschitz(&m, 50, 7).unwrap();
        assert!((0.5 - 1e-12..=0.5).contains(&est), "{est}");
    }

    #[test]
    fn identity_lipschitz_is_one() {
        let s = euclid2();
        let m = ContractionMap::new(&s, 1.0, |x| x.clone()).unwrap();
        let est = estimate_lipschitz(&m, 20, 1).unwrap();
        assert!((est - 1.0).abs() <= 1e-12);
        assert!(matches!(iterate(&m, &Vector::zeros(2), IterateOptions::new(1e-6)), Err(Error::NotAContraction { .. })));
    }

    /// Brute-force `max_θ ‖B(cos θ, sin θ)‖` over a dense angle grid.
    fn sweep_spectral_norm(b: &DMatrix<f64>) -> f64 {
        (0..200_000)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / 200_000.0;
                let v = nalgebra::DVector::from_vec(vec![t.cos(), t.sin()]);
                (b * v).norm()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn diagonal_map_lipschitz_below_sweep() {
        let s = euclid2();
        let b = DMatrix::from_row_slice(2, 2, &[0.9, 0.0, 0.0, 0.1]);
        let sigma = sweep_spectral_norm(&b);
        assert!((sigma - 0.9).abs() < 1e-9);
        let bb = b.clone();
        let m = ContractionMap::new(&s, 0.9, move |x| Vector::new(&bb * x.coeffs())).unwrap();
        let est = estimate_lipschitz(&m, 1000, 3).unwrap();
        assert!(est > 0.1 && est <= sigma + 1e-12, "{est}");
    }

    #[test]
    fn zero_sample_pairs_rejected() {
        let s = euclid2();
        let m = ContractionMap::new(&s, 0.5, |x| x.scale(0.5)).unwrap();
        assert!(estimate_lipschitz(&m, 0, 0).is_err());
    }

    #[test]
    fn invalid_k_rejected() {
        let s = euclid2();
        assert!(ContractionMap::new(&s, -0.1, |x| x.clone()).is_err());
        assert!(ContractionMap::new(&s, f64::NAN, |x| x.clone()).is_err());
    }

    #[test]
    fn halving_converges_to_origin() {
        let s = euclid2();
        let m = ContractionMap::new(&s, 0.5, |x| x.scale(0.5)).unwrap();
        let r = iterate(&m, &Vector::basis(2, 0), IterateOptions::new(1e-12)).unwrap();
        assert!(s.norm(&r.fixed_point).unwrap() <= 1e-12);
        assert!(r.residual <= 1e-12);
    }

    #[test]
    fn constant_map_stops_within_two_iterations() {
        let s = euclid2();
        let c = Vector::from_vec(vec![0.25, -3.0]);
        let cc = c.clone();
        let m = ContractionMap::new(&s, 0.0, move |_| cc.clone()).unwrap();
        let r = iterate(&m, &Vector::from_vec(vec![9.0, 9.0]), IterateOptions::new(1e-12)).unwrap();
        assert!(r.iterations <= 2);
        assert_eq!(r.fixed_point, c);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn stationary_start_stops_immediately() {
        let s = euclid2();
        let m = ContractionMap::new(&s, 0.5, |x| x.scale(0.5)).unwrap();
        let r = iterate(&m, &Vector::zeros(2), IterateOptions::new(1e-12)).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.step_norms, vec![0.0]);
    }

    #[test]
    fn affine_map_iteration_count_matches_geometric_recursion() {
        // x_n = (1 - 2^-n, 0); the step is 2^-(n+1) and the stop test k/(1-k)·step ≤ tol
        // first holds when 2^-n ≤ tol, i.e. n = ⌈log2(1/tol)⌉.
        let s = euclid2();
        let shift = Vector::from_vec(vec![0.5, 0.0]);
        let m = ContractionMap::new(&s, 0.5, move |x| x.scale(0.5).axpy(1.0, &shift)).unwrap();
        let tol = 1e-10;
        let r = iterate(&m, &Vector::zeros(2), IterateOptions::new(tol)).unwrap();
        let expected = (1.0 / tol).log2().ceil() as usize;
        assert_eq!(r.iterations, expected);
        assert!(s.distance(&r.fixed_point, &Vector::basis(2, 0)).unwrap() <= tol);
    }

    #[test]
    fn budget_exhaustion_reports_partial_state() {
        let s = euclid2();
        let m = ContractionMap::new(&s, 0.5, |x| x.scale(0.5)).unwrap();
        let err = iterate(&m, &Vector::basis(2, 0), IterateOptions::new(1e-12).max_iter(3)).unwrap_err();
        match err {
            Error::MaxIterationsExceeded { report } => {
                assert_eq!(report.iterations, 3);
                assert_eq!(report.fixed_point, Vector::from_vec(vec![0.125, 0.0]));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tail_bound_values() {
        assert_eq!(a_priori_tail_bound(0.0, 3.0, 1).unwrap(), 0.0);
        assert_eq!(a_priori_tail_bound(0.5, 1.0, 3).unwrap(), 0.25);
        assert!(a_priori_tail_bound(1.0, 1.0, 3).is_err());
        assert!(a_priori_tail_bound(0.5, -1.0, 3).is_err());
    }

    #[test]
    fn tail_bound_dominates_affine_iterates() {
        let s = euclid2();
        let shift = Vector::from_vec(vec![0.5, 0.0]);
        let m = ContractionMap::new(&s, 0.5, move |x| x.scale(0.5).axpy(1.0, &shift)).unwrap();
        let r = iterate(&m, &Vector::zeros(2), IterateOptions::new(1e-13).with_history()).unwrap();
        let star = Vector::basis(2, 0);
        let d01 = r.step_norms[0];
        for (p, x) in r.iterates.iter().enumerate() {
            let err = s.distance(x, &star).unwrap();
            assert!(err <= a_priori_tail_bound(0.5, d01, p).unwrap() + 1e-13, "p={p}");
        }
    }

    #[test]
    fn default_budget_is_clamped() {
        assert_eq!(default_max_iter(0.0, 1.0, 1e-10), 16);
        assert_eq!(default_max_iter(0.5, 1.0, 1e-10), 10 * 35);
        assert_eq!(default_max_iter(1.0 - 1e-12, 1.0, 1e-10), 1_000_000);
    }
}
