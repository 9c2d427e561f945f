//! Classical information geometry on finite outcome sets: the α-divergence
//! family, Hellinger and Kullback–Leibler divergences, and the Fisher metric
//! `g_ij = 4 Σ ∂_i√p ∂_j√p` by central differences.
//!
//! Divergences are evaluated term by term as
//! `c(α)·[a·pᵢ + b·qᵢ − pᵢ^a qᵢ^b]` with `a = (1−α)/2`, `b = (1+α)/2` and
//! `c = 4/(1−α²)`, which sums to `Σ pᵢ f(qᵢ/pᵢ)` for normalized inputs and
//! keeps every term non-negative. The log forms are used at `α = ±1`.
//! A term that diverges (support violation) makes the whole result
//! `f64::INFINITY`; that is a value, not an error.

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Normalization tolerance of [`ProbDist::new`].
pub const NORM_TOL: f64 = 1e-12;
/// Central-difference step for Fisher gradients.
pub const GRADIENT_STEP: f64 = 1e-5;
/// Central-difference step for divergence Hessians.
pub const HESSIAN_STEP: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct ProbDist(Vec<f64>);

impl ProbDist {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(p, NORM_TOL)
    }

    /// Accepts `|Σp − 1| ≤ tol`. The entries are stored unchanged.
    pub fn with_tolerance(p: Vec<f64>, tol: f64) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::contract("distribution needs at least one outcome"));
        }
        if let Some(bad) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::contract(format!(
                "probabilities must be finite and non-negative, got {bad}"
            )));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::contract(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self(p))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::contract("distribution needs at least one outcome"));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Componentwise square root, the embedding of `p` on the unit sphere.
    pub fn sqrt_embedding(&self) -> Vec<f64> {
        self.0.iter().map(|x| x.sqrt()).collect()
    }
}

fn check_lengths(p: &ProbDist, q: &ProbDist) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    Ok(())
}

/// `p ln(p/q) − p + q`, the α = −1 term.
fn kl_term(p: f64, q: f64) -> f64 {
    match (p == 0.0, q == 0.0) {
        (true, _) => q,
        (false, true) => f64::INFINITY,
        (false, false) => (p * (p / q).ln() - p + q).max(0.0),
    }
}

fn alpha_term(p: f64, q: f64, alpha: f64) -> f64 {
    if alpha == -1.0 {
        return kl_term(p, q);
    }
    if alpha == 1.0 {
        return kl_term(q, p);
    }
    if p == 0.0 && q == 0.0 {
        return 0.0;
    }
    let a = (1.0 - alpha) / 2.0;
    let b = (1.0 + alpha) / 2.0;
    let c = 4.0 / (1.0 - alpha * alpha);
    if (p == 0.0 && a < 0.0) || (q == 0.0 && b < 0.0) {
        return f64::INFINITY;
    }
    (c * (a * p + b * q - p.powf(a) * q.powf(b))).max(0.0)
}

/// `D⁽ᵅ⁾(p, q) = Σᵢ pᵢ f(qᵢ/pᵢ)` with `f(x) = 4/(1−α²)·(1 − x^{(1+α)/2})`,
/// `−ln x` at `α = −1` and `x ln x` at `α = 1`.
pub fn alpha_divergence(p: &ProbDist, q: &ProbDist, alpha: f64) -> Result<f64> {
    check_lengths(p, q)?;
    if !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha must be finite, got {alpha}")));
    }
    let mut total = 0.0;
    for (&pi, &qi) in p.probs().iter().zip(q.probs()) {
        let t = alpha_term(pi, qi, alpha);
        if t.is_infinite() {
            return Ok(f64::INFINITY);
        }
        total += t;
    }
    Ok(total)
}

/// `D⁽⁰⁾(p, q) = 2 Σ (√pᵢ − √qᵢ)²`, a squared distance bounded by 4.
pub fn hellinger_sq(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    check_lengths(p, q)?;
    Ok(2.0
        * p.probs()
            .iter()
            .zip(q.probs())
            .map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2))
            .sum::<f64>())
}

/// Relative entropy `Σ pᵢ ln(pᵢ/qᵢ)`; infinite when `q` misses part of the
/// support of `p`.
pub fn kl_divergence(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    alpha_divergence(p, q, -1.0)
}

/// An `n`-parameter family of distributions over a fixed finite outcome set.
pub trait ParametricFamily {
    fn n_params(&self) -> usize;
    fn evaluate(&self, xi: &[f64]) -> Result<ProbDist>;
}

/// Bernoulli distribution `(θ, 1 − θ)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Bernoulli;

impl ParametricFamily for Bernoulli {
    fn n_params(&self) -> usize {
        1
    }

    fn evaluate(&self, xi: &[f64]) -> Result<ProbDist> {
        let theta = xi[0];
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Domain(format!("Bernoulli parameter {theta} outside [0, 1]")));
        }
        Ok(ProbDist(vec![theta, 1.0 - theta]))
    }
}

/// Product of `n` independent Bernoulli variables over `2ⁿ` outcomes; bit `k`
/// of the outcome index is the `k`-th variable.
#[derive(Clone, Copy, Debug)]
pub struct IndependentBernoullis {
    pub n: usize,
}

impl ParametricFamily for IndependentBernoullis {
    fn n_params(&self) -> usize {
        self.n
    }

    fn evaluate(&self, xi: &[f64]) -> Result<ProbDist> {
        if self.n == 0 || self.n > 20 {
            return Err(Error::SizeGuard(format!("{} Bernoulli variables", self.n)));
        }
        if let Some(t) = xi.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(Error::Domain(format!("Bernoulli parameter {t} outside [0, 1]")));
        }
        let p = (0..1usize << self.n)
            .map(|outcome| {
                (0..self.n)
                    .map(|k| if outcome >> k & 1 == 1 { xi[k] } else { 1.0 - xi[k] })
                    .product()
            })
            .collect();
        Ok(ProbDist(p))
    }
}

/// A family given by a closure that returns the probabilities directly.
pub struct FnFamily<F> {
    n_params: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64>> FnFamily<F> {
    pub fn new(n_params: usize, f: F) -> Self {
        Self { n_params, f }
    }
}

impl<F: Fn(&[f64]) -> Vec<f64>> ParametricFamily for FnFamily<F> {
    fn n_params(&self) -> usize {
        self.n_params
    }

    fn evaluate(&self, xi: &[f64]) -> Result<ProbDist> {
        ProbDist::new((self.f)(xi))
    }
}

fn check_params(fam: &dyn ParametricFamily, xi: &[f64], h: f64) -> Result<()> {
    if xi.len() != fam.n_params() {
        return Err(Error::DimensionMismatch {
            expected: fam.n_params(),
            found: xi.len(),
        });
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::contract(format!("finite-difference step must be positive, got {h}")));
    }
    Ok(())
}

fn shifted(xi: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut x = xi.to_vec();
    for &(i, dx) in moves {
        x[i] += dx;
    }
    x
}

/// `g_ij = 4 Σₓ ∂_i√p(x) ∂_j√p(x)` with central differences of step `h`.
pub fn fisher_matrix(fam: &dyn ParametricFamily, xi: &[f64], h: f64) -> Result<DenseMatrix> {
    check_params(fam, xi, h)?;
    let n = fam.n_params();
    let mut grads: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let plus = fam.evaluate(&shifted(xi, &[(i, h)]))?.sqrt_embedding();
        let minus = fam.evaluate(&shifted(xi, &[(i, -h)]))?.sqrt_embedding();
        grads.push(
            plus.iter()
                .zip(&minus)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect(),
        );
    }
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        4.0 * grads[lo].iter().zip(&grads[hi]).map(|(a, b)| a * b).sum::<f64>()
    }))
}

/// Hessian in `ξ'` of `D⁽ᵅ⁾(p(ξ), p(ξ'))` at `ξ' = ξ`, by central
/// differences of step `h`. For every α this approximates the Fisher metric.
pub fn divergence_hessian(
    fam: &dyn ParametricFamily,
    xi: &[f64],
    alpha: f64,
    h: f64,
) -> Result<DenseMatrix> {
    check_params(fam, xi, h)?;
    let n = fam.n_params();
    let base = fam.evaluate(xi)?;
    let d = |moves: &[(usize, f64)]| -> Result<f64> {
        alpha_divergence(&base, &fam.evaluate(&shifted(xi, moves))?, alpha)
    };
    let d0 = d(&[])?;
    let mut hess = DenseMatrix::zeros(n, n);
    for i in 0..n {
        hess[(i, i)] = (d(&[(i, h)])? - 2.0 * d0 + d(&[(i, -h)])?) / (h * h);
        for j in 0..i {
            let v = (d(&[(i, h), (j, h)])? - d(&[(i, h), (j, -h)])? - d(&[(i, -h), (j, h)])?
                + d(&[(i, -h), (j, -h)])?)
                / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pd(v: &[f64]) -> ProbDist {
        ProbDist::new(v.to_vec()).unwrap()
    }

    #[test]
    fn construction() {
        assert!(ProbDist::new(vec![]).is_err());
        assert!(ProbDist::new(vec![0.5, 0.6]).is_err());
        assert!(ProbDist::new(vec![1.5, -0.5]).is_err());
        assert!(ProbDist::new(vec![f64::NAN]).is_err());
        assert!(ProbDist::with_tolerance(vec![0.5, 0.5 + 1e-10], 1e-9).is_ok());
        assert_eq!(ProbDist::uniform(4).unwrap().probs(), &[0.25; 4]);
    }

    #[test]
    fn self_divergence_vanishes() {
        let p = pd(&[0.2, 0.3, 0.5]);
        for alpha in [-3.0, -1.0, -0.5, 0.0, 0.5, 1.0, 3.0] {
            assert!(alpha_divergence(&p, &p, alpha).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn single_support_kl() {
        let d = alpha_divergence(&pd(&[1.0, 0.0]), &pd(&[0.5, 0.5]), -1.0).unwrap();
        assert!((d - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn alpha_zero_is_hellinger() {
        let p = pd(&[0.5, 0.5]);
        let q = pd(&[0.9, 0.1]);
        let closed = 2.0
            * ((0.5f64.sqrt() - 0.9f64.sqrt()).powi(2) + (0.5f64.sqrt() - 0.1f64.sqrt()).powi(2));
        assert!((alpha_divergence(&p, &q, 0.0).unwrap() - closed).abs() < 1e-12);
        assert!((closed - 0.4223).abs() < 1e-4);
        assert!((hellinger_sq(&p, &q).unwrap() - closed).abs() < 1e-15);
    }

    #[test]
    fn hellinger_extremes() {
        assert!((hellinger_sq(&pd(&[1.0, 0.0]), &pd(&[0.0, 1.0])).unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(hellinger_sq(&pd(&[0.3, 0.7]), &pd(&[0.3, 0.7])).unwrap(), 0.0);
    }

    #[test]
    fn kl_examples() {
        let d = kl_divergence(&pd(&[0.5, 0.5]), &pd(&[0.25, 0.75])).unwrap();
        let closed = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert!((d - closed).abs() < 1e-15);
        assert!((d - 0.1438).abs() < 1e-4);
        assert_eq!(kl_divergence(&pd(&[0.5, 0.5]), &pd(&[1.0, 0.0])).unwrap(), f64::INFINITY);
        assert_eq!(kl_divergence(&pd(&[1.0, 0.0]), &pd(&[1.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn support_violations_are_infinite_values() {
        let p = pd(&[0.0, 1.0]);
        let q = pd(&[0.5, 0.5]);
        assert!(alpha_divergence(&p, &q, 1.0).unwrap().is_infinite());
        assert!(alpha_divergence(&p, &q, 3.0).unwrap().is_infinite());
        assert!(alpha_divergence(&p, &q, 0.5).unwrap().is_finite());
        assert!(alpha_divergence(&q, &p, -3.0).unwrap().is_infinite());
    }

    #[test]
    fn mismatched_lengths() {
        assert!(alpha_divergence(&pd(&[1.0]), &pd(&[0.5, 0.5]), 0.0).is_err());
        assert!(alpha_divergence(&pd(&[1.0]), &pd(&[1.0]), f64::NAN).is_err());
    }

    #[test]
    fn bernoulli_fisher() {
        let g = fisher_matrix(&Bernoulli, &[0.5], GRADIENT_STEP).unwrap();
        assert!((g[(0, 0)] - 4.0).abs() < 1e-6);
        let g = fisher_matrix(&Bernoulli, &[0.2], GRADIENT_STEP).unwrap();
        assert!((g[(0, 0)] - 6.25).abs() < 1e-5);
        assert!(fisher_matrix(&Bernoulli, &[0.5], 0.0).is_err());
        assert!(fisher_matrix(&Bernoulli, &[0.5, 0.1], 1e-5).is_err());
        assert!(fisher_matrix(&Bernoulli, &[0.0], 1e-5).is_err());
    }

    #[test]
    fn independent_fisher_is_diagonal() {
        let g = fisher_matrix(&IndependentBernoullis { n: 2 }, &[0.3, 0.6], GRADIENT_STEP).unwrap();
        assert!(g[(0, 1)].abs() < 1e-8 && g[(1, 0)].abs() < 1e-8);
        assert!((g[(0, 0)] - 1.0 / 0.21).abs() < 1e-5);
        assert!((g[(1, 1)] - 1.0 / 0.24).abs() < 1e-5);
    }

    #[test]
    fn closure_family() {
        let fam = FnFamily::new(1, |x: &[f64]| vec![x[0], 1.0 - x[0]]);
        let g = fisher_matrix(&fam, &[0.5], GRADIENT_STEP).unwrap();
        assert!((g[(0, 0)] - 4.0).abs() < 1e-6);
    }

    #[test]
    fn hessian_matches_fisher() {
        let fam = IndependentBernoullis { n: 2 };
        let xi = [0.35, 0.55];
        let g = fisher_matrix(&fam, &xi, GRADIENT_STEP).unwrap();
        for alpha in [0.0, 0.5, -1.0] {
            let h = divergence_hessian(&fam, &xi, alpha, HESSIAN_STEP).unwrap();
            assert!((&h - &g).amax() < 5e-4, "alpha {alpha}");
        }
    }
}
