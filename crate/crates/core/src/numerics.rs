//! Dense real linear algebra: symmetric eigendecomposition, SVD, a Lanczos
//! ground-state solver and the PSD matrix square root.
//!
//! Everything here is a pure function of its inputs. Spectra come back in a
//! canonical order (see [`sym_eig`]) so that repeated runs are bit-identical.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DMatrixView, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Real dense matrix. Entries are expected to be finite; operations that
/// depend on it check.
pub type DenseMatrix = DMatrix<f64>;

/// Numerical thresholds shared by the whole crate.
pub mod tolerances {
    /// Eigen-residual and orthogonality tolerance.
    pub const EIG_TOL: f64 = 1e-10;
    /// Reconstruction tolerance for square roots and decompositions.
    pub const RECON_TOL: f64 = 1e-9;
    /// Maximum asymmetry (relative to the largest entry, floored at 1)
    /// accepted for a "symmetric" matrix.
    pub const SYM_TOL: f64 = 1e-12;
    /// Eigenvalues in `[-PSD_TOL, 0)` are treated as zero.
    pub const PSD_TOL: f64 = 1e-12;
    /// Eigenvalues closer than this (relative to the spectral scale) count
    /// as tied when fixing the canonical order.
    pub const TIE_TOL: f64 = 1e-12;
    /// Allowed deviation of a density matrix trace from 1.
    pub const TRACE_TOL: f64 = 1e-10;
}

use tolerances::*;

/// Eigenvalues ascending; eigenvectors as orthonormal columns in the same order.
#[derive(Clone, Debug)]
pub struct EigResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DenseMatrix,
}

/// `m = u · diag(singular_values) · vᵀ`.
///
/// For an input with `rows ≤ cols` the shapes are `u: rows×rows`,
/// `v: cols×rows`. Wider-than-tall inputs are decomposed through their
/// transpose and `transposed` is set; then `u` is `rows×cols` with orthonormal
/// columns and `v` is `cols×cols`.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
    pub transposed: bool,
}

impl SvdResult {
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for (k, s) in self.singular_values.iter().enumerate() {
            us.column_mut(k).scale_mut(*s);
        }
        us * self.v.transpose()
    }
}

pub fn max_abs(m: &DenseMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn max_asymmetry(m: &DenseMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in 0..j {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub(crate) fn check_finite(m: &DenseMatrix, what: &str) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::contract(format!("{what}: empty matrix")));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::contract(format!("{what}: non-finite entry")));
    }
    Ok(())
}

pub(crate) fn check_symmetric(m: &DenseMatrix, what: &str) -> Result<()> {
    check_finite(m, what)?;
    if !m.is_square() {
        return Err(Error::contract(format!(
            "{what}: expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let asym = max_asymmetry(m);
    if asym > SYM_TOL * max_abs(m).max(1.0) {
        return Err(Error::contract(format!("{what}: asymmetry {asym:e}")));
    }
    Ok(())
}

/// `(m + mᵀ)/2`, used to scrub rounding-level asymmetry.
pub fn symmetrized(m: &DenseMatrix) -> DenseMatrix {
    (m + m.transpose()) * 0.5
}

fn fix_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Full spectrum of a symmetric matrix, ascending.
///
/// Each eigenvector is sign-fixed so that its first component larger than
/// `1e-12` in magnitude is positive. Eigenvectors of eigenvalues tied within
/// [`tolerances::TIE_TOL`] are ordered lexicographically; the eigenvalues
/// themselves stay ascending.
pub fn sym_eig(m: &DenseMatrix) -> Result<EigResult> {
    check_symmetric(m, "sym_eig")?;
    let n = m.nrows();
    let eig = SymmetricEigen::new(symmetrized(m));

    let mut columns: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            fix_sign(&mut v);
            (eig.eigenvalues[k], v)
        })
        .collect();
    columns.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lex_cmp(&a.1, &b.1)));

    // Re-sort clusters of numerically tied eigenvalues by eigenvector alone.
    let scale = columns.iter().fold(1.0_f64, |acc, c| acc.max(c.0.abs()));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && columns[end].0 - columns[end - 1].0 <= TIE_TOL * scale {
            end += 1;
        }
        if end - start > 1 {
            let values: Vec<f64> = columns[start..end].iter().map(|c| c.0).collect();
            columns[start..end].sort_by(|a, b| lex_cmp(&a.1, &b.1));
            for (c, v) in columns[start..end].iter_mut().zip(values) {
                c.0 = v;
            }
        }
        start = end;
    }

    let eigenvalues = columns.iter().map(|c| c.0).collect();
    let eigenvectors = DenseMatrix::from_fn(n, n, |i, k| columns[k].1[i]);
    Ok(EigResult {
        eigenvalues,
        eigenvectors,
    })
}

/// Singular value decomposition with singular values sorted descending.
pub fn svd(m: &DenseMatrix) -> Result<SvdResult> {
    check_finite(m, "svd")?;
    let transposed = m.nrows() > m.ncols();
    let work = if transposed { m.transpose() } else { m.clone() };
    let rank = work.nrows();

    let dec = work.svd(true, true);
    let u = dec.u.expect("u requested");
    let v_t = dec.v_t.expect("v_t requested");

    let mut order: Vec<usize> = (0..rank).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));

    let singular_values: Vec<f64> = order.iter().map(|&k| dec.singular_values[k]).collect();
    let u_sorted = DenseMatrix::from_fn(u.nrows(), rank, |i, k| u[(i, order[k])]);
    let v_sorted = DenseMatrix::from_fn(v_t.ncols(), rank, |j, k| v_t[(order[k], j)]);

    Ok(if transposed {
        SvdResult {
            u: v_sorted,
            singular_values,
            v: u_sorted,
            transposed,
        }
    } else {
        SvdResult {
            u: u_sorted,
            singular_values,
            v: v_sorted,
            transposed,
        }
    })
}

/// Square root of a symmetric positive-semidefinite matrix.
///
/// Eigenvalues in `[-PSD_TOL, 0)` are clamped to zero; anything more
/// negative is rejected.
pub fn psd_sqrt(m: &DenseMatrix) -> Result<DenseMatrix> {
    let eig = sym_eig(m)?;
    let lowest = eig.eigenvalues[0];
    if lowest < -PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: lowest,
        });
    }
    let n = m.nrows();
    let mut scaled = eig.eigenvectors.clone();
    for k in 0..n {
        let s = eig.eigenvalues[k].max(0.0).sqrt();
        scaled.column_mut(k).scale_mut(s);
    }
    Ok(symmetrized(&(scaled * eig.eigenvectors.transpose())))
}

// --- Lanczos ---------------------------------------------------------------

/// Largest Krylov basis kept before an explicit restart.
const KRYLOV_MAX: usize = 96;

#[derive(Clone, Debug)]
pub struct LanczosResult {
    pub energy: f64,
    /// Unit-norm Ritz vector.
    pub vector: Vec<f64>,
    /// `‖Hv − Ev‖` of the returned pair.
    pub residual: f64,
    pub matvecs: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    // Two Gram-Schmidt passes keep the basis orthogonal to working precision.
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, w);
            axpy(-c, b, w);
        }
    }
}

fn random_unit(dim: usize, seed: u64, deflate: &[Vec<f64>]) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    orthogonalize(&mut v, deflate);
    let n = norm(&v);
    v.iter_mut().for_each(|x| *x /= n);
    v
}

fn tridiagonal_ground(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let k = alphas.len();
    let t = DenseMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (idx, theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))
        .expect("non-empty tridiagonal");
    (theta, eig.eigenvectors.column(idx).iter().copied().collect())
}

/// Lowest eigenpair of the symmetric operator `apply` restricted to the
/// orthogonal complement of `deflate`.
fn lanczos_core<F>(
    apply: &mut F,
    dim: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
    deflate: &[Vec<f64>],
) -> Result<LanczosResult>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let space = dim - deflate.len();
    let krylov_max = space.min(KRYLOV_MAX);
    let mut start = random_unit(dim, seed, deflate);
    let mut matvecs = 0usize;
    let mut best_residual = f64::INFINITY;
    let mut w = vec![0.0; dim];

    loop {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();

        let y = loop {
            let j = basis.len() - 1;
            apply(&basis[j], &mut w);
            matvecs += 1;
            let alpha = dot(&basis[j], &w);
            alphas.push(alpha);
            orthogonalize(&mut w, deflate);
            orthogonalize(&mut w, &basis);
            let beta = norm(&w);

            let full = basis.len() >= krylov_max;
            let check = full || j < 12 || j.is_multiple_of(4);
            if check || beta <= 1e-13 {
                let (theta, y) = tridiagonal_ground(&alphas, &betas);
                let estimate = beta * y.last().map_or(0.0, |v| v.abs());
                let target = tol * theta.abs().max(1.0);
                if estimate <= 0.1 * target || full || beta <= 1e-13 || matvecs >= max_iter {
                    break y;
                }
            }
            betas.push(beta);
            basis.push(w.iter().map(|x| x / beta).collect());
        };

        let mut ritz = vec![0.0; dim];
        for (c, b) in y.iter().zip(&basis) {
            axpy(*c, b, &mut ritz);
        }
        orthogonalize(&mut ritz, deflate);
        let n = norm(&ritz);
        ritz.iter_mut().for_each(|x| *x /= n);

        let mut hx = vec![0.0; dim];
        apply(&ritz, &mut hx);
        matvecs += 1;
        let energy = dot(&ritz, &hx);
        axpy(-energy, &ritz, &mut hx);
        orthogonalize(&mut hx, deflate);
        let residual = norm(&hx);
        best_residual = best_residual.min(residual);

        if residual <= tol * energy.abs().max(1.0) {
            return Ok(LanczosResult {
                energy,
                vector: ritz,
                residual,
                matvecs,
            });
        }
        if matvecs >= max_iter {
            return Err(Error::NotConverged {
                matvecs,
                residual: best_residual,
            });
        }
        start = ritz;
    }
}

fn check_lanczos_args(dim: usize, tol: f64, max_iter: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::contract("lanczos: dimension must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::contract("lanczos: tolerance must be positive"));
    }
    if max_iter == 0 {
        return Err(Error::contract("lanczos: max_iter must be at least 1"));
    }
    Ok(())
}

/// Ground state of a symmetric linear operator given as a matrix-free
/// product `apply(x, y)` computing `y = H x` (overwriting `y`).
///
/// Lanczos with full reorthogonalization and explicit restarts every
/// `min(dim, 96)` steps. `max_iter` bounds the total number of operator
/// applications. The starting vector is drawn from `seed`, so results are
/// reproducible. On success the residual satisfies
/// `‖Hv − Ev‖ ≤ tol · max(1, |E|)`.
pub fn lanczos_ground<F>(
    mut apply: F,
    dim: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<LanczosResult>
where
    F: FnMut(&[f64], &mut [f64]),
{
    check_lanczos_args(dim, tol, max_iter)?;
    lanczos_core(&mut apply, dim, tol, max_iter, seed, &[])
}

/// The `k` lowest eigenpairs, found one at a time by deflating the
/// previously converged vectors. Degenerate levels are returned once per
/// multiplicity.
pub fn lanczos_lowest<F>(
    mut apply: F,
    dim: usize,
    k: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<Vec<LanczosResult>>
where
    F: FnMut(&[f64], &mut [f64]),
{
    check_lanczos_args(dim, tol, max_iter)?;
    if k == 0 || k > dim {
        return Err(Error::contract(format!(
            "lanczos_lowest: k = {k} outside 1..={dim}"
        )));
    }
    let mut found: Vec<LanczosResult> = Vec::with_capacity(k);
    let mut deflate: Vec<Vec<f64>> = Vec::with_capacity(k);
    for level in 0..k {
        let pair = lanczos_core(
            &mut apply,
            dim,
            tol,
            max_iter,
            seed.wrapping_add(level as u64),
            &deflate,
        )?;
        deflate.push(pair.vector.clone());
        found.push(pair);
    }
    found.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(found)
}

/// Matrix-free wrapper around an explicit dense matrix.
pub fn dense_apply(m: &DenseMatrix) -> impl FnMut(&[f64], &mut [f64]) + '_ {
    move |x, y| {
        let xv = DMatrixView::from_slice(x, x.len(), 1);
        let prod = m * xv;
        y.copy_from_slice(prod.as_slice());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DenseMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        symmetrized(&a)
    }

    #[test]
    fn pauli_x_spectrum() {
        let m = DenseMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let eig = sym_eig(&m).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_spectrum_and_canonical_vectors() {
        let eig = sym_eig(&DenseMatrix::identity(3, 3)).unwrap();
        assert_eq!(eig.eigenvalues.len(), 3);
        for v in &eig.eigenvalues {
            assert!((v - 1.0).abs() < 1e-14);
        }
        for k in 0..3 {
            let first = eig
                .eigenvectors
                .column(k)
                .iter()
                .copied()
                .find(|x| x.abs() > 1e-12)
                .unwrap();
            assert!(first > 0.0);
        }
    }

    #[test]
    fn sym_eig_rejects_bad_input() {
        let rect = DenseMatrix::zeros(2, 3);
        assert!(matches!(sym_eig(&rect), Err(Error::Contract(_))));
        let asym = DenseMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(sym_eig(&asym), Err(Error::Contract(_))));
    }

    #[test]
    fn sym_eig_residuals_and_orthogonality() {
        let m = random_symmetric(12, 3);
        let eig = sym_eig(&m).unwrap();
        let v = &eig.eigenvectors;
        for k in 0..12 {
            let r = &m * v.column(k) - v.column(k) * eig.eigenvalues[k];
            assert!(r.amax() < EIG_TOL);
        }
        let gram = v.transpose() * v - DenseMatrix::identity(12, 12);
        assert!(gram.amax() < EIG_TOL);
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sym_eig_is_deterministic() {
        let m = random_symmetric(9, 11);
        let a = sym_eig(&m).unwrap();
        let b = sym_eig(&m).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
    }

    #[test]
    fn svd_diagonal_and_bell() {
        let d = DenseMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]);
        let s = svd(&d).unwrap();
        assert!((s.singular_values[0] - 3.0).abs() < 1e-14);
        assert!((s.singular_values[1] - 1.0).abs() < 1e-14);

        let bell = DenseMatrix::identity(2, 2) * std::f64::consts::FRAC_1_SQRT_2;
        let s = svd(&bell).unwrap();
        for sv in &s.singular_values {
            assert!((sv - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        }
    }

    #[test]
    fn svd_tall_input_is_flagged_and_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = DenseMatrix::from_fn(7, 3, |_, _| rng.random_range(-1.0..1.0));
        let s = svd(&m).unwrap();
        assert!(s.transposed);
        assert_eq!(s.u.shape(), (7, 3));
        assert_eq!(s.v.shape(), (3, 3));
        assert!((s.reconstruct() - &m).amax() < 1e-10);
    }

    #[test]
    fn svd_rejects_non_finite() {
        let m = DenseMatrix::from_row_slice(1, 2, &[1.0, f64::NAN]);
        assert!(svd(&m).is_err());
    }

    #[test]
    fn psd_sqrt_examples() {
        let half = DenseMatrix::identity(2, 2) * 0.5;
        let r = psd_sqrt(&half).unwrap();
        assert!((r - DenseMatrix::identity(2, 2) * 0.5_f64.sqrt()).amax() < 1e-14);

        let proj = DenseMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!((psd_sqrt(&proj).unwrap() - &proj).amax() < 1e-14);

        let tiny_negative = DenseMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -5e-13]);
        assert!(psd_sqrt(&tiny_negative).is_ok());
        let negative = DenseMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-6]);
        assert!(matches!(psd_sqrt(&negative), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn lanczos_diagonal() {
        let m = DenseMatrix::from_diagonal(&nalgebra::DVector::from_fn(10, |i, _| (i + 1) as f64));
        let r = lanczos_ground(dense_apply(&m), 10, 1e-10, 500, 1).unwrap();
        assert!((r.energy - 1.0).abs() < 1e-10);
        assert!((r.vector[0].abs() - 1.0).abs() < 1e-10);
        assert!((norm(&r.vector) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lanczos_two_by_two() {
        let m = DenseMatrix::from_row_slice(2, 2, &[-2.0, -1.0, -1.0, 2.0]);
        let r = lanczos_ground(dense_apply(&m), 2, 1e-12, 100, 7).unwrap();
        assert!((r.energy + 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn lanczos_restarts_on_large_operator() {
        // 1-D Laplacian with dim > KRYLOV_MAX forces restarts.
        let n = 400;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let mut v = 2.0 * x[i];
                if i > 0 {
                    v -= x[i - 1];
                }
                if i + 1 < n {
                    v -= x[i + 1];
                }
                y[i] = v;
            }
        };
        let r = lanczos_ground(apply, n, 1e-9, 200_000, 3).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!((r.energy - exact).abs() < 1e-8, "{} vs {}", r.energy, exact);
        assert!(r.residual <= 1e-9);
    }

    #[test]
    fn lanczos_reports_non_convergence() {
        let m = random_symmetric(200, 2);
        let err = lanczos_ground(dense_apply(&m), 200, 1e-14, 5, 0).unwrap_err();
        assert!(matches!(err, Error::NotConverged { .. }));
    }

    #[test]
    fn lanczos_lowest_resolves_degeneracy() {
        let m = DenseMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            3.0, 1.0, 1.0, 2.0, 5.0, 4.0,
        ]));
        let pairs = lanczos_lowest(dense_apply(&m), 6, 3, 1e-11, 1000, 9).unwrap();
        let energies: Vec<f64> = pairs.iter().map(|p| p.energy).collect();
        assert!((energies[0] - 1.0).abs() < 1e-10);
        assert!((energies[1] - 1.0).abs() < 1e-10);
        assert!((energies[2] - 2.0).abs() < 1e-10);
    }
}
