//! Brute-force reference values used by the test suites.
//!
//! Each routine here is written independently of the module it checks; the
//! only shared code is the symmetric eigensolver, and the eigensolver's own
//! check ([`sturm_eigenvalues`]) does not use it either.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::ctm::{Boundary, CtmConfig};
use crate::error::{Error, Result};
use crate::models::SiteModel;
use crate::numerics::{svd, sym_eig, DenseMatrix};

/// A reproducible oracle evaluation, serializable for archiving.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OracleReport {
    pub name: String,
    pub inputs: BTreeMap<String, f64>,
    pub value: Vec<f64>,
    pub tolerance_used: f64,
}

impl OracleReport {
    pub fn new(name: &str, inputs: &[(&str, f64)], value: Vec<f64>, tolerance_used: f64) -> Self {
        Self {
            name: name.to_string(),
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            value,
            tolerance_used,
        }
    }
}

/// Neumaier's compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Ground-state energy per site of `−Σ σˣσˣ − g Σ σᶻ` in the thermodynamic
/// limit, `−(1/π) ∫₀^π √(1 + g² + 2g cos k) dk`.
pub fn tfim_energy_density_exact(g: f64) -> Result<f64> {
    if !(g >= 0.0) || !g.is_finite() {
        return Err(Error::Domain(format!("field must be finite and non-negative, got {g}")));
    }
    let f = |k: f64| (1.0 + g * g + 2.0 * g * k.cos()).max(0.0).sqrt();
    let pi = std::f64::consts::PI;
    Ok(-adaptive_simpson(&f, 0.0, pi, 1e-13) / pi)
}

/// Gauss–Hermite nodes (descending) and natural-log weights for the weight
/// `e^{−x²}`. Nodes start from the eigenvalues of the Jacobi matrix and are
/// polished by Newton iteration on the normalized Hermite recurrence, whose
/// derivative also gives the weights without underflow.
pub fn gauss_hermite_log(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::contract("need at least one node"));
    }
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let jacobi = DenseMatrix::from_fn(n, n, |i, j| {
        if i.abs_diff(j) == 1 {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let guesses = sym_eig(&jacobi)?.eigenvalues;
    let nf = n as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut ln_weights = Vec::with_capacity(n);
    for &guess in guesses.iter().rev() {
        let mut z = guess;
        let mut pp = 1.0;
        for _ in 0..50 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        nodes.push(z);
        ln_weights.push(std::f64::consts::LN_2 - 2.0 * pp.abs().ln());
    }
    Ok((nodes, ln_weights))
}

/// Gauss–Hermite nodes (descending) and weights for the weight `e^{−x²}`.
pub fn gauss_hermite(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, lw) = gauss_hermite_log(n)?;
    Ok((x, lw.iter().map(|l| l.exp()).collect()))
}

/// Nodes of the two-oscillator reduced-density kernel.
pub const TWO_OSCILLATOR_NODES: usize = 240;

/// Top 10 eigenvalues (descending) of the reduced density matrix of one
/// oscillator in the ground state of
/// `½(p₁² + p₂²) + ½(m²+1)(x₁² + x₂²) − x₁x₂`.
///
/// The ground-state wavefunction `exp(−½ xᵀΩx)`, `Ω = K^{1/2}`, is
/// integrated over the second coordinate by Gauss–Hermite quadrature, and
/// the resulting kernel `ρ(x, x')` is diagonalized on a Gauss–Hermite grid
/// (Nyström method).
pub fn two_oscillator_reduced_spectrum(mass: f64) -> Result<Vec<f64>> {
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::Domain(format!("mass must be positive, got {mass}")));
    }
    let w_sym = mass;
    let w_anti = (mass * mass + 2.0).sqrt();
    let o11 = 0.5 * (w_sym + w_anti);
    let o12 = 0.5 * (w_sym - w_anti);
    let o22 = o11;

    let (nodes, ln_weights) = gauss_hermite_log(TWO_OSCILLATOR_NODES)?;
    // Scale x so the kernel's Gaussian envelope matches the quadrature weight.
    let a = o11 - o12 * o12 / (2.0 * o22);
    let b = o12 * o12 / (2.0 * o22);
    let gamma = (a * a - b * b).sqrt();
    let s = (2.0 / (a + gamma)).sqrt();
    let xs: Vec<f64> = nodes.iter().map(|u| s * u).collect();
    let nystrom: Vec<f64> = nodes
        .iter()
        .zip(&ln_weights)
        .map(|(u, lw)| (lw + u * u).exp() * s)
        .collect();

    let psi = |x: f64, y: f64| (-0.5 * (o11 * x * x + 2.0 * o12 * x * y + o22 * y * y)).exp();
    let ys: Vec<f64> = nodes.iter().map(|v| v / o22.sqrt()).collect();
    let y_weights: Vec<f64> = nodes
        .iter()
        .zip(&ln_weights)
        .map(|(v, lw)| (lw + v * v).exp() / o22.sqrt())
        .collect();

    // ρ(xᵢ, xⱼ) on the quadrature grid factors as B Bᵀ with
    // B_ik = √Wᵢ ψ(xᵢ, y_k) √w_k, so its eigenvalues are the squared singular
    // values of B; this keeps the tiny eigenvalues accurate to full relative
    // precision instead of drowning them in the roundoff of the largest.
    let n = TWO_OSCILLATOR_NODES;
    let b = DenseMatrix::from_fn(n, n, |i, k| {
        nystrom[i].sqrt() * psi(xs[i], ys[k]) * y_weights[k].sqrt()
    });
    let sv = svd(&b)?.singular_values;
    let total: f64 = sv.iter().map(|s| s * s).sum();
    Ok(sv.iter().take(10).map(|s| s * s / total).collect())
}

/// Largest lattice [`ising_brute_force_z`] enumerates.
pub const MAX_BRUTE_FORCE_SPINS: usize = 25;

/// Number of configurations at each bond energy `E ∈ [−B, B]` of the full
/// `(2L+1)²` lattice (index `E + B`), with the `+1` frame under a fixed
/// boundary.
pub fn ising_energy_histogram(cfg: &CtmConfig) -> Result<(i64, Vec<u64>)> {
    let w = cfg.width();
    if w * w > MAX_BRUTE_FORCE_SPINS {
        return Err(Error::SizeGuard(format!(
            "{} spins exceed the enumeration limit of {MAX_BRUTE_FORCE_SPINS}",
            w * w
        )));
    }
    let fixed = cfg.boundary == Boundary::Fixed;
    let rows = 1usize << w;
    let mask = rows - 1;
    let wi = w as i64;
    let pop = |x: usize| x.count_ones() as i64;
    let row_energy: Vec<i64> = (0..rows)
        .map(|s| {
            let mut e = (wi - 1) - 2 * pop((s ^ (s >> 1)) & (mask >> 1));
            if fixed {
                e += 2 * (s & 1) as i64 - 1 + 2 * ((s >> (w - 1)) & 1) as i64 - 1;
            }
            e
        })
        .collect();
    let magnetization: Vec<i64> = (0..rows).map(|s| 2 * pop(s) - wi).collect();
    let bound = 2 * wi * (wi - 1) + if fixed { 4 * wi } else { 0 };
    let mut hist = vec![0u64; (2 * bound + 1) as usize];

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        depth: usize,
        prev: usize,
        energy: i64,
        w: usize,
        fixed: bool,
        row_energy: &[i64],
        magnetization: &[i64],
        bound: i64,
        hist: &mut [u64],
    ) {
        let rows = row_energy.len();
        let wi = w as i64;
        for s in 0..rows {
            let mut e = energy + row_energy[s];
            if depth > 0 {
                e += wi - 2 * (prev ^ s).count_ones() as i64;
            } else if fixed {
                e += magnetization[s];
            }
            if depth + 1 == w {
                if fixed {
                    e += magnetization[s];
                }
                hist[(e + bound) as usize] += 1;
            } else {
                recurse(depth + 1, s, e, w, fixed, row_energy, magnetization, bound, hist);
            }
        }
    }
    recurse(0, 0, 0, w, fixed, &row_energy, &magnetization, bound, &mut hist);
    Ok((bound, hist))
}

/// `Z = Σ_σ exp(K Σ_⟨nm⟩ σₙσₘ)` over every configuration of the full lattice.
pub fn ising_brute_force_z(cfg: &CtmConfig) -> Result<f64> {
    let (bound, hist) = ising_energy_histogram(cfg)?;
    let mut z = CompensatedSum::default();
    for (i, &count) in hist.iter().enumerate() {
        if count > 0 {
            z.add(count as f64 * (cfg.beta_j * (i as i64 - bound) as f64).exp());
        }
    }
    Ok(z.value())
}

/// Number of eigenvalues of the symmetric matrix `a` below `x`, from the
/// inertia of the `LDLᵀ` factorization of `a − x`.
fn count_below(a: &[Vec<f64>], x: f64) -> usize {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    let mut d = vec![0.0; n];
    let scale = a
        .iter()
        .flatten()
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let mut negatives = 0;
    for j in 0..n {
        let mut dj = a[j][j] - x;
        for k in 0..j {
            dj -= l[j][k] * l[j][k] * d[k];
        }
        if dj == 0.0 {
            dj = -f64::EPSILON * scale;
        }
        d[j] = dj;
        if dj < 0.0 {
            negatives += 1;
        }
        for i in j + 1..n {
            let mut v = a[i][j];
            for k in 0..j {
                v -= l[i][k] * l[j][k] * d[k];
            }
            l[i][j] = v / dj;
        }
    }
    negatives
}

/// All eigenvalues of a symmetric matrix (ascending), each located by
/// bisection on the Sylvester inertia count.
pub fn sturm_eigenvalues(a: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = a.len();
    if n == 0 || a.iter().any(|r| r.len() != n) {
        return Err(Error::contract("need a non-empty square matrix"));
    }
    let radius = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| a[i][j].abs()).sum::<f64>())
        .collect::<Vec<_>>();
    let lo0 = (0..n).map(|i| a[i][i] - radius[i]).fold(f64::INFINITY, f64::min) - 1.0;
    let hi0 = (0..n).map(|i| a[i][i] + radius[i]).fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (mut lo, mut hi) = (lo0, hi0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if count_below(a, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    Ok(out)
}

fn embed(op: &DenseMatrix, site: usize, span: usize, n: usize, d: usize) -> DenseMatrix {
    let left = DenseMatrix::identity(d.pow(site as u32), d.pow(site as u32));
    let right_dim = d.pow((n - site - span) as u32);
    let right = DenseMatrix::identity(right_dim, right_dim);
    left.kronecker(op).kronecker(&right)
}

/// Dense open-chain Hamiltonian assembled from explicit Kronecker products,
/// site 0 being the most significant tensor factor.
pub fn kron_chain_hamiltonian(model: &SiteModel, n: usize) -> Result<DenseMatrix> {
    let d = model.d;
    let dim = d.checked_pow(n as u32).filter(|&x| x <= 4096).ok_or_else(|| {
        Error::SizeGuard(format!("{n} sites of dimension {d} exceed the dense oracle limit"))
    })?;
    let mut h = DenseMatrix::zeros(dim, dim);
    for i in 0..n {
        h += embed(&model.site_term, i, 1, n, d);
    }
    for b in &model.bond_terms {
        let two = b.left.kronecker(&b.right) * b.coupling;
        for i in 0..n - 1 {
            h += embed(&two, i, 2, n, d);
        }
    }
    Ok(h)
}

/// Exact ground energy `½ Σ ωₖ` of the open harmonic chain with free ends.
pub fn harmonic_normal_mode_energy(n: usize, mass: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::contract("need at least two sites"));
    }
    let mut k = DenseMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = mass * mass + 2.0;
        if i + 1 < n {
            k[(i, i + 1)] = -1.0;
            k[(i + 1, i)] = -1.0;
        }
    }
    k[(0, 0)] -= 1.0;
    k[(n - 1, n - 1)] -= 1.0;
    let eig = sym_eig(&k)?;
    Ok(0.5 * eig.eigenvalues.iter().map(|w| w.sqrt()).sum::<f64>())
}
