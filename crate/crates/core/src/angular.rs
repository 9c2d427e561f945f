//! Gaussian half-chain entanglement spectra of the harmonic chain and the
//! imaginary-order Bessel waves `K_{iℓ}(x)` of angular quantization.
//!
//! For `H = ½ Σ pₙ² + ½ φᵀKφ` the ground state is Gaussian with
//! `X = ⟨φφ⟩ = ½K^{-1/2}` and `P = ⟨pp⟩ = ½K^{1/2}`. Restricted to the left
//! `cut` sites these give symplectic eigenvalues `νₖ = √eig(X_r P_r)`, and
//! the reduced density matrix is a product of thermal oscillators with
//! single-particle energies `εₖ = ln[(νₖ+½)/(νₖ−½)]`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{psd_sqrt, sym_eig, DenseMatrix};

/// Replaces `mass = 0`, which would make `K` singular.
pub const MASS_FLOOR: f64 = 1e-6;
/// Modes with `ν − ½` below this carry no entanglement and are dropped.
pub const UNENTANGLED_TOL: f64 = 1e-12;
pub const DEFAULT_MODES: usize = 8;
pub const DEFAULT_CUTOFF: usize = 12;
/// Absolute/relative tolerance of [`bessel_k_imag`].
pub const BESSEL_TOL: f64 = 1e-10;

/// Open harmonic chain with free ends: `K = mass² + discrete Laplacian`, so
/// `K_nn = mass² + 2` in the bulk, `mass² + 1` at the two ends, `−1` on the
/// first off-diagonals.
#[derive(Clone, Debug)]
pub struct GaussianChain {
    pub n: usize,
    pub mass: f64,
    pub coupling: DenseMatrix,
}

impl GaussianChain {
    pub fn new(n: usize, mass: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Model(format!("a chain needs at least 2 sites, got {n}")));
        }
        if !mass.is_finite() || mass < 0.0 {
            return Err(Error::Model(format!("mass must be finite and non-negative, got {mass}")));
        }
        let mass = mass.max(MASS_FLOOR);
        let m2 = mass * mass;
        let coupling = DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                m2 + if i == 0 || i == n - 1 { 1.0 } else { 2.0 }
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        });
        Ok(Self { n, mass, coupling })
    }

    /// `(X, P)` ground-state correlation matrices.
    pub fn correlations(&self) -> Result<(DenseMatrix, DenseMatrix)> {
        let eig = sym_eig(&self.coupling)?;
        if eig.eigenvalues[0] <= 0.0 {
            return Err(Error::Model(format!(
                "coupling matrix is not positive definite (smallest eigenvalue {})",
                eig.eigenvalues[0]
            )));
        }
        let v = &eig.eigenvectors;
        let scaled = |f: &dyn Fn(f64) -> f64| {
            let d = DenseMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                self.n,
                eig.eigenvalues.iter().map(|&w| f(w)),
            ));
            v * d * v.transpose()
        };
        let x = scaled(&|w| 0.5 / w.sqrt());
        let p = scaled(&|w| 0.5 * w.sqrt());
        Ok((x, p))
    }

    /// `½ Σ ωₖ`, the exact ground energy.
    pub fn ground_energy(&self) -> Result<f64> {
        let eig = sym_eig(&self.coupling)?;
        Ok(0.5 * eig.eigenvalues.iter().map(|w| w.max(0.0).sqrt()).sum::<f64>())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EntanglementSpectrum {
    /// All symplectic eigenvalues of the block, ascending, each `≥ ½`.
    pub symplectic: Vec<f64>,
    /// Single-particle energies of the entangled modes, ascending.
    pub epsilons: Vec<f64>,
    /// Reduced density matrix eigenvalues, descending.
    pub rho_eigenvalues: Vec<f64>,
    /// Closed thermal form over all entangled modes, nats.
    pub entropy: f64,
}

impl EntanglementSpectrum {
    /// `−Σ λ ln λ` over the enumerated eigenvalues.
    pub fn enumerated_entropy(&self) -> f64 {
        crate::qinfo::entropy_of(&self.rho_eigenvalues)
    }
}

/// Entropy of one thermal mode with level spacing `ε`.
pub fn thermal_mode_entropy(eps: f64) -> f64 {
    let q = (-eps).exp();
    eps * q / (1.0 - q) - (-q).ln_1p()
}

/// Spectrum of the left `cut` sites of the chain ground state. The
/// eigenvalues are enumerated over the `n_modes` lowest modes with at most
/// `cutoff` quanta in total; the remaining modes stay in their ground state.
/// `n_modes` beyond the number of entangled modes is clamped.
pub fn half_chain_spectrum(
    g: &GaussianChain,
    cut: usize,
    n_modes: usize,
    cutoff: usize,
) -> Result<EntanglementSpectrum> {
    if cut == 0 || cut >= g.n {
        return Err(Error::contract(format!("cut must lie in 1..{}, got {cut}", g.n)));
    }
    if n_modes == 0 {
        return Err(Error::contract("at least one mode must be enumerated"));
    }
    let (x, p) = g.correlations()?;
    let xr = x.view((0, 0), (cut, cut)).into_owned();
    let pr = p.view((0, 0), (cut, cut)).into_owned();
    let xs = psd_sqrt(&xr)?;
    let m = crate::numerics::symmetrized(&(&xs * pr * &xs));
    let symplectic: Vec<f64> = sym_eig(&m)?
        .eigenvalues
        .iter()
        .map(|l| l.max(0.25).sqrt())
        .collect();

    let epsilons: Vec<f64> = symplectic
        .iter()
        .filter(|nu| **nu - 0.5 >= UNENTANGLED_TOL)
        .map(|nu| ((nu + 0.5) / (nu - 0.5)).ln())
        .rev()
        .collect();
    let entropy = epsilons.iter().map(|&e| thermal_mode_entropy(e)).sum();

    let ground: f64 = epsilons.iter().map(|e| -(-e).exp_m1()).product();
    let active = &epsilons[..n_modes.min(epsilons.len())];
    let mut rho_eigenvalues = Vec::new();
    enumerate_occupations(active, cutoff, 0, 0.0, ground.ln(), &mut rho_eigenvalues);
    rho_eigenvalues.sort_by(|a, b| b.total_cmp(a));

    Ok(EntanglementSpectrum {
        symplectic,
        epsilons,
        rho_eigenvalues,
        entropy,
    })
}

fn enumerate_occupations(
    eps: &[f64],
    quanta_left: usize,
    mode: usize,
    energy: f64,
    ln_ground: f64,
    out: &mut Vec<f64>,
) {
    if mode == eps.len() {
        out.push((ln_ground - energy).exp());
        return;
    }
    for n in 0..=quanta_left {
        enumerate_occupations(
            eps,
            quanta_left - n,
            mode + 1,
            energy + n as f64 * eps[mode],
            ln_ground,
            out,
        );
    }
}

/// `K_{iℓ}(x) = ∫₀^∞ e^{−x cosh t} cos(ℓt) dt`.
///
/// The integrand is even in `t` and decays doubly exponentially, so the
/// trapezoid rule converges geometrically; the step is halved until two
/// successive sums agree to [`BESSEL_TOL`] relative to the result or to the
/// scale `∫|integrand|`.
pub fn bessel_k_imag(ell: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("K_iℓ(x) needs x > 0, got {x}")));
    }
    if !ell.is_finite() || ell < 0.0 {
        return Err(Error::Domain(format!("order ℓ must be finite and ≥ 0, got {ell}")));
    }
    let t_max = 20f64.max(((40.0 + (1.0 / BESSEL_TOL).ln()) / x).max(1.0).acosh());
    let f = |t: f64| (-x * t.cosh()).exp() * (ell * t).cos();
    let g = |t: f64| (-x * t.cosh()).exp();

    let mut n = 64usize;
    let mut h = t_max / n as f64;
    let mut sum = 0.5 * (f(0.0) + f(t_max)) + (1..n).map(|k| f(k as f64 * h)).sum::<f64>();
    let mut abs_sum = 0.5 * (g(0.0) + g(t_max)) + (1..n).map(|k| g(k as f64 * h)).sum::<f64>();
    let mut estimate = sum * h;
    for level in 0..20 {
        let h_new = h / 2.0;
        sum += (0..n).map(|k| f((2 * k + 1) as f64 * h_new)).sum::<f64>();
        abs_sum += (0..n).map(|k| g((2 * k + 1) as f64 * h_new)).sum::<f64>();
        n *= 2;
        h = h_new;
        let next = sum * h;
        let scale = 1e-14 * abs_sum * h;
        if level >= 1 && (next - estimate).abs() <= (BESSEL_TOL * next.abs()).max(scale) {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::NotConverged {
        matvecs: n,
        residual: f64::NAN,
    })
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct WaveSample {
    pub x: f64,
    pub value: f64,
}

/// `n_samples` log-spaced samples of `K_{iℓ}(mass·x)` on `[x_min, x_max]`.
pub fn wave_samples(
    ell: f64,
    mass: f64,
    x_min: f64,
    x_max: f64,
    n_samples: usize,
) -> Result<Vec<WaveSample>> {
    if !(x_min > 0.0 && x_max > x_min && x_max.is_finite()) {
        return Err(Error::Domain(format!(
            "need 0 < x_min < x_max, got [{x_min}, {x_max}]"
        )));
    }
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::Domain(format!("mass must be positive, got {mass}")));
    }
    if n_samples < 2 {
        return Err(Error::contract("need at least 2 samples"));
    }
    let ratio = (x_max / x_min).ln();
    (0..n_samples)
        .map(|i| {
            let x = if i + 1 == n_samples {
                x_max
            } else {
                x_min * (ratio * i as f64 / (n_samples - 1) as f64).exp()
            };
            Ok(WaveSample {
                x,
                value: bessel_k_imag(ell, mass * x)?,
            })
        })
        .collect()
}

/// Positions of sign changes, linearly interpolated between samples.
pub fn zero_crossings(samples: &[WaveSample]) -> Vec<f64> {
    samples
        .windows(2)
        .filter(|w| (w[0].value > 0.0) != (w[1].value > 0.0))
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            a.x + (b.x - a.x) * a.value / (a.value - b.value)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_matrix_convention() {
        let g = GaussianChain::new(4, 0.5).unwrap();
        assert_eq!(g.coupling[(0, 0)], 1.25);
        assert_eq!(g.coupling[(1, 1)], 2.25);
        assert_eq!(g.coupling[(3, 3)], 1.25);
        assert_eq!(g.coupling[(1, 2)], -1.0);
        assert_eq!(g.coupling[(0, 2)], 0.0);
        assert_eq!(GaussianChain::new(3, 0.0).unwrap().mass, MASS_FLOOR);
        assert!(GaussianChain::new(1, 1.0).is_err());
        assert!(GaussianChain::new(4, -1.0).is_err());
    }

    #[test]
    fn correlations_satisfy_uncertainty() {
        let g = GaussianChain::new(6, 0.7).unwrap();
        let (x, p) = g.correlations().unwrap();
        let xp = &x * &p;
        assert!((xp - DenseMatrix::identity(6, 6) * 0.25).amax() < 1e-12);
    }

    #[test]
    fn two_site_closed_form() {
        // Normal modes ω₋ = m and ω₊ = √(m²+2) give ν = (ω₊+ω₋)/(4√(ω₊ω₋)).
        let m: f64 = 1.0;
        let (wp, wm) = ((m * m + 2.0).sqrt(), m);
        let nu = (wp + wm) / (4.0 * (wp * wm).sqrt());
        let s = half_chain_spectrum(&GaussianChain::new(2, m).unwrap(), 1, 1, 12).unwrap();
        assert!((s.symplectic[0] - nu).abs() < 1e-12);
        let xi = (-s.epsilons[0]).exp();
        assert!((s.rho_eigenvalues[1] / s.rho_eigenvalues[0] - xi).abs() < 1e-12);
    }

    #[test]
    fn decoupled_chain_is_unentangled() {
        let s = half_chain_spectrum(&GaussianChain::new(6, 1e3).unwrap(), 3, 8, 12).unwrap();
        assert!(s.symplectic.iter().all(|nu| (nu - 0.5).abs() < 1e-6));
        assert!(s.entropy < 1e-5);
    }

    #[test]
    fn closed_entropy_matches_enumeration() {
        let s = half_chain_spectrum(&GaussianChain::new(20, 1.0).unwrap(), 10, 8, 12).unwrap();
        assert!((s.entropy - s.enumerated_entropy()).abs() < 1e-8);
        let total: f64 = s.rho_eigenvalues.iter().sum();
        assert!(total <= 1.0 + 1e-12 && total > 1.0 - 1e-6);
        assert!(s.epsilons.windows(2).all(|w| w[0] <= w[1]));
        assert!(s.rho_eigenvalues.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn spectrum_preconditions() {
        let g = GaussianChain::new(4, 1.0).unwrap();
        assert!(half_chain_spectrum(&g, 0, 1, 4).is_err());
        assert!(half_chain_spectrum(&g, 4, 1, 4).is_err());
        assert!(half_chain_spectrum(&g, 2, 0, 4).is_err());
    }

    #[test]
    fn bessel_k0_at_one() {
        assert!((bessel_k_imag(0.0, 1.0).unwrap() - 0.421_024_438_240_708_34).abs() < 1e-10);
        assert!(bessel_k_imag(0.0, 0.0).is_err());
        assert!(bessel_k_imag(0.0, -1.0).is_err());
    }

    #[test]
    fn bessel_large_x_asymptotics() {
        for ell in [0.0, 0.5] {
            for x in [30.0f64, 50.0] {
                let k = bessel_k_imag(ell, x).unwrap();
                let ratio = k * (2.0 * x / std::f64::consts::PI).sqrt() * x.exp();
                assert!((ratio - 1.0).abs() < 0.02, "ell {ell} x {x} ratio {ratio}");
            }
        }
    }

    #[test]
    fn bessel_ode_residual() {
        let h = 1e-3;
        for ell in [0.0, 1.0, 3.0] {
            for x in [0.5, 1.0, 2.5, 5.0] {
                let k = |x| bessel_k_imag(ell, x).unwrap();
                let (km, k0, kp) = (k(x - h), k(x), k(x + h));
                let d1 = (kp - km) / (2.0 * h);
                let d2 = (kp - 2.0 * k0 + km) / (h * h);
                let r = x * x * d2 + x * d1 + (ell * ell - x * x) * k0;
                assert!(r.abs() < 1e-6, "ell {ell} x {x} residual {r}");
            }
        }
    }

    #[test]
    fn k0_wave_is_positive() {
        let w = wave_samples(0.0, 1.0, 0.01, 20.0, 200).unwrap();
        assert!(w.iter().all(|s| s.value > 0.0));
        assert!(zero_crossings(&w).is_empty());
        assert_eq!(w.len(), 200);
        assert_eq!(w[199].x, 20.0);
    }

    #[test]
    fn wave_argument_checks() {
        assert!(wave_samples(1.0, 1.0, 0.0, 1.0, 10).is_err());
        assert!(wave_samples(1.0, 1.0, 2.0, 1.0, 10).is_err());
        assert!(wave_samples(1.0, 0.0, 0.1, 1.0, 10).is_err());
        assert!(wave_samples(1.0, 1.0, 0.1, 1.0, 1).is_err());
    }

    #[test]
    fn crossings_interpolate_linearly() {
        let s = [
            WaveSample { x: 1.0, value: 1.0 },
            WaveSample { x: 2.0, value: -1.0 },
            WaveSample { x: 3.0, value: -0.5 },
        ];
        assert_eq!(zero_crossings(&s), vec![1.5]);
    }
}
