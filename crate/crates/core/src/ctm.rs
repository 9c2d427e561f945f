//! Corner transfer matrices of a small isotropic square-lattice Ising model.
//!
//! The lattice is `(2L+1) × (2L+1)` spins centred on the origin. The four
//! semiaxes (`L` spins each, origin excluded) split it into four quadrants of
//! `L × L` interior spins. For a fixed origin spin `o`, the quadrant matrix
//! `A_o[r, u]` sums the Boltzmann weight of one quadrant over its interior
//! with the bounding semiaxis configurations `r` (clockwise side) and `u`
//! (counter-clockwise side) held fixed.
//!
//! Index convention: bit `k` of a semiaxis index is the spin at distance
//! `k + 1` from the origin, bit set meaning `σ = +1`.
//!
//! Bond ownership: a quadrant owns its interior bonds and the bonds joining
//! its interior to either semiaxis with full weight. Bonds lying on a
//! semiaxis (including the one touching the origin) are shared by the two
//! adjacent quadrants and enter each with half weight. This makes `A_o`
//! symmetric, and gluing four copies counts each bond exactly once, so
//! `Z = Σ_o Tr(A_o⁴)`.
//!
//! With a fixed boundary the lattice is surrounded by a frame of `+1` spins
//! at distance `L + 1`; frame–frame bonds are constant and omitted.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;
use crate::qinfo::DensityMatrix;

/// Largest half-width with at most `2¹⁶` interior configurations per quadrant.
pub const MAX_HALF_WIDTH: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Free,
    Fixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CtmConfig {
    pub half_width: usize,
    /// `K = βJ`.
    pub beta_j: f64,
    pub boundary: Boundary,
}

impl CtmConfig {
    pub fn new(half_width: usize, beta_j: f64, boundary: Boundary) -> Result<Self> {
        let cfg = Self {
            half_width,
            beta_j,
            boundary,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.half_width == 0 || self.half_width > MAX_HALF_WIDTH {
            return Err(Error::SizeGuard(format!(
                "half width must lie in 1..={MAX_HALF_WIDTH}, got {}",
                self.half_width
            )));
        }
        if !self.beta_j.is_finite() {
            return Err(Error::Domain(format!("coupling must be finite, got {}", self.beta_j)));
        }
        Ok(())
    }

    /// Side length `2L + 1`.
    pub fn width(&self) -> usize {
        2 * self.half_width + 1
    }

    /// Number of free spins in the full lattice.
    pub fn total_spins(&self) -> usize {
        self.width() * self.width()
    }
}

/// The two origin-conditioned quadrant matrices, each `2^L × 2^L`.
#[derive(Clone, Debug)]
pub struct QuadrantMatrix {
    pub half_width: usize,
    /// Origin spin `+1`.
    pub plus: DenseMatrix,
    /// Origin spin `−1`.
    pub minus: DenseMatrix,
}

impl QuadrantMatrix {
    pub fn for_origin(&self, spin: i8) -> &DenseMatrix {
        if spin > 0 {
            &self.plus
        } else {
            &self.minus
        }
    }
}

fn spin(bits: usize, k: usize) -> f64 {
    if bits >> k & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `Σ_k s_k t_k` over the `l` spins of two parallel rows.
fn overlap(s: usize, t: usize, l: usize) -> f64 {
    (0..l).map(|k| spin(s, k) * spin(t, k)).sum()
}

/// Bonds along one semiaxis starting at the origin: `o·s₁ + Σ sₖ sₖ₊₁`, plus
/// the bond to the frame under a fixed boundary.
fn axis_energy(o: f64, s: usize, l: usize, fixed: bool) -> f64 {
    let mut e = o * spin(s, 0);
    for k in 0..l - 1 {
        e += spin(s, k) * spin(s, k + 1);
    }
    if fixed {
        e += spin(s, l - 1);
    }
    e
}

/// Sums the interior of one quadrant row by row: row `j` (distance `j + 1`
/// from the `r` semiaxis) couples to row `j − 1` or to `r`, and its first
/// spin couples to `u_j`.
pub fn build_quadrant(cfg: &CtmConfig) -> Result<QuadrantMatrix> {
    cfg.validate()?;
    let l = cfg.half_width;
    let k = cfg.beta_j;
    let fixed = cfg.boundary == Boundary::Fixed;
    let states = 1usize << l;

    let vertical = DenseMatrix::from_fn(states, states, |t, s| (k * overlap(t, s, l)).exp());
    let row_weight = |s: usize, u_spin: f64| {
        let mut e = u_spin * spin(s, 0);
        for i in 0..l - 1 {
            e += spin(s, i) * spin(s, i + 1);
        }
        if fixed {
            e += spin(s, l - 1);
        }
        (k * e).exp()
    };
    let top: Vec<f64> = (0..states)
        .map(|s| {
            if fixed {
                (k * (0..l).map(|i| spin(s, i)).sum::<f64>()).exp()
            } else {
                1.0
            }
        })
        .collect();
    let diag = |u_spin: f64| {
        DenseMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            states,
            (0..states).map(|s| row_weight(s, u_spin)),
        ))
    };
    let (d_up, d_down) = (diag(1.0), diag(-1.0));

    let mut interior = DenseMatrix::zeros(states, states);
    for u in 0..states {
        let mut m = DenseMatrix::identity(states, states);
        for j in 0..l {
            let d = if spin(u, j) > 0.0 { &d_up } else { &d_down };
            m = m * &vertical * d;
        }
        for r in 0..states {
            interior[(r, u)] = (0..states).map(|s| m[(r, s)] * top[s]).sum();
        }
    }

    let with_axes = |o: f64| {
        DenseMatrix::from_fn(states, states, |r, u| {
            let half = 0.5 * (axis_energy(o, r, l, fixed) + axis_energy(o, u, l, fixed));
            interior[(r, u)] * (k * half).exp()
        })
    };
    Ok(QuadrantMatrix {
        half_width: l,
        plus: with_axes(1.0),
        minus: with_axes(-1.0),
    })
}

fn fourth_power(a: &DenseMatrix) -> DenseMatrix {
    let a2 = a * a;
    &a2 * &a2
}

fn scaled_trace(cfg: &CtmConfig) -> Result<(f64, f64)> {
    let q = build_quadrant(cfg)?;
    let scale = q.plus.amax().max(q.minus.amax());
    let trace: f64 = [&q.plus, &q.minus]
        .iter()
        .map(|a| fourth_power(&(*a / scale)).trace())
        .sum();
    Ok((trace, scale))
}

/// `ln Z` with `Z = Σ_o Tr(A_o⁴)`, evaluated on rescaled matrices.
pub fn ln_partition_function(cfg: &CtmConfig) -> Result<f64> {
    let (trace, scale) = scaled_trace(cfg)?;
    Ok(trace.ln() + 4.0 * scale.ln())
}

/// `Z` itself; infinite when it overflows, in which case use
/// [`ln_partition_function`].
pub fn partition_function(cfg: &CtmConfig) -> Result<f64> {
    let (trace, scale) = scaled_trace(cfg)?;
    Ok(trace * scale.powi(4))
}

/// `ρ_R = Σ_o A_o⁴ / Z` on the configurations of one semiaxis.
pub fn half_row_density(cfg: &CtmConfig) -> Result<DensityMatrix> {
    let q = build_quadrant(cfg)?;
    let scale = q.plus.amax().max(q.minus.amax());
    let rho = fourth_power(&(&q.plus / scale)) + fourth_power(&(&q.minus / scale));
    DensityMatrix::from_unnormalized(crate::numerics::symmetrized(&rho))
}
