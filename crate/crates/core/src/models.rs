//! Nearest-neighbour chain Hamiltonians with open boundaries, and exact
//! diagonalization of small chains.
//!
//! Basis states of an `N`-site chain are ordered with site 0 as the most
//! significant digit: `index = Σ sᵢ · d^(N-1-i)`. DMRG blocks use the same
//! convention when they absorb a site.

use crate::error::{Error, Result};
use crate::numerics::{self, dense_apply, lanczos_ground, lanczos_lowest, DenseMatrix};

/// `coupling · (left ⊗ right)` acting on every nearest-neighbour bond
/// `(i, i+1)`, with `left` on site `i`.
#[derive(Clone, Debug)]
pub struct BondTerm {
    pub left: DenseMatrix,
    pub right: DenseMatrix,
    pub coupling: f64,
}

impl BondTerm {
    pub fn new(left: DenseMatrix, right: DenseMatrix, coupling: f64) -> Self {
        Self {
            left,
            right,
            coupling,
        }
    }

    pub fn left_is_identity(&self) -> bool {
        is_identity(&self.left)
    }

    pub fn right_is_identity(&self) -> bool {
        is_identity(&self.right)
    }

    /// The `d²×d²` two-site matrix `coupling · left ⊗ right`.
    pub fn two_site(&self) -> DenseMatrix {
        self.left.kronecker(&self.right) * self.coupling
    }
}

fn is_identity(m: &DenseMatrix) -> bool {
    m.is_square() && *m == DenseMatrix::identity(m.nrows(), m.ncols())
}

/// Local Hilbert-space data defining a translation-invariant chain
/// `H = Σᵢ site_termᵢ + Σᵢ Σₖ cₖ leftₖ,ᵢ ⊗ rightₖ,ᵢ₊₁`.
#[derive(Clone, Debug)]
pub struct SiteModel {
    pub name: String,
    pub d: usize,
    pub site_term: DenseMatrix,
    pub bond_terms: Vec<BondTerm>,
    /// Whether the chain Hamiltonian is invariant under site reversal.
    /// The infinite-system DMRG mirrors the block and requires it.
    pub reflection_symmetric: bool,
}

impl SiteModel {
    /// Validates the local data. Individual bond operators may be
    /// antisymmetric (e.g. `iSʸ`), but each two-site product must be
    /// symmetric so the Hamiltonian is.
    pub fn new(
        name: impl Into<String>,
        site_term: DenseMatrix,
        bond_terms: Vec<BondTerm>,
        reflection_symmetric: bool,
    ) -> Result<Self> {
        let d = site_term.nrows();
        if d < 2 {
            return Err(Error::Model("local dimension must be at least 2".into()));
        }
        numerics::check_symmetric(&site_term, "site term")
            .map_err(|e| Error::Model(e.to_string()))?;
        for (k, b) in bond_terms.iter().enumerate() {
            if b.left.shape() != (d, d) || b.right.shape() != (d, d) {
                return Err(Error::Model(format!("bond term {k}: operators must be {d}x{d}")));
            }
            numerics::check_symmetric(&b.two_site(), "bond term")
                .map_err(|e| Error::Model(format!("bond term {k}: {e}")))?;
        }
        Ok(Self {
            name: name.into(),
            d,
            site_term,
            bond_terms,
            reflection_symmetric,
        })
    }

    /// Sum of all bond terms as one `d²×d²` matrix.
    pub fn bond_matrix(&self) -> DenseMatrix {
        let d2 = self.d * self.d;
        self.bond_terms
            .iter()
            .fold(DenseMatrix::zeros(d2, d2), |acc, b| acc + b.two_site())
    }
}

/// A model on a finite open chain.
#[derive(Clone, Debug)]
pub struct ChainSpec {
    pub model: SiteModel,
    pub n_sites: usize,
}

impl ChainSpec {
    pub fn new(model: SiteModel, n_sites: usize) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::contract("a chain needs at least 2 sites"));
        }
        Ok(Self { model, n_sites })
    }

    /// Hilbert-space dimension `dᴺ`, or `None` on overflow.
    pub fn dim(&self) -> Option<usize> {
        (0..self.n_sites).try_fold(1usize, |acc, _| acc.checked_mul(self.model.d))
    }
}

pub fn pauli_x() -> DenseMatrix {
    DenseMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_z() -> DenseMatrix {
    DenseMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// Transverse-field Ising chain `H = −Σ σˣᵢσˣᵢ₊₁ − g Σ σᶻᵢ`.
pub fn tfim(g: f64) -> SiteModel {
    SiteModel::new(
        "tfim",
        pauli_z() * (-g),
        vec![BondTerm::new(pauli_x(), pauli_x(), -1.0)],
        true,
    )
    .expect("tfim operators are valid")
}

/// Spin-½ XXZ chain `H = Σ (SˣSˣ + SʸSʸ + jz SᶻSᶻ)`.
///
/// `SʸSʸ = −(iSʸ)⊗(iSʸ)` with `iSʸ` real antisymmetric, so every matrix in
/// the model is real.
pub fn heisenberg(jz: f64) -> SiteModel {
    let sx = DenseMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
    let isy = DenseMatrix::from_row_slice(2, 2, &[0.0, 0.5, -0.5, 0.0]);
    let sz = DenseMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, -0.5]);
    SiteModel::new(
        "heisenberg",
        DenseMatrix::zeros(2, 2),
        vec![
            BondTerm::new(sx.clone(), sx, 1.0),
            BondTerm::new(isy.clone(), isy, -1.0),
            BondTerm::new(sz.clone(), sz, jz),
        ],
        true,
    )
    .expect("heisenberg operators are valid")
}

/// Truncated oscillator operators `(φ, φ², p²)` on the lowest `d` number
/// states. `φ²` and `p²` are the exact operators projected onto the
/// truncated space (not squares of truncated matrices), so every chain
/// Hamiltonian built from them is a compression of the exact one and its
/// energies are variational upper bounds.
pub fn oscillator_operators(d: usize) -> (DenseMatrix, DenseMatrix, DenseMatrix) {
    let big = d + 1;
    let mut lower = DenseMatrix::zeros(big, big);
    for n in 1..big {
        lower[(n - 1, n)] = (n as f64).sqrt();
    }
    let raise = lower.transpose();
    let phi_big = (&lower + &raise) * std::f64::consts::FRAC_1_SQRT_2;
    // p = i·a_p with a_p = (a† − a)/√2 real antisymmetric; p² = −a_p².
    let ap_big = (&raise - &lower) * std::f64::consts::FRAC_1_SQRT_2;
    let phi2_big = &phi_big * &phi_big;
    let p2_big = -(&ap_big * &ap_big);

    let phi = phi_big.view((0, 0), (d, d)).into_owned();
    let phi2 = numerics::symmetrized(&phi2_big.view((0, 0), (d, d)).into_owned());
    let p2 = numerics::symmetrized(&p2_big.view((0, 0), (d, d)).into_owned());
    (phi, phi2, p2)
}

/// Chain of coupled oscillators
/// `H = Σ [p²ₙ/2 + (φₙ₊₁−φₙ)²/2 + mass² φ²ₙ/2]`, each site truncated to
/// `d_levels` number states of an oscillator of frequency
/// `√(mass² + 2)`, the bulk on-site frequency.
///
/// The gradient term is split over bonds as `½φ²⊗1 + ½1⊗φ² − φ⊗φ`, so the
/// end sites of an open chain carry a single `½φ²` from the coupling.
pub fn harmonic_chain(mass: f64, d_levels: usize) -> Result<SiteModel> {
    harmonic_chain_in_basis(mass, d_levels, (mass * mass + 2.0).sqrt())
}

/// [`harmonic_chain`] truncated in the number basis of an oscillator of
/// frequency `omega`: `φ = (a + a†)/√(2ω)`, `p = i√(ω/2)(a† − a)`.
pub fn harmonic_chain_in_basis(mass: f64, d_levels: usize, omega: f64) -> Result<SiteModel> {
    if d_levels < 2 {
        return Err(Error::Model("d_levels must be at least 2".into()));
    }
    if !(mass >= 0.0) || !mass.is_finite() {
        return Err(Error::Model(format!("mass must be finite and non-negative, got {mass}")));
    }
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::Model(format!("basis frequency must be positive, got {omega}")));
    }
    let (phi, phi2, p2) = oscillator_operators(d_levels);
    let phi = phi / omega.sqrt();
    let phi2 = phi2 / omega;
    let p2 = p2 * omega;
    let id = DenseMatrix::identity(d_levels, d_levels);
    let site = (&p2 + &phi2 * (mass * mass)) * 0.5;
    SiteModel::new(
        "harmonic",
        site,
        vec![
            BondTerm::new(phi2.clone(), id.clone(), 0.5),
            BondTerm::new(id, phi2, 0.5),
            BondTerm::new(phi.clone(), phi, -1.0),
        ],
        true,
    )
}

/// Largest Hilbert space `exact_spectrum` will touch.
pub const MAX_EXACT_DIM: usize = 1 << 16;
/// Up to this dimension the chain is diagonalized densely.
const DENSE_DIM: usize = 512;

/// `y += coeff · (1 ⊗ op ⊗ 1) x` with `op` acting on a `q`-dimensional
/// factor sitting between `left` and `right` dimensions.
fn apply_local(op: &DenseMatrix, left: usize, right: usize, coeff: f64, x: &[f64], y: &mut [f64]) {
    let q = op.nrows();
    for l in 0..left {
        for r in 0..right {
            for s_out in 0..q {
                let mut acc = 0.0;
                for s_in in 0..q {
                    let o = op[(s_out, s_in)];
                    if o != 0.0 {
                        acc += o * x[(l * q + s_in) * right + r];
                    }
                }
                y[(l * q + s_out) * right + r] += coeff * acc;
            }
        }
    }
}

/// Matrix-free `y = H x` for the open chain.
pub fn apply_chain_hamiltonian(spec: &ChainSpec, x: &[f64], y: &mut [f64]) {
    let d = spec.model.d;
    let n = spec.n_sites;
    y.iter_mut().for_each(|v| *v = 0.0);
    let bond = spec.model.bond_matrix();
    let pow = |k: usize| d.pow(k as u32);
    for i in 0..n {
        apply_local(&spec.model.site_term, pow(i), pow(n - 1 - i), 1.0, x, y);
    }
    for i in 0..n - 1 {
        apply_local(&bond, pow(i), pow(n - 2 - i), 1.0, x, y);
    }
}

fn guarded_dim(spec: &ChainSpec) -> Result<usize> {
    match spec.dim() {
        Some(dim) if dim <= MAX_EXACT_DIM => Ok(dim),
        _ => Err(Error::SizeGuard(format!(
            "d^N = {}^{} exceeds {MAX_EXACT_DIM}",
            spec.model.d, spec.n_sites
        ))),
    }
}

/// Dense chain Hamiltonian (open boundaries).
pub fn chain_hamiltonian(spec: &ChainSpec) -> Result<DenseMatrix> {
    let dim = guarded_dim(spec)?;
    if dim > 4096 {
        return Err(Error::SizeGuard(format!("dense Hamiltonian of dimension {dim}")));
    }
    let mut h = DenseMatrix::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    let mut col = vec![0.0; dim];
    for j in 0..dim {
        e[j] = 1.0;
        apply_chain_hamiltonian(spec, &e, &mut col);
        h.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    Ok(numerics::symmetrized(&h))
}

/// The `k` lowest energies of the open chain, ascending.
pub fn exact_spectrum(spec: &ChainSpec, k: usize) -> Result<Vec<f64>> {
    let dim = guarded_dim(spec)?;
    if k == 0 || k > dim {
        return Err(Error::contract(format!("k = {k} outside 1..={dim}")));
    }
    if dim <= DENSE_DIM {
        let eig = numerics::sym_eig(&chain_hamiltonian(spec)?)?;
        return Ok(eig.eigenvalues[..k].to_vec());
    }
    let pairs = lanczos_lowest(
        |x: &[f64], y: &mut [f64]| apply_chain_hamiltonian(spec, x, y),
        dim,
        k,
        1e-11,
        200_000,
        0x5eed,
    )?;
    Ok(pairs.into_iter().map(|p| p.energy).collect())
}

/// Ground energy and state of the open chain.
pub fn exact_ground_state(spec: &ChainSpec) -> Result<(f64, Vec<f64>)> {
    let dim = guarded_dim(spec)?;
    if dim <= DENSE_DIM {
        let h = chain_hamiltonian(spec)?;
        let eig = numerics::sym_eig(&h)?;
        let v = eig.eigenvectors.column(0).iter().copied().collect();
        return Ok((eig.eigenvalues[0], v));
    }
    let r = lanczos_ground(
        |x: &[f64], y: &mut [f64]| apply_chain_hamiltonian(spec, x, y),
        dim,
        1e-11,
        200_000,
        0x5eed,
    )?;
    Ok((r.energy, r.vector))
}

/// Consistency helper: Lanczos ground energy of an explicit matrix.
pub fn lanczos_on_matrix(h: &DenseMatrix, tol: f64, seed: u64) -> Result<f64> {
    Ok(lanczos_ground(dense_apply(h), h.nrows(), tol, 100_000, seed)?.energy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(model: SiteModel, n: usize) -> ChainSpec {
        ChainSpec::new(model, n).unwrap()
    }

    #[test]
    fn tfim_two_site_limits() {
        let e = exact_spectrum(&spec(tfim(0.0), 2), 1).unwrap();
        assert!((e[0] + 1.0).abs() < 1e-12);
        let e = exact_spectrum(&spec(tfim(1.0), 2), 4).unwrap();
        let s5 = 5f64.sqrt();
        for (got, want) in e.iter().zip([-s5, -1.0, 1.0, s5]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn heisenberg_two_site_levels() {
        let e = exact_spectrum(&spec(heisenberg(1.0), 2), 4).unwrap();
        for (got, want) in e.iter().zip([-0.75, 0.25, 0.25, 0.25]) {
            assert!((got - want).abs() < 1e-12);
        }
        let xx = exact_spectrum(&spec(heisenberg(0.0), 2), 1).unwrap();
        assert!((xx[0] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_oscillator_is_exact() {
        // A lone site has no bond, so its φ² weight is mass²/2 only and its
        // frequency is the mass.
        for mass in [0.5, 1.0, 2.0] {
            let m = harmonic_chain_in_basis(mass, 8, mass).unwrap();
            let eig = numerics::sym_eig(&m.site_term).unwrap();
            assert!((eig.eigenvalues[0] - 0.5 * mass).abs() < 1e-12);
        }
        let shifted = harmonic_chain(1.0, 8).unwrap();
        let ground = numerics::sym_eig(&shifted.site_term).unwrap().eigenvalues[0];
        assert!((0.5 - 1e-12..0.5 + 1e-3).contains(&ground), "{ground}");
    }

    #[test]
    fn two_coupled_oscillators() {
        let e = exact_spectrum(&spec(harmonic_chain(1.0, 10).unwrap(), 2), 1).unwrap();
        let exact = 0.5 * (1.0 + 3f64.sqrt());
        assert!(e[0] >= exact - 1e-12);
        assert!((e[0] - exact).abs() < 1e-6, "{}", e[0]);
    }

    #[test]
    fn harmonic_truncation_is_variational_and_monotone() {
        let exact = 0.5 * (1.0 + 3f64.sqrt());
        let energies: Vec<f64> = (3..=10)
            .map(|d| exact_spectrum(&spec(harmonic_chain(1.0, d).unwrap(), 2), 1).unwrap()[0])
            .collect();
        assert!(energies.iter().all(|e| *e >= exact - 1e-12));
        assert!(energies.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn hamiltonians_are_symmetric() {
        for model in [tfim(0.7), heisenberg(0.4), harmonic_chain(0.5, 4).unwrap()] {
            let h = chain_hamiltonian(&spec(model, 3)).unwrap();
            assert!(numerics::max_asymmetry(&h) < 1e-12);
        }
    }

    #[test]
    fn tfim_ground_energy_decreases_with_field() {
        let energies: Vec<f64> = [0.0, 0.25, 0.5, 1.0, 1.5, 2.0]
            .iter()
            .map(|&g| exact_spectrum(&spec(tfim(g), 6), 1).unwrap()[0])
            .collect();
        assert!(energies.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn lanczos_path_agrees_with_dense_path() {
        // N = 10 crosses DENSE_DIM and goes through lanczos_lowest.
        let big = exact_spectrum(&spec(tfim(0.8), 10), 2).unwrap();
        let h = chain_hamiltonian(&spec(tfim(0.8), 10)).unwrap();
        let dense = numerics::sym_eig(&h).unwrap();
        assert!((big[0] - dense.eigenvalues[0]).abs() < 1e-9);
        assert!((big[1] - dense.eigenvalues[1]).abs() < 1e-9);
    }

    #[test]
    fn n2_lanczos_consistency() {
        for model in [tfim(1.3), heisenberg(0.6), harmonic_chain(1.0, 5).unwrap()] {
            let s = spec(model, 2);
            let e = exact_spectrum(&s, 1).unwrap()[0];
            let l = lanczos_on_matrix(&chain_hamiltonian(&s).unwrap(), 1e-12, 4).unwrap();
            assert!((e - l).abs() < 1e-10);
        }
    }

    #[test]
    fn size_guard() {
        let s = spec(tfim(1.0), 17);
        assert!(matches!(exact_spectrum(&s, 1), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn rejects_invalid_models() {
        assert!(harmonic_chain(1.0, 1).is_err());
        let bad = DenseMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(SiteModel::new("bad", bad, vec![], true).is_err());
        assert!(ChainSpec::new(tfim(1.0), 1).is_err());
    }
}
