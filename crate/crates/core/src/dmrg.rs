//! White's infinite-system density matrix renormalization group.
//!
//! One iteration:
//!
//! 1. reflect the block `B` on the origin, forming the superblock `B · B̄`;
//! 2. find its ground state `ψ_ij` (block index `i`, mirror index `j`);
//! 3. build the block density matrix `ρ = ψψᵀ`;
//! 4. keep the `m` eigenvectors of `ρ` with the largest eigenvalues;
//! 5. add one site on the origin side of the truncated block.
//!
//! The environment is always the exact mirror image of the block, so the
//! model must be reflection symmetric. A superblock built from an `n`-site
//! block covers `2n` sites; its energy is `E(2n)` and the energy per site is
//! estimated as `[E(2n+2) − E(2n)]/2`.

use nalgebra::{DMatrixView, DMatrixViewMut};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::SiteModel;
use crate::numerics::{self, lanczos_ground, lanczos_lowest, DenseMatrix};
use crate::qinfo::{entropy_of, DensityMatrix};

/// Eigenvalues at the cut that lie within this of the first discarded one
/// are kept together.
pub const DEGENERACY_TOL: f64 = 1e-12;
/// Eigenvalues below this are numerical noise and never form a multiplet.
pub const DEGENERACY_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct TruncationReport {
    /// Descending, in `[0, 1]`.
    pub kept_eigenvalues: Vec<f64>,
    pub discarded_weight: f64,
    /// Von Neumann entropy of the full (untruncated) block density matrix, nats.
    pub entanglement_entropy: f64,
    pub m_kept: usize,
}

/// A renormalized block of `n_sites` physical sites in an `m`-state basis.
///
/// `edge_left[k]` / `edge_right[k]` are the `left` / `right` operators of bond
/// term `k` acting on the block site next to the origin, expressed in the
/// block basis. The mirror block shares the basis, so `edge_right` is what
/// the bond across the origin needs on the mirror side.
#[derive(Clone, Debug)]
pub struct Block {
    pub m: usize,
    pub n_sites: usize,
    pub h_block: DenseMatrix,
    pub edge_left: Vec<DenseMatrix>,
    pub edge_right: Vec<DenseMatrix>,
    pub basis_log: Vec<TruncationReport>,
}

impl Block {
    /// The one-site starting block.
    pub fn single_site(model: &SiteModel) -> Self {
        Self {
            m: model.d,
            n_sites: 1,
            h_block: model.site_term.clone(),
            edge_left: model.bond_terms.iter().map(|b| b.left.clone()).collect(),
            edge_right: model.bond_terms.iter().map(|b| b.right.clone()).collect(),
            basis_log: Vec::new(),
        }
    }

    /// Untruncated block of `n_sites` sites.
    pub fn exact(model: &SiteModel, n_sites: usize) -> Self {
        let mut b = Self::single_site(model);
        for _ in 1..n_sites.max(1) {
            b = enlarge_block(&b, model);
        }
        b
    }

    /// Rotates the block into the basis spanned by the columns of
    /// `projector` (`m × m'`, orthonormal columns).
    pub fn project(&self, projector: &DenseMatrix, report: TruncationReport) -> Self {
        let pt = projector.transpose();
        let rotate = |op: &DenseMatrix| &pt * op * projector;
        let mut basis_log = self.basis_log.clone();
        basis_log.push(report);
        Self {
            m: projector.ncols(),
            n_sites: self.n_sites,
            h_block: numerics::symmetrized(&rotate(&self.h_block)),
            edge_left: self.edge_left.iter().map(rotate).collect(),
            edge_right: self.edge_right.iter().map(rotate).collect(),
            basis_log,
        }
    }
}

/// Absorbs one fresh site on the origin side: `B → B ∘ site`, dimension
/// `m·d`, fresh site as the fast index.
pub fn enlarge_block(b: &Block, model: &SiteModel) -> Block {
    let d = model.d;
    let id_block = DenseMatrix::identity(b.m, b.m);
    let id_site = DenseMatrix::identity(d, d);
    let mut h = b.h_block.kronecker(&id_site) + id_block.kronecker(&model.site_term);
    for (k, bond) in model.bond_terms.iter().enumerate() {
        let left = if bond.left_is_identity() {
            id_block.clone()
        } else {
            b.edge_left[k].clone()
        };
        h += left.kronecker(&bond.right) * bond.coupling;
    }
    Block {
        m: b.m * d,
        n_sites: b.n_sites + 1,
        h_block: numerics::symmetrized(&h),
        edge_left: model
            .bond_terms
            .iter()
            .map(|bond| id_block.kronecker(&bond.left))
            .collect(),
        edge_right: model
            .bond_terms
            .iter()
            .map(|bond| id_block.kronecker(&bond.right))
            .collect(),
        basis_log: b.basis_log.clone(),
    }
}

/// Superblock ground state: `psi` is `m × m` (block × mirror block) with unit
/// Frobenius norm.
#[derive(Clone, Debug)]
pub struct SuperblockState {
    pub psi: DenseMatrix,
    pub energy: f64,
}

/// `H = H_B ⊗ 1 + 1 ⊗ H_B̄ + Σ c L ⊗ R` applied to `ψ` as
/// `H_B ψ + ψ H_B̄ᵀ + Σ c L ψ Rᵀ`. Bond terms with an identity factor are
/// folded into the one-sided pieces.
struct SuperblockOperator {
    m: usize,
    left_eff: DenseMatrix,
    right_eff_t: DenseMatrix,
    couplings: Vec<(f64, DenseMatrix, DenseMatrix)>,
}

impl SuperblockOperator {
    fn new(b: &Block, model: &SiteModel) -> Self {
        let mut left_eff = b.h_block.clone();
        let mut right_eff = b.h_block.clone();
        let mut couplings = Vec::new();
        for (k, bond) in model.bond_terms.iter().enumerate() {
            match (bond.left_is_identity(), bond.right_is_identity()) {
                (true, true) => {
                    left_eff += DenseMatrix::identity(b.m, b.m) * bond.coupling;
                }
                (false, true) => left_eff += &b.edge_left[k] * bond.coupling,
                (true, false) => right_eff += &b.edge_right[k] * bond.coupling,
                (false, false) => couplings.push((
                    bond.coupling,
                    b.edge_left[k].clone(),
                    b.edge_right[k].transpose(),
                )),
            }
        }
        Self {
            m: b.m,
            left_eff,
            right_eff_t: right_eff.transpose(),
            couplings,
        }
    }

    fn dim(&self) -> usize {
        self.m * self.m
    }

    fn apply(&self, x: &[f64], y: &mut [f64], scratch: &mut DenseMatrix) {
        let m = self.m;
        let xv = DMatrixView::from_slice(x, m, m);
        let mut yv = DMatrixViewMut::from_slice(y, m, m);
        yv.gemm(1.0, &self.left_eff, &xv, 0.0);
        yv.gemm(1.0, &xv, &self.right_eff_t, 1.0);
        for (c, l, rt) in &self.couplings {
            scratch.gemm(1.0, l, &xv, 0.0);
            yv.gemm(*c, &*scratch, rt, 1.0);
        }
    }
}

fn state_from_vector(m: usize, v: &[f64], energy: f64) -> SuperblockState {
    let mut psi = DenseMatrix::from_column_slice(m, m, v);
    let n = psi.norm();
    psi /= n;
    SuperblockState { psi, energy }
}

fn check_reflectable(model: &SiteModel) -> Result<()> {
    if !model.reflection_symmetric {
        return Err(Error::Model(format!(
            "model '{}' is not reflection symmetric; the mirrored environment would be wrong",
            model.name
        )));
    }
    Ok(())
}

const LANCZOS_MAX_MATVECS: usize = 20_000;

/// Ground state of the superblock formed by `b` and its mirror image. The
/// superblock Hamiltonian is applied matrix-free.
pub fn superblock_ground(b: &Block, model: &SiteModel, tol: f64, seed: u64) -> Result<SuperblockState> {
    check_reflectable(model)?;
    let op = SuperblockOperator::new(b, model);
    let mut scratch = DenseMatrix::zeros(op.m, op.m);
    let r = lanczos_ground(
        |x: &[f64], y: &mut [f64]| op.apply(x, y, &mut scratch),
        op.dim(),
        tol,
        LANCZOS_MAX_MATVECS,
        seed,
    )?;
    Ok(state_from_vector(op.m, &r.vector, r.energy))
}

/// The `k` lowest superblock states, ascending in energy.
pub fn superblock_lowest(
    b: &Block,
    model: &SiteModel,
    k: usize,
    tol: f64,
    seed: u64,
) -> Result<Vec<SuperblockState>> {
    check_reflectable(model)?;
    let op = SuperblockOperator::new(b, model);
    let mut scratch = DenseMatrix::zeros(op.m, op.m);
    let pairs = lanczos_lowest(
        |x: &[f64], y: &mut [f64]| op.apply(x, y, &mut scratch),
        op.dim(),
        k,
        tol,
        LANCZOS_MAX_MATVECS,
        seed,
    )?;
    Ok(pairs
        .iter()
        .map(|p| state_from_vector(op.m, &p.vector, p.energy))
        .collect())
}

/// `ρ = ψψᵀ / Tr(ψψᵀ)` on the block.
pub fn block_density_matrix(s: &SuperblockState) -> Result<DensityMatrix> {
    DensityMatrix::from_unnormalized(&s.psi * s.psi.transpose())
}

/// Projector onto the `m_max` dominant eigenvectors of `rho` (columns in
/// descending eigenvalue order). A multiplet straddling the cut is kept
/// whole, so `m_kept` may exceed `m_max`.
pub fn truncate(rho: &DensityMatrix, m_max: usize) -> Result<(DenseMatrix, TruncationReport)> {
    if m_max == 0 {
        return Err(Error::contract("m_max must be at least 1"));
    }
    let spectrum = rho.spectrum();
    let n = rho.dim();
    let desc: Vec<f64> = spectrum.eigenvalues.iter().rev().map(|l| l.clamp(0.0, 1.0)).collect();

    let mut m = m_max.min(n);
    while m < n && desc[m - 1] > DEGENERACY_FLOOR && desc[m - 1] - desc[m] <= DEGENERACY_TOL {
        m += 1;
    }

    let projector = DenseMatrix::from_fn(n, m, |i, k| spectrum.eigenvectors[(i, n - 1 - k)]);
    let report = TruncationReport {
        kept_eigenvalues: desc[..m].to_vec(),
        discarded_weight: desc[m..].iter().sum(),
        entanglement_entropy: entropy_of(&desc),
        m_kept: m,
    };
    Ok((projector, report))
}

/// `‖ψ − P Pᵀ ψ‖²_F`: squared distance between a state and its projection
/// onto the kept block subspace.
pub fn truncation_distance(psi: &DenseMatrix, projector: &DenseMatrix) -> f64 {
    let projected = projector * (projector.transpose() * psi);
    (psi - projected).norm_squared()
}

/// Weighted set of superblock states sharing one shape.
#[derive(Clone, Debug)]
pub struct TargetEnsemble {
    weights: Vec<f64>,
    states: Vec<DenseMatrix>,
}

impl TargetEnsemble {
    pub fn new(weights: Vec<f64>, states: Vec<DenseMatrix>) -> Result<Self> {
        if weights.is_empty() || weights.len() != states.len() {
            return Err(Error::contract("ensemble needs one weight per state"));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::contract("ensemble weights must be positive"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::contract(format!("ensemble weights sum to {total}")));
        }
        let shape = states[0].shape();
        if states.iter().any(|s| s.shape() != shape) {
            return Err(Error::contract("ensemble states differ in shape"));
        }
        Ok(Self { weights, states })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[DenseMatrix] {
        &self.states
    }
}

/// `ρ = Σₖ wₖ ψᵏ(ψᵏ)ᵀ`, normalized.
pub fn mixed_density_matrix(e: &TargetEnsemble) -> Result<DensityMatrix> {
    let rows = e.states[0].nrows();
    let rho = e
        .states
        .iter()
        .zip(&e.weights)
        .fold(DenseMatrix::zeros(rows, rows), |acc, (psi, w)| {
            acc + psi * psi.transpose() * *w
        });
    DensityMatrix::from_unnormalized(rho)
}

/// `Σₖ wₖ ‖ψᵏ − P Pᵀ ψᵏ‖²`.
pub fn weighted_truncation_distance(e: &TargetEnsemble, projector: &DenseMatrix) -> f64 {
    e.states
        .iter()
        .zip(&e.weights)
        .map(|(psi, w)| w * truncation_distance(psi, projector))
        .sum()
}

#[derive(Clone, Debug)]
pub struct DmrgConfig {
    pub m_max: usize,
    pub max_iters: usize,
    /// Convergence threshold on successive energy-per-site estimates.
    pub energy_tol: f64,
    pub seed: u64,
    /// Relative residual target of the superblock eigensolver.
    pub lanczos_tol: f64,
    /// Weights of the lowest superblock states folded into the density
    /// matrix. `[1.0]` targets the ground state alone.
    pub target_weights: Vec<f64>,
}

impl DmrgConfig {
    pub fn new(m_max: usize, max_iters: usize, energy_tol: f64, seed: u64) -> Self {
        Self {
            m_max,
            max_iters,
            energy_tol,
            seed,
            lanczos_tol: 1e-9,
            target_weights: vec![1.0],
        }
    }

    pub fn with_targets(mut self, weights: Vec<f64>) -> Self {
        self.target_weights = weights;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_max == 0 {
            return Err(Error::contract("m_max must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::contract("max_iters must be at least 1"));
        }
        if !(self.energy_tol > 0.0) {
            return Err(Error::contract("energy_tol must be positive"));
        }
        if !(self.lanczos_tol > 0.0) {
            return Err(Error::contract("lanczos_tol must be positive"));
        }
        if self.target_weights.is_empty() || self.target_weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::contract("target weights must be positive"));
        }
        let total: f64 = self.target_weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::contract(format!("target weights sum to {total}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DmrgResult {
    pub iterations: usize,
    /// Superblock ground energy per iteration.
    pub energy_trace: Vec<f64>,
    /// Number of physical sites in each superblock.
    pub superblock_sites: Vec<usize>,
    /// `[E(2n+2) − E(2n)]/2`, one entry per iteration after the first.
    pub energy_per_site_trace: Vec<f64>,
    /// Truncation of every iteration, in order.
    pub spectra: Vec<TruncationReport>,
    pub final_spectrum: TruncationReport,
    pub converged: bool,
    pub m_max: usize,
}

/// Runs the infinite-system algorithm until the energy per site changes by
/// less than `energy_tol` between iterations, or `max_iters` is reached.
pub fn run_infinite_dmrg(model: &SiteModel, cfg: &DmrgConfig) -> Result<DmrgResult> {
    cfg.validate()?;
    check_reflectable(model)?;
    let targets = cfg.target_weights.len();

    let mut block = Block::single_site(model);
    let mut energy_trace: Vec<f64> = Vec::new();
    let mut superblock_sites = Vec::new();
    let mut per_site: Vec<f64> = Vec::new();
    let mut spectra = Vec::new();
    let mut converged = false;

    for iteration in 0..cfg.max_iters {
        let wrap = |e: Error| Error::Iteration {
            iteration,
            source: Box::new(e),
        };
        let seed = cfg.seed.wrapping_add(iteration as u64);
        let (energy, rho) = if targets == 1 {
            let state = superblock_ground(&block, model, cfg.lanczos_tol, seed).map_err(wrap)?;
            let rho = block_density_matrix(&state).map_err(wrap)?;
            (state.energy, rho)
        } else if block.m * block.m < targets {
            return Err(wrap(Error::contract(format!(
                "superblock of dimension {} cannot host {targets} target states",
                block.m * block.m
            ))));
        } else {
            let states =
                superblock_lowest(&block, model, targets, cfg.lanczos_tol, seed).map_err(wrap)?;
            let energy = states[0].energy;
            let ensemble = TargetEnsemble::new(
                cfg.target_weights.clone(),
                states.into_iter().map(|s| s.psi).collect(),
            )
            .map_err(wrap)?;
            (energy, mixed_density_matrix(&ensemble).map_err(wrap)?)
        };

        if let Some(prev) = energy_trace.last() {
            let e = (energy - prev) / 2.0;
            if let Some(prev_e) = per_site.last() {
                if (e - prev_e).abs() < cfg.energy_tol {
                    converged = true;
                }
            }
            per_site.push(e);
        }
        energy_trace.push(energy);
        superblock_sites.push(2 * block.n_sites);

        let (projector, report) = truncate(&rho, cfg.m_max).map_err(wrap)?;
        spectra.push(report.clone());
        if converged || iteration + 1 == cfg.max_iters {
            break;
        }
        block = enlarge_block(&block.project(&projector, report), model);
    }

    let final_spectrum = spectra.last().cloned().expect("at least one iteration");
    Ok(DmrgResult {
        iterations: energy_trace.len(),
        energy_trace,
        superblock_sites,
        energy_per_site_trace: per_site,
        spectra,
        final_spectrum,
        converged,
        m_max: cfg.m_max,
    })
}
