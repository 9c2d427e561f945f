//! Density matrices of bipartite pure states and the distinguishability
//! measures built on them.
//!
//! Conventions: entropies are in nats; the Bures divergence `D` is bounded in
//! `[0, 4]` and tied to the Uhlmann fidelity by `F = (1 − D/4)²`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::numerics::tolerances::{PSD_TOL, TRACE_TOL};
use crate::numerics::{self, psd_sqrt, svd, sym_eig, DenseMatrix, EigResult};

/// Eigenvalues at or below this are dropped from entropy sums (`0 ln 0 = 0`).
pub const ENTROPY_EPS: f64 = 1e-14;

/// Symmetric, positive-semidefinite, unit-trace matrix. The spectrum is
/// computed once at construction and cached.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    mat: DenseMatrix,
    spectrum: OnceLock<EigResult>,
}

impl DensityMatrix {
    /// Wraps `mat` after checking symmetry (1e-12), eigenvalues ≥ −1e-12 and
    /// unit trace (1e-10).
    pub fn new(mat: DenseMatrix) -> Result<Self> {
        numerics::check_symmetric(&mat, "density matrix")?;
        let trace = mat.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::contract(format!("density matrix trace {trace} != 1")));
        }
        let mat = numerics::symmetrized(&mat);
        let eig = sym_eig(&mat)?;
        if eig.eigenvalues[0] < -PSD_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: eig.eigenvalues[0],
            });
        }
        let spectrum = OnceLock::new();
        let _ = spectrum.set(eig);
        Ok(Self { mat, spectrum })
    }

    /// Divides a PSD matrix by its trace first.
    pub fn from_unnormalized(mat: DenseMatrix) -> Result<Self> {
        let trace = mat.trace();
        if !(trace > 0.0) || !trace.is_finite() {
            return Err(Error::contract(format!("cannot normalize matrix with trace {trace}")));
        }
        Self::new(mat / trace)
    }

    /// Diagonal density matrix from a probability vector.
    pub fn diagonal(p: &[f64]) -> Result<Self> {
        Self::new(DenseMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(p)))
    }

    /// Pure state `|v⟩⟨v|` (normalized internally).
    pub fn pure(v: &[f64]) -> Result<Self> {
        let col = nalgebra::DVector::from_column_slice(v);
        Self::from_unnormalized(&col * col.transpose())
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.mat
    }

    /// Ascending eigen-decomposition.
    pub fn spectrum(&self) -> &EigResult {
        self.spectrum
            .get_or_init(|| sym_eig(&self.mat).expect("validated at construction"))
    }

    /// Eigenvalues, descending, with rounding negatives clamped to zero.
    pub fn eigenvalues_desc(&self) -> Vec<f64> {
        self.spectrum()
            .eigenvalues
            .iter()
            .rev()
            .map(|x| x.max(0.0))
            .collect()
    }
}

/// `−Σ λ ln λ` over a probability vector, skipping `λ ≤ ENTROPY_EPS`.
pub fn entropy_of(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > ENTROPY_EPS)
        .map(|&l| -l * l.ln())
        .sum()
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of(&rho.spectrum().eigenvalues).max(0.0)
}

fn check_normalized(psi: &DenseMatrix) -> Result<()> {
    numerics::check_finite(psi, "state")?;
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::contract(format!("state has Frobenius norm {norm}, expected 1")));
    }
    Ok(())
}

/// Reduced density matrices `ρ_L = ψψᵀ` and `ρ_R = ψᵀψ` of the pure state
/// `Σ ψ_aA |a⟩|A⟩`.
pub fn partial_densities(psi: &DenseMatrix) -> Result<(DensityMatrix, DensityMatrix)> {
    check_normalized(psi)?;
    let left = DensityMatrix::from_unnormalized(psi * psi.transpose())?;
    let right = DensityMatrix::from_unnormalized(psi.transpose() * psi)?;
    Ok((left, right))
}

#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    /// Descending, `Σλ² = 1`.
    pub coefficients: Vec<f64>,
    pub left_vectors: DenseMatrix,
    pub right_vectors: DenseMatrix,
}

impl SchmidtDecomposition {
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut l = self.left_vectors.clone();
        for (k, c) in self.coefficients.iter().enumerate() {
            l.column_mut(k).scale_mut(*c);
        }
        l * self.right_vectors.transpose()
    }
}

pub fn schmidt(psi: &DenseMatrix) -> Result<SchmidtDecomposition> {
    check_normalized(psi)?;
    let s = svd(psi)?;
    Ok(SchmidtDecomposition {
        coefficients: s.singular_values,
        left_vectors: s.u,
        right_vectors: s.v,
    })
}

fn check_same_dim(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<()> {
    if r1.dim() != r2.dim() {
        return Err(Error::DimensionMismatch {
            expected: r1.dim(),
            found: r2.dim(),
        });
    }
    Ok(())
}

/// Uhlmann fidelity `[Tr √(√ρ₁ ρ₂ √ρ₁)]²`, clamped to `[0, 1]`.
pub fn fidelity(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    check_same_dim(r1, r2)?;
    let s1 = psd_sqrt(r1.matrix())?;
    let inner = numerics::symmetrized(&(&s1 * r2.matrix() * &s1));
    // The product is PSD in exact arithmetic; scrub rounding negatives.
    let eig = sym_eig(&inner)?;
    let root_trace: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// Bures divergence `4(1 − √F)`, in `[0, 4]`.
pub fn bures_distance(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    let f = fidelity(r1, r2)?;
    Ok((4.0 * (1.0 - f.sqrt())).clamp(0.0, 4.0))
}

/// `2 Tr (W₁ − W₂)(W₁ − W₂)ᵀ` for one pair of factorizations
/// `ρ₁ = W₁W₁ᵀ`, `ρ₂ = W₂W₂ᵀ`. Its infimum over factorizations is the Bures
/// divergence.
pub fn factorization_distance(w1: &DenseMatrix, w2: &DenseMatrix) -> f64 {
    let diff = w1 - w2;
    2.0 * (&diff * diff.transpose()).trace()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceOut {
    /// Trace over the first factor, keep `B`.
    A,
    /// Trace over the second factor, keep `A`.
    B,
}

/// Partial trace of a matrix on `A ⊗ B` (index `a·dim_b + b`).
pub fn partial_trace_matrix(
    m: &DenseMatrix,
    dim_a: usize,
    dim_b: usize,
    side: TraceOut,
) -> Result<DenseMatrix> {
    if m.nrows() != dim_a * dim_b || !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: dim_a * dim_b,
            found: m.nrows(),
        });
    }
    Ok(match side {
        TraceOut::B => DenseMatrix::from_fn(dim_a, dim_a, |a, a2| {
            (0..dim_b).map(|b| m[(a * dim_b + b, a2 * dim_b + b)]).sum()
        }),
        TraceOut::A => DenseMatrix::from_fn(dim_b, dim_b, |b, b2| {
            (0..dim_a).map(|a| m[(a * dim_b + b, a * dim_b + b2)]).sum()
        }),
    })
}

pub fn partial_trace(
    rho: &DensityMatrix,
    dim_a: usize,
    dim_b: usize,
    side: TraceOut,
) -> Result<DensityMatrix> {
    DensityMatrix::from_unnormalized(partial_trace_matrix(rho.matrix(), dim_a, dim_b, side)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyPair {
    pub left: f64,
    pub right: f64,
}

impl EntropyPair {
    pub fn sum(&self) -> f64 {
        self.left + self.right
    }
}

/// Entropies of two subsystems before and after a joint orthogonal
/// evolution `ρ' = U (ρ_L ⊗ ρ_R) Uᵀ`.
pub fn interaction_entropy_experiment(
    r1: &DensityMatrix,
    r2: &DensityMatrix,
    u: &DenseMatrix,
) -> Result<(EntropyPair, EntropyPair)> {
    let (da, db) = (r1.dim(), r2.dim());
    if u.shape() != (da * db, da * db) {
        return Err(Error::DimensionMismatch {
            expected: da * db,
            found: u.nrows(),
        });
    }
    let gram = u.transpose() * u - DenseMatrix::identity(da * db, da * db);
    if gram.amax() > 1e-10 {
        return Err(Error::contract("evolution matrix is not orthogonal"));
    }
    let joint = r1.matrix().kronecker(r2.matrix());
    let evolved = numerics::symmetrized(&(u * joint * u.transpose()));
    let left = DensityMatrix::from_unnormalized(partial_trace_matrix(&evolved, da, db, TraceOut::B)?)?;
    let right = DensityMatrix::from_unnormalized(partial_trace_matrix(&evolved, da, db, TraceOut::A)?)?;
    Ok((
        EntropyPair {
            left: von_neumann_entropy(r1),
            right: von_neumann_entropy(r2),
        },
        EntropyPair {
            left: von_neumann_entropy(&left),
            right: von_neumann_entropy(&right),
        },
    ))
}
