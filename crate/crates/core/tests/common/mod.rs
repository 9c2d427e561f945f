#![allow(dead_code)]

use dmrg_lab::oracles::OracleReport;
use dmrg_lab::qinfo::DensityMatrix;
use dmrg_lab::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Directory that receives one JSON file per oracle comparison when set.
pub const EMIT_ENV: &str = "DMRG_LAB_EMIT_ORACLE";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn random_state(rng: &mut impl Rng, rows: usize, cols: usize) -> DenseMatrix {
    let m = gaussian(rng, rows, cols);
    let n = m.norm();
    m / n
}

/// Orthonormal columns spanning a Haar-random `cols`-dimensional subspace.
pub fn random_isometry(rng: &mut impl Rng, rows: usize, cols: usize) -> DenseMatrix {
    gaussian(rng, rows, cols).qr().q()
}

pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> DenseMatrix {
    random_isometry(rng, n, n)
}

/// Full-rank density matrix `GGᵀ / Tr GGᵀ`.
pub fn random_density(rng: &mut impl Rng, n: usize) -> DensityMatrix {
    let g = gaussian(rng, n, n);
    DensityMatrix::from_unnormalized(&g * g.transpose()).unwrap()
}

pub fn random_probs(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

pub fn emit(report: &OracleReport) {
    let Ok(dir) = std::env::var(EMIT_ENV) else {
        return;
    };
    let path = std::path::Path::new(&dir).join(format!("{}.json", report.name));
    let text = serde_json::to_string_pretty(report).unwrap();
    std::fs::write(&path, text + "\n").unwrap();
}
