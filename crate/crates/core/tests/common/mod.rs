#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vmadmm::{generate, DenseMatrix, GeneratorSpec, LassoProblem, SparseMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_na(d: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(d.rows(), d.cols(), d.values())
}

pub fn from_na(m: &DMatrix<f64>) -> DenseMatrix {
    DenseMatrix::from_col_major(m.nrows(), m.ncols(), m.as_slice().to_vec()).unwrap()
}

pub fn sparse_to_na(a: &SparseMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(a.rows(), a.cols());
    for (i, j, v) in a.triplets() {
        d[(i, j)] += v;
    }
    d
}

pub fn vec_na(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

pub fn gauss_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect()
}

/// `GᵀG + shift·I` with Gaussian `G`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
    g.transpose() * &g + DMatrix::identity(n, n) * shift
}

pub fn min_eig(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

pub fn max_eig(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().max()
}

pub fn instance(n: usize, m: usize, sparsity: f64, density: f64, seed: u64, beta: f64) -> LassoProblem {
    let spec = GeneratorSpec {
        n,
        m,
        sparsity,
        density,
        seed,
        ..Default::default()
    };
    generate(&spec, beta).unwrap().0
}

/// Dense `M = AᵀA + βI` computed from the dense design.
pub fn dense_m(prob: &LassoProblem) -> DMatrix<f64> {
    let a = sparse_to_na(prob.a());
    a.transpose() * &a + DMatrix::identity(prob.n(), prob.n()) * prob.beta()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(1e-300)
}
