//! Lasso instances, the random instance generator and the ℓ1 proximal map.

pub mod bundle;

use std::sync::Arc;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{check_len, norm_inf, SparseMatrix};
use crate::{Error, Result};

#[derive(Debug)]
struct LassoData {
    a: SparseMatrix,
    b: Vec<f64>,
    atb: Vec<f64>,
    tau: f64,
}

/// `min ½‖Ax − b‖² + τ‖x‖₁` together with the ADMM penalty `β`.
///
/// The data (`A`, `b`, `Aᵀb`, `τ`) is shared behind an `Arc`, so
/// [`LassoProblem::with_beta`] is cheap and every copy sees bit-identical data.
#[derive(Debug, Clone)]
pub struct LassoProblem {
    data: Arc<LassoData>,
    beta: f64,
}

impl LassoProblem {
    pub fn new(a: SparseMatrix, b: Vec<f64>, tau: f64, beta: f64) -> Result<Self> {
        check_len(a.rows(), b.len())?;
        if a.rows() == 0 || a.cols() == 0 {
            return Err(Error::config("A must have at least one row and one column"));
        }
        if !(tau > 0.0) {
            return Err(Error::config(format!("tau must be positive, got {tau}")));
        }
        check_beta(beta)?;
        let atb = a.matvec_transpose(&b)?;
        Ok(Self {
            data: Arc::new(LassoData { a, b, atb, tau }),
            beta,
        })
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self {
            data: Arc::clone(&self.data),
            beta,
        })
    }

    pub fn a(&self) -> &SparseMatrix {
        &self.data.a
    }

    pub fn b(&self) -> &[f64] {
        &self.data.b
    }

    pub fn atb(&self) -> &[f64] {
        &self.data.atb
    }

    pub fn tau(&self) -> f64 {
        self.data.tau
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Number of features.
    pub fn n(&self) -> usize {
        self.data.a.cols()
    }

    /// Number of observations.
    pub fn m(&self) -> usize {
        self.data.a.rows()
    }

    /// True when both problems share the same `A`, `b` and `τ` allocation.
    pub fn same_data(&self, other: &LassoProblem) -> bool {
        Arc::ptr_eq(&self.data, &other.data)
    }

    /// `AᵀA v`
    pub fn gram_apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let av = self.data.a.matvec(v)?;
        Ok(self.data.a.matvec_transpose(&av)?)
    }

    /// `M v = (AᵀA + βI) v`, never forming `AᵀA`.
    pub fn m_apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.gram_apply(v)?;
        for (o, vi) in out.iter_mut().zip(v) {
            *o += self.beta * vi;
        }
        Ok(out)
    }

    /// `∇f(x) = Aᵀ(Ax − b)`
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.data.a.matvec(x)?;
        for (ri, bi) in r.iter_mut().zip(&self.data.b) {
            *ri -= bi;
        }
        Ok(self.data.a.matvec_transpose(&r)?)
    }

    /// `½‖Ax − b‖² + τ‖y‖₁`
    pub fn objective(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_len(self.n(), y.len())?;
        let ax = self.data.a.matvec(x)?;
        let fit: f64 = ax.iter().zip(&self.data.b).map(|(a, b)| (a - b) * (a - b)).sum();
        let l1: f64 = y.iter().map(|v| v.abs()).sum();
        Ok(0.5 * fit + self.data.tau * l1)
    }

    /// Largest violation of `Aᵀ(Ax − b) ∈ −τ∂‖x‖₁`; zero exactly at a minimizer.
    pub fn kkt_residual(&self, x: &[f64]) -> Result<f64> {
        let g = self.gradient(x)?;
        let tau = self.data.tau;
        Ok(g.iter()
            .zip(x)
            .map(|(gi, xi)| {
                if *xi != 0.0 {
                    (gi + tau * xi.signum()).abs()
                } else {
                    (gi.abs() - tau).max(0.0)
                }
            })
            .fold(0.0, f64::max))
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("beta must be positive and finite, got {beta}")))
    }
}

/// Elementwise `sign(vᵢ)·max(|vᵢ| − κ, 0)`, the proximal map of `κ‖·‖₁`.
pub fn soft_threshold(v: &[f64], kappa: f64) -> Vec<f64> {
    debug_assert!(kappa >= 0.0);
    v.iter()
        .map(|&vi| {
            if vi > kappa {
                vi - kappa
            } else if vi < -kappa {
                vi + kappa
            } else {
                0.0
            }
        })
        .collect()
}

/// Random Lasso instance recipe: sparse standard-normal ground truth and
/// design, Gaussian observation noise, `τ = tau_factor·‖Aᵀb‖∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub n: usize,
    pub m: usize,
    /// Fraction of nonzeros in the ground truth.
    pub sparsity: f64,
    /// Fraction of nonzeros in `A`.
    pub density: f64,
    pub noise_var: f64,
    pub tau_factor: f64,
    pub seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            n: 200,
            m: 100,
            sparsity: 0.1,
            density: 0.5,
            noise_var: 1e-3,
            tau_factor: 0.1,
            seed: 0,
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::config("n and m must be positive"));
        }
        for (name, v) in [("sparsity", self.sparsity), ("density", self.density)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::config(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        if !(self.noise_var >= 0.0) {
            return Err(Error::config(format!("noise_var must be nonnegative, got {}", self.noise_var)));
        }
        if !(self.tau_factor > 0.0) {
            return Err(Error::config(format!("tau_factor must be positive, got {}", self.tau_factor)));
        }
        Ok(())
    }
}

/// `⌈density·count⌉`, clamped to `count`, tolerant of representation error
/// such as `0.1·2000 = 200.00000000000003`.
fn support_size(density: f64, count: usize) -> usize {
    let raw = density * count as f64;
    ((raw - 1e-9 * raw.max(1.0)).ceil().max(0.0) as usize).min(count)
}

/// Distinct positions chosen uniformly without replacement, in increasing order.
fn sparse_positions(rng: &mut ChaCha8Rng, count: usize, amount: usize) -> Vec<usize> {
    let mut pos = index::sample(rng, count, amount).into_vec();
    pos.sort_unstable();
    pos
}

/// Draws an instance; returns the problem and the ground truth `x̄`.
/// Fully deterministic in `spec.seed`.
pub fn generate(spec: &GeneratorSpec, beta: f64) -> Result<(LassoProblem, Vec<f64>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, m) = (spec.n, spec.m);

    let mut xbar = vec![0.0; n];
    for i in sparse_positions(&mut rng, n, support_size(spec.sparsity, n)) {
        xbar[i] = StandardNormal.sample(&mut rng);
    }

    // column-major linear positions p = j·m + i
    let positions = sparse_positions(&mut rng, m * n, support_size(spec.density, m * n));
    let mut col_ptr = vec![0usize; n + 1];
    let mut row_idx = Vec::with_capacity(positions.len());
    let mut values = Vec::with_capacity(positions.len());
    for p in positions {
        let (i, j) = (p % m, p / m);
        col_ptr[j + 1] += 1;
        row_idx.push(i);
        values.push(StandardNormal.sample(&mut rng));
    }
    for j in 0..n {
        col_ptr[j + 1] += col_ptr[j];
    }
    let a = SparseMatrix::new(m, n, col_ptr, row_idx, values)?;

    let mut b = a.matvec(&xbar)?;
    let sigma = spec.noise_var.sqrt();
    for bi in b.iter_mut() {
        let e: f64 = StandardNormal.sample(&mut rng);
        *bi += sigma * e;
    }

    let atb = a.matvec_transpose(&b)?;
    let tau = spec.tau_factor * norm_inf(&atb);
    if tau == 0.0 {
        return Err(Error::ZeroRegularization);
    }
    Ok((LassoProblem::new(a, b, tau, beta)?, xbar))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_threshold_definition() {
        assert_eq!(soft_threshold(&[3.0, -0.5, 0.0], 1.0), vec![2.0, 0.0, 0.0]);
        assert_eq!(soft_threshold(&[-3.0, 0.5], 0.0), vec![-3.0, 0.5]);
    }

    #[test]
    fn support_size_is_robust() {
        assert_eq!(support_size(0.1, 2000), 200);
        assert_eq!(support_size(1.0, 7), 7);
        assert_eq!(support_size(0.25, 10), 3);
        assert_eq!(support_size(1e-9, 10), 1);
    }

    #[test]
    fn identity_design_objective_and_kkt() {
        let p = LassoProblem::new(SparseMatrix::identity(2), vec![0.0, 0.0], 1.0, 1.0).unwrap();
        assert_eq!(p.objective(&[1.0, -2.0], &[1.0, -2.0]).unwrap(), 5.5);
        assert_eq!(p.kkt_residual(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(p.m_apply(&[1.0, -3.0]).unwrap(), vec![2.0, -6.0]);

        let q = LassoProblem::new(SparseMatrix::identity(2), vec![2.0, 0.0], 1.0, 1.0).unwrap();
        assert_eq!(q.kkt_residual(&[1.0, 0.0]).unwrap(), 0.0);
        assert!(q.kkt_residual(&[2.0, 0.0]).unwrap() > 0.5);
    }

    #[test]
    fn objective_at_origin_is_half_b_squared() {
        let (p, _) = generate(&GeneratorSpec { n: 10, m: 6, seed: 4, ..Default::default() }, 1.0).unwrap();
        let z = vec![0.0; 10];
        let half: f64 = 0.5 * p.b().iter().map(|v| v * v).sum::<f64>();
        assert!((p.objective(&z, &z).unwrap() - half).abs() <= 1e-14 * half);
    }

    #[test]
    fn invalid_inputs() {
        assert!(LassoProblem::new(SparseMatrix::identity(2), vec![1.0], 1.0, 1.0).is_err());
        assert!(LassoProblem::new(SparseMatrix::identity(2), vec![1.0, 1.0], 0.0, 1.0).is_err());
        assert!(LassoProblem::new(SparseMatrix::identity(2), vec![1.0, 1.0], 1.0, -1.0).is_err());
        let bad = GeneratorSpec { density: 0.0, ..Default::default() };
        assert!(generate(&bad, 1.0).is_err());
    }

    #[test]
    fn degenerate_observation_rejected() {
        // one nonzero in A and one in x̄: whenever they sit in different
        // columns, b = A·x̄ = 0 and τ collapses
        let mut zero_tau = 0;
        for seed in 0..64 {
            let spec = GeneratorSpec { n: 2, m: 1, sparsity: 0.5, density: 0.5, noise_var: 0.0, seed, ..Default::default() };
            match generate(&spec, 1.0) {
                Err(Error::ZeroRegularization) => zero_tau += 1,
                Ok((p, _)) => assert!(p.tau() > 0.0),
                Err(e) => panic!("unexpected {e}"),
            }
        }
        assert!(zero_tau > 0);
    }
}
