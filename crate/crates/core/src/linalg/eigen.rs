use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_len, dot, norm2, DenseMatrix, LinalgError};

/// Power iteration for the dominant eigenvalue of a symmetric PSD operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    /// Stop once the relative Rayleigh-quotient change drops to this.
    pub tol: f64,
    pub max_iter: usize,
    /// Seeds the pseudorandom start vector.
    pub seed: u64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 1000,
            seed: 0,
        }
    }
}

impl PowerIteration {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn run(&self, dim: usize, mut apply: impl FnMut(&[f64]) -> Vec<f64>) -> Result<f64, LinalgError> {
        assert!(dim >= 1, "power iteration needs dim >= 1");
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let nv = norm2(&v);
        v.iter_mut().for_each(|x| *x /= nv);

        let mut prev: Option<f64> = None;
        let mut rq = 0.0;
        for _ in 0..self.max_iter {
            let w = apply(&v);
            check_len(dim, w.len())?;
            rq = dot(&v, &w);
            let nw = norm2(&w);
            if nw == 0.0 {
                return Ok(0.0);
            }
            if let Some(p) = prev {
                if (rq - p).abs() <= self.tol * rq.abs() {
                    return Ok(rq);
                }
            }
            prev = Some(rq);
            v = w.into_iter().map(|x| x / nw).collect();
        }
        Err(LinalgError::NoConvergence {
            iterations: self.max_iter,
            estimate: rq,
        })
    }
}

/// Dominant eigenvalue of the symmetric PSD operator `apply` (power iteration).
pub fn max_eigenvalue_sym(
    apply: impl FnMut(&[f64]) -> Vec<f64>,
    dim: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<f64, LinalgError> {
    PowerIteration { tol, max_iter, seed }.run(dim, apply)
}

/// Full eigendecomposition of a small symmetric matrix by cyclic Jacobi
/// rotations. Eigenvalues are sorted ascending; eigenvectors are the
/// matching columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

const MAX_SWEEPS: usize = 100;

impl SymmetricEigen {
    pub fn new(s: &DenseMatrix) -> Result<Self, LinalgError> {
        check_len(s.rows(), s.cols())?;
        let n = s.rows();
        let mut a = s.symmetrized();
        let mut v = DenseMatrix::identity(n);
        let scale = a.norm_frobenius();

        for _ in 0..MAX_SWEEPS {
            let mut off = 0.0;
            for q in 0..n {
                for p in 0..q {
                    off += a[(p, q)] * a[(p, q)];
                }
            }
            if off.sqrt() <= 1e-15 * scale || scale == 0.0 {
                break;
            }
            for q in 1..n {
                for p in 0..q {
                    let apq = a[(p, q)];
                    if apq.abs() <= f64::MIN_POSITIVE {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - sn * akq;
                        a[(k, q)] = sn * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - sn * aqk;
                        a[(q, k)] = sn * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - sn * vkq;
                        v[(k, q)] = sn * vkp + c * vkq;
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
        let values = order.iter().map(|&i| a[(i, i)]).collect();
        let mut vectors = DenseMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.col_mut(dst).copy_from_slice(v.col(src));
        }
        Ok(Self { values, vectors })
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(s: &DenseMatrix) -> Result<f64, LinalgError> {
    Ok(SymmetricEigen::new(s)?.min())
}
