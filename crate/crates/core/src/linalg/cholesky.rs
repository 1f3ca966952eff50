use super::{check_len, DenseMatrix, LinalgError};

/// Relative symmetry tolerance accepted before factoring.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = S`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    l: DenseMatrix,
}

impl CholeskyFactor {
    /// Factors a symmetric positive definite matrix.
    ///
    /// The input is symmetrized first; asymmetry above `1e-10·‖S‖∞` is
    /// rejected. A non-positive pivot yields
    /// [`LinalgError::NotPositiveDefinite`] with its (0-based) index.
    pub fn factor(s: &DenseMatrix) -> Result<Self, LinalgError> {
        check_len(s.rows(), s.cols())?;
        let tol = SYMMETRY_TOL * s.norm_inf();
        let asym = s.asymmetry();
        if asym > tol {
            return Err(LinalgError::NotSymmetric {
                asymmetry: asym,
                tolerance: tol,
            });
        }
        let s = s.symmetrized();
        let n = s.rows();
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = s[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(LinalgError::NotPositiveDefinite { pivot: j, value: d });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut v = s[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = v / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.l
    }

    /// Solves `L z = rhs`.
    pub fn forward(&self, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
        check_len(self.dim(), rhs.len())?;
        let n = self.dim();
        let mut z = rhs.to_vec();
        // column-oriented: L is column-major
        for j in 0..n {
            z[j] /= self.l[(j, j)];
            let zj = z[j];
            let col = self.l.col(j);
            for i in (j + 1)..n {
                z[i] -= col[i] * zj;
            }
        }
        Ok(z)
    }

    /// Solves `Lᵀ x = rhs`.
    pub fn backward(&self, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
        check_len(self.dim(), rhs.len())?;
        let n = self.dim();
        let mut x = rhs.to_vec();
        for j in (0..n).rev() {
            let col = self.l.col(j);
            let s: f64 = ((j + 1)..n).map(|i| col[i] * x[i]).sum();
            x[j] = (x[j] - s) / col[j];
        }
        Ok(x)
    }

    /// Solves `S x = rhs` with two triangular solves.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let z = self.forward(rhs)?;
        self.backward(&z)
    }

    /// Dense `S⁻¹`.
    pub fn inverse(&self) -> DenseMatrix {
        let n = self.dim();
        DenseMatrix::from_operator(n, |e| self.solve(e).expect("unit vector has matching length"))
    }

    /// `L Lᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.l.matmul(&self.l.transpose()).expect("square factor")
    }
}

/// Solves `S x = rhs` for an SPD matrix.
pub fn solve_spd(factor: &CholeskyFactor, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
    factor.solve(rhs)
}
