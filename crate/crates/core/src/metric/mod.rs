//! Quasi-Newton proximal metrics.
//!
//! All metrics are driven by exact secant pairs `(s, l = M s)` against the
//! constant Hessian `M = AᵀA + βI`. Starting from `H₀ ⪯ M⁻¹`, every BFGS
//! update keeps `H ⪯ M⁻¹`, i.e. the induced proximal term `T = H⁻¹ − M`
//! stays positive semidefinite.

mod bfgs;
mod damped;
mod lbfgs;

use std::io::Write;

pub use bfgs::{bfgs_update_b, bfgs_update_h, BfgsMetric};
pub use damped::{DampedBMetric, DampedUpdate};
pub use lbfgs::LbfgsMetric;

use crate::linalg::{dot, norm2, CholeskyFactor, DenseMatrix, SymmetricEigen};
use crate::{Error, Result};

/// Default dimension cap for O(n³) spectral diagnostics.
pub const SPECTRAL_CAP: usize = 512;

/// Relative curvature floor: `sᵀl ≤ 1e-14·‖s‖·‖l‖` is a breakdown.
const CURVATURE_FLOOR: f64 = 1e-14;

/// A secant pair `s = x^{k+1} − x^k`, `l = M s`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdatePair {
    pub s: Vec<f64>,
    pub l: Vec<f64>,
    /// `sᵀl`
    pub curvature: f64,
}

impl UpdatePair {
    pub fn new(s: Vec<f64>, l: Vec<f64>) -> Result<Self> {
        crate::linalg::check_len(s.len(), l.len())?;
        let curvature = dot(&s, &l);
        if !(curvature > CURVATURE_FLOOR * norm2(&s) * norm2(&l)) {
            return Err(Error::CurvatureBreakdown { curvature });
        }
        Ok(Self { s, l, curvature })
    }

    pub fn rho(&self) -> f64 {
        1.0 / self.curvature
    }
}

/// Step filter: a pair is only formed when `‖s‖ > 1e-12·(1 + ‖x‖)`.
pub fn step_is_informative(s: &[f64], x: &[f64]) -> bool {
    norm2(s) > 1e-12 * (1.0 + norm2(x))
}

/// Checks `H ⪯ M⁻¹` by the smallest eigenvalue of `M⁻¹ − H`.
///
/// Returns `(min_eig ≥ −tol, min_eig)`.
pub fn verify_order(h: &DenseMatrix, m: &DenseMatrix, tol: f64) -> Result<(bool, f64)> {
    verify_order_capped(h, m, tol, SPECTRAL_CAP)
}

pub fn verify_order_capped(h: &DenseMatrix, m: &DenseMatrix, tol: f64, cap: usize) -> Result<(bool, f64)> {
    let n = m.rows();
    if n > cap {
        return Err(Error::SpectralCheckUnavailable { n, cap });
    }
    crate::linalg::check_len(n, h.rows())?;
    let m_inv = CholeskyFactor::factor(m)?.inverse();
    let gap = m_inv.sub(h)?;
    let min_eig = SymmetricEigen::new(&gap)?.min();
    Ok((min_eig >= -tol, min_eig))
}

/// Plain-text dump of a metric for offline analysis.
#[derive(Debug, Clone)]
pub enum MetricSnapshot {
    Dense { label: &'static str, matrix: DenseMatrix },
    Pairs { gamma0: f64, pairs: Vec<UpdatePair> },
}

impl MetricSnapshot {
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        match self {
            MetricSnapshot::Dense { label, matrix } => {
                writeln!(out, "# {label} {} {}", matrix.rows(), matrix.cols())?;
                for i in 0..matrix.rows() {
                    let row: Vec<String> = (0..matrix.cols()).map(|j| format!("{:.16e}", matrix[(i, j)])).collect();
                    writeln!(out, "{}", row.join(" "))?;
                }
            }
            MetricSnapshot::Pairs { gamma0, pairs } => {
                let n = pairs.first().map_or(0, |p| p.s.len());
                writeln!(out, "# lbfgs n={n} pairs={} gamma0={gamma0:.16e}", pairs.len())?;
                for (i, p) in pairs.iter().enumerate() {
                    for (tag, v) in [("s", &p.s), ("l", &p.l)] {
                        let vals: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
                        writeln!(out, "{tag} {i} {}", vals.join(" "))?;
                    }
                }
            }
        }
        Ok(())
    }
}
