use super::UpdatePair;
use crate::linalg::{check_len, dot, DenseMatrix};
use crate::{Error, Result};

/// Inverse BFGS update
///
/// `H₊ = H − (H l sᵀ + s lᵀ H)/sᵀl + (1 + lᵀHl/sᵀl)·s sᵀ/sᵀl`,
///
/// which enforces the secant identity `H₊ l = s`.
pub fn bfgs_update_h(h: &DenseMatrix, pair: &UpdatePair) -> Result<DenseMatrix> {
    let mut next = h.clone();
    update_h_in_place(&mut next, pair)?;
    Ok(next)
}

pub(crate) fn update_h_in_place(h: &mut DenseMatrix, pair: &UpdatePair) -> Result<()> {
    check_len(h.rows(), pair.s.len())?;
    let sl = pair.curvature;
    let hl = h.matvec(&pair.l)?;
    let lhl = dot(&pair.l, &hl);
    h.rank1_update(-1.0 / sl, &hl, &pair.s);
    h.rank1_update(-1.0 / sl, &pair.s, &hl);
    h.rank1_update((1.0 + lhl / sl) / sl, &pair.s, &pair.s);
    Ok(())
}

/// Direct BFGS update `B₊ = B + l lᵀ/lᵀs − B s sᵀ B/sᵀBs`, with `B₊ s = l`.
pub fn bfgs_update_b(b: &DenseMatrix, pair: &UpdatePair) -> Result<DenseMatrix> {
    check_len(b.rows(), pair.s.len())?;
    let bs = b.matvec(&pair.s)?;
    let sbs = dot(&pair.s, &bs);
    if !(sbs > 0.0) {
        return Err(Error::MetricNotPositiveDefinite { value: sbs });
    }
    let mut next = b.clone();
    next.rank1_update(1.0 / pair.curvature, &pair.l, &pair.l);
    next.rank1_update(-1.0 / sbs, &bs, &bs);
    Ok(next)
}

/// Dense inverse metric `H_k`, initialized as `H₀ = ξ⁻¹ I`.
#[derive(Debug, Clone)]
pub struct BfgsMetric {
    h: DenseMatrix,
    xi0: f64,
    updates: usize,
}

impl BfgsMetric {
    pub fn new(n: usize, xi0: f64) -> Self {
        assert!(xi0 > 0.0, "initial scale must be positive");
        Self {
            h: DenseMatrix::scaled_identity(n, 1.0 / xi0),
            xi0,
            updates: 0,
        }
    }

    /// Starts from an arbitrary symmetric positive definite `H₀`.
    pub fn from_matrix(h0: DenseMatrix) -> Self {
        Self {
            h: h0,
            xi0: f64::NAN,
            updates: 0,
        }
    }

    pub fn update(&mut self, pair: &UpdatePair) -> Result<()> {
        update_h_in_place(&mut self.h, pair)?;
        self.updates += 1;
        Ok(())
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(self.h.matvec(v)?)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.h
    }

    pub fn xi0(&self) -> f64 {
        self.xi0
    }

    pub fn updates(&self) -> usize {
        self.updates
    }
}
