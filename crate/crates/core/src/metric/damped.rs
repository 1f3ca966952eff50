use super::{bfgs_update_b, UpdatePair};
use crate::linalg::{check_len, CholeskyFactor, DenseMatrix};
use crate::{Error, Result};

/// Below this weight an update is treated as numerically null and the
/// cached factorization is kept.
const NULL_WEIGHT: f64 = 1e-16;

/// Damped, shifted BFGS on `B` directly:
///
/// `B₊ = B + c_k·(B̄ − B)`, where `B̄` is the BFGS update of `B` with the pair
/// `(s, (M + δI)s)` and `c_k = ζ^k`.
///
/// With `B₀ ⪰ M + δI` every iterate keeps `B ⪰ M + δI`, so the proximal
/// term `T = B − M ⪰ δI`. Subproblems are solved through a Cholesky factor of
/// `B`, refreshed lazily after each effective update.
#[derive(Debug, Clone)]
pub struct DampedBMetric {
    b: DenseMatrix,
    delta: f64,
    zeta: f64,
    k: u32,
    factor: Option<CholeskyFactor>,
}

/// Outcome of one damped step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedUpdate {
    /// `c_k` used for this step.
    pub weight: f64,
    /// `‖B̄ − B‖_F` (an upper bound on the spectral norm), zero when skipped.
    pub jump_norm: f64,
    pub applied: bool,
}

impl DampedBMetric {
    pub fn new(b0: DenseMatrix, delta: f64, zeta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::config(format!("delta must be positive, got {delta}")));
        }
        if !(0.0..1.0).contains(&zeta) {
            return Err(Error::config(format!("zeta must lie in [0, 1), got {zeta}")));
        }
        if !b0.is_square() {
            return Err(Error::config("B0 must be square"));
        }
        Ok(Self {
            b: b0,
            delta,
            zeta,
            k: 0,
            factor: None,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// Number of damped steps taken so far.
    pub fn steps(&self) -> u32 {
        self.k
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.b
    }

    /// `c_k = ζ^k` for the next step (`c₀ = 1`).
    pub fn next_weight(&self) -> f64 {
        self.zeta.powi(self.k as i32)
    }

    /// One damped step along `s` with `l̃ = M s + δ s`.
    pub fn update(&mut self, s: &[f64], m_apply: impl FnOnce(&[f64]) -> Result<Vec<f64>>) -> Result<DampedUpdate> {
        check_len(self.b.rows(), s.len())?;
        let weight = self.next_weight();
        self.k += 1;
        if weight < NULL_WEIGHT {
            return Ok(DampedUpdate {
                weight,
                jump_norm: 0.0,
                applied: false,
            });
        }
        let mut l = m_apply(s)?;
        for (li, si) in l.iter_mut().zip(s) {
            *li += self.delta * si;
        }
        let pair = UpdatePair::new(s.to_vec(), l)?;
        let bbar = bfgs_update_b(&self.b, &pair)?;
        let jump = bbar.sub(&self.b)?;
        let jump_norm = jump.norm_frobenius();
        self.b = self.b.add(&jump.scale(weight))?.symmetrized();
        self.factor = None;
        Ok(DampedUpdate {
            weight,
            jump_norm,
            applied: true,
        })
    }

    /// Factors `B` if the cache is stale.
    pub fn refactor(&mut self) -> Result<()> {
        if self.factor.is_none() {
            self.factor = Some(CholeskyFactor::factor(&self.b)?);
        }
        Ok(())
    }

    /// Solves `B d = r`, factoring `B` if the cache is stale.
    pub fn solve(&mut self, r: &[f64]) -> Result<Vec<f64>> {
        self.refactor()?;
        Ok(self.factor.as_ref().expect("factor just computed").solve(r)?)
    }

    pub fn has_factor(&self) -> bool {
        self.factor.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_m(d: &'static [f64]) -> impl Fn(&[f64]) -> Result<Vec<f64>> + Copy {
        move |v: &[f64]| Ok(v.iter().zip(d).map(|(a, b)| a * b).collect())
    }

    #[test]
    fn zeta_zero_freezes_after_first_step() {
        let m = diag_m(&[1.0, 2.0]);
        let mut metric = DampedBMetric::new(DenseMatrix::scaled_identity(2, 5.0), 0.1, 0.0).unwrap();
        let first = metric.update(&[1.0, 0.3], m).unwrap();
        assert!(first.applied && first.weight == 1.0);
        let after_first = metric.matrix().clone();
        let second = metric.update(&[0.2, -1.0], m).unwrap();
        assert!(!second.applied && second.weight == 0.0);
        assert_eq!(metric.matrix(), &after_first);
        assert_eq!(metric.steps(), 2);
    }

    #[test]
    fn first_step_is_full_bfgs_with_shift() {
        let m = diag_m(&[1.0, 2.0]);
        let mut metric = DampedBMetric::new(DenseMatrix::scaled_identity(2, 5.0), 0.5, 0.5).unwrap();
        let s = [1.0, 0.0];
        metric.update(&s, m).unwrap();
        let bs = metric.matrix().matvec(&s).unwrap();
        // B₊ s = (M + δI) s
        assert!((bs[0] - 1.5).abs() < 1e-14 && bs[1].abs() < 1e-14);
    }

    #[test]
    fn solve_refactors_after_update() {
        let m = diag_m(&[1.0, 2.0]);
        let mut metric = DampedBMetric::new(DenseMatrix::scaled_identity(2, 4.0), 0.1, 0.9).unwrap();
        assert_eq!(metric.solve(&[4.0, 8.0]).unwrap(), vec![1.0, 2.0]);
        assert!(metric.has_factor());
        metric.update(&[1.0, 1.0], m).unwrap();
        assert!(!metric.has_factor());
        let r = [0.3, -0.7];
        let d = metric.solve(&r).unwrap();
        let bd = metric.matrix().matvec(&d).unwrap();
        assert!((bd[0] - r[0]).abs() < 1e-13 && (bd[1] - r[1]).abs() < 1e-13);
    }

    #[test]
    fn parameter_validation() {
        let b = DenseMatrix::identity(2);
        assert!(DampedBMetric::new(b.clone(), 0.0, 0.5).is_err());
        assert!(DampedBMetric::new(b.clone(), 1.0, 1.0).is_err());
        assert!(DampedBMetric::new(b, 1.0, -0.1).is_err());
    }
}
