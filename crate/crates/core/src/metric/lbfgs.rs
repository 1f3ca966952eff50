use std::collections::VecDeque;

use super::UpdatePair;
use crate::linalg::{axpy, check_len, dot, DenseMatrix};
use crate::Result;

/// Limited-memory inverse metric: the last `h` pairs over a fixed
/// `H₀ = γ₀ I`, applied by the two-loop recursion in `O(h·n)`.
#[derive(Debug, Clone)]
pub struct LbfgsMetric {
    pairs: VecDeque<UpdatePair>,
    capacity: usize,
    gamma0: f64,
    dim: usize,
}

impl LbfgsMetric {
    pub fn new(dim: usize, capacity: usize, gamma0: f64) -> Self {
        assert!(capacity >= 1, "L-BFGS memory must hold at least one pair");
        assert!(gamma0 > 0.0, "initial scale must be positive");
        Self {
            pairs: VecDeque::with_capacity(capacity + 1),
            capacity,
            gamma0,
            dim,
        }
    }

    /// Appends a pair, evicting the oldest one beyond capacity.
    pub fn push(&mut self, pair: UpdatePair) -> Result<()> {
        check_len(self.dim, pair.s.len())?;
        self.pairs.push_back(pair);
        if self.pairs.len() > self.capacity {
            self.pairs.pop_front();
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Oldest first.
    pub fn pairs(&self) -> impl Iterator<Item = &UpdatePair> {
        self.pairs.iter()
    }

    /// `H_k v` by the two-loop recursion.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim, v.len())?;
        let mut q = v.to_vec();
        let mut alpha = vec![0.0; self.pairs.len()];
        for (i, p) in self.pairs.iter().enumerate().rev() {
            alpha[i] = p.rho() * dot(&p.s, &q);
            axpy(-alpha[i], &p.l, &mut q);
        }
        q.iter_mut().for_each(|x| *x *= self.gamma0);
        for (i, p) in self.pairs.iter().enumerate() {
            let b = p.rho() * dot(&p.l, &q);
            axpy(alpha[i] - b, &p.s, &mut q);
        }
        Ok(q)
    }

    /// Dense `H_k`, one two-loop application per column.
    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_operator(self.dim, |e| self.apply(e).expect("unit vector has matching length"))
    }
}
