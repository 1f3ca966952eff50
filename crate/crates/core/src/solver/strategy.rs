//! x-subproblem strategies.

use std::time::{Duration, Instant};

use crate::linalg::{CholeskyFactor, DenseMatrix};
use crate::metric::{step_is_informative, BfgsMetric, DampedBMetric, DampedUpdate, LbfgsMetric, UpdatePair};
use crate::problem::LassoProblem;
use crate::{Error, Result};

use super::config::{SolverConfig, Variant};

/// Cholesky factor for the exact x-update.
///
/// For `m ≥ n` this factors `AᵀA + βI`; for fat `A` (`m < n`) it factors the
/// smaller `I + AAᵀ/β` and applies the Sherman–Morrison–Woodbury identity.
#[derive(Debug, Clone)]
pub struct ExactFactor {
    pub factor: CholeskyFactor,
    pub fat_path: bool,
}

impl ExactFactor {
    pub fn new(prob: &LassoProblem) -> Result<Self> {
        let beta = prob.beta();
        if prob.m() < prob.n() {
            let mut s = prob.a().outer_gram().scale(1.0 / beta);
            s.add_diag(1.0);
            Ok(Self {
                factor: CholeskyFactor::factor(&s)?,
                fat_path: true,
            })
        } else {
            let mut s = prob.a().gram();
            s.add_diag(beta);
            Ok(Self {
                factor: CholeskyFactor::factor(&s)?,
                fat_path: false,
            })
        }
    }

    /// `(AᵀA + βI)⁻¹ q`
    pub fn solve(&self, prob: &LassoProblem, q: &[f64]) -> Result<Vec<f64>> {
        if !self.fat_path {
            return Ok(self.factor.solve(q)?);
        }
        let beta = prob.beta();
        let aq = prob.a().matvec(q)?;
        let z = self.factor.solve(&aq)?;
        let atz = prob.a().matvec_transpose(&z)?;
        Ok(q.iter()
            .zip(&atz)
            .map(|(qi, wi)| qi / beta - wi / (beta * beta))
            .collect())
    }
}

/// `q = Aᵀb + λ + βy`, the right-hand side shared by every x-update.
pub fn x_rhs(prob: &LassoProblem, y: &[f64], lambda: &[f64]) -> Vec<f64> {
    let beta = prob.beta();
    prob.atb()
        .iter()
        .zip(lambda)
        .zip(y)
        .map(|((a, l), yi)| a + l + beta * yi)
        .collect()
}

/// Exact minimizer of `L_β(·, y, λ)`: solves `(AᵀA + βI) x = Aᵀb + λ + βy`.
pub fn x_update_exact(prob: &LassoProblem, factor: &ExactFactor, y: &[f64], lambda: &[f64]) -> Result<Vec<f64>> {
    factor.solve(prob, &x_rhs(prob, y, lambda))
}

/// `x − ξ⁻¹(AᵀAx − Aᵀb − λ + βx − βy)`
pub fn x_update_spro(prob: &LassoProblem, xi: f64, x: &[f64], y: &[f64], lambda: &[f64]) -> Result<Vec<f64>> {
    let r = metric_residual(prob, x, y, lambda)?;
    Ok(x.iter().zip(&r).map(|(xi_, ri)| xi_ + ri / xi).collect())
}

/// `(λ + βy + ξx − AᵀAx + Aᵀb)/(β + ξ)`
pub fn x_update_ipro(prob: &LassoProblem, xi: f64, x: &[f64], y: &[f64], lambda: &[f64]) -> Result<Vec<f64>> {
    let beta = prob.beta();
    let gx = prob.gram_apply(x)?;
    let q = x_rhs(prob, y, lambda);
    Ok(q.iter()
        .zip(&gx)
        .zip(x)
        .map(|((qi, gi), xi_)| (qi + xi * xi_ - gi) / (beta + xi))
        .collect())
}

/// `r = λ + βy + Aᵀb − Mx`, so that the metric update reads `x + H r`.
pub fn metric_residual(prob: &LassoProblem, x: &[f64], y: &[f64], lambda: &[f64]) -> Result<Vec<f64>> {
    let mx = prob.m_apply(x)?;
    let q = x_rhs(prob, y, lambda);
    Ok(q.iter().zip(&mx).map(|(a, b)| a - b).collect())
}

/// The variable-metric proximal state.
#[derive(Debug, Clone)]
pub enum Metric {
    Dense(BfgsMetric),
    Limited(LbfgsMetric),
    Damped(DampedBMetric),
}

impl Metric {
    /// `x + H_k r` (or `x + B_k⁻¹ r` for the damped metric).
    pub fn step(&mut self, x: &[f64], r: &[f64]) -> Result<Vec<f64>> {
        let d = match self {
            Metric::Dense(m) => m.apply(r)?,
            Metric::Limited(m) => m.apply(r)?,
            Metric::Damped(m) => m.solve(r)?,
        };
        Ok(x.iter().zip(&d).map(|(a, b)| a + b).collect())
    }

    /// Applies one update along `s`.
    pub fn update(&mut self, prob: &LassoProblem, s: &[f64]) -> Result<MetricUpdate> {
        match self {
            Metric::Dense(m) => {
                let pair = UpdatePair::new(s.to_vec(), prob.m_apply(s)?)?;
                m.update(&pair)?;
                Ok(MetricUpdate::Applied)
            }
            Metric::Limited(m) => {
                let pair = UpdatePair::new(s.to_vec(), prob.m_apply(s)?)?;
                m.push(pair)?;
                Ok(MetricUpdate::Applied)
            }
            Metric::Damped(m) => {
                let out = m.update(s, |v| prob.m_apply(v))?;
                m.refactor()?;
                Ok(MetricUpdate::Damped(out))
            }
        }
    }

    /// Dense `H_k` for inverse metrics, dense `B_k` for the damped one.
    pub fn dense(&self) -> MetricMatrix {
        match self {
            Metric::Dense(m) => MetricMatrix::Inverse(m.matrix().clone()),
            Metric::Limited(m) => MetricMatrix::Inverse(m.to_dense()),
            Metric::Damped(m) => MetricMatrix::Direct(m.matrix().clone()),
        }
    }
}

/// What a maintenance step did to the metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricUpdate {
    Skipped,
    Applied,
    Damped(DampedUpdate),
}

impl MetricUpdate {
    pub fn changed(&self) -> bool {
        match self {
            MetricUpdate::Skipped => false,
            MetricUpdate::Applied => true,
            MetricUpdate::Damped(d) => d.applied,
        }
    }
}

/// A materialized metric, tagged by which side of the inverse it represents.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricMatrix {
    /// `H_k ≈ M⁻¹`
    Inverse(DenseMatrix),
    /// `B_k ≈ M`
    Direct(DenseMatrix),
}

/// Per-variant x-update state.
#[derive(Debug, Clone)]
pub enum XStrategy {
    ExactCholesky(ExactFactor),
    FixedShift { xi: f64, variant: Variant },
    VariableMetric { metric: Metric, k_bar: Option<usize> },
}

/// Setup outputs besides the strategy itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct SetupInfo {
    /// `λmax(AᵀA)` estimate, when one was needed.
    pub lambda_max: Option<f64>,
    /// Scale `ξ` of the fixed shift or of the initial metric.
    pub xi: Option<f64>,
    pub time_factor: Duration,
    pub time_eig: Duration,
}

impl XStrategy {
    pub fn setup(prob: &LassoProblem, config: &SolverConfig) -> Result<(Self, SetupInfo)> {
        let mut info = SetupInfo::default();
        if config.variant == Variant::Opt {
            let t0 = Instant::now();
            let factor = ExactFactor::new(prob)?;
            info.time_factor = t0.elapsed();
            return Ok((XStrategy::ExactCholesky(factor), info));
        }

        let t0 = Instant::now();
        let lam = config.power.run(prob.n(), |v| prob.gram_apply(v).expect("operator dimensions match"))?;
        info.time_eig = t0.elapsed();
        info.lambda_max = Some(lam);
        let beta = prob.beta();
        let n = prob.n();

        let strategy = match config.variant {
            Variant::Opt => unreachable!(),
            Variant::Spro => {
                let xi = config.kappa1 * (lam + beta);
                info.xi = Some(xi);
                XStrategy::FixedShift {
                    xi,
                    variant: Variant::Spro,
                }
            }
            Variant::Ipro => {
                let xi = config.kappa2 * lam;
                if !(xi > 0.0) {
                    return Err(Error::config("IPRO needs λmax(AᵀA) > 0"));
                }
                info.xi = Some(xi);
                XStrategy::FixedShift {
                    xi,
                    variant: Variant::Ipro,
                }
            }
            Variant::Bfgs => {
                let xi = config.kappa3 * (lam + beta);
                info.xi = Some(xi);
                XStrategy::VariableMetric {
                    metric: Metric::Dense(BfgsMetric::new(n, xi)),
                    k_bar: config.k_bar,
                }
            }
            Variant::Lbfgs | Variant::LbfgsR => {
                let xi = config.kappa3 * (lam + beta);
                info.xi = Some(xi);
                XStrategy::VariableMetric {
                    metric: Metric::Limited(LbfgsMetric::new(n, config.memory, 1.0 / xi)),
                    k_bar: config.k_bar,
                }
            }
            Variant::BfgsR => {
                let delta = config.delta.expect("validated");
                let zeta = config.zeta.expect("validated");
                // B₀ = κ₃·λmax(M + δI)·I ⪰ M + δI for κ₃ ≥ 1
                let xi = config.kappa3 * (lam + beta + delta);
                info.xi = Some(xi);
                let mut damped = DampedBMetric::new(DenseMatrix::scaled_identity(n, xi), delta, zeta)?;
                damped.refactor()?;
                XStrategy::VariableMetric {
                    metric: Metric::Damped(damped),
                    k_bar: None,
                }
            }
        };
        Ok((strategy, info))
    }

    /// Metric maintenance at the top of iteration `k`: updates along
    /// `s = x^k − x^{k−1}` when `1 ≤ k ≤ k̄` and the step is informative.
    pub fn maintain(&mut self, prob: &LassoProblem, k: usize, x: &[f64], x_prev: &[f64]) -> Result<MetricUpdate> {
        let XStrategy::VariableMetric { metric, k_bar } = self else {
            return Ok(MetricUpdate::Skipped);
        };
        if k == 0 || k_bar.is_some_and(|kb| k > kb) {
            return Ok(MetricUpdate::Skipped);
        }
        let s: Vec<f64> = x.iter().zip(x_prev).map(|(a, b)| a - b).collect();
        if !step_is_informative(&s, x) {
            return Ok(MetricUpdate::Skipped);
        }
        metric.update(prob, &s)
    }

    pub fn metric(&self) -> Option<&Metric> {
        match self {
            XStrategy::VariableMetric { metric, .. } => Some(metric),
            _ => None,
        }
    }

    pub fn x_update(&mut self, prob: &LassoProblem, x: &[f64], y: &[f64], lambda: &[f64]) -> Result<Vec<f64>> {
        match self {
            XStrategy::ExactCholesky(f) => x_update_exact(prob, f, y, lambda),
            XStrategy::FixedShift { xi, variant: Variant::Spro } => x_update_spro(prob, *xi, x, y, lambda),
            XStrategy::FixedShift { xi, .. } => x_update_ipro(prob, *xi, x, y, lambda),
            XStrategy::VariableMetric { metric, .. } => {
                let r = metric_residual(prob, x, y, lambda)?;
                metric.step(x, &r)
            }
        }
    }
}
