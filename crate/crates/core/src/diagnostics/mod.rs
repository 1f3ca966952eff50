//! Dense runtime checks of the convergence theory on recorded traces.
//!
//! Everything here is `O(n³)` per step and meant for small instances
//! (`n ≤` [`SPECTRAL_CAP`]).

use std::io::Write;
use std::path::Path;

use crate::linalg::{dist2, norm2, CholeskyFactor, DenseMatrix, SymmetricEigen};
use crate::metric::SPECTRAL_CAP;
use crate::problem::LassoProblem;
use crate::solver::{solve, MetricMatrix, MetricUpdate, SolverConfig, Trace, Variant};
use crate::{Error, Result};

/// Relative eigenvalue floor below which a direction counts as null.
const NULL_FLOOR: f64 = 1e-10;

/// Absolute tolerance (scaled by `max(1, ‖T‖)`) for semidefinite checks.
pub const PSD_TOL: f64 = 1e-8;

/// `F = (η_f − λ; η_g + λ; x − y)`; zero exactly at a KKT point.
#[derive(Debug, Clone, PartialEq)]
pub struct KktVector {
    pub grad_f_part: Vec<f64>,
    pub subgrad_g_part: Vec<f64>,
    pub primal_gap: Vec<f64>,
}

impl KktVector {
    pub fn new(x: &[f64], y: &[f64], lambda: &[f64], eta_f: &[f64], eta_g: &[f64]) -> Self {
        Self {
            grad_f_part: eta_f.iter().zip(lambda).map(|(e, l)| e - l).collect(),
            subgrad_g_part: eta_g.iter().zip(lambda).map(|(e, l)| e + l).collect(),
            primal_gap: x.iter().zip(y).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        let sq = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>();
        (sq(&self.grad_f_part) + sq(&self.subgrad_g_part) + sq(&self.primal_gap)).sqrt()
    }
}

/// `η_g = −λ^k + β(x^{k+1} − y^{k+1})`, checked against `η_g ∈ τ∂‖y‖₁`.
pub fn recover_eta_g(prob: &LassoProblem, lambda_prev: &[f64], x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let beta = prob.beta();
    let tau = prob.tau();
    let tol = 1e-8 * tau.max(1.0);
    let eta: Vec<f64> = lambda_prev
        .iter()
        .zip(x.iter().zip(y))
        .map(|(l, (xi, yi))| -l + beta * (xi - yi))
        .collect();
    for (index, (e, yi)) in eta.iter().zip(y).enumerate() {
        let violation = if *yi != 0.0 {
            (e - tau * yi.signum()).abs()
        } else {
            (e.abs() - tau).max(0.0)
        };
        if violation > tol {
            return Err(Error::SubgradientRecovery { index, violation });
        }
    }
    Ok(eta)
}

/// KKT vector after one step, with `η_f = Aᵀ(Ax − b)` and `η_g` recovered
/// from the y-subproblem.
pub fn kkt_vector(prob: &LassoProblem, lambda_prev: &[f64], x: &[f64], y: &[f64], lambda: &[f64]) -> Result<KktVector> {
    let eta_f = prob.gradient(x)?;
    let eta_g = recover_eta_g(prob, lambda_prev, x, y)?;
    Ok(KktVector::new(x, y, lambda, &eta_f, &eta_g))
}

/// A primal-dual reference point `w* = (x*, y*, λ*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// Tight exact-ADMM solve; `x* = y*` is the sparse iterate and
/// `λ* = Aᵀ(Ax* − b)`.
pub fn reference_solution(prob: &LassoProblem) -> Result<Reference> {
    let cfg = SolverConfig::new(Variant::Opt, prob.beta())
        .with_tolerances(1e-12, 1e-12)
        .with_max_iter(1_000_000);
    let (state, _) = solve(prob, &cfg)?;
    let lambda = prob.gradient(&state.y)?;
    Ok(Reference {
        x: state.y.clone(),
        y: state.y,
        lambda,
    })
}

/// `‖x − x*‖²_T + ‖y − y*‖²_{S+βI} + ‖λ − λ*‖²/β`; `S = None` means `S = 0`.
pub fn g_distance(
    x: &[f64],
    y: &[f64],
    lambda: &[f64],
    w_star: &Reference,
    t: &DenseMatrix,
    s: Option<&DenseMatrix>,
    beta: f64,
) -> Result<f64> {
    let dx: Vec<f64> = x.iter().zip(&w_star.x).map(|(a, b)| a - b).collect();
    let dy: Vec<f64> = y.iter().zip(&w_star.y).map(|(a, b)| a - b).collect();
    let mut total = t.quad_form(&dx)?;
    total += beta * norm2(&dy).powi(2);
    if let Some(s) = s {
        total += s.quad_form(&dy)?;
    }
    total += dist2(lambda, &w_star.lambda).powi(2) / beta;
    Ok(total)
}

/// Dense `M = AᵀA + βI`.
pub fn dense_m(prob: &LassoProblem) -> DenseMatrix {
    let mut m = prob.a().gram();
    m.add_diag(prob.beta());
    m
}

/// The proximal term `T_k` used by each recorded step.
///
/// `OPT`: `0`; `SPRO`: `ξI − M`; `IPRO`: `ξI − AᵀA`; inverse metrics:
/// `H_k⁻¹ − M`; the damped metric: `B_k − M`.
pub fn proximal_terms(prob: &LassoProblem, trace: &Trace) -> Result<Vec<DenseMatrix>> {
    let n = prob.n();
    if n > SPECTRAL_CAP {
        return Err(Error::SpectralCheckUnavailable { n, cap: SPECTRAL_CAP });
    }
    let prob = prob.with_beta(trace.beta)?;
    let m = dense_m(&prob);
    let fixed = match trace.variant {
        Variant::Opt => Some(DenseMatrix::zeros(n, n)),
        Variant::Spro => Some(DenseMatrix::scaled_identity(n, trace.xi.expect("shift recorded")).sub(&m)?),
        Variant::Ipro => {
            let mut t = prob.a().gram().scale(-1.0);
            t.add_diag(trace.xi.expect("shift recorded"));
            Some(t)
        }
        _ => None,
    };
    if let Some(t) = fixed {
        return Ok(vec![t; trace.steps.len()]);
    }
    let mut out: Vec<DenseMatrix> = Vec::with_capacity(trace.steps.len());
    let mut last: Option<&MetricMatrix> = None;
    for step in &trace.steps {
        let metric = step.metric.as_ref().expect("variable-metric trace stores metrics");
        if last == Some(metric) {
            // unchanged metric, keep the bit-identical T
            let prev = out.last().expect("previous term exists").clone();
            out.push(prev);
            continue;
        }
        let t = match metric {
            MetricMatrix::Inverse(h) => CholeskyFactor::factor(h)?.inverse().sub(&m)?.symmetrized(),
            MetricMatrix::Direct(b) => b.sub(&m)?.symmetrized(),
        };
        out.push(t);
        last = Some(metric);
    }
    Ok(out)
}

/// The fixed lower bound `T` in `T ⪯ T_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LowerBound {
    /// `T = 0`: only semidefiniteness is required.
    Zero,
    /// `T = δI` (damped, shifted updates).
    Shift(f64),
    /// `T = T_k̄`: the metric is frozen from step `k̄` on, and the
    /// certificate covers that segment.
    FrozenAfter(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCertificate {
    /// Smallest `γ_k ≥ 0` with `T_{k+1} ⪯ (1 + γ_k) T_k`, per transition.
    pub gamma_series: Vec<f64>,
    pub gamma_sum: f64,
    /// `T_{k+1} ⪯ (1 + γ_k)T_k` verified at every certified transition.
    pub growth_ok: bool,
    /// `T_k ⪰ T` at every certified step.
    pub lower_bound_ok: bool,
    /// Running max of `‖B̄_{k+1} − B_k‖_F` (damped traces only).
    pub q_estimate: Option<f64>,
    /// `Q̂/(δ(1 − ζ))`, the a-priori bound on `Σγ_k` for damped traces.
    pub gamma_bound: Option<f64>,
    /// Transitions `k → k+1` where growth failed.
    pub growth_violations: Vec<usize>,
    /// First step covered by the certificate.
    pub first_step: usize,
}

impl ConditionCertificate {
    pub fn passed(&self) -> bool {
        self.growth_ok && self.lower_bound_ok && self.gamma_sum.is_finite()
    }

    /// `Σ γ_j` over transitions `j ≥ k`.
    pub fn gamma_sum_from(&self, k: usize) -> f64 {
        self.gamma_series.iter().skip(k.saturating_sub(self.first_step)).sum()
    }
}

fn scale_of(e: &SymmetricEigen) -> f64 {
    e.values.iter().fold(1.0_f64, |a, v| a.max(v.abs()))
}

/// Smallest `γ ≥ 0` with `next ⪯ (1 + γ)·cur`, restricted to the range of `cur`.
pub fn growth_factor(cur: &DenseMatrix, next: &DenseMatrix) -> Result<f64> {
    if cur == next {
        return Ok(0.0);
    }
    let e = SymmetricEigen::new(cur)?;
    let floor = NULL_FLOOR * scale_of(&e);
    let n = cur.rows();
    let range: Vec<usize> = (0..n).filter(|&i| e.values[i] > floor).collect();
    if range.is_empty() {
        return Ok(0.0);
    }
    // W = V_r Λ_r^{-1/2}, C = Wᵀ next W
    let mut w = DenseMatrix::zeros(n, range.len());
    for (c, &i) in range.iter().enumerate() {
        let scale = e.values[i].sqrt().recip();
        for (dst, src) in w.col_mut(c).iter_mut().zip(e.vectors.col(i)) {
            *dst = src * scale;
        }
    }
    let c = w.transpose().matmul(&next.matmul(&w)?)?.symmetrized();
    let rho = SymmetricEigen::new(&c)?.max();
    Ok((rho - 1.0).max(0.0))
}

/// Empirical check of `T ⪯ T_{k+1} ⪯ (1 + γ_k) T_k` along a series of terms.
pub fn certify_condition1(terms: &[DenseMatrix], lower: LowerBound) -> Result<ConditionCertificate> {
    let first_step = match lower {
        LowerBound::FrozenAfter(k_bar) => k_bar.min(terms.len()),
        _ => 0,
    };
    let segment = &terms[first_step..];
    let mut cert = ConditionCertificate {
        gamma_series: Vec::with_capacity(segment.len().saturating_sub(1)),
        gamma_sum: 0.0,
        growth_ok: true,
        lower_bound_ok: true,
        q_estimate: None,
        gamma_bound: None,
        growth_violations: Vec::new(),
        first_step,
    };
    if let Some(n) = segment.first().map(DenseMatrix::rows) {
        if n > SPECTRAL_CAP {
            return Err(Error::SpectralCheckUnavailable { n, cap: SPECTRAL_CAP });
        }
    }

    for (i, t) in segment.iter().enumerate() {
        let step = first_step + i;
        let e = SymmetricEigen::new(t)?;
        let tol = PSD_TOL * scale_of(&e);
        if e.min() < -tol {
            return Err(Error::IndefiniteMetric { step, min_eig: e.min() });
        }
        let ok = match lower {
            LowerBound::Zero => true,
            LowerBound::Shift(delta) => e.min() >= delta - tol,
            LowerBound::FrozenAfter(_) => {
                let gap = t.sub(&segment[0])?;
                gap.max_abs() == 0.0 || SymmetricEigen::new(&gap)?.min() >= -tol
            }
        };
        cert.lower_bound_ok &= ok;

        if let Some(next) = segment.get(i + 1) {
            let gamma = growth_factor(t, next)?;
            let slack = t.scale(1.0 + gamma).sub(next)?;
            let grown_ok = slack.max_abs() == 0.0 || {
                let tol = PSD_TOL * scale_of(&e).max(next.max_abs());
                SymmetricEigen::new(&slack)?.min() >= -tol
            };
            if !grown_ok {
                cert.growth_ok = false;
                cert.growth_violations.push(step);
            }
            cert.gamma_series.push(gamma);
            cert.gamma_sum += gamma;
        }
    }
    Ok(cert)
}

/// Materializes the trace's proximal terms and certifies them against the
/// lower bound implied by the variant.
///
/// Damped traces also get the `Q̂` estimate and the bound `Q̂/(δ(1 − ζ))`.
pub fn certify_trace(prob: &LassoProblem, trace: &Trace) -> Result<ConditionCertificate> {
    let terms = proximal_terms(prob, trace)?;
    let lower = match (trace.variant, trace.k_bar, trace.delta) {
        (Variant::BfgsR, _, Some(delta)) => LowerBound::Shift(delta),
        (_, Some(k_bar), _) => LowerBound::FrozenAfter(k_bar),
        _ => LowerBound::Zero,
    };
    let mut cert = certify_condition1(&terms, lower)?;
    if trace.variant == Variant::BfgsR {
        let q = trace
            .steps
            .iter()
            .filter_map(|s| match s.update {
                MetricUpdate::Damped(d) => Some(d.jump_norm),
                _ => None,
            })
            .fold(0.0, f64::max);
        cert.q_estimate = Some(q);
        if let (Some(delta), Some(zeta)) = (trace.delta, trace.zeta) {
            cert.gamma_bound = Some(q / (delta * (1.0 - zeta)));
        }
    }
    Ok(cert)
}

/// `‖w^k − w*‖²_{G}` along the trace with `G = diag(T_k, βI, I/β)`, for
/// `k = 0..=steps`. Entry `k` pairs `w^k` with `T_k` (the last entry reuses
/// the final term).
pub fn g_distance_series(
    prob: &LassoProblem,
    trace: &Trace,
    terms: &[DenseMatrix],
    w_star: &Reference,
) -> Result<Vec<f64>> {
    let n = prob.n();
    (0..=trace.steps.len())
        .map(|k| {
            let (x, y, l) = trace.iterate(k, n);
            let t = &terms[k.min(terms.len() - 1)];
            g_distance(&x, &y, &l, w_star, t, None, trace.beta)
        })
        .collect()
}

/// Per-step descent check `‖w^{k+1} − w*‖²_{G_k} ≤ ‖w^k − w*‖²_{G_k} + tol`.
///
/// Returns the largest observed increase (negative when every step
/// decreased).
pub fn max_g_increase(
    prob: &LassoProblem,
    trace: &Trace,
    terms: &[DenseMatrix],
    w_star: &Reference,
) -> Result<f64> {
    let n = prob.n();
    let mut worst = f64::NEG_INFINITY;
    for (k, t) in terms.iter().enumerate() {
        let (x0, y0, l0) = trace.iterate(k, n);
        let (x1, y1, l1) = trace.iterate(k + 1, n);
        let before = g_distance(&x0, &y0, &l0, w_star, t, None, trace.beta)?;
        let after = g_distance(&x1, &y1, &l1, w_star, t, None, trace.beta)?;
        worst = worst.max(after - before);
    }
    Ok(worst)
}

/// Running maximum of `‖F^{k+1}‖ / (‖x^{k+1} − x^k‖²_{T_k} + ‖x^{k+1} − y^k‖²)`
/// along the trace (with `S = 0`, so the `D_k`-norm reduces to the x-block).
///
/// Steps with a vanishing denominator are skipped and carry the previous
/// maximum forward.
pub fn mu_hat_series(prob: &LassoProblem, trace: &Trace, terms: &[DenseMatrix]) -> Result<Vec<f64>> {
    let n = prob.n();
    let prob = prob.with_beta(trace.beta)?;
    let mut running = 0.0_f64;
    let mut out = Vec::with_capacity(terms.len());
    for (k, t) in terms.iter().enumerate() {
        let (x0, y0, l0) = trace.iterate(k, n);
        let (x1, y1, l1) = trace.iterate(k + 1, n);
        let f = kkt_vector(&prob, &l0, &x1, &y1, &l1)?.norm();
        let dx: Vec<f64> = x1.iter().zip(&x0).map(|(a, b)| a - b).collect();
        let denom = t.quad_form(&dx)? + dist2(&x1, &y0).powi(2);
        if denom > 0.0 && denom.is_finite() {
            running = running.max(f / denom);
        }
        out.push(running);
    }
    Ok(out)
}

/// Writes a `step,value` CSV.
pub fn write_series_csv(path: &Path, values: &[f64]) -> Result<()> {
    let mut text = String::from("step,value\n");
    for (k, v) in values.iter().enumerate() {
        text.push_str(&format!("{k},{v:.16e}\n"));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Same as [`write_series_csv`] into any writer.
pub fn write_series<W: Write>(mut out: W, values: &[f64]) -> std::io::Result<()> {
    writeln!(out, "step,value")?;
    for (k, v) in values.iter().enumerate() {
        writeln!(out, "{k},{v:.16e}")?;
    }
    Ok(())
}
