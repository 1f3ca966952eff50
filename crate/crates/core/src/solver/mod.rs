//! The ADMM engine.
//!
//! Every variant runs the same outer loop from `x⁰ = y⁰ = λ⁰ = 0`:
//!
//! 1. metric maintenance (variable-metric variants, `1 ≤ k ≤ k̄`),
//! 2. x-update through the variant's [`XStrategy`],
//! 3. `y = soft(x − λ/β, τ/β)`,
//! 4. `λ ← λ − αβ(x − y)`,
//! 5. the primal/dual residual stopping test.

mod config;
mod strategy;

use std::time::{Duration, Instant};

use crate::linalg::{check_len, norm2};
use crate::metric::SPECTRAL_CAP;
use crate::problem::{soft_threshold, LassoProblem};
use crate::{Error, Result};

pub use config::{SolverConfig, Variant, GOLDEN};
pub use strategy::{
    metric_residual, x_rhs, x_update_exact, x_update_ipro, x_update_spro, ExactFactor, Metric, MetricMatrix,
    MetricUpdate, SetupInfo, XStrategy,
};

/// Iterates `(x, y, λ)` plus the previous `x` and `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: Vec<f64>,
    pub x_prev: Vec<f64>,
    pub y_prev: Vec<f64>,
    pub k: usize,
}

impl AdmmState {
    pub fn zeros(n: usize) -> Self {
        Self {
            x: vec![0.0; n],
            y: vec![0.0; n],
            lambda: vec![0.0; n],
            x_prev: vec![0.0; n],
            y_prev: vec![0.0; n],
            k: 0,
        }
    }
}

/// Outcome of the stopping test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCheck {
    pub stop: bool,
    /// `‖x − y‖`
    pub r_norm: f64,
    /// `‖β(y − y_prev)‖`
    pub s_norm: f64,
    pub eps_pri: f64,
    pub eps_dual: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationReport {
    pub variant: Option<Variant>,
    pub iterations: usize,
    pub converged: bool,
    pub primal_residuals: Vec<f64>,
    pub dual_residuals: Vec<f64>,
    pub eps_pri: Vec<f64>,
    pub eps_dual: Vec<f64>,
    /// `½‖Ay − b‖² + τ‖y‖₁` at the final `y`.
    pub objective: f64,
    /// KKT violation of the final `y` (see [`LassoProblem::kkt_residual`]).
    pub kkt_final: f64,
    /// KKT violation of the final `x`.
    pub kkt_final_x: f64,
    pub time_total: Duration,
    /// Cholesky factorization during setup.
    pub time_factor: Duration,
    /// Eigenvalue estimation during setup.
    pub time_eig: Duration,
    /// Loop time outside metric maintenance.
    pub time_algo: Duration,
    /// Metric maintenance, including refactorization of the damped metric.
    pub time_qn: Duration,
    pub metric_updates: usize,
    pub lambda_max: Option<f64>,
    pub xi: Option<f64>,
}

/// One recorded iteration: the iterates it produced and the metric it used.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    /// Iteration index `k`; the step maps `w^k` to `w^{k+1}`.
    pub k: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Metric used by this step's x-update (variable-metric variants only).
    pub metric: Option<MetricMatrix>,
    pub update: MetricUpdate,
}

/// Full iterate history of a solve, for the dense diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub variant: Variant,
    pub beta: f64,
    /// `ξ` of the fixed shift or of the initial metric.
    pub xi: Option<f64>,
    pub k_bar: Option<usize>,
    pub delta: Option<f64>,
    pub zeta: Option<f64>,
    pub steps: Vec<TraceStep>,
}

impl Trace {
    /// `(x^k, y^k, λ^k)` for `k = 0..=steps.len()`.
    pub fn iterate(&self, k: usize, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        if k == 0 {
            return (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        }
        let s = &self.steps[k - 1];
        (s.x.clone(), s.y.clone(), s.lambda.clone())
    }
}

/// `soft(x − λ/β, τ/β)`
pub fn y_update(prob: &LassoProblem, x: &[f64], lambda: &[f64]) -> Vec<f64> {
    let beta = prob.beta();
    let v: Vec<f64> = x.iter().zip(lambda).map(|(xi, li)| xi - li / beta).collect();
    soft_threshold(&v, prob.tau() / beta)
}

/// `λ − αβ(x − y)`
pub fn lambda_update(lambda: &[f64], x: &[f64], y: &[f64], beta: f64, alpha: f64) -> Vec<f64> {
    lambda
        .iter()
        .zip(x.iter().zip(y))
        .map(|(l, (xi, yi))| l - alpha * beta * (xi - yi))
        .collect()
}

/// Primal residual `r = x − y`, dual residual `σ = −β(y − y_prev)`, with
/// `ε_pri = √n·ε_abs + ε_rel·max(‖x‖, ‖y‖)` and `ε_dual = √n·ε_abs + ε_rel·‖λ‖`.
pub fn check_stop(state: &AdmmState, eps_abs: f64, eps_rel: f64, beta: f64) -> StopCheck {
    let n = state.x.len();
    let r_norm = crate::linalg::dist2(&state.x, &state.y);
    let s_norm = beta * crate::linalg::dist2(&state.y, &state.y_prev);
    let root_n = (n as f64).sqrt();
    let eps_pri = root_n * eps_abs + eps_rel * norm2(&state.x).max(norm2(&state.y));
    let eps_dual = root_n * eps_abs + eps_rel * norm2(&state.lambda);
    StopCheck {
        stop: r_norm <= eps_pri && s_norm <= eps_dual,
        r_norm,
        s_norm,
        eps_pri,
        eps_dual,
    }
}

/// Runs ADMM on `prob` with `β` taken from `config`.
pub fn solve(prob: &LassoProblem, config: &SolverConfig) -> Result<(AdmmState, IterationReport)> {
    let (state, report, _) = run(prob, config, false)?;
    Ok((state, report))
}

/// As [`solve`], additionally recording every iterate and metric.
///
/// Refuses dimensions above [`SPECTRAL_CAP`], since dense metrics are kept
/// for every step.
pub fn solve_traced(prob: &LassoProblem, config: &SolverConfig) -> Result<(AdmmState, IterationReport, Trace)> {
    if prob.n() > SPECTRAL_CAP {
        return Err(Error::SpectralCheckUnavailable {
            n: prob.n(),
            cap: SPECTRAL_CAP,
        });
    }
    let (state, report, trace) = run(prob, config, true)?;
    Ok((state, report, trace.expect("trace requested")))
}

fn run(prob: &LassoProblem, config: &SolverConfig, record: bool) -> Result<(AdmmState, IterationReport, Option<Trace>)> {
    config.validate()?;
    let t_start = Instant::now();
    let prob = if prob.beta() == config.beta {
        prob.clone()
    } else {
        prob.with_beta(config.beta)?
    };
    let n = prob.n();
    let (beta, alpha) = (config.beta, config.alpha);

    let (mut strategy, info) = XStrategy::setup(&prob, config)?;
    let mut report = IterationReport {
        variant: Some(config.variant),
        time_factor: info.time_factor,
        time_eig: info.time_eig,
        lambda_max: info.lambda_max,
        xi: info.xi,
        ..Default::default()
    };
    let mut trace = record.then(|| Trace {
        variant: config.variant,
        beta,
        xi: info.xi,
        k_bar: config.k_bar,
        delta: config.delta,
        zeta: config.zeta,
        steps: Vec::new(),
    });

    let mut state = AdmmState::zeros(n);
    let t_loop = Instant::now();
    let mut time_qn = Duration::ZERO;
    while state.k < config.max_iter {
        let t_qn = Instant::now();
        let update = strategy.maintain(&prob, state.k, &state.x, &state.x_prev)?;
        time_qn += t_qn.elapsed();
        if update.changed() {
            report.metric_updates += 1;
        }
        let used_metric = match &trace {
            Some(_) => strategy.metric().map(Metric::dense),
            None => None,
        };

        let x_new = strategy.x_update(&prob, &state.x, &state.y, &state.lambda)?;
        let y_new = y_update(&prob, &x_new, &state.lambda);
        let lambda_new = lambda_update(&state.lambda, &x_new, &y_new, beta, alpha);

        state.x_prev = std::mem::replace(&mut state.x, x_new);
        state.y_prev = std::mem::replace(&mut state.y, y_new);
        state.lambda = lambda_new;
        state.k += 1;

        let check = check_stop(&state, config.eps_abs, config.eps_rel, beta);
        report.primal_residuals.push(check.r_norm);
        report.dual_residuals.push(check.s_norm);
        report.eps_pri.push(check.eps_pri);
        report.eps_dual.push(check.eps_dual);
        if let Some(t) = trace.as_mut() {
            t.steps.push(TraceStep {
                k: state.k - 1,
                x: state.x.clone(),
                y: state.y.clone(),
                lambda: state.lambda.clone(),
                metric: used_metric,
                update,
            });
        }
        if check.stop {
            report.converged = true;
            break;
        }
    }
    let loop_time = t_loop.elapsed();
    report.time_qn = time_qn;
    report.time_algo = loop_time.saturating_sub(time_qn);
    report.iterations = state.k;
    check_len(n, state.y.len())?;
    report.objective = prob.objective(&state.y, &state.y)?;
    report.kkt_final = prob.kkt_residual(&state.y)?;
    report.kkt_final_x = prob.kkt_residual(&state.x)?;
    report.time_total = t_start.elapsed();
    Ok((state, report, trace))
}
