//! Variable-metric semi-proximal ADMM for `min ½‖Ax − b‖² + τ‖x‖₁`.
//!
//! The crate implements seven ADMM variants that differ only in the proximal
//! term of the x-subproblem:
//!
//! | variant  | proximal term `T_k`                                   |
//! |----------|-------------------------------------------------------|
//! | `Opt`    | none, exact x-update through a Cholesky factor        |
//! | `Spro`   | `ξI − βI − AᵀA`, `ξ = κ₁·λmax(βI + AᵀA)`              |
//! | `Ipro`   | `ξI − AᵀA`, `ξ = κ₂·λmax(AᵀA)` (possibly indefinite)  |
//! | `Bfgs`   | `H_k⁻¹ − M`, dense BFGS inverse update                |
//! | `Lbfgs`  | `H_k⁻¹ − M`, limited-memory two-loop recursion        |
//! | `BfgsR`  | `B_k − M`, damped and shifted BFGS on `B`             |
//! | `LbfgsR` | `Lbfgs` with updates frozen after iteration `k̄`       |
//!
//! where `M = AᵀA + βI` is the x-block Hessian of the augmented Lagrangian.
//! Quasi-Newton metrics are updated with exact pairs `(s, Ms)`, which keeps
//! `H_k ⪯ M⁻¹` whenever `H_0 ⪯ M⁻¹`, hence `T_k ⪰ 0`.
//!
//! [`diagnostics`] checks the convergence theory on recorded traces and
//! [`experiment`] drives multi-seed comparisons.
//!
//! ```
//! use vmadmm::{generate, solve, GeneratorSpec, SolverConfig, Variant};
//!
//! let spec = GeneratorSpec { n: 40, m: 20, sparsity: 0.2, density: 0.5, seed: 3, ..Default::default() };
//! let (prob, _xbar) = generate(&spec, 5.0).unwrap();
//! let (_state, report) = solve(&prob, &SolverConfig::new(Variant::Lbfgs, 5.0)).unwrap();
//! assert!(report.converged);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
mod error;
pub mod experiment;
mod kv;
pub mod linalg;
pub mod metric;
pub mod problem;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::{CholeskyFactor, DenseMatrix, SparseMatrix};
pub use metric::{BfgsMetric, DampedBMetric, LbfgsMetric, UpdatePair};
pub use problem::{generate, soft_threshold, GeneratorSpec, LassoProblem};
pub use solver::{solve, solve_traced, AdmmState, IterationReport, SolverConfig, Trace, Variant};
