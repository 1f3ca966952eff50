//! Shared fixtures for the criterion benches.

use vmadmm::{generate, GeneratorSpec, LassoProblem};

/// A generated instance with `s = 0.1`, `p = 0.5`.
pub fn instance(n: usize, m: usize, beta: f64, seed: u64) -> LassoProblem {
    let spec = GeneratorSpec {
        n,
        m,
        sparsity: 0.1,
        density: 0.5,
        seed,
        ..GeneratorSpec::default()
    };
    generate(&spec, beta).expect("bench instance").0
}
