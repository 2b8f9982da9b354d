//! Fixtures shared by the benchmarks.

use lpmerit_core::nalgebra::DVector;
use lpmerit_core::{generate_optimal_lp, GeneratedProblem, PrimalDualPoint};

/// Problem sizes used across benchmarks.
pub const SIZES: [(usize, usize); 3] = [(20, 30), (50, 75), (100, 150)];

pub fn optimal_problem(m: usize, n: usize) -> GeneratedProblem {
    generate_optimal_lp(m, n, 1).expect("valid benchmark shape")
}

/// A deterministic point with mixed signs, so the hinge terms are active.
pub fn probe_point(m: usize, n: usize) -> DVector<f64> {
    let zeros = PrimalDualPoint::zeros(m, n).to_flat();
    DVector::from_iterator(
        zeros.len(),
        (0..zeros.len()).map(|i| ((i * 7919) % 23) as f64 / 11.0 - 1.0),
    )
}
