//! Seeded random problems with known certificates.
//!
//! Optimal problems are built backwards from a strictly complementary vertex
//! `(x*, λ*, s*)`; unbounded problems are built around a nonnegative ray in the
//! null space of `A` plus a strictly feasible point.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::problem::{ModelError, PrimalDualPoint, StandardFormLp};

/// Name recorded in problem files so a seed can be tied to the stream that produced it.
pub const GENERATOR_NAME: &str = "lpmerit/chacha8-seed_from_u64/standard-normal";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    OptimalSolvable,
    Unbounded,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedProblem {
    pub lp: StandardFormLp,
    pub known_optimum: Option<PrimalDualPoint>,
    /// Nonnegative `d` with `Ad = 0` and `c·d < 0`.
    pub known_ray: Option<DVector<f64>>,
    /// Primal feasible point stored alongside an unboundedness ray.
    pub feasible_point: Option<DVector<f64>>,
    pub seed: u64,
    pub kind: ProblemKind,
    pub generator: String,
}

fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    // Row-major fill so the stream order matches the serialized layout.
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    DMatrix::from_row_slice(rows, cols, &data)
}

fn normal_vector(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    DVector::from_iterator(len, (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

fn unit_offset(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.5..1.5)
}

/// Random problem whose optimum is a known strictly complementary vertex.
pub fn generate_optimal_lp(m: usize, n: usize, seed: u64) -> Result<GeneratedProblem, ModelError> {
    if m < 1 || m >= n {
        return Err(ModelError::ShapeViolation { m, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = normal_matrix(&mut rng, m, n);

    let mut support = index::sample(&mut rng, n, m).into_vec();
    support.sort_unstable();
    let mut in_support = vec![false; n];
    for &j in &support {
        in_support[j] = true;
    }

    let mut x = DVector::zeros(n);
    let mut s = DVector::zeros(n);
    for j in 0..n {
        if in_support[j] {
            x[j] = unit_offset(&mut rng);
        } else {
            s[j] = unit_offset(&mut rng);
        }
    }
    let lambda = normal_vector(&mut rng, m);

    let b = &a * &x;
    let c = a.tr_mul(&lambda) + &s;
    let lp = StandardFormLp::new(a, b, c)?;
    Ok(GeneratedProblem {
        lp,
        known_optimum: Some(PrimalDualPoint { x, lambda, s }),
        known_ray: None,
        feasible_point: None,
        seed,
        kind: ProblemKind::OptimalSolvable,
        generator: GENERATOR_NAME.to_string(),
    })
}

/// Random primal-unbounded problem: feasible `x₀ > 0` plus a ray `d ≥ 0`, `Ad = 0`, `c·d < 0`.
pub fn generate_unbounded_lp(
    m: usize,
    n: usize,
    seed: u64,
) -> Result<GeneratedProblem, ModelError> {
    if m < 1 || m + 1 >= n {
        return Err(ModelError::ShapeViolation { m, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let head = normal_matrix(&mut rng, m, n - 1);
    let d_head = DVector::from_iterator(n - 1, (0..n - 1).map(|_| unit_offset(&mut rng)));
    let last_col = -(&head * &d_head);

    let mut a = DMatrix::zeros(m, n);
    a.columns_mut(0, n - 1).copy_from(&head);
    a.set_column(n - 1, &last_col);
    let mut d = DVector::zeros(n);
    d.rows_mut(0, n - 1).copy_from(&d_head);
    d[n - 1] = 1.0;

    let x0 = DVector::from_iterator(n, (0..n).map(|_| unit_offset(&mut rng)));
    let b = &a * &x0;

    let mut c = normal_vector(&mut rng, n);
    let cd = c.dot(&d);
    if cd >= 0.0 {
        let shift = (cd + 1.0) / d.dot(&d);
        c -= shift * &d;
    }

    let lp = StandardFormLp::new(a, b, c)?;
    Ok(GeneratedProblem {
        lp,
        known_optimum: None,
        known_ray: Some(d),
        feasible_point: Some(x0),
        seed,
        kind: ProblemKind::Unbounded,
        generator: GENERATOR_NAME.to_string(),
    })
}
