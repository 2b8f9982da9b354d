//! Vertex enumeration for tiny problems.
//!
//! Independent of the merit-function machinery; used to cross-check solver
//! objectives. For unbounded problems it returns the best vertex, not `-inf`.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::problem::{ModelError, StandardFormLp};

pub const MAX_ENUMERATION_N: usize = 12;
const SINGULAR_CUTOFF: f64 = 1e-10;
const FEASIBILITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct VertexOptimum {
    pub x: DVector<f64>,
    pub value: f64,
}

/// Best basic feasible solution over all `m`-column bases, or `None` when no
/// basis yields a nonnegative point.
pub fn brute_force_optimum(lp: &StandardFormLp) -> Result<Option<VertexOptimum>, ModelError> {
    let (m, n) = (lp.m(), lp.n());
    if n > MAX_ENUMERATION_N {
        return Err(ModelError::InstanceTooLarge {
            n,
            limit: MAX_ENUMERATION_N,
        });
    }
    let mut best: Option<VertexOptimum> = None;
    for basis in (0..n).combinations(m) {
        let cols = DMatrix::from_fn(m, m, |i, k| lp.a[(i, basis[k])]);
        let sv = cols.clone().singular_values();
        let (smax, smin) = (sv.max(), sv.min());
        if smax == 0.0 || smin < SINGULAR_CUTOFF * smax {
            continue;
        }
        let Some(xb) = cols.lu().solve(&lp.b) else {
            continue;
        };
        if xb.iter().any(|&t| t < -FEASIBILITY_SLACK) {
            continue;
        }
        let mut x = DVector::zeros(n);
        for (k, &j) in basis.iter().enumerate() {
            x[j] = xb[k];
        }
        let value = lp.c.dot(&x);
        if best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(VertexOptimum { x, value });
        }
    }
    Ok(best)
}
