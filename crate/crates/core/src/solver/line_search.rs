use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LineSearchError {
    #[error("not a descent direction (slope {0})")]
    NotDescentDirection(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmijoParams {
    pub alpha0: f64,
    pub c1: f64,
    pub shrink: f64,
    pub max_backtracks: usize,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        Self {
            alpha0: 1.0,
            c1: 1e-4,
            shrink: 0.5,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmijoStep {
    pub alpha: f64,
    /// Objective at `p + αΔ`; `+inf` when the probe overflowed.
    pub value: f64,
    /// No probe met the sufficient-decrease test; `alpha` is the last probe.
    pub stagnated: bool,
}

/// Backtracking on `α ∈ {α₀·shrinkʲ : 0 ≤ j ≤ max_backtracks}` until
/// `f(p + αΔ) ≤ f(p) + c₁·α·(∇f·Δ)`.
///
/// `objective` returns `None` for probes that cannot be evaluated; those are rejected.
pub fn armijo_search<F>(
    objective: F,
    p: &DVector<f64>,
    f0: f64,
    grad: &DVector<f64>,
    direction: &DVector<f64>,
    params: &ArmijoParams,
) -> Result<ArmijoStep, LineSearchError>
where
    F: Fn(&DVector<f64>) -> Option<f64>,
{
    let slope = grad.dot(direction);
    if slope.is_nan() || slope >= 0.0 {
        return Err(LineSearchError::NotDescentDirection(slope));
    }
    let mut alpha = params.alpha0;
    let mut last = ArmijoStep {
        alpha,
        value: f64::INFINITY,
        stagnated: true,
    };
    for _ in 0..=params.max_backtracks {
        let trial = p + direction * alpha;
        let value = objective(&trial)
            .filter(|v| v.is_finite())
            .unwrap_or(f64::INFINITY);
        if value <= f0 + params.c1 * alpha * slope {
            return Ok(ArmijoStep {
                alpha,
                value,
                stagnated: false,
            });
        }
        last = ArmijoStep {
            alpha,
            value,
            stagnated: true,
        };
        alpha *= params.shrink;
    }
    Ok(last)
}
