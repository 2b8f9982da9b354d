//! Newton on the homogeneous merit over `(x, λ, s, τ, κ)`.
//!
//! Zeros of this merit are scaled solutions of the self-dual embedding. A
//! positive `τ` recovers an optimum of the original problem; a positive `κ`
//! exposes an infeasibility certificate.

use super::{armijo_search, Algorithm, LineSearch, LineSearchError, SolverConfig, SolverError};
use crate::linsys::newton_direction;
use crate::merit::{Merit, MeritSpec};
use crate::problem::{HomogeneousPoint, PrimalDualPoint, StandardFormLp};

#[derive(Debug, Clone, PartialEq)]
pub enum HomogeneousStatus {
    OptimalRecovered(PrimalDualPoint),
    PrimalInfeasible,
    DualInfeasible,
    Inconclusive,
}

impl HomogeneousStatus {
    pub fn label(&self) -> &'static str {
        match self {
            Self::OptimalRecovered(_) => "optimal_recovered",
            Self::PrimalInfeasible => "primal_infeasible",
            Self::DualInfeasible => "dual_infeasible",
            Self::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousOutcome {
    pub status: HomogeneousStatus,
    pub point: HomogeneousPoint,
    pub final_f: f64,
    pub final_grad_norm: f64,
    pub iterations: usize,
    /// Stationarity reached within tolerance.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stop {
    Stationary,
    Limit,
    Stalled,
}

/// Minimizes the homogeneous merit from `start`.
///
/// `LmAdaptive` uses adaptive `μ` with unit steps. The other two algorithms
/// both use the fixed `μ` and the configured line search; there is no `ν`
/// schedule on this model.
pub fn solve_homogeneous(
    lp: &StandardFormLp,
    config: &SolverConfig,
    start: &HomogeneousPoint,
) -> Result<HomogeneousOutcome, SolverError> {
    config.validate()?;
    lp.validate()?;
    let (m, n) = (lp.m(), lp.n());
    start.check_dims(m, n)?;
    let merit = Merit::new(lp, MeritSpec::homogeneous(config.q))?;
    let scale = lp.scale();
    let scale2 = scale * scale;

    let mut p = start.to_flat();
    let mut k = 0;
    let (f, grad, stop) = loop {
        let f = merit.value(&p)?;
        let grad = merit.gradient(&p)?;
        let gnorm = grad.amax();
        if gnorm <= config.tol_grad * scale2 {
            break (f, grad, Stop::Stationary);
        }
        if k >= config.max_iter {
            break (f, grad, Stop::Limit);
        }
        let mu = match config.algorithm {
            Algorithm::LmAdaptive => (config.lipschitz * grad.norm() / 2.0).sqrt(),
            Algorithm::LmConstant | Algorithm::Homotopy => config.mu_const,
        };
        let step = match newton_direction(&merit, &p, &grad, mu, config.rank_one) {
            Ok(s) if s.direction.iter().all(|d| d.is_finite()) => s,
            _ => break (f, grad, Stop::Stalled),
        };
        let alpha = match config.line_search {
            LineSearch::PureNewton => 1.0,
            LineSearch::Armijo => match armijo_search(
                |t| merit.value(t).ok(),
                &p,
                f,
                &grad,
                &step.direction,
                &config.armijo(),
            ) {
                Ok(s) if !s.stagnated || s.value < f => s.alpha,
                Ok(_) | Err(LineSearchError::NotDescentDirection(_)) => {
                    break (f, grad, Stop::Stalled)
                }
            },
        };
        p += &step.direction * alpha;
        k += 1;
    };

    let point = HomogeneousPoint::from_flat(m, n, &p)?;
    let status = if stop == Stop::Stationary {
        classify(lp, &point)
    } else {
        HomogeneousStatus::Inconclusive
    };
    Ok(HomogeneousOutcome {
        status,
        final_f: f,
        final_grad_norm: grad.amax(),
        iterations: k,
        converged: stop == Stop::Stationary,
        point,
    })
}

/// Reads a certificate off an (approximate) zero of the homogeneous merit.
pub fn classify(lp: &StandardFormLp, point: &HomogeneousPoint) -> HomogeneousStatus {
    let eps = 1e-6 * (1.0 + point.max_abs());
    if point.tau > eps {
        let t = point.tau;
        return HomogeneousStatus::OptimalRecovered(PrimalDualPoint {
            x: &point.x / t,
            lambda: &point.lambda / t,
            s: &point.s / t,
        });
    }
    if point.kappa > eps {
        // Sign tests share the ε threshold so round-off cannot flip them.
        if -lp.c.dot(&point.x) > eps {
            return HomogeneousStatus::DualInfeasible;
        }
        if lp.b.dot(&point.lambda) > eps {
            return HomogeneousStatus::PrimalInfeasible;
        }
    }
    HomogeneousStatus::Inconclusive
}
