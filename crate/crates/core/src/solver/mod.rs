//! Regularized Newton drivers.
//!
//! * `LmAdaptive`: Newton on the base merit with `μᵏ = sqrt(L‖∇fᵏ‖₂/2)` and unit steps.
//! * `LmConstant`: Newton on the base merit with fixed `μ` and Armijo steps.
//! * `Homotopy`: Newton on `h_{q,νᵏ}` with fixed `μ`, Armijo steps on `h_{q,νᵏ}`,
//!   then `νᵏ⁺¹ = θνᵏ`.
//!
//! Termination always measures the base merit, since only it certifies optimality.

mod homogeneous;
mod line_search;

pub use homogeneous::{classify, solve_homogeneous, HomogeneousOutcome, HomogeneousStatus};
pub use line_search::{armijo_search, ArmijoParams, ArmijoStep, LineSearchError};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linsys::{newton_direction, LinsysError, RankOneBackend};
use crate::merit::{Merit, MeritError, MeritSpec};
use crate::problem::{ModelError, PrimalDualPoint, StandardFormLp};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Merit(#[from] MeritError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    LmAdaptive,
    LmConstant,
    Homotopy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineSearch {
    PureNewton,
    Armijo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub q: f64,
    pub mu_const: f64,
    /// Hessian Lipschitz constant used by `LmAdaptive`; 1 is exact for q = 3.
    pub lipschitz: f64,
    pub theta: f64,
    pub nu0: f64,
    pub line_search: LineSearch,
    pub armijo_c1: f64,
    pub armijo_shrink: f64,
    pub max_backtracks: usize,
    pub max_iter: usize,
    pub tol_grad: f64,
    pub tol_f: f64,
    pub tol_no_opt: f64,
    pub trace: bool,
    pub rank_one: RankOneBackend,
}

impl SolverConfig {
    fn common(algorithm: Algorithm, q: f64, line_search: LineSearch) -> Self {
        Self {
            algorithm,
            q,
            mu_const: 1e-9,
            lipschitz: 1.0,
            theta: 0.8,
            nu0: 1.0,
            line_search,
            armijo_c1: 1e-4,
            armijo_shrink: 0.5,
            max_backtracks: 60,
            max_iter: 500,
            tol_grad: 1e-10,
            tol_f: 1e-16,
            tol_no_opt: 1e-8,
            trace: true,
            rank_one: RankOneBackend::CholeskyUpdate,
        }
    }

    /// q = 3, adaptive μ, unit steps.
    pub fn lm_adaptive() -> Self {
        Self::common(Algorithm::LmAdaptive, 3.0, LineSearch::PureNewton)
    }

    /// q = 2.1, μ = 1e−9, Armijo.
    pub fn lm_constant() -> Self {
        Self::common(Algorithm::LmConstant, 2.1, LineSearch::Armijo)
    }

    /// q = 2.1, μ = 1e−9, Armijo, θ = 0.8, ν₀ = 1.
    pub fn homotopy() -> Self {
        Self::common(Algorithm::Homotopy, 2.1, LineSearch::Armijo)
    }

    pub fn for_algorithm(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::LmAdaptive => Self::lm_adaptive(),
            Algorithm::LmConstant => Self::lm_constant(),
            Algorithm::Homotopy => Self::homotopy(),
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::InvalidConfig(msg));
        if !(self.q > 2.0 && self.q.is_finite()) {
            return bad(format!("q must exceed 2, got {}", self.q));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return bad(format!("theta must lie in (0, 1), got {}", self.theta));
        }
        let positive = [
            ("mu_const", self.mu_const),
            ("lipschitz", self.lipschitz),
            ("nu0", self.nu0),
            ("tol_grad", self.tol_grad),
            ("tol_f", self.tol_f),
            ("tol_no_opt", self.tol_no_opt),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return bad(format!("{name} must be positive, got {value}"));
            }
        }
        if !(self.armijo_c1 > 0.0 && self.armijo_c1 < 1.0) {
            return bad(format!(
                "armijo_c1 must lie in (0, 1), got {}",
                self.armijo_c1
            ));
        }
        if !(self.armijo_shrink > 0.0 && self.armijo_shrink < 1.0) {
            return bad(format!(
                "armijo_shrink must lie in (0, 1), got {}",
                self.armijo_shrink
            ));
        }
        Ok(())
    }

    fn armijo(&self) -> ArmijoParams {
        ArmijoParams {
            alpha0: 1.0,
            c1: self.armijo_c1,
            shrink: self.armijo_shrink,
            max_backtracks: self.max_backtracks,
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::homotopy()
    }
}

/// One trace row describing iterate `k`.
///
/// `mu` and `alpha` belong to the step taken from iterate `k`; the final row
/// has `alpha = 0` because no step leaves it. `grad_norm` is the 2-norm of the
/// base merit gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub f: f64,
    pub grad_norm: f64,
    pub mu: f64,
    pub nu: f64,
    pub alpha: f64,
    pub gap: f64,
    pub primal_res: f64,
    pub dual_res: f64,
    pub min_x: f64,
    pub min_s: f64,
    pub rel_err_x: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    NoOptimalSolution,
    IterationLimit,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    PrimalFeasibleDualInfeasible,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub point: PrimalDualPoint,
    /// Base merit value at `point`.
    pub final_f: f64,
    /// ∞-norm of the base merit gradient at `point`.
    pub final_grad_norm: f64,
    pub iterations: usize,
    pub classification: Option<Classification>,
    /// `1 + ‖A‖_F + ‖b‖ + ‖c‖`; tolerances are scaled by its square.
    pub scale: f64,
    pub trace: Vec<IterationRecord>,
    pub message: Option<String>,
}

/// Runs the configured algorithm from `start` (all zeros when `None`).
pub fn solve(
    lp: &StandardFormLp,
    config: &SolverConfig,
    start: Option<&PrimalDualPoint>,
) -> Result<SolveOutcome, SolverError> {
    solve_with_reference(lp, config, start, None)
}

struct Snapshot {
    f: f64,
    grad: DVector<f64>,
    grad_inf: f64,
    grad_two: f64,
}

fn snapshot(merit: &Merit<'_>, p: &DVector<f64>) -> Result<Snapshot, MeritError> {
    let f = merit.value(p)?;
    let grad = merit.gradient(p)?;
    Ok(Snapshot {
        f,
        grad_inf: grad.amax(),
        grad_two: grad.norm(),
        grad,
    })
}

/// Like [`solve`], additionally reporting `‖x − x*‖/‖x*‖` in the trace.
pub fn solve_with_reference(
    lp: &StandardFormLp,
    config: &SolverConfig,
    start: Option<&PrimalDualPoint>,
    reference_x: Option<&DVector<f64>>,
) -> Result<SolveOutcome, SolverError> {
    config.validate()?;
    lp.validate()?;
    let (m, n) = (lp.m(), lp.n());
    if let Some(p) = start {
        p.check_dims(m, n)?;
    }
    if let Some(x) = reference_x {
        if x.len() != n {
            return Err(ModelError::DimensionMismatch {
                what: "reference x",
                expected: n,
                got: x.len(),
            }
            .into());
        }
    }

    let scale = lp.scale();
    let scale2 = scale * scale;
    let base = Merit::new(lp, MeritSpec::base(config.q))?;
    let mut homotopy = match config.algorithm {
        Algorithm::Homotopy => Some(Merit::new(lp, MeritSpec::homotopy(config.q, config.nu0))?),
        _ => None,
    };

    let mut p = start
        .cloned()
        .unwrap_or_else(|| PrimalDualPoint::zeros(m, n))
        .to_flat();
    let mut trace = Vec::new();

    let record = |k: usize, p: &DVector<f64>, snap: &Snapshot, mu: f64, nu: f64, alpha: f64| {
        let point = PrimalDualPoint::from_flat(m, n, p).expect("flat layout");
        let gap = lp.c.dot(&point.x) - lp.b.dot(&point.lambda);
        let primal = (&lp.b - &lp.a * &point.x).norm();
        let dual = (&lp.c - lp.a.tr_mul(&point.lambda) - &point.s).norm();
        IterationRecord {
            k,
            f: snap.f,
            grad_norm: snap.grad_two,
            mu,
            nu,
            alpha,
            gap: gap.abs(),
            primal_res: primal,
            dual_res: dual,
            min_x: point.x.min(),
            min_s: point.s.min(),
            rel_err_x: reference_x.map(|xs| (&point.x - xs).norm() / xs.norm()),
        }
    };

    let finish = |status: SolveStatus,
                  p: &DVector<f64>,
                  snap: &Snapshot,
                  iterations: usize,
                  trace: Vec<IterationRecord>,
                  message: Option<String>| {
        let point = PrimalDualPoint::from_flat(m, n, p).expect("flat layout");
        let classification = (status == SolveStatus::NoOptimalSolution).then(|| {
            let primal = (&lp.b - &lp.a * &point.x).norm();
            if primal <= 1e-6 * scale {
                Classification::PrimalFeasibleDualInfeasible
            } else {
                Classification::Unclassified
            }
        });
        SolveOutcome {
            status,
            point,
            final_f: snap.f,
            final_grad_norm: snap.grad_inf,
            iterations,
            classification,
            scale,
            trace,
            message,
        }
    };

    let failure_snapshot = |f: f64| Snapshot {
        f,
        grad: DVector::zeros(0),
        grad_inf: f64::NAN,
        grad_two: f64::NAN,
    };

    let mut k = 0usize;
    loop {
        let nu = match config.algorithm {
            Algorithm::Homotopy => config.nu0 * config.theta.powi(k as i32),
            _ => 0.0,
        };
        let snap = match snapshot(&base, &p) {
            Ok(s) => s,
            Err(e) => {
                return Ok(finish(
                    SolveStatus::NumericalFailure,
                    &p,
                    &failure_snapshot(f64::INFINITY),
                    k,
                    trace,
                    Some(e.to_string()),
                ))
            }
        };

        let grad_small = snap.grad_inf <= config.tol_grad * scale2;
        let terminal = if grad_small && snap.f <= config.tol_f * scale2 {
            Some(SolveStatus::Optimal)
        } else if grad_small && snap.f >= config.tol_no_opt * scale2 {
            Some(SolveStatus::NoOptimalSolution)
        } else if k >= config.max_iter {
            Some(SolveStatus::IterationLimit)
        } else {
            None
        };
        if let Some(status) = terminal {
            let mu = match config.algorithm {
                Algorithm::LmAdaptive => (config.lipschitz * snap.grad_two / 2.0).sqrt(),
                _ => config.mu_const,
            };
            if config.trace {
                trace.push(record(k, &p, &snap, mu, nu, 0.0));
            }
            return Ok(finish(status, &p, &snap, k, trace, None));
        }

        // Objective being stepped on this iteration.
        let (objective, obj_f, obj_grad) = match homotopy.as_mut() {
            Some(h) => {
                h.set_nu(nu)?;
                let value = h.value(&p);
                let grad = h.gradient(&p);
                match (value, grad) {
                    (Ok(v), Ok(g)) => (&*h, v, g),
                    (Err(e), _) | (_, Err(e)) => {
                        return Ok(finish(
                            SolveStatus::NumericalFailure,
                            &p,
                            &snap,
                            k,
                            trace,
                            Some(e.to_string()),
                        ))
                    }
                }
            }
            None => (&base, snap.f, snap.grad.clone()),
        };

        let mu = match config.algorithm {
            Algorithm::LmAdaptive => (config.lipschitz * obj_grad.norm() / 2.0).sqrt(),
            _ => config.mu_const,
        };
        let step = match newton_direction(objective, &p, &obj_grad, mu, config.rank_one) {
            Ok(s) => s,
            Err(e) => {
                let msg = match e {
                    LinsysError::Merit(inner) => inner.to_string(),
                    other => other.to_string(),
                };
                return Ok(finish(
                    SolveStatus::NumericalFailure,
                    &p,
                    &snap,
                    k,
                    trace,
                    Some(msg),
                ));
            }
        };
        if step.direction.iter().any(|d| !d.is_finite()) {
            return Ok(finish(
                SolveStatus::NumericalFailure,
                &p,
                &snap,
                k,
                trace,
                Some("non-finite Newton direction".into()),
            ));
        }

        let alpha = match config.line_search {
            LineSearch::PureNewton => 1.0,
            LineSearch::Armijo => {
                let searched = armijo_search(
                    |trial| objective.value(trial).ok(),
                    &p,
                    obj_f,
                    &obj_grad,
                    &step.direction,
                    &config.armijo(),
                );
                match searched {
                    Ok(s) if !s.stagnated => s.alpha,
                    Ok(s) if s.value < obj_f => s.alpha,
                    // No decrease is representable along this direction: the
                    // iterate sits at the round-off floor of the objective.
                    Ok(_) | Err(LineSearchError::NotDescentDirection(_)) => {
                        if config.trace {
                            trace.push(record(k, &p, &snap, step.mu_used, nu, 0.0));
                        }
                        return Ok(finish(
                            SolveStatus::NumericalFailure,
                            &p,
                            &snap,
                            k,
                            trace,
                            Some("line search stagnated".into()),
                        ));
                    }
                }
            }
        };

        if config.trace {
            trace.push(record(k, &p, &snap, step.mu_used, nu, alpha));
        }
        p += &step.direction * alpha;
        k += 1;
    }
}
