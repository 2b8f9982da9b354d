//! Regularized Newton systems `(∇²f + μI) Δ = −∇f`.
//!
//! The structured path never forms the `(2n+m)`-sized matrix. With
//! `D₁ = μ + diag_x`, `D₂ = μ + diag_λ`, `D₃ = μ + diag_s` the system is
//!
//! ```text
//! [ AᵀA + D₁      0          0     ]         [ Δx ]   [ r_x ]
//! [    0      AAᵀ + D₂       A     ] + v vᵀ  [ Δλ ] = [ r_λ ]      v = (c; −b; 0)
//! [    0          Aᵀ       I + D₃  ]         [ Δs ]   [ r_s ]
//! ```
//!
//! Eliminating `Δs = (I + D₃)⁻¹ (r_s − AᵀΔλ)` leaves a block diagonal
//! `(n+m)`-system plus the rank-one term, solved from two small Cholesky
//! factors. The dense path factors the full matrix and serves as the oracle
//! and last-resort fallback.

mod cholesky;

pub use cholesky::{cholesky_rank_one_update, CholeskyFactor};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::merit::{Merit, MeritError, MeritKind};
use crate::problem::StandardFormLp;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinsysError {
    #[error("regularization must be positive, got {0}")]
    NonPositiveRegularization(f64),
    #[error("cholesky factorization of a {size}x{size} block failed at pivot {pivot}")]
    FactorizationFailure { size: usize, pivot: usize },
    #[error("structured solve does not apply to the homogeneous merit")]
    UnsupportedKind,
    #[error(transparent)]
    Merit(#[from] MeritError),
}

/// How the `v vᵀ` coupling is folded in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RankOneBackend {
    /// Update the joint block-diagonal factor.
    #[default]
    CholeskyUpdate,
    /// Correct the block solves with the Sherman–Morrison formula.
    ShermanMorrison,
}

/// Diagonals and right-hand side of the block system, before elimination.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem {
    pub d1: DVector<f64>,
    pub d2: DVector<f64>,
    pub d3: DVector<f64>,
    pub rhs_x: DVector<f64>,
    pub rhs_lambda: DVector<f64>,
    pub rhs_s: DVector<f64>,
    /// `(c; −b)`.
    pub v: DVector<f64>,
}

/// Factorization sizes touched by one solve.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub factorizations: Vec<usize>,
    pub rank_one_updates: Vec<usize>,
}

impl SolveStats {
    pub fn largest_factorization(&self) -> usize {
        self.factorizations.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredSolution {
    pub dx: DVector<f64>,
    pub dlambda: DVector<f64>,
    pub ds: DVector<f64>,
    pub stats: SolveStats,
}

impl StructuredSolution {
    pub fn to_flat(&self) -> DVector<f64> {
        let (n, m) = (self.dx.len(), self.dlambda.len());
        let mut out = DVector::zeros(2 * n + m);
        out.rows_mut(0, n).copy_from(&self.dx);
        out.rows_mut(n, m).copy_from(&self.dlambda);
        out.rows_mut(n + m, n).copy_from(&self.ds);
        out
    }
}

/// Assembles the block diagonals and `−∇` at flat point `p`.
pub fn build_reduced(
    merit: &Merit<'_>,
    p: &DVector<f64>,
    mu: f64,
) -> Result<ReducedSystem, LinsysError> {
    if mu.is_nan() || mu <= 0.0 {
        return Err(LinsysError::NonPositiveRegularization(mu));
    }
    if merit.spec().kind == MeritKind::Homogeneous {
        return Err(LinsysError::UnsupportedKind);
    }
    let grad = merit.gradient(p)?;
    build_reduced_with_gradient(merit, p, &grad, mu)
}

fn build_reduced_with_gradient(
    merit: &Merit<'_>,
    p: &DVector<f64>,
    grad: &DVector<f64>,
    mu: f64,
) -> Result<ReducedSystem, LinsysError> {
    let lp = merit.lp();
    let (m, n) = (lp.m(), lp.n());
    let diag = merit.hessian_diagonal(p)?;
    let shift = |v: DVector<f64>| v.add_scalar(mu);
    let mut v = DVector::zeros(n + m);
    v.rows_mut(0, n).copy_from(&lp.c);
    v.rows_mut(n, m).copy_from(&(-&lp.b));
    Ok(ReducedSystem {
        d1: shift(diag.rows(0, n).into_owned()),
        d2: shift(diag.rows(n, m).into_owned()),
        d3: shift(diag.rows(n + m, n).into_owned()),
        rhs_x: -grad.rows(0, n),
        rhs_lambda: -grad.rows(n, m),
        rhs_s: -grad.rows(n + m, n),
        v,
    })
}

/// Block elimination plus rank-one handling; see the module docs.
pub fn solve_structured(
    sys: &ReducedSystem,
    lp: &StandardFormLp,
    backend: RankOneBackend,
) -> Result<StructuredSolution, LinsysError> {
    let a = &lp.a;
    let (m, n) = a.shape();
    let mut stats = SolveStats::default();

    let one_plus_d3 = sys.d3.add_scalar(1.0);
    let weights = sys.d3.component_div(&one_plus_d3);

    // M_x = AᵀA + D₁
    let mut mx = a.tr_mul(a);
    for j in 0..n {
        mx[(j, j)] += sys.d1[j];
    }
    // M_λ = A diag(D₃/(1+D₃)) Aᵀ + D₂
    let mut scaled = a.clone();
    for j in 0..n {
        scaled.column_mut(j).scale_mut(weights[j]);
    }
    let mut ml = &scaled * a.transpose();
    for i in 0..m {
        ml[(i, i)] += sys.d2[i];
    }

    let fx = CholeskyFactor::factor(&mx)?;
    stats.factorizations.push(n);
    let fl = CholeskyFactor::factor(&ml)?;
    stats.factorizations.push(m);

    let mut rhs = DVector::zeros(n + m);
    rhs.rows_mut(0, n).copy_from(&sys.rhs_x);
    let rl = &sys.rhs_lambda - a * sys.rhs_s.component_div(&one_plus_d3);
    rhs.rows_mut(n, m).copy_from(&rl);

    let y = match backend {
        RankOneBackend::CholeskyUpdate => {
            let mut joint = CholeskyFactor::block_diagonal(&fx, &fl);
            joint.rank_one_update(&sys.v);
            stats.rank_one_updates.push(n + m);
            joint.solve(&rhs)
        }
        RankOneBackend::ShermanMorrison => {
            let block_solve = |r: &DVector<f64>| {
                let mut out = DVector::zeros(n + m);
                out.rows_mut(0, n)
                    .copy_from(&fx.solve(&r.rows(0, n).into_owned()));
                out.rows_mut(n, m)
                    .copy_from(&fl.solve(&r.rows(n, m).into_owned()));
                out
            };
            let z = block_solve(&rhs);
            let u = block_solve(&sys.v);
            let denom = 1.0 + sys.v.dot(&u);
            &z - &u * (sys.v.dot(&z) / denom)
        }
    };

    let dx = y.rows(0, n).into_owned();
    let dlambda = y.rows(n, m).into_owned();
    let ds = (&sys.rhs_s - a.tr_mul(&dlambda)).component_div(&one_plus_d3);
    Ok(StructuredSolution {
        dx,
        dlambda,
        ds,
        stats,
    })
}

/// `(∇²merit(p) + μI)⁻¹ rhs` via a full dense Cholesky factorization.
pub fn solve_dense(
    merit: &Merit<'_>,
    p: &DVector<f64>,
    mu: f64,
    rhs: &DVector<f64>,
) -> Result<DVector<f64>, LinsysError> {
    if mu.is_nan() || mu <= 0.0 {
        return Err(LinsysError::NonPositiveRegularization(mu));
    }
    let mut h = merit.hessian(p)?.full();
    let dim = h.nrows();
    for i in 0..dim {
        h[(i, i)] += mu;
    }
    let chol = h.cholesky().ok_or(LinsysError::FactorizationFailure {
        size: dim,
        pivot: dim,
    })?;
    Ok(chol.solve(rhs))
}

/// Maximum number of tenfold regularization increases before the dense fallback.
pub const MAX_ESCALATIONS: usize = 20;
const MU_FLOOR: f64 = 1e-12;

/// Newton direction plus what it took to get it.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonStep {
    pub direction: DVector<f64>,
    pub mu_used: f64,
    pub escalations: usize,
    pub dense_fallback: bool,
    pub stats: SolveStats,
}

/// Regularized Newton direction `−(∇² + μI)⁻¹ ∇` for `merit` at `p`.
///
/// The structured path is used for the base and homotopy merits; on factorization
/// failure `μ` is raised to `max(10μ, 1e−12)` up to [`MAX_ESCALATIONS`] times before
/// a dense solve. The homogeneous merit always takes the dense path.
pub fn newton_direction(
    merit: &Merit<'_>,
    p: &DVector<f64>,
    grad: &DVector<f64>,
    mu: f64,
    backend: RankOneBackend,
) -> Result<NewtonStep, LinsysError> {
    if mu.is_nan() || mu <= 0.0 {
        return Err(LinsysError::NonPositiveRegularization(mu));
    }
    if merit.spec().kind == MeritKind::Homogeneous {
        let direction = solve_dense(merit, p, mu, &(-grad))?;
        let dim = direction.len();
        return Ok(NewtonStep {
            direction,
            mu_used: mu,
            escalations: 0,
            dense_fallback: true,
            stats: SolveStats {
                factorizations: vec![dim],
                rank_one_updates: Vec::new(),
            },
        });
    }

    let mut current = mu;
    for escalations in 0..=MAX_ESCALATIONS {
        let sys = build_reduced_with_gradient(merit, p, grad, current)?;
        match solve_structured(&sys, merit.lp(), backend) {
            Ok(sol) => {
                return Ok(NewtonStep {
                    direction: sol.to_flat(),
                    mu_used: current,
                    escalations,
                    dense_fallback: false,
                    stats: sol.stats,
                })
            }
            Err(LinsysError::FactorizationFailure { .. }) => {
                current = (10.0 * current).max(MU_FLOOR);
            }
            Err(e) => return Err(e),
        }
    }
    let direction = solve_dense(merit, p, current, &(-grad))?;
    let dim = direction.len();
    Ok(NewtonStep {
        direction,
        mu_used: current,
        escalations: MAX_ESCALATIONS,
        dense_fallback: true,
        stats: SolveStats {
            factorizations: vec![dim],
            rank_one_updates: Vec::new(),
        },
    })
}
