//! Merit functions and their exact derivatives.
//!
//! Three variants share the residuals `γ = c·x − b·λ`, `ρ = b − Ax`,
//! `σ = c − Aᵀλ − s`:
//!
//! ```text
//! base        f(x,λ,s) = ½γ² + ½‖ρ‖² + ½‖σ‖² + 1/(q(q−1)) Σ (−x)₊^q + (−s)₊^q
//! homotopy    h(x,λ,s) = f + ν‖λ‖² + ν/(q(q−1)) Σ (x)₊^q + (s)₊^q
//! homogeneous g(x,λ,s,τ,κ) with γ = c·x − b·λ + κ, ρ = bτ − Ax, σ = cτ − Aᵀλ − s
//!             and hinge penalties on x, s, τ, κ
//! ```
//!
//! Every Hessian splits into a constant matrix that depends only on `(A, b, c)`
//! and a nonnegative diagonal that depends on the point.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector, DVectorView};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::{HomogeneousPoint, PrimalDualPoint, StandardFormLp};

/// Any intermediate above this is treated as divergence.
pub const OVERFLOW_LIMIT: f64 = 1e300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeritError {
    #[error("point has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{kind:?} merit needs a {expected} point")]
    KindMismatch {
        kind: MeritKind,
        expected: &'static str,
    },
    #[error("invalid merit parameters: {0}")]
    InvalidSpec(String),
    #[error("merit value overflowed")]
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeritKind {
    Base,
    Homotopy,
    Homogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeritSpec {
    pub kind: MeritKind,
    pub q: f64,
    /// Only read for [`MeritKind::Homotopy`].
    pub nu: f64,
}

impl MeritSpec {
    pub fn base(q: f64) -> Self {
        Self {
            kind: MeritKind::Base,
            q,
            nu: 0.0,
        }
    }

    pub fn homotopy(q: f64, nu: f64) -> Self {
        Self {
            kind: MeritKind::Homotopy,
            q,
            nu,
        }
    }

    pub fn homogeneous(q: f64) -> Self {
        Self {
            kind: MeritKind::Homogeneous,
            q,
            nu: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), MeritError> {
        // q > 2 keeps the hinge powers twice continuously differentiable.
        if self.q.is_nan() || self.q <= 2.0 || self.q.is_infinite() {
            return Err(MeritError::InvalidSpec(format!(
                "q must exceed 2, got {}",
                self.q
            )));
        }
        if self.kind == MeritKind::Homotopy && !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(MeritError::InvalidSpec(format!(
                "nu must be >= 0, got {}",
                self.nu
            )));
        }
        Ok(())
    }

    /// Length of the flat point this merit acts on.
    pub fn dim(&self, m: usize, n: usize) -> usize {
        match self.kind {
            MeritKind::Homogeneous => 2 * n + m + 2,
            _ => 2 * n + m,
        }
    }

    fn effective_nu(&self) -> f64 {
        match self.kind {
            MeritKind::Homotopy => self.nu,
            _ => 0.0,
        }
    }
}

/// `max{−t, 0}^p`, computed as `exp(p·ln(−t))` for `t < 0` and exactly zero otherwise.
#[inline]
pub fn hinge_pow(t: f64, p: f64) -> f64 {
    if t < 0.0 {
        (p * (-t).ln()).exp()
    } else {
        0.0
    }
}

/// `max{t, 0}^p`, the mirror image of [`hinge_pow`].
#[inline]
pub fn positive_pow(t: f64, p: f64) -> f64 {
    hinge_pow(-t, p)
}

/// Full Hessian is `base + diag(diag_add)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianParts {
    pub base: Arc<DMatrix<f64>>,
    pub diag_add: DVector<f64>,
}

impl HessianParts {
    pub fn full(&self) -> DMatrix<f64> {
        let mut h = (*self.base).clone();
        for (i, d) in self.diag_add.iter().enumerate() {
            h[(i, i)] += d;
        }
        h
    }
}

/// Borrowed point of either layout.
#[derive(Debug, Clone, Copy)]
pub enum PointRef<'a> {
    PrimalDual(&'a PrimalDualPoint),
    Homogeneous(&'a HomogeneousPoint),
}

impl<'a> From<&'a PrimalDualPoint> for PointRef<'a> {
    fn from(p: &'a PrimalDualPoint) -> Self {
        PointRef::PrimalDual(p)
    }
}

impl<'a> From<&'a HomogeneousPoint> for PointRef<'a> {
    fn from(p: &'a HomogeneousPoint) -> Self {
        PointRef::Homogeneous(p)
    }
}

/// A merit function bound to one problem.
///
/// The constant Hessian part is built lazily on first request and shared afterwards.
#[derive(Debug)]
pub struct Merit<'a> {
    lp: &'a StandardFormLp,
    spec: MeritSpec,
    base: OnceLock<Arc<DMatrix<f64>>>,
}

struct Split<'v> {
    x: DVectorView<'v, f64>,
    lambda: DVectorView<'v, f64>,
    s: DVectorView<'v, f64>,
    tau: f64,
    kappa: f64,
}

struct Terms {
    gap: f64,
    rho: DVector<f64>,
    sigma: DVector<f64>,
}

impl<'a> Merit<'a> {
    pub fn new(lp: &'a StandardFormLp, spec: MeritSpec) -> Result<Self, MeritError> {
        spec.validate()?;
        Ok(Self {
            lp,
            spec,
            base: OnceLock::new(),
        })
    }

    pub fn spec(&self) -> &MeritSpec {
        &self.spec
    }

    pub fn lp(&self) -> &StandardFormLp {
        self.lp
    }

    pub fn dim(&self) -> usize {
        self.spec.dim(self.lp.m(), self.lp.n())
    }

    /// Changes the homotopy weight; the cached constant Hessian part stays valid.
    pub fn set_nu(&mut self, nu: f64) -> Result<(), MeritError> {
        let mut spec = self.spec;
        spec.nu = nu;
        spec.validate()?;
        self.spec = spec;
        Ok(())
    }

    /// Flattens a typed point after checking it matches the merit kind.
    pub fn flatten(&self, p: PointRef<'_>) -> Result<DVector<f64>, MeritError> {
        let (m, n) = (self.lp.m(), self.lp.n());
        let flat = match (self.spec.kind, p) {
            (MeritKind::Homogeneous, PointRef::Homogeneous(h)) => h.to_flat(),
            (MeritKind::Homogeneous, PointRef::PrimalDual(_)) => {
                return Err(MeritError::KindMismatch {
                    kind: self.spec.kind,
                    expected: "homogeneous",
                })
            }
            (_, PointRef::PrimalDual(p)) => p.to_flat(),
            (kind, PointRef::Homogeneous(_)) => {
                return Err(MeritError::KindMismatch {
                    kind,
                    expected: "primal-dual",
                })
            }
        };
        if flat.len() != self.spec.dim(m, n) {
            return Err(MeritError::DimensionMismatch {
                expected: self.spec.dim(m, n),
                got: flat.len(),
            });
        }
        Ok(flat)
    }

    fn split<'v>(&self, v: &'v DVector<f64>) -> Result<Split<'v>, MeritError> {
        let (m, n) = (self.lp.m(), self.lp.n());
        if v.len() != self.dim() {
            return Err(MeritError::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        let (tau, kappa) = match self.spec.kind {
            MeritKind::Homogeneous => (v[2 * n + m], v[2 * n + m + 1]),
            _ => (1.0, 0.0),
        };
        Ok(Split {
            x: v.rows(0, n),
            lambda: v.rows(n, m),
            s: v.rows(n + m, n),
            tau,
            kappa,
        })
    }

    // With tau = 1, kappa = 0 these reduce to the base residuals.
    fn terms(&self, p: &Split<'_>) -> Terms {
        let lp = self.lp;
        let gap = lp.c.dot(&p.x) - lp.b.dot(&p.lambda) + p.kappa;
        let rho = &lp.b * p.tau - &lp.a * p.x;
        let sigma = &lp.c * p.tau - lp.a.tr_mul(&p.lambda) - p.s;
        Terms { gap, rho, sigma }
    }

    pub fn value(&self, v: &DVector<f64>) -> Result<f64, MeritError> {
        let p = self.split(v)?;
        let q = self.spec.q;
        let t = self.terms(&p);
        let hinge_sum: f64 =
            p.x.iter()
                .chain(p.s.iter())
                .map(|&u| hinge_pow(u, q))
                .sum::<f64>()
                + match self.spec.kind {
                    MeritKind::Homogeneous => hinge_pow(p.tau, q) + hinge_pow(p.kappa, q),
                    _ => 0.0,
                };
        let mut parts = [
            0.5 * t.gap * t.gap,
            0.5 * t.rho.norm_squared(),
            0.5 * t.sigma.norm_squared(),
            hinge_sum / (q * (q - 1.0)),
            0.0,
        ];
        let nu = self.spec.effective_nu();
        if nu > 0.0 {
            let pos: f64 =
                p.x.iter()
                    .chain(p.s.iter())
                    .map(|&u| positive_pow(u, q))
                    .sum();
            parts[4] = nu * p.lambda.norm_squared() + nu * pos / (q * (q - 1.0));
        }
        let mut total = 0.0;
        for part in parts {
            if !part.is_finite() || part > OVERFLOW_LIMIT {
                return Err(MeritError::Overflow);
            }
            total += part;
        }
        if total > OVERFLOW_LIMIT {
            return Err(MeritError::Overflow);
        }
        Ok(total)
    }

    pub fn gradient(&self, v: &DVector<f64>) -> Result<DVector<f64>, MeritError> {
        let p = self.split(v)?;
        let (m, n) = (self.lp.m(), self.lp.n());
        let lp = self.lp;
        let q = self.spec.q;
        let t = self.terms(&p);
        let mut g = DVector::zeros(self.dim());

        let gx = &lp.c * t.gap - lp.a.tr_mul(&t.rho);
        let gl = &lp.b * (-t.gap) - &lp.a * &t.sigma;
        g.rows_mut(0, n).copy_from(&gx);
        g.rows_mut(n, m).copy_from(&gl);
        g.rows_mut(n + m, n).copy_from(&(-&t.sigma));

        let inv = 1.0 / (q - 1.0);
        for j in 0..n {
            g[j] -= inv * hinge_pow(p.x[j], q - 1.0);
            g[n + m + j] -= inv * hinge_pow(p.s[j], q - 1.0);
        }

        match self.spec.kind {
            MeritKind::Base => {}
            MeritKind::Homotopy => {
                let nu = self.spec.nu;
                for i in 0..m {
                    g[n + i] += 2.0 * nu * p.lambda[i];
                }
                for j in 0..n {
                    g[j] += nu * inv * positive_pow(p.x[j], q - 1.0);
                    g[n + m + j] += nu * inv * positive_pow(p.s[j], q - 1.0);
                }
            }
            MeritKind::Homogeneous => {
                // w = (Ax)·b + (Aᵀλ + s)·c − (‖b‖² + ‖c‖²)τ = −(b·ρ + c·σ)
                let w = -(lp.b.dot(&t.rho) + lp.c.dot(&t.sigma));
                g[2 * n + m] = -w - inv * hinge_pow(p.tau, q - 1.0);
                g[2 * n + m + 1] = t.gap - inv * hinge_pow(p.kappa, q - 1.0);
            }
        }
        if g.iter().any(|u| !u.is_finite()) {
            return Err(MeritError::Overflow);
        }
        Ok(g)
    }

    /// Point-dependent diagonal of the Hessian.
    pub fn hessian_diagonal(&self, v: &DVector<f64>) -> Result<DVector<f64>, MeritError> {
        let p = self.split(v)?;
        let (m, n) = (self.lp.m(), self.lp.n());
        let q = self.spec.q;
        let mut d = DVector::zeros(self.dim());
        for j in 0..n {
            d[j] = hinge_pow(p.x[j], q - 2.0);
            d[n + m + j] = hinge_pow(p.s[j], q - 2.0);
        }
        match self.spec.kind {
            MeritKind::Base => {}
            MeritKind::Homotopy => {
                let nu = self.spec.nu;
                for j in 0..n {
                    d[j] += nu * positive_pow(p.x[j], q - 2.0);
                    d[n + m + j] += nu * positive_pow(p.s[j], q - 2.0);
                }
                for i in 0..m {
                    d[n + i] += 2.0 * nu;
                }
            }
            MeritKind::Homogeneous => {
                d[2 * n + m] = hinge_pow(p.tau, q - 2.0);
                d[2 * n + m + 1] = hinge_pow(p.kappa, q - 2.0);
            }
        }
        Ok(d)
    }

    /// Constant Hessian part, built once per merit instance.
    pub fn base_hessian(&self) -> Arc<DMatrix<f64>> {
        self.base
            .get_or_init(|| Arc::new(assemble_base(self.lp, self.spec.kind)))
            .clone()
    }

    pub fn hessian(&self, v: &DVector<f64>) -> Result<HessianParts, MeritError> {
        let diag_add = self.hessian_diagonal(v)?;
        Ok(HessianParts {
            base: self.base_hessian(),
            diag_add,
        })
    }
}

fn assemble_base(lp: &StandardFormLp, kind: MeritKind) -> DMatrix<f64> {
    let (m, n) = (lp.m(), lp.n());
    let (a, b, c) = (&lp.a, &lp.b, &lp.c);
    let dim = match kind {
        MeritKind::Homogeneous => 2 * n + m + 2,
        _ => 2 * n + m,
    };
    let mut h = DMatrix::zeros(dim, dim);
    let (ix, il, is) = (0, n, n + m);

    h.view_mut((ix, ix), (n, n))
        .copy_from(&(c * c.transpose() + a.tr_mul(a)));
    let cb = -(c * b.transpose());
    h.view_mut((ix, il), (n, m)).copy_from(&cb);
    h.view_mut((il, ix), (m, n)).copy_from(&cb.transpose());
    h.view_mut((il, il), (m, m))
        .copy_from(&(b * b.transpose() + a * a.transpose()));
    h.view_mut((il, is), (m, n)).copy_from(a);
    h.view_mut((is, il), (n, m)).copy_from(&a.transpose());
    h.view_mut((is, is), (n, n)).fill_with_identity();

    if kind == MeritKind::Homogeneous {
        let (it, ik) = (2 * n + m, 2 * n + m + 1);
        let atb = -a.tr_mul(b);
        let ac = -(a * c);
        for j in 0..n {
            h[(ix + j, it)] = atb[j];
            h[(it, ix + j)] = atb[j];
            h[(ix + j, ik)] = c[j];
            h[(ik, ix + j)] = c[j];
            h[(is + j, it)] = -c[j];
            h[(it, is + j)] = -c[j];
        }
        for i in 0..m {
            h[(il + i, it)] = ac[i];
            h[(it, il + i)] = ac[i];
            h[(il + i, ik)] = -b[i];
            h[(ik, il + i)] = -b[i];
        }
        h[(it, it)] = b.norm_squared() + c.norm_squared();
        h[(ik, ik)] = 1.0;
    }
    h
}

pub fn eval_value<'p>(
    spec: MeritSpec,
    lp: &StandardFormLp,
    p: impl Into<PointRef<'p>>,
) -> Result<f64, MeritError> {
    let merit = Merit::new(lp, spec)?;
    let flat = merit.flatten(p.into())?;
    merit.value(&flat)
}

pub fn eval_gradient<'p>(
    spec: MeritSpec,
    lp: &StandardFormLp,
    p: impl Into<PointRef<'p>>,
) -> Result<DVector<f64>, MeritError> {
    let merit = Merit::new(lp, spec)?;
    let flat = merit.flatten(p.into())?;
    merit.gradient(&flat)
}

pub fn eval_hessian<'p>(
    spec: MeritSpec,
    lp: &StandardFormLp,
    p: impl Into<PointRef<'p>>,
) -> Result<HessianParts, MeritError> {
    let merit = Merit::new(lp, spec)?;
    let flat = merit.flatten(p.into())?;
    merit.hessian(&flat)
}
