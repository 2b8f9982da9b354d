//! Standard-form linear programs and primal-dual iterates.
//!
//! The primal is `min c·x s.t. Ax = b, x ≥ 0`; its dual is
//! `max b·λ s.t. Aᵀλ + s = c, s ≥ 0`. Iterates live in all of `R^(2n+m)`,
//! so points carry no sign constraints.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite entry in {what} at index {index}")]
    NonFiniteEntry { what: &'static str, index: usize },
    #[error("shape violation: need 1 <= m < n, got m={m}, n={n}")]
    ShapeViolation { m: usize, n: usize },
    #[error("instance too large for enumeration: n={n} exceeds {limit}")]
    InstanceTooLarge { n: usize, limit: usize },
}

/// The triple `(A, b, c)`.
///
/// `allow_square` relaxes `m < n` to `m <= n` for small hand-built examples.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardFormLp {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    pub allow_square: bool,
}

impl StandardFormLp {
    /// Builds and validates a problem with the usual `m < n` requirement.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>) -> Result<Self, ModelError> {
        let lp = Self {
            a,
            b,
            c,
            allow_square: false,
        };
        lp.validate()?;
        Ok(lp)
    }

    /// Like [`StandardFormLp::new`] but permits `m == n`.
    pub fn new_square_allowed(
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: DVector<f64>,
    ) -> Result<Self, ModelError> {
        let lp = Self {
            a,
            b,
            c,
            allow_square: true,
        };
        lp.validate()?;
        Ok(lp)
    }

    /// Builds from a row-major slice of `m * n` entries.
    pub fn from_row_major(
        m: usize,
        n: usize,
        a: &[f64],
        b: &[f64],
        c: &[f64],
    ) -> Result<Self, ModelError> {
        if a.len() != m * n {
            return Err(ModelError::DimensionMismatch {
                what: "A",
                expected: m * n,
                got: a.len(),
            });
        }
        Self::new(
            DMatrix::from_row_slice(m, n, a),
            DVector::from_column_slice(b),
            DVector::from_column_slice(c),
        )
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    /// Checks shape, dimension agreement and finiteness; reports the first violation.
    pub fn validate(&self) -> Result<(), ModelError> {
        let (m, n) = self.a.shape();
        let shape_ok = m >= 1 && n >= 1 && (m < n || (self.allow_square && m == n));
        if !shape_ok {
            return Err(ModelError::ShapeViolation { m, n });
        }
        if self.b.len() != m {
            return Err(ModelError::DimensionMismatch {
                what: "b",
                expected: m,
                got: self.b.len(),
            });
        }
        if self.c.len() != n {
            return Err(ModelError::DimensionMismatch {
                what: "c",
                expected: n,
                got: self.c.len(),
            });
        }
        // Row-major index so the reported position matches the file layout.
        for i in 0..m {
            for j in 0..n {
                if !self.a[(i, j)].is_finite() {
                    return Err(ModelError::NonFiniteEntry {
                        what: "A",
                        index: i * n + j,
                    });
                }
            }
        }
        check_finite("b", &self.b)?;
        check_finite("c", &self.c)?;
        Ok(())
    }

    /// `1 + ‖A‖_F + ‖b‖₂ + ‖c‖₂`, the reference magnitude for all relative tolerances.
    pub fn scale(&self) -> f64 {
        1.0 + self.a.norm() + self.b.norm() + self.c.norm()
    }

    /// Gap `γ = c·x − b·λ`, primal residual `ρ = b − Ax`, dual residual `σ = c − Aᵀλ − s`.
    pub fn residuals(&self, p: &PrimalDualPoint) -> Result<Residuals, ModelError> {
        p.check_dims(self.m(), self.n())?;
        let gap = self.c.dot(&p.x) - self.b.dot(&p.lambda);
        let primal = &self.b - &self.a * &p.x;
        let dual = &self.c - self.a.tr_mul(&p.lambda) - &p.s;
        Ok(Residuals { gap, primal, dual })
    }
}

fn check_finite(what: &'static str, v: &DVector<f64>) -> Result<(), ModelError> {
    match v.iter().position(|t| !t.is_finite()) {
        Some(index) => Err(ModelError::NonFiniteEntry { what, index }),
        None => Ok(()),
    }
}

fn check_len(what: &'static str, v: &DVector<f64>, expected: usize) -> Result<(), ModelError> {
    if v.len() != expected {
        return Err(ModelError::DimensionMismatch {
            what,
            expected,
            got: v.len(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    pub gap: f64,
    pub primal: DVector<f64>,
    pub dual: DVector<f64>,
}

/// An iterate `(x, λ, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualPoint {
    pub x: DVector<f64>,
    pub lambda: DVector<f64>,
    pub s: DVector<f64>,
}

impl PrimalDualPoint {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            x: DVector::zeros(n),
            lambda: DVector::zeros(m),
            s: DVector::zeros(n),
        }
    }

    pub fn check_dims(&self, m: usize, n: usize) -> Result<(), ModelError> {
        check_len("x", &self.x, n)?;
        check_len("lambda", &self.lambda, m)?;
        check_len("s", &self.s, n)?;
        check_finite("x", &self.x)?;
        check_finite("lambda", &self.lambda)?;
        check_finite("s", &self.s)
    }

    /// Stacks as `(x; λ; s)`.
    pub fn to_flat(&self) -> DVector<f64> {
        let (n, m) = (self.x.len(), self.lambda.len());
        let mut v = DVector::zeros(2 * n + m);
        v.rows_mut(0, n).copy_from(&self.x);
        v.rows_mut(n, m).copy_from(&self.lambda);
        v.rows_mut(n + m, n).copy_from(&self.s);
        v
    }

    pub fn from_flat(m: usize, n: usize, v: &DVector<f64>) -> Result<Self, ModelError> {
        check_len("flat point", v, 2 * n + m)?;
        Ok(Self {
            x: v.rows(0, n).into_owned(),
            lambda: v.rows(n, m).into_owned(),
            s: v.rows(n + m, n).into_owned(),
        })
    }
}

/// An iterate of the simplified homogeneous model, `(x, λ, s, τ, κ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousPoint {
    pub x: DVector<f64>,
    pub lambda: DVector<f64>,
    pub s: DVector<f64>,
    pub tau: f64,
    pub kappa: f64,
}

impl HomogeneousPoint {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            x: DVector::zeros(n),
            lambda: DVector::zeros(m),
            s: DVector::zeros(n),
            tau: 0.0,
            kappa: 0.0,
        }
    }

    pub fn ones(m: usize, n: usize) -> Self {
        Self {
            x: DVector::from_element(n, 1.0),
            lambda: DVector::from_element(m, 1.0),
            s: DVector::from_element(n, 1.0),
            tau: 1.0,
            kappa: 1.0,
        }
    }

    pub fn check_dims(&self, m: usize, n: usize) -> Result<(), ModelError> {
        check_len("x", &self.x, n)?;
        check_len("lambda", &self.lambda, m)?;
        check_len("s", &self.s, n)?;
        check_finite("x", &self.x)?;
        check_finite("lambda", &self.lambda)?;
        check_finite("s", &self.s)?;
        if !self.tau.is_finite() {
            return Err(ModelError::NonFiniteEntry {
                what: "tau",
                index: 0,
            });
        }
        if !self.kappa.is_finite() {
            return Err(ModelError::NonFiniteEntry {
                what: "kappa",
                index: 0,
            });
        }
        Ok(())
    }

    /// Stacks as `(x; λ; s; τ; κ)`.
    pub fn to_flat(&self) -> DVector<f64> {
        let (n, m) = (self.x.len(), self.lambda.len());
        let mut v = DVector::zeros(2 * n + m + 2);
        v.rows_mut(0, n).copy_from(&self.x);
        v.rows_mut(n, m).copy_from(&self.lambda);
        v.rows_mut(n + m, n).copy_from(&self.s);
        v[2 * n + m] = self.tau;
        v[2 * n + m + 1] = self.kappa;
        v
    }

    pub fn from_flat(m: usize, n: usize, v: &DVector<f64>) -> Result<Self, ModelError> {
        check_len("flat point", v, 2 * n + m + 2)?;
        Ok(Self {
            x: v.rows(0, n).into_owned(),
            lambda: v.rows(n, m).into_owned(),
            s: v.rows(n + m, n).into_owned(),
            tau: v[2 * n + m],
            kappa: v[2 * n + m + 1],
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.x
            .iter()
            .chain(self.lambda.iter())
            .chain(self.s.iter())
            .chain([self.tau, self.kappa].iter())
            .fold(0.0_f64, |acc, t| acc.max(t.abs()))
    }
}
