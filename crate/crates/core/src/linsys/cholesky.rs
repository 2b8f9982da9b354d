//! Dense lower-triangular Cholesky factors with an O(k²) rank-one update.

use nalgebra::{DMatrix, DVector};

use super::LinsysError;

#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    l: DMatrix<f64>,
}

impl CholeskyFactor {
    /// Factors a symmetric positive definite matrix; only the lower triangle is read.
    pub fn factor(a: &DMatrix<f64>) -> Result<Self, LinsysError> {
        let k = a.nrows();
        assert_eq!(k, a.ncols(), "cholesky needs a square matrix");
        let mut l = DMatrix::<f64>::zeros(k, k);
        for j in 0..k {
            let mut d = a[(j, j)];
            for p in 0..j {
                d -= l[(j, p)] * l[(j, p)];
            }
            if d.is_nan() || d <= 0.0 || d.is_infinite() {
                return Err(LinsysError::FactorizationFailure { size: k, pivot: j });
            }
            let ljj = d.sqrt();
            l[(j, j)] = ljj;
            // Column-oriented: l[i, j] = (a[i, j] − Σ_p l[i, p] l[j, p]) / l[j, j]
            for i in j + 1..k {
                l[(i, j)] = a[(i, j)];
            }
            for p in 0..j {
                let ljp = l[(j, p)];
                if ljp != 0.0 {
                    for i in j + 1..k {
                        l[(i, j)] -= l[(i, p)] * ljp;
                    }
                }
            }
            for i in j + 1..k {
                l[(i, j)] /= ljj;
            }
        }
        Ok(Self { l })
    }

    /// Wraps an existing lower-triangular factor.
    pub fn from_lower(l: DMatrix<f64>) -> Self {
        Self { l }
    }

    /// Factor of `blockdiag(M₁, M₂)` from the factors of `M₁` and `M₂`.
    pub fn block_diagonal(first: &CholeskyFactor, second: &CholeskyFactor) -> Self {
        let (p, q) = (first.dim(), second.dim());
        let mut l = DMatrix::zeros(p + q, p + q);
        l.view_mut((0, 0), (p, p)).copy_from(&first.l);
        l.view_mut((p, p), (q, q)).copy_from(&second.l);
        Self { l }
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.l * self.l.transpose()
    }

    /// Turns the factor of `M` into the factor of `M + v vᵀ` in place.
    ///
    /// Plane-rotation form of the Gill–Golub–Murray–Saunders update.
    pub fn rank_one_update(&mut self, v: &DVector<f64>) {
        let k = self.dim();
        assert_eq!(v.len(), k, "update vector length");
        let mut w = v.clone();
        for j in 0..k {
            let wj = w[j];
            if wj == 0.0 {
                continue;
            }
            let ljj = self.l[(j, j)];
            let r = ljj.hypot(wj);
            let cos = r / ljj;
            let sin = wj / ljj;
            self.l[(j, j)] = r;
            for i in j + 1..k {
                let lij = (self.l[(i, j)] + sin * w[i]) / cos;
                w[i] = cos * w[i] - sin * lij;
                self.l[(i, j)] = lij;
            }
        }
    }

    /// Solves `L Lᵀ y = rhs`.
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let k = self.dim();
        let mut y = rhs.clone();
        for i in 0..k {
            let mut acc = y[i];
            for p in 0..i {
                acc -= self.l[(i, p)] * y[p];
            }
            y[i] = acc / self.l[(i, i)];
        }
        for i in (0..k).rev() {
            let mut acc = y[i];
            for p in i + 1..k {
                acc -= self.l[(p, i)] * y[p];
            }
            y[i] = acc / self.l[(i, i)];
        }
        y
    }
}

/// Factor of `M + v vᵀ` given the factor of `M`.
pub fn cholesky_rank_one_update(factor: &CholeskyFactor, v: &DVector<f64>) -> CholeskyFactor {
    let mut out = factor.clone();
    out.rank_one_update(v);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spd_from(entries: &[f64], k: usize) -> DMatrix<f64> {
        let g = DMatrix::from_row_slice(k, k, entries);
        &g * g.transpose() + DMatrix::identity(k, k) * 0.5
    }

    #[test]
    fn factor_matches_nalgebra() {
        let m = spd_from(&[1.0, 2.0, 0.5, -1.0, 3.0, 0.0, 2.0, -2.0, 1.5], 3);
        let ours = CholeskyFactor::factor(&m).unwrap();
        let theirs = m.clone().cholesky().unwrap();
        assert!((ours.lower() - theirs.l()).norm() < 1e-13);
    }

    #[test]
    fn factor_rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert_eq!(
            CholeskyFactor::factor(&m).unwrap_err(),
            LinsysError::FactorizationFailure { size: 2, pivot: 1 }
        );
    }

    #[test]
    fn identity_plus_axis_vector() {
        let f = CholeskyFactor::factor(&DMatrix::identity(2, 2)).unwrap();
        let up = cholesky_rank_one_update(&f, &DVector::from_vec(vec![1.0, 0.0]));
        let expected = DMatrix::from_row_slice(2, 2, &[2f64.sqrt(), 0.0, 0.0, 1.0]);
        assert!((up.lower() - expected).norm() < 1e-15);
    }

    #[test]
    fn zero_vector_leaves_factor() {
        let m = spd_from(&[1.0, 2.0, 0.5, -1.0], 2);
        let f = CholeskyFactor::factor(&m).unwrap();
        assert_eq!(cholesky_rank_one_update(&f, &DVector::zeros(2)), f);
    }

    #[test]
    fn solve_roundtrip() {
        let m = spd_from(&[1.0, 2.0, 0.5, -1.0, 3.0, 0.0, 2.0, -2.0, 1.5], 3);
        let f = CholeskyFactor::factor(&m).unwrap();
        let rhs = DVector::from_vec(vec![1.0, -2.0, 0.25]);
        let y = f.solve(&rhs);
        assert!((&m * y - rhs).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn update_matches_refactorization(
            k in 1usize..12,
            seed in proptest::collection::vec(-2.0f64..2.0, 144),
            v in proptest::collection::vec(-5.0f64..5.0, 12),
        ) {
            let m = spd_from(&seed[..k * k], k);
            let v = DVector::from_column_slice(&v[..k]);
            let f = CholeskyFactor::factor(&m).unwrap();
            let up = cholesky_rank_one_update(&f, &v);
            let target = &m + &v * v.transpose();
            let err = (up.reconstruct() - &target).norm();
            prop_assert!(err <= 1e-10 * target.norm(), "err {}", err);
        }
    }
}
