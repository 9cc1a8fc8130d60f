//! Eigenvector families normalized with respect to the indefinite product.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{KreinError, Result};
use crate::linalg::{self, CMat, CVec};
use crate::space::KreinSpace;

/// `|[f, f]|` below this, for a unit vector `f`, counts as neutral.
pub const NEUTRALITY_TOL: f64 = 1e-8;

/// Relative gap below which two eigenvalues are treated as one.
pub const CLUSTER_TOL: f64 = 1e-6;

/// Relative imaginary part above which an eigenvalue counts as non-real.
pub const COMPLEX_TOL: f64 = 1e-8;

/// Sign of `[f, f]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
    Neutral,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
            Sign::Neutral => 0,
        }
    }
}

/// A family of vectors `f_n`, optionally tagged with eigenvalues, scaled so
/// that `[f_n, f_n] = ±1` wherever the vector is not neutral. Neutral vectors
/// keep unit Hilbert norm.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    space: KreinSpace,
    eigenvalues: Option<Vec<Complex64>>,
    vectors: CMat,
    signs: Vec<Sign>,
}

impl EigenSystem {
    /// Normalizes the columns of `vectors`. Columns whose Hilbert norm is
    /// below the space tolerance are rejected.
    pub fn from_vectors(
        space: &KreinSpace,
        vectors: &CMat,
        eigenvalues: Option<Vec<Complex64>>,
    ) -> Result<Self> {
        if vectors.nrows() != space.dim() {
            return Err(KreinError::DimensionMismatch {
                expected: space.dim(),
                found: vectors.nrows(),
            });
        }
        if let Some(values) = &eigenvalues {
            if values.len() != vectors.ncols() {
                return Err(KreinError::DimensionMismatch {
                    expected: vectors.ncols(),
                    found: values.len(),
                });
            }
        }
        let mut normalized = vectors.clone();
        let mut signs = Vec::with_capacity(vectors.ncols());
        for (index, mut col) in normalized.column_iter_mut().enumerate() {
            let norm = col.norm();
            if norm < space.tol() {
                return Err(KreinError::ZeroVector { index });
            }
            col.unscale_mut(norm);
            let unit: CVec = col.clone_owned();
            let product = unit.dotc(&(space.j() * &unit)).re;
            if product.abs() < NEUTRALITY_TOL {
                signs.push(Sign::Neutral);
            } else {
                col.unscale_mut(product.abs().sqrt());
                signs.push(if product > 0.0 {
                    Sign::Positive
                } else {
                    Sign::Negative
                });
            }
        }
        Ok(Self {
            space: space.clone(),
            eigenvalues,
            vectors: normalized,
            signs,
        })
    }

    /// Eigenpairs of `a` from a general eigendecomposition, normalized.
    pub fn compute(space: &KreinSpace, a: &CMat) -> Result<Self> {
        linalg::ensure_dim(a, space.dim())?;
        let (values, vectors) = linalg::general_eigen(a)?;
        Self::from_vectors(space, &vectors, Some(values))
    }

    pub fn space(&self) -> &KreinSpace {
        &self.space
    }

    pub fn eigenvalues(&self) -> Option<&[Complex64]> {
        self.eigenvalues.as_deref()
    }

    /// Normalized vectors as columns.
    pub fn vectors(&self) -> &CMat {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn has_neutral(&self) -> bool {
        self.signs.contains(&Sign::Neutral)
    }

    /// All eigenvalues real within the relative tolerance. False when no
    /// eigenvalues are attached.
    pub fn is_real(&self) -> bool {
        let Some(values) = &self.eigenvalues else {
            return false;
        };
        let scale = values.iter().map(|v| v.norm()).fold(1.0, f64::max);
        values.iter().all(|v| v.im.abs() <= COMPLEX_TOL * scale)
    }

    /// All eigenvalues pairwise separated by more than the cluster tolerance.
    /// False when no eigenvalues are attached.
    pub fn is_simple(&self) -> bool {
        let Some(values) = &self.eigenvalues else {
            return false;
        };
        let scale = values.iter().map(|v| v.norm()).fold(1.0, f64::max);
        values.iter().enumerate().all(|(i, a)| {
            values[i + 1..]
                .iter()
                .all(|b| (a - b).norm() > CLUSTER_TOL * scale)
        })
    }

    /// Matrix of `[f_m, f_n]`, i.e. `F* J F`.
    pub fn gram(&self) -> CMat {
        self.space.gram(&self.vectors)
    }

    /// Largest off-diagonal entry of the Gram matrix.
    pub fn j_orthogonality_residual(&self) -> f64 {
        let g = self.gram();
        let n = g.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for k in 0..n {
                if i != k {
                    worst = worst.max(g[(i, k)].norm());
                }
            }
        }
        worst
    }

    pub fn rank(&self) -> usize {
        let s = linalg::singular_values(&self.vectors);
        let top = s.first().copied().unwrap_or(0.0);
        s.iter().filter(|&&x| x > 1e-10 * top).count()
    }

    pub fn is_spanning(&self) -> bool {
        self.len() == self.space.dim() && self.rank() == self.space.dim()
    }

    /// `max_n ‖A f_n − λ_n f_n‖ / ‖f_n‖`.
    pub fn eigen_residual(&self, a: &CMat) -> Option<f64> {
        let values = self.eigenvalues.as_ref()?;
        let image = a * &self.vectors;
        let worst = values
            .iter()
            .enumerate()
            .map(|(n, &lambda)| {
                let f = self.vectors.column(n);
                (image.column(n) - f * lambda).norm() / f.norm()
            })
            .fold(0.0, f64::max);
        Some(worst)
    }

    /// `Cf = Σ [f, f_n] f_n`, in matrix form `F F* J`.
    ///
    /// Requires a spanning family without neutral vectors.
    pub fn c_matrix(&self) -> Result<CMat> {
        if self.has_neutral() {
            return Err(KreinError::NeutralEigenvector);
        }
        let rank = self.rank();
        if self.len() != self.space.dim() || rank != self.space.dim() {
            return Err(KreinError::NotSpanning {
                rank,
                dim: self.space.dim(),
            });
        }
        Ok(&self.vectors * self.vectors.adjoint() * self.space.j())
    }

    /// The vectors `g_n = [f_n, f_n] J f_n` biorthogonal to the `f_n`.
    pub fn biorthogonal(&self) -> CMat {
        let mut g = self.space.j() * &self.vectors;
        for (mut col, sign) in g.column_iter_mut().zip(&self.signs) {
            col.scale_mut(f64::from(sign.value()));
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;

    #[test]
    fn normalization_and_signs() {
        let space = KreinSpace::from_signature(&[1, -1]).unwrap();
        let f = from_real_rows(&[&[3.0, 1.0, 1.0], &[-1.0, -3.0, 1.0]]);
        let sys = EigenSystem::from_vectors(&space, &f, None).unwrap();
        assert_eq!(sys.signs(), &[Sign::Positive, Sign::Negative, Sign::Neutral]);
        let s = 2.0 * 2f64.sqrt();
        assert!((sys.vectors()[(0, 0)].re - 3.0 / s).abs() < 1e-15);
        assert!((sys.vectors()[(1, 1)].re + 3.0 / s).abs() < 1e-15);
        assert!((sys.vectors().column(2).norm() - 1.0).abs() < 1e-15);
        assert!(sys.c_matrix().is_err());
    }

    #[test]
    fn zero_vector_rejected() {
        let space = KreinSpace::from_signature(&[1, -1]).unwrap();
        let f = from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert_eq!(
            EigenSystem::from_vectors(&space, &f, None).unwrap_err(),
            KreinError::ZeroVector { index: 1 }
        );
    }

    #[test]
    fn closed_form_pair() {
        let space = KreinSpace::from_signature(&[1, -1]).unwrap();
        let h = from_real_rows(&[&[1.0, 0.6], &[-0.6, -1.0]]);
        let sys = EigenSystem::compute(&space, &h).unwrap();
        assert!(sys.is_real() && sys.is_simple());
        assert!(sys.eigen_residual(&h).unwrap() < 1e-14);
        assert!(sys.j_orthogonality_residual() < 1e-14);
        let c = sys.c_matrix().unwrap();
        let expected = from_real_rows(&[&[1.25, 0.75], &[-0.75, -1.25]]);
        assert!(linalg::op_norm(&(c - expected)) < 1e-13);
        let fg = sys.vectors().adjoint() * sys.biorthogonal();
        assert!(linalg::op_norm(&(fg - linalg::identity(2))) < 1e-14);
    }
}
