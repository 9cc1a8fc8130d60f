//! Krein spaces over `C^n`: the fundamental symmetry, its projectors, the
//! indefinite product and the geometry of subspaces with respect to it.
//!
//! In finite dimension "positive" and "uniformly positive" coincide, so the
//! classification below does not distinguish them. A definite subspace is
//! maximal exactly when its dimension equals the matching signature count.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{KreinError, Result};
use crate::linalg::{self, CMat, CVec};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug)]
struct SpaceData {
    j: CMat,
    n_plus: usize,
    n_minus: usize,
    p_plus: CMat,
    p_minus: CMat,
    basis_plus: CMat,
    basis_minus: CMat,
    tol: f64,
}

/// `C^n` with the indefinite product `[f, g] = (Jf, g)`.
///
/// Cheap to clone; the matrices are shared.
#[derive(Debug, Clone)]
pub struct KreinSpace {
    inner: Arc<SpaceData>,
}

impl KreinSpace {
    /// Builds a space from a Hermitian involution `J` with the default tolerance.
    pub fn new(j: CMat) -> Result<Self> {
        Self::with_tol(j, DEFAULT_TOL)
    }

    pub fn with_tol(j: CMat, tol: f64) -> Result<Self> {
        let n = linalg::ensure_square(&j)?;
        if n == 0 {
            return Err(KreinError::InvalidInput("empty fundamental symmetry".into()));
        }
        let scale = linalg::op_norm(&j).max(1.0);
        let herm = linalg::hermitian_residual(&j);
        if herm > tol * scale {
            return Err(KreinError::NotHermitian { residual: herm });
        }
        let inv = linalg::op_norm(&(&j * &j - linalg::identity(n)));
        if inv > tol * scale {
            return Err(KreinError::NotFundamentalSymmetry { residual: inv });
        }

        let (basis_plus, basis_minus) = if is_diagonal(&j) {
            let plus: Vec<usize> = (0..n).filter(|&i| j[(i, i)].re > 0.0).collect();
            let minus: Vec<usize> = (0..n).filter(|&i| j[(i, i)].re < 0.0).collect();
            (axes(n, &plus), axes(n, &minus))
        } else {
            // eigenvalues are ±1 up to tol; snap by sign
            let (values, vectors) = linalg::hermitian_eigen(&j);
            let n_minus = values.iter().filter(|&&v| v < 0.0).count();
            (
                vectors.columns(n_minus, n - n_minus).into_owned(),
                vectors.columns(0, n_minus).into_owned(),
            )
        };
        let (n_plus, n_minus) = (basis_plus.ncols(), basis_minus.ncols());
        if n_plus == 0 || n_minus == 0 {
            return Err(KreinError::TrivialSymmetry { n_plus, n_minus });
        }
        let id = linalg::identity(n);
        let p_plus = (&id + &j).scale(0.5);
        let p_minus = (&id - &j).scale(0.5);
        Ok(Self {
            inner: Arc::new(SpaceData {
                j,
                n_plus,
                n_minus,
                p_plus,
                p_minus,
                basis_plus,
                basis_minus,
                tol,
            }),
        })
    }

    /// Diagonal fundamental symmetry from a vector of signs (any positive
    /// entry counts as `+1`, any negative one as `-1`).
    pub fn from_signature(signs: &[i32]) -> Result<Self> {
        Self::from_signature_with_tol(signs, DEFAULT_TOL)
    }

    pub fn from_signature_with_tol(signs: &[i32], tol: f64) -> Result<Self> {
        if let Some(pos) = signs.iter().position(|&s| s == 0) {
            return Err(KreinError::InvalidInput(format!(
                "signature entry {pos} is zero"
            )));
        }
        let values: Vec<f64> = signs.iter().map(|&s| s.signum() as f64).collect();
        Self::with_tol(linalg::real_diag(&values), tol)
    }

    /// Same fundamental symmetry, different tolerance.
    pub fn with_tolerance(&self, tol: f64) -> Self {
        let d = &self.inner;
        Self {
            inner: Arc::new(SpaceData {
                j: d.j.clone(),
                n_plus: d.n_plus,
                n_minus: d.n_minus,
                p_plus: d.p_plus.clone(),
                p_minus: d.p_minus.clone(),
                basis_plus: d.basis_plus.clone(),
                basis_minus: d.basis_minus.clone(),
                tol,
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.j.nrows()
    }

    pub fn j(&self) -> &CMat {
        &self.inner.j
    }

    pub fn n_plus(&self) -> usize {
        self.inner.n_plus
    }

    pub fn n_minus(&self) -> usize {
        self.inner.n_minus
    }

    pub fn tol(&self) -> f64 {
        self.inner.tol
    }

    /// Orthogonal projector `(I + J)/2` onto `H+`.
    pub fn p_plus(&self) -> &CMat {
        &self.inner.p_plus
    }

    /// Orthogonal projector `(I - J)/2` onto `H-`.
    pub fn p_minus(&self) -> &CMat {
        &self.inner.p_minus
    }

    /// Orthonormal basis of `H+` (standard axes when `J` is diagonal).
    pub fn basis_plus(&self) -> &CMat {
        &self.inner.basis_plus
    }

    /// Orthonormal basis of `H-`.
    pub fn basis_minus(&self) -> &CMat {
        &self.inner.basis_minus
    }

    pub fn same_geometry(&self, other: &KreinSpace) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.dim() == other.dim()
                && linalg::op_norm(&(self.j() - other.j())) <= self.tol().max(other.tol()))
    }

    fn check_vector(&self, v: &CVec) -> Result<()> {
        if v.len() != self.dim() {
            return Err(KreinError::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// `[f, g] = (Jf, g)`, linear in `f` and conjugate-linear in `g`.
    pub fn indefinite_product(&self, f: &CVec, g: &CVec) -> Result<Complex64> {
        self.check_vector(f)?;
        self.check_vector(g)?;
        Ok(g.dotc(&(self.j() * f)))
    }

    /// `‖JH − (JH)*‖`.
    pub fn j_selfadjoint_residual(&self, h: &CMat) -> Result<f64> {
        linalg::ensure_dim(h, self.dim())?;
        Ok(linalg::hermitian_residual(&(self.j() * h)))
    }

    pub fn is_j_selfadjoint(&self, h: &CMat) -> Result<bool> {
        let residual = self.j_selfadjoint_residual(h)?;
        Ok(residual <= self.tol() * (1.0 + linalg::op_norm(h)))
    }

    /// Gram matrix `B* J B` of the indefinite product on the columns of `B`.
    pub fn gram(&self, basis: &CMat) -> CMat {
        basis.adjoint() * self.j() * basis
    }

    pub fn classify(&self, s: &Subspace) -> Classification {
        let onb = s.orthonormal_basis();
        let k = onb.ncols();
        if k == 0 {
            return Classification {
                kind: Definiteness::Neutral,
                maximal: false,
            };
        }
        let values = linalg::hermitian_eigenvalues(&self.gram(&onb));
        let tol = self.tol();
        let pos = values.iter().filter(|&&v| v > tol).count();
        let neg = values.iter().filter(|&&v| v < -tol).count();
        let zero = k - pos - neg;
        let kind = match (pos, neg, zero) {
            (_, 0, 0) => Definiteness::Positive,
            (0, _, 0) => Definiteness::Negative,
            (0, 0, _) => Definiteness::Neutral,
            (_, 0, _) => Definiteness::Nonnegative,
            (0, _, _) => Definiteness::Nonpositive,
            _ => Definiteness::Indefinite,
        };
        let maximal = match kind {
            Definiteness::Positive | Definiteness::Nonnegative => k == self.n_plus(),
            Definiteness::Negative | Definiteness::Nonpositive => k == self.n_minus(),
            Definiteness::Neutral | Definiteness::Indefinite => false,
        };
        Classification { kind, maximal }
    }

    /// `{f : [f, g] = 0 for all g in S}`.
    ///
    /// Equals `J` applied to the Hilbert-orthogonal complement of `S`, since
    /// `J` is unitary.
    pub fn j_orthogonal_complement(&self, s: &Subspace) -> Subspace {
        let perp = linalg::orthogonal_complement(&s.orthonormal_basis());
        Subspace::from_orthonormal(self.clone(), self.j() * perp)
    }
}

fn is_diagonal(m: &CMat) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|k| i == k || m[(i, k)].norm() == 0.0))
}

fn axes(n: usize, idx: &[usize]) -> CMat {
    CMat::from_fn(n, idx.len(), |i, j| {
        if i == idx[j] {
            linalg::c(1.0, 0.0)
        } else {
            linalg::c(0.0, 0.0)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    Positive,
    Negative,
    Nonnegative,
    Nonpositive,
    Neutral,
    Indefinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub kind: Definiteness,
    pub maximal: bool,
}

impl Classification {
    pub fn is_maximal_positive(&self) -> bool {
        self.kind == Definiteness::Positive && self.maximal
    }

    pub fn is_maximal_negative(&self) -> bool {
        self.kind == Definiteness::Negative && self.maximal
    }
}

/// A subspace of a Krein space, given by a full-column-rank basis.
#[derive(Debug, Clone)]
pub struct Subspace {
    space: KreinSpace,
    basis: CMat,
}

impl Subspace {
    pub fn new(space: KreinSpace, basis: CMat) -> Result<Self> {
        if basis.nrows() != space.dim() {
            return Err(KreinError::DimensionMismatch {
                expected: space.dim(),
                found: basis.nrows(),
            });
        }
        if basis.ncols() > 0 {
            let ratio = linalg::column_rank_ratio(&basis);
            if basis.ncols() > basis.nrows() || ratio <= space.tol() {
                return Err(KreinError::RankDeficient { ratio });
            }
        }
        Ok(Self { space, basis })
    }

    /// Span of the given vectors, dropping dependent ones.
    pub fn span(space: KreinSpace, vectors: &CMat) -> Result<Self> {
        if vectors.nrows() != space.dim() {
            return Err(KreinError::DimensionMismatch {
                expected: space.dim(),
                found: vectors.nrows(),
            });
        }
        let tol = space.tol();
        Ok(Self::from_orthonormal(space, linalg::orthonormal_range(vectors, tol)))
    }

    pub(crate) fn from_orthonormal(space: KreinSpace, basis: CMat) -> Self {
        Self { space, basis }
    }

    pub fn zero(space: KreinSpace) -> Self {
        let n = space.dim();
        Self::from_orthonormal(space, CMat::zeros(n, 0))
    }

    pub fn full(space: KreinSpace) -> Self {
        let n = space.dim();
        Self::from_orthonormal(space, linalg::identity(n))
    }

    /// `H+` of the fundamental decomposition.
    pub fn h_plus(space: &KreinSpace) -> Self {
        Self::from_orthonormal(space.clone(), space.basis_plus().clone())
    }

    /// `H-` of the fundamental decomposition.
    pub fn h_minus(space: &KreinSpace) -> Self {
        Self::from_orthonormal(space.clone(), space.basis_minus().clone())
    }

    pub fn space(&self) -> &KreinSpace {
        &self.space
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn orthonormal_basis(&self) -> CMat {
        if self.basis.ncols() == 0 {
            return self.basis.clone();
        }
        linalg::orthonormal_range_of_rank(&self.basis, self.basis.ncols())
    }

    /// Orthogonal (Hilbert) projector onto the subspace.
    pub fn projector(&self) -> CMat {
        linalg::projector(&self.orthonormal_basis())
    }

    /// Spectral-norm distance between the orthogonal projectors.
    pub fn distance(&self, other: &Subspace) -> f64 {
        linalg::op_norm(&(self.projector() - other.projector()))
    }

    pub fn same_span(&self, other: &Subspace, tol: f64) -> bool {
        self.dim() == other.dim() && self.distance(other) <= tol
    }
}

/// A positive and a negative subspace intended to form a J-orthogonal pair.
#[derive(Debug, Clone)]
pub struct SubspacePair {
    pub plus: Subspace,
    pub minus: Subspace,
    pub plus_class: Classification,
    pub minus_class: Classification,
    /// `‖B+* J B-‖` on orthonormal bases.
    pub j_orthogonality: f64,
}

impl SubspacePair {
    pub fn new(plus: Subspace, minus: Subspace) -> Result<Self> {
        if !plus.space().same_geometry(minus.space()) {
            return Err(KreinError::InvalidInput(
                "subspaces live in different Krein spaces".into(),
            ));
        }
        let space = plus.space().clone();
        let plus_class = space.classify(&plus);
        let minus_class = space.classify(&minus);
        let cross = plus.orthonormal_basis().adjoint() * space.j() * minus.orthonormal_basis();
        let j_orthogonality = linalg::op_norm(&cross);
        Ok(Self {
            plus,
            minus,
            plus_class,
            minus_class,
            j_orthogonality,
        })
    }

    pub fn space(&self) -> &KreinSpace {
        self.plus.space()
    }

    pub fn is_j_orthogonal(&self) -> bool {
        self.j_orthogonality <= 1e3 * self.plus.space().tol()
    }

    pub fn is_maximal_dual_pair(&self) -> bool {
        self.plus_class.is_maximal_positive()
            && self.minus_class.is_maximal_negative()
            && self.is_j_orthogonal()
    }

    pub fn require_maximal_dual_pair(&self) -> Result<()> {
        if !self.plus_class.is_maximal_positive() {
            return Err(KreinError::NotMaximalDualPair(format!(
                "first subspace is {:?} (maximal: {})",
                self.plus_class.kind, self.plus_class.maximal
            )));
        }
        if !self.minus_class.is_maximal_negative() {
            return Err(KreinError::NotMaximalDualPair(format!(
                "second subspace is {:?} (maximal: {})",
                self.minus_class.kind, self.minus_class.maximal
            )));
        }
        if !self.is_j_orthogonal() {
            return Err(KreinError::NotMaximalDualPair(format!(
                "subspaces are not J-orthogonal (residual {:.3e})",
                self.j_orthogonality
            )));
        }
        Ok(())
    }

    /// `[B+ | B-]` with orthonormal blocks.
    pub fn joint_basis(&self) -> CMat {
        let p = self.plus.orthonormal_basis();
        let m = self.minus.orthonormal_basis();
        let n = p.nrows();
        let mut s = CMat::zeros(n, p.ncols() + m.ncols());
        s.columns_mut(0, p.ncols()).copy_from(&p);
        s.columns_mut(p.ncols(), m.ncols()).copy_from(&m);
        s
    }
}
