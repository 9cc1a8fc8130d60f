//! Completing a non-maximal J-orthogonal pair of definite subspaces.
//!
//! Eigenvectors separated by the sign of `[f, f]` span a positive `L+⁰` and a
//! negative `L-⁰`. On `D₀ = L+⁰ ∔ L-⁰` the operator `C₀` is fixed (`+1` on
//! `L+⁰`, `−1` on `L-⁰`), but when `D₀` is not the whole space the extension
//! to a full `C` is free on the J-orthogonal complement `W`. Splitting `W`
//! into J-orthonormal `W+` and `W-`, every extension comes from a strict
//! contraction `K: W+ → W-` through
//!
//! ```text
//! L+ = L+⁰ ⊕ span(E+ + E- K),   L- = L-⁰ ⊕ span(E- + E+ K*)
//! ```
//!
//! and `K = 0` is the canonical choice.

use num_complex::Complex64;
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::c_operator::COperator;
use crate::csymmetry::{EigenSystem, Sign, NEUTRALITY_TOL};
use crate::error::{KreinError, Result};
use crate::linalg::{self, CMat, CVec};
use crate::space::{KreinSpace, Subspace, SubspacePair};

/// Largest `|[f_m, f_n]|` (normalized vectors) still counted as J-orthogonal.
pub const J_ORTHOGONALITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct PartialDualPair {
    pub l0_plus: Subspace,
    pub l0_minus: Subspace,
    /// J-orthogonal complement `W` of `L+⁰ ∔ L-⁰`.
    pub complement: Subspace,
    /// Numbers of positive and negative directions of `W`.
    pub complement_signature: (usize, usize),
    /// `W` contains directions on which its Gram matrix vanishes.
    pub degenerate: bool,
    pub warnings: Vec<String>,
}

impl PartialDualPair {
    pub fn space(&self) -> &KreinSpace {
        self.l0_plus.space()
    }
}

/// Groups a J-orthogonal family by sign into `L+⁰` and `L-⁰` and computes
/// the complement.
///
/// Neutral vectors are fatal for a spanning family and dropped with a
/// warning otherwise.
pub fn sign_separation(sys: &EigenSystem) -> Result<PartialDualPair> {
    let space = sys.space().clone();
    let mut warnings = Vec::new();
    if sys.has_neutral() {
        if sys.rank() == space.dim() {
            return Err(KreinError::NeutralEigenvector);
        }
        warnings.push("neutral vectors ignored".to_string());
    }
    let pick = |sign: Sign| {
        let idx: Vec<usize> = (0..sys.len()).filter(|&k| sys.signs()[k] == sign).collect();
        CMat::from_fn(space.dim(), idx.len(), |i, j| sys.vectors()[(i, idx[j])])
    };
    let plus = pick(Sign::Positive);
    let minus = pick(Sign::Negative);
    let definite = concat(&plus, &minus);
    let gram = space.gram(&definite);
    let residual = (0..gram.nrows())
        .flat_map(|i| (0..gram.ncols()).map(move |k| (i, k)))
        .filter(|(i, k)| i != k)
        .map(|(i, k)| gram[(i, k)].norm())
        .fold(0.0, f64::max);
    if residual > J_ORTHOGONALITY_TOL {
        return Err(KreinError::NotJOrthogonal { residual });
    }

    let l0_plus = Subspace::span(space.clone(), &plus)?;
    let l0_minus = Subspace::span(space.clone(), &minus)?;
    let joint = Subspace::span(space.clone(), &definite)?;
    let complement = space.j_orthogonal_complement(&joint);
    let values = linalg::hermitian_eigenvalues(&space.gram(complement.basis()));
    let w_plus = values.iter().filter(|&&v| v > NEUTRALITY_TOL).count();
    let w_minus = values.iter().filter(|&&v| v < -NEUTRALITY_TOL).count();
    Ok(PartialDualPair {
        degenerate: w_plus + w_minus < values.len(),
        l0_plus,
        l0_minus,
        complement,
        complement_signature: (w_plus, w_minus),
        warnings,
    })
}

fn concat(a: &CMat, b: &CMat) -> CMat {
    let mut out = CMat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

/// `C₀` on `D₀`, stored by its action on an orthonormal basis of each part.
#[derive(Debug, Clone)]
pub struct PartialC {
    pair: PartialDualPair,
    /// `[B+ | B-]`.
    basis: CMat,
    /// `[B+ | −B-] = C₀ [B+ | B-]`.
    image: CMat,
    g0_gram: CMat,
}

pub fn build_partial_c(pair: &PartialDualPair) -> Result<PartialC> {
    let space = pair.space();
    let plus = pair.l0_plus.orthonormal_basis();
    let minus = pair.l0_minus.orthonormal_basis();
    let basis = concat(&plus, &minus);
    let image = concat(&plus, &(-&minus));
    // (G₀ f, f) = (J C₀ f, f) for f in D₀
    let g0_gram = linalg::hermitian_part(&(basis.adjoint() * space.j() * &image));
    let min = linalg::hermitian_eigenvalues(&g0_gram)
        .first()
        .copied()
        .unwrap_or(1.0);
    if min <= space.tol() {
        return Err(KreinError::Numerical(format!(
            "Gram matrix of JC0 is not positive definite (smallest eigenvalue {min:.3e})"
        )));
    }
    Ok(PartialC {
        pair: pair.clone(),
        basis,
        image,
        g0_gram,
    })
}

impl PartialC {
    pub fn pair(&self) -> &PartialDualPair {
        &self.pair
    }

    /// Basis of `D₀`, positive part first; orthonormal within each part.
    pub fn domain_basis(&self) -> &CMat {
        &self.basis
    }

    pub fn g0_gram(&self) -> &CMat {
        &self.g0_gram
    }

    pub fn g0_min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.g0_gram)
            .first()
            .copied()
            .unwrap_or(f64::INFINITY)
    }

    /// Coordinates of `f` in the domain basis, or an error if `f` is not in
    /// `D₀`.
    fn coordinates(&self, f: &CVec) -> Result<CVec> {
        let space = self.pair.space();
        if f.len() != space.dim() {
            return Err(KreinError::DimensionMismatch {
                expected: space.dim(),
                found: f.len(),
            });
        }
        // B+ and B- are only J-orthogonal, so solve the normal equations.
        let x = self.least_squares(&CMat::from_column_slice(f.len(), 1, f.as_slice()))?;
        let x = x.column(0).into_owned();
        let residual = (f - &self.basis * &x).norm();
        if residual > 1e-8 * f.norm().max(1.0) {
            return Err(KreinError::InvalidInput(format!(
                "vector is not in the domain of C0 (distance {residual:.3e})"
            )));
        }
        Ok(x)
    }

    pub fn apply(&self, f: &CVec) -> Result<CVec> {
        Ok(&self.image * self.coordinates(f)?)
    }

    fn least_squares(&self, rhs: &CMat) -> Result<CMat> {
        let b_star = self.basis.adjoint();
        linalg::solve(&(&b_star * &self.basis), &(b_star * rhs))
    }

    /// `‖C₀² − I‖` on `D₀`.
    pub fn involution_residual(&self) -> f64 {
        // C₀ maps D₀ to itself; M solves B M = C₀ B.
        match self.least_squares(&self.image) {
            Ok(m) => {
                let drift = linalg::op_norm(&(&self.basis * &m - &self.image));
                drift + linalg::op_norm(&(&m * &m - linalg::identity(m.nrows())))
            }
            Err(_) => f64::INFINITY,
        }
    }

    /// `‖C B − C₀ B‖` for a full operator `C`.
    pub fn agreement_residual(&self, c: &CMat) -> f64 {
        linalg::op_norm(&(c * &self.basis - &self.image))
    }
}

/// All completions of a partial `C₀`.
#[derive(Debug, Clone)]
pub struct ExtensionFamily {
    base: PartialC,
    e_plus: CMat,
    e_minus: CMat,
    canonical: COperator,
}

/// Uniqueness of the completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniquenessVerdict {
    Unique,
    /// Real dimension of the parameter set of contractions.
    FamilyOfDimension(usize),
}

impl Serialize for UniquenessVerdict {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            UniquenessVerdict::Unique => serializer.serialize_str("unique"),
            UniquenessVerdict::FamilyOfDimension(d) => {
                serializer.serialize_str(&format!("family_of_dimension({d})"))
            }
        }
    }
}

pub fn enumerate_extensions(pc: &PartialC) -> Result<ExtensionFamily> {
    let pair = pc.pair();
    if pair.degenerate {
        return Err(KreinError::DegenerateComplement);
    }
    let space = pair.space();
    let w = pair.complement.orthonormal_basis();
    let (values, vectors) = linalg::hermitian_eigen(&space.gram(&w));
    let (w_plus, w_minus) = pair.complement_signature;
    // Gram eigenvalues ascending: negative directions first.
    let neg = &w * vectors.columns(0, w_minus);
    let pos = &w * vectors.columns(values.len() - w_plus, w_plus);
    let e_plus = j_orthonormalize(space, &pos, 1.0)?;
    let e_minus = j_orthonormalize(space, &neg, -1.0)?;
    let canonical = completion(pair, &e_plus, &e_minus, &CMat::zeros(w_minus, w_plus))?;
    Ok(ExtensionFamily {
        base: pc.clone(),
        e_plus,
        e_minus,
        canonical,
    })
}

fn completion(pair: &PartialDualPair, e_plus: &CMat, e_minus: &CMat, k: &CMat) -> Result<COperator> {
    let space = pair.space().clone();
    let plus = concat(pair.l0_plus.basis(), &(e_plus + e_minus * k));
    let minus = concat(pair.l0_minus.basis(), &(e_minus + e_plus * k.adjoint()));
    let pair = SubspacePair::new(
        Subspace::new(space.clone(), plus)?,
        Subspace::new(space, minus)?,
    )?;
    COperator::from_subspace_pair(&pair)
}

/// A basis of the span of `b` with Gram `sign · I`: column echelon form
/// fixes the basis, then `B (sign · B* J B)^{-1/2}` orthonormalizes it
/// symmetrically.
fn j_orthonormalize(space: &KreinSpace, b: &CMat, sign: f64) -> Result<CMat> {
    if b.ncols() == 0 {
        return Ok(b.clone());
    }
    let echelon = linalg::column_echelon(b, 1e-10);
    let gram = space.gram(&echelon).scale(sign);
    let values = linalg::hermitian_eigenvalues(&gram);
    if values.first().is_none_or(|&v| v <= 0.0) {
        return Err(KreinError::DegenerateComplement);
    }
    Ok(echelon * linalg::hermitian_function(&gram, |v| v.sqrt().recip()))
}

impl ExtensionFamily {
    pub fn base(&self) -> &PartialC {
        &self.base
    }

    /// J-orthonormal bases of `W+` and `W-`.
    pub fn complement_bases(&self) -> (&CMat, &CMat) {
        (&self.e_plus, &self.e_minus)
    }

    /// Shape `(w-, w+)` of the contraction parameter.
    pub fn parameter_shape(&self) -> (usize, usize) {
        (self.e_minus.ncols(), self.e_plus.ncols())
    }

    /// Real dimension `2 w+ w-` of the parameter set.
    pub fn parameter_dimension(&self) -> usize {
        2 * self.e_plus.ncols() * self.e_minus.ncols()
    }

    pub fn complement_dim(&self) -> usize {
        self.e_plus.ncols() + self.e_minus.ncols()
    }

    pub fn unique(&self) -> bool {
        self.complement_dim() == 0
    }

    pub fn canonical(&self) -> &COperator {
        &self.canonical
    }

    /// The completion for the strict contraction `k: W+ → W-`.
    pub fn member(&self, k: &CMat) -> Result<COperator> {
        let shape = self.parameter_shape();
        if k.shape() != shape {
            return Err(KreinError::ParameterShape {
                expected: shape,
                found: k.shape(),
            });
        }
        let norm = linalg::op_norm(k);
        if norm >= 1.0 {
            return Err(KreinError::NotContraction { norm });
        }
        completion(self.base.pair(), &self.e_plus, &self.e_minus, k)
    }

    /// A random parameter with norm at most `1 − margin`.
    pub fn random_parameter<R: Rng + ?Sized>(&self, rng: &mut R, margin: f64) -> CMat {
        let (rows, cols) = self.parameter_shape();
        if rows == 0 || cols == 0 {
            return CMat::zeros(rows, cols);
        }
        let g = linalg::random_gaussian(rng, rows, cols);
        let target = rng.random_range(0.0..=(1.0 - margin));
        let norm = linalg::op_norm(&g);
        if norm == 0.0 {
            g
        } else {
            g.scale(target / norm)
        }
    }
}

pub fn uniqueness_verdict(family: &ExtensionFamily) -> UniquenessVerdict {
    if family.unique() {
        UniquenessVerdict::Unique
    } else {
        UniquenessVerdict::FamilyOfDimension(family.parameter_dimension())
    }
}

/// Coefficients `c_n = (f, g_n)` with `g_n = [f_n, f_n] J f_n`, so that
/// `f = Σ c_n f_n`.
pub fn schauder_expand(sys: &EigenSystem, f: &CVec) -> Result<Vec<Complex64>> {
    let space = sys.space();
    if f.len() != space.dim() {
        return Err(KreinError::DimensionMismatch {
            expected: space.dim(),
            found: f.len(),
        });
    }
    if !sys.is_spanning() {
        return Err(KreinError::NotSpanning {
            rank: sys.rank(),
            dim: space.dim(),
        });
    }
    if sys.has_neutral() {
        return Err(KreinError::NeutralEigenvector);
    }
    let coefficients = sys.biorthogonal().adjoint() * f;
    Ok(coefficients.iter().copied().collect())
}

/// `Σ c_n f_n`.
pub fn reconstruct(sys: &EigenSystem, coefficients: &[Complex64]) -> CVec {
    sys.vectors() * CVec::from_column_slice(coefficients)
}
