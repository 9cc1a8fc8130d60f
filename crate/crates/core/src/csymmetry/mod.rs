//! Deciding whether a J-self-adjoint matrix admits a C-symmetry.
//!
//! A matrix `H` with `JH = H*J` has a bounded C-symmetry exactly when it is
//! diagonalizable with real spectrum and no eigenvector is neutral. The
//! operator is then `Cf = Σ [f, f_n] f_n` over eigenvectors normalized to
//! `[f_n, f_n] = ±1`, and `e^{Q/2}` conjugates `H` to a Hermitian matrix.

pub mod eigensystem;
pub mod naboko;

use num_complex::Complex64;
use serde::Serialize;

use crate::c_operator::COperator;
use crate::error::{KreinError, Result};
use crate::linalg::{self, CMat};
use crate::space::KreinSpace;

pub use eigensystem::{EigenSystem, Sign, CLUSTER_TOL, COMPLEX_TOL, NEUTRALITY_TOL};
pub use naboko::{naboko_estimate, NabokoEstimate, NabokoOptions, NabokoPoint};

/// Eigenvector matrices conditioned worse than this count as Jordan structure.
pub const EIGENVECTOR_COND_CAP: f64 = 1e8;

/// Relative tolerance for `‖HC − CH‖ ≤ tol ‖H‖ ‖C‖`.
pub const COMMUTATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HasBoundedCsymmetry,
    NoCsymmetry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    ComplexSpectrum,
    Nondiagonalizable,
    NeutralEigenvector,
    Ok,
}

/// Restrictions of `H` to `L+` and `L-`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub plus: CMat,
    pub minus: CMat,
    /// Norm of the off-diagonal blocks of `S^-1 H S`.
    pub off_block: f64,
}

#[derive(Debug, Clone)]
pub struct CsymmetryReport {
    pub verdict: Verdict,
    pub reason: Reason,
    pub eigenvalues: Vec<Complex64>,
    pub eigensystem: Option<EigenSystem>,
    pub c: Option<COperator>,
    /// `ρ = e^{Q/2}`.
    pub similarity: Option<CMat>,
    pub naboko: Option<NabokoEstimate>,
    pub decomposition: Option<Decomposition>,
    /// `‖HC − CH‖`.
    pub commutator: Option<f64>,
    /// `‖A − A*‖` for `A = ρ H ρ^-1`.
    pub similarity_residual: Option<f64>,
    /// Condition number of `JC`.
    pub metric_condition: Option<f64>,
    /// Set when a repeated eigenvalue had to be split by its Gram matrix.
    pub split_clusters: bool,
    pub warnings: Vec<String>,
}

impl CsymmetryReport {
    fn negative(reason: Reason, eigenvalues: Vec<Complex64>, warnings: Vec<String>) -> Self {
        Self {
            verdict: Verdict::NoCsymmetry,
            reason,
            eigenvalues,
            eigensystem: None,
            c: None,
            similarity: None,
            naboko: None,
            decomposition: None,
            commutator: None,
            similarity_residual: None,
            metric_condition: None,
            split_clusters: false,
            warnings,
        }
    }

    fn positive(
        h: &CMat,
        c: COperator,
        eigenvalues: Vec<Complex64>,
        eigensystem: Option<EigenSystem>,
        split_clusters: bool,
        mut warnings: Vec<String>,
    ) -> Result<Self> {
        let commutator = commutator_norm(h, c.matrix());
        let rho = linalg::hermitian_function(c.metric(), f64::sqrt);
        let rho_inv = linalg::hermitian_function(c.metric(), |m| m.sqrt().recip());
        let similarity_residual = linalg::hermitian_residual(&(&rho * h * rho_inv));
        let decomposition = decompose(h, &c)?;
        if let Some(w) = c.transition().conditioning_warning() {
            warnings.push(w);
        }
        Ok(Self {
            verdict: Verdict::HasBoundedCsymmetry,
            reason: Reason::Ok,
            eigenvalues,
            eigensystem,
            metric_condition: Some(c.metric_condition()),
            c: Some(c),
            similarity: Some(rho),
            naboko: None,
            decomposition: Some(decomposition),
            commutator: Some(commutator),
            similarity_residual: Some(similarity_residual),
            split_clusters,
            warnings,
        })
    }

    pub fn has_csymmetry(&self) -> bool {
        self.verdict == Verdict::HasBoundedCsymmetry
    }
}

fn commutator_norm(h: &CMat, c: &CMat) -> f64 {
    linalg::op_norm(&(h * c - c * h))
}

/// `‖HC − CH‖ / (‖H‖ ‖C‖)`.
pub fn commutation_residual(h: &CMat, c: &COperator) -> Result<f64> {
    linalg::ensure_dim(h, c.space().dim())?;
    let scale = linalg::op_norm(h) * c.norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(commutator_norm(h, c.matrix()) / scale)
}

pub fn check_commutation(h: &CMat, c: &COperator) -> Result<bool> {
    Ok(commutation_residual(h, c)? <= COMMUTATION_TOL)
}

fn require_j_selfadjoint(space: &KreinSpace, h: &CMat) -> Result<()> {
    if !space.is_j_selfadjoint(h)? {
        return Err(KreinError::NotJSelfAdjoint {
            residual: space.j_selfadjoint_residual(h)?,
        });
    }
    Ok(())
}

/// Groups eigenvalue indices whose values lie within `radius` of each other,
/// chaining transitively. Groups are ordered by their smallest index.
fn clusters(values: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn root(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..n {
        for k in i + 1..n {
            if (values[i] - values[k]).norm() <= radius {
                let (a, b) = (root(&mut label, i), root(&mut label, k));
                label[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut label, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Builds `C = Σ f_n [·, f_n]` from a diagonalization of `H`, or explains
/// why no C-symmetry exists.
pub fn construct_from_spectrum(space: &KreinSpace, h: &CMat) -> Result<CsymmetryReport> {
    linalg::ensure_dim(h, space.dim())?;
    require_j_selfadjoint(space, h)?;
    let n = space.dim();
    let (values, vectors) = linalg::general_eigen(h)?;
    let scale = linalg::op_norm(h).max(f64::MIN_POSITIVE);
    let mut warnings = Vec::new();

    let groups = clusters(&values, CLUSTER_TOL * scale);
    let mut eigenvalues = vec![Complex64::new(0.0, 0.0); n];
    for g in &groups {
        let mean = g.iter().map(|&i| values[i]).sum::<Complex64>() / g.len() as f64;
        if mean.im.abs() > COMPLEX_TOL * scale {
            return Ok(CsymmetryReport::negative(
                Reason::ComplexSpectrum,
                values,
                warnings,
            ));
        }
        for &i in g {
            eigenvalues[i] = Complex64::new(mean.re, 0.0);
        }
    }

    let mut columns: Vec<CMat> = Vec::with_capacity(groups.len());
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut split_clusters = false;
    for g in &groups {
        let lambda = eigenvalues[g[0]];
        let basis = if g.len() == 1 {
            vectors.columns(g[0], 1).into_owned()
        } else {
            split_clusters = true;
            let shifted = h - linalg::identity(n) * lambda;
            let kernel = kernel_of(&shifted, scale);
            if kernel.ncols() < g.len() {
                return Ok(CsymmetryReport::negative(
                    Reason::Nondiagonalizable,
                    values,
                    warnings,
                ));
            }
            // Gram eigenvectors give a J-orthogonal basis of the eigenspace.
            let (_, rotation) = linalg::hermitian_eigen(&space.gram(&kernel));
            kernel * rotation
        };
        for k in 0..basis.ncols() {
            let f = basis.column(k);
            let unit = f.unscale(f.norm());
            if (unit.dotc(&(space.j() * &unit))).re.abs() < NEUTRALITY_TOL {
                return Ok(CsymmetryReport::negative(
                    Reason::NeutralEigenvector,
                    values,
                    warnings,
                ));
            }
        }
        columns.push(basis);
        order.extend(g.iter().copied());
    }

    let f = CMat::from_fn(n, n, |i, j| {
        let mut j = j;
        for block in &columns {
            if j < block.ncols() {
                return block[(i, j)];
            }
            j -= block.ncols();
        }
        unreachable!("column index within total width")
    });
    let eigen_cond = linalg::cond(&f);
    if eigen_cond > EIGENVECTOR_COND_CAP {
        return Ok(CsymmetryReport::negative(
            Reason::Nondiagonalizable,
            values,
            warnings,
        ));
    }
    let ordered: Vec<Complex64> = order.iter().map(|&i| eigenvalues[i]).collect();
    let system = EigenSystem::from_vectors(space, &f, Some(ordered.clone()))?;
    let c = COperator::validate(space, &system.c_matrix()?)?;
    if split_clusters {
        warnings.push("repeated eigenvalue split by its Gram matrix".into());
    }
    CsymmetryReport::positive(h, c, ordered, Some(system), split_clusters, warnings)
}

/// Eigenspace for an eigenvalue cluster: right singular vectors of
/// `H − λI` with singular value below `CLUSTER_TOL · scale`.
fn kernel_of(shifted: &CMat, scale: f64) -> CMat {
    let n = shifted.ncols();
    let linalg::Svd { s, v, .. } = linalg::svd(shifted);
    let keep: Vec<usize> = (0..n)
        .filter(|&k| s[k] <= CLUSTER_TOL * scale)
        .collect();
    CMat::from_fn(n, keep.len(), |i, j| v[(i, keep[j])])
}

/// `ρ = e^{Q/2}`, with `ρ H ρ^-1` Hermitian.
pub fn similarity_certificate(report: &CsymmetryReport) -> Result<CMat> {
    match (&report.verdict, &report.similarity) {
        (Verdict::HasBoundedCsymmetry, Some(rho)) => Ok(rho.clone()),
        _ => Err(KreinError::NoCSymmetry(format!("{:?}", report.reason))),
    }
}

/// `C = E+ − E-` from the spectral projections of a J-nonnegative `H`
/// with trivial kernel.
///
/// With `JH = L L*` (Cholesky), `L* J L` is Hermitian and similar to `H`
/// through `L*`, so `C = L^-* sign(L* J L) L*`.
pub fn spectral_c_for_j_nonnegative(space: &KreinSpace, h: &CMat) -> Result<CsymmetryReport> {
    linalg::ensure_dim(h, space.dim())?;
    require_j_selfadjoint(space, h)?;
    let jh = linalg::hermitian_part(&(space.j() * h));
    let jh_values = linalg::hermitian_eigenvalues(&jh);
    let scale = linalg::op_norm(&jh).max(f64::MIN_POSITIVE);
    let min = jh_values.first().copied().unwrap_or(1.0);
    if min < -space.tol() * scale {
        return Err(KreinError::NotJNonnegative { min_eigenvalue: min });
    }
    if min <= space.tol() * scale {
        return Err(KreinError::KernelNonempty { magnitude: min.abs() });
    }
    let chol = jh
        .clone()
        .cholesky()
        .ok_or(KreinError::KernelNonempty { magnitude: min.abs() })?;
    let l = chol.l();
    let similar = linalg::hermitian_part(&(l.adjoint() * space.j() * &l));
    let (lambda, y) = linalg::hermitian_eigen(&similar);
    if let Some(small) = lambda.iter().map(|v| v.abs()).min_by(f64::total_cmp) {
        if small <= space.tol() * linalg::op_norm(h) {
            return Err(KreinError::KernelNonempty { magnitude: small });
        }
    }
    let signs: Vec<f64> = lambda.iter().map(|v| v.signum()).collect();
    let l_adj = l.adjoint();
    let l_adj_inv = linalg::inverse(&l_adj)?;
    let c = &l_adj_inv * linalg::from_eigen(&signs, &y) * &l_adj;
    let c = COperator::validate(space, &c)?;
    let eigenvalues: Vec<Complex64> = lambda.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    CsymmetryReport::positive(h, c, eigenvalues, None, false, Vec::new())
}

/// `S^-1 H S = diag(H+, H-)` for `S = [basis(L+) | basis(L-)]`.
pub fn decompose(h: &CMat, c: &COperator) -> Result<Decomposition> {
    linalg::ensure_dim(h, c.space().dim())?;
    let residual = commutation_residual(h, c)?;
    if residual > COMMUTATION_TOL {
        return Err(KreinError::NotCommuting { residual });
    }
    let pair = c.subspaces();
    let s = pair.joint_basis();
    let blocks = linalg::solve(&s, &(h * &s))?;
    let k = pair.plus.dim();
    let n = blocks.nrows();
    let plus = blocks.view((0, 0), (k, k)).into_owned();
    let minus = blocks.view((k, k), (n - k, n - k)).into_owned();
    let upper = blocks.view((0, k), (k, n - k)).into_owned();
    let lower = blocks.view((k, 0), (n - k, k)).into_owned();
    let off_block = linalg::op_norm(&upper).max(linalg::op_norm(&lower));
    Ok(Decomposition {
        plus,
        minus,
        off_block,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;

    fn plane() -> KreinSpace {
        KreinSpace::from_signature(&[1, -1]).unwrap()
    }

    fn h08() -> CMat {
        from_real_rows(&[&[1.0, 0.6], &[-0.6, -1.0]])
    }

    #[test]
    fn commutation_examples() {
        let c = COperator::validate(
            &plane(),
            &from_real_rows(&[&[1.25, 0.75], &[-0.75, -1.25]]),
        )
        .unwrap();
        assert!(check_commutation(&linalg::identity(2), &c).unwrap());
        assert!(check_commutation(&h08(), &c).unwrap());
        let hc = h08() * c.matrix();
        assert!(linalg::op_norm(&(hc - linalg::identity(2).scale(0.8))) < 1e-15);
        let j = COperator::validate(&plane(), plane().j()).unwrap();
        assert!(!check_commutation(&h08(), &j).unwrap());
    }

    #[test]
    fn construct_examples() {
        let space = plane();
        let r = construct_from_spectrum(&space, space.j()).unwrap();
        assert!(r.has_csymmetry());
        assert!(linalg::op_norm(&(r.c.as_ref().unwrap().matrix() - space.j())) < 1e-15);
        assert!(linalg::op_norm(&(similarity_certificate(&r).unwrap() - linalg::identity(2))) < 1e-15);

        let r = construct_from_spectrum(&space, &h08()).unwrap();
        assert_eq!(r.reason, Reason::Ok);
        let expected = from_real_rows(&[&[1.25, 0.75], &[-0.75, -1.25]]);
        assert!(linalg::op_norm(&(r.c.as_ref().unwrap().matrix() - expected)) < 1e-13);
        assert!(r.similarity_residual.unwrap() < 1e-13);
        let d = r.decomposition.as_ref().unwrap();
        assert!((d.plus[(0, 0)].re - 0.8).abs() < 1e-13);
        assert!((d.minus[(0, 0)].re + 0.8).abs() < 1e-13);

        let r = construct_from_spectrum(&space, &from_real_rows(&[&[1.0, 2.0], &[-2.0, -1.0]]))
            .unwrap();
        assert_eq!(r.reason, Reason::ComplexSpectrum);
        assert!(similarity_certificate(&r).is_err());
    }

    #[test]
    fn jordan_block_is_nondiagonalizable() {
        // JH = [[1,1],[1,1]] is Hermitian and H² = 0.
        let h = from_real_rows(&[&[1.0, 1.0], &[-1.0, -1.0]]);
        let r = construct_from_spectrum(&plane(), &h).unwrap();
        assert_eq!(r.reason, Reason::Nondiagonalizable);
    }

    #[test]
    fn repeated_eigenvalue_split() {
        let space = KreinSpace::from_signature(&[1, 1, -1]).unwrap();
        let h = linalg::real_diag(&[2.0, 2.0, -1.0]);
        let r = construct_from_spectrum(&space, &h).unwrap();
        assert!(r.has_csymmetry() && r.split_clusters);
        assert!(linalg::op_norm(&(r.c.unwrap().matrix() - space.j())) < 1e-12);
    }

    #[test]
    fn zero_matrix_has_csymmetry() {
        let space = plane();
        let r = construct_from_spectrum(&space, &CMat::zeros(2, 2)).unwrap();
        assert!(r.has_csymmetry());
        let nilpotent = from_real_rows(&[&[0.5, -0.5], &[0.5, -0.5]]);
        assert!(space.is_j_selfadjoint(&nilpotent).unwrap());
        let r = construct_from_spectrum(&space, &nilpotent).unwrap();
        assert_eq!(r.reason, Reason::Nondiagonalizable);
    }

    #[test]
    fn spectral_route() {
        let space = plane();
        let r = spectral_c_for_j_nonnegative(&space, space.j()).unwrap();
        assert!(linalg::op_norm(&(r.c.unwrap().matrix() - space.j())) < 1e-15);
        let singular = from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!(matches!(
            spectral_c_for_j_nonnegative(&space, &singular),
            Err(KreinError::KernelNonempty { .. })
        ));
        assert!(matches!(
            spectral_c_for_j_nonnegative(&space, &(-space.j())),
            Err(KreinError::NotJNonnegative { .. })
        ));
        // JH = [[1, 0.6], [0.6, 1]] is positive, so both routes apply.
        let spectral = spectral_c_for_j_nonnegative(&space, &h08()).unwrap();
        let eigen = construct_from_spectrum(&space, &h08()).unwrap();
        let gap = spectral.c.unwrap().matrix() - eigen.c.unwrap().matrix();
        assert!(linalg::op_norm(&gap) < 1e-13);
    }

    #[test]
    fn decompose_requires_commutation() {
        let space = plane();
        let j = COperator::validate(&space, space.j()).unwrap();
        let d = decompose(space.j(), &j).unwrap();
        assert!((d.plus[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!((d.minus[(0, 0)].re + 1.0).abs() < 1e-15);
        assert!(matches!(
            decompose(&h08(), &j),
            Err(KreinError::NotCommuting { .. })
        ));
    }
}
