//! The operator `C` of a maximal dual pair and its equivalent descriptions.
//!
//! A `COperator` can be built from any of
//!
//! * a J-orthogonal maximal pair `L+ ∔ L-` (`C = P_L+ − P_L-`),
//! * an operator of transition (`C = J (I + T)^-1 (I − T)`),
//! * a generator `Q = Q*` anticommuting with `J` (`C = J e^Q`),
//! * a raw matrix satisfying `C² = I` with `JC` Hermitian positive definite.
//!
//! Whatever the source, the value carries all four representations. The
//! metric `e^Q = JC` is Hermitian by contract, so logarithms and hyperbolic
//! functions are taken through its eigendecomposition.

use num_complex::Complex64;

use crate::error::{KreinError, Result};
use crate::linalg::{self, CMat, CVec};
use crate::space::{KreinSpace, Subspace, SubspacePair};
use crate::transition::TransitionOperator;

/// Relative tolerance for involution and positivity checks on `C`.
pub const C_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct COperator {
    space: KreinSpace,
    c: CMat,
    q: CMat,
    metric: CMat,
    metric_eigenvalues: Vec<f64>,
    transition: TransitionOperator,
    tol: f64,
}

impl COperator {
    /// `Cf = f_L+ − f_L-` for the decomposition `f = f_L+ + f_L-`.
    pub fn from_subspace_pair(pair: &SubspacePair) -> Result<Self> {
        pair.require_maximal_dual_pair()?;
        let space = pair.space().clone();
        let basis = pair.joint_basis();
        let n_plus = pair.plus.dim();
        let mut signed = basis.clone();
        for j in n_plus..signed.ncols() {
            signed.column_mut(j).neg_mut();
        }
        let c = signed * linalg::inverse(&basis)?;
        let metric = linalg::hermitian_part(&(space.j() * &c));
        Self::from_parts(space, c, metric, None)
    }

    /// `C = J (I + T)^-1 (I − T)`.
    pub fn from_transition(t: &TransitionOperator) -> Result<Self> {
        let space = t.space().clone();
        let id = linalg::identity(space.dim());
        let metric = linalg::solve(&(&id + t.matrix()), &(&id - t.matrix()))?;
        let metric = linalg::hermitian_part(&metric);
        let c = space.j() * &metric;
        Self::from_parts(space, c, metric, Some(t.clone()))
    }

    /// `C = J e^Q` for Hermitian `Q` with `JQ = −QJ`.
    pub fn from_generator(space: &KreinSpace, q: &CMat) -> Result<Self> {
        linalg::ensure_dim(q, space.dim())?;
        let tol = space.tol() * (1.0 + linalg::op_norm(q));
        let herm = linalg::hermitian_residual(q);
        if herm > tol {
            return Err(KreinError::GeneratorNotHermitian { residual: herm });
        }
        let anti = linalg::op_norm(&(space.j() * q + q * space.j()));
        if anti > tol {
            return Err(KreinError::GeneratorNotAnticommuting { residual: anti });
        }
        let (values, vectors) = linalg::hermitian_eigen(q);
        let exp: Vec<f64> = values.iter().map(|v| v.exp()).collect();
        let metric = linalg::from_eigen(&exp, &vectors);
        let c = space.j() * &metric;
        let t = linalg::from_eigen(
            &values.iter().map(|v| -(v / 2.0).tanh()).collect::<Vec<_>>(),
            &vectors,
        );
        let transition = TransitionOperator::from_matrix_unchecked(space.clone(), t);
        let tol = C_REL_TOL * linalg::op_norm(&c);
        Ok(Self {
            space: space.clone(),
            c,
            q: linalg::hermitian_part(q),
            metric,
            metric_eigenvalues: exp,
            transition,
            tol,
        })
    }

    /// Checks `C² = I` and `JC = (JC)* ≻ 0`, then derives `Q = log(JC)` and
    /// `T = −tanh(Q/2)`.
    pub fn validate(space: &KreinSpace, c: &CMat) -> Result<Self> {
        linalg::ensure_dim(c, space.dim())?;
        let tol = C_REL_TOL * linalg::op_norm(c).max(1.0);
        let invol = linalg::op_norm(&(c * c - linalg::identity(space.dim())));
        if invol > tol {
            return Err(KreinError::NotInvolution { residual: invol });
        }
        let jc = space.j() * c;
        let herm = linalg::hermitian_residual(&jc);
        if herm > tol {
            return Err(KreinError::MetricNotHermitian { residual: herm });
        }
        Self::from_parts(space.clone(), c.clone(), linalg::hermitian_part(&jc), None)
    }

    fn from_parts(
        space: KreinSpace,
        c: CMat,
        metric: CMat,
        transition: Option<TransitionOperator>,
    ) -> Result<Self> {
        let tol = C_REL_TOL * linalg::op_norm(&c).max(1.0);
        let (values, vectors) = linalg::hermitian_eigen(&metric);
        let min = values.first().copied().unwrap_or(1.0);
        let max = values.last().copied().unwrap_or(1.0);
        if min <= positivity_floor(values.len(), max) {
            return Err(KreinError::MetricNotPositive {
                min_eigenvalue: min,
            });
        }
        let q = linalg::from_eigen(&values.iter().map(|v| v.ln()).collect::<Vec<_>>(), &vectors);
        let transition = transition.unwrap_or_else(|| {
            // -tanh(ln(m)/2) = (1 - m) / (1 + m)
            let t = linalg::from_eigen(
                &values.iter().map(|m| (1.0 - m) / (1.0 + m)).collect::<Vec<_>>(),
                &vectors,
            );
            TransitionOperator::from_matrix_unchecked(space.clone(), t)
        });
        Ok(Self {
            space,
            c,
            q,
            metric,
            metric_eigenvalues: values,
            transition,
            tol,
        })
    }

    pub fn space(&self) -> &KreinSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMat {
        &self.c
    }

    /// Generator `Q` with `C = J e^Q`.
    pub fn generator(&self) -> &CMat {
        &self.q
    }

    /// The metric operator `e^Q = JC`.
    pub fn metric(&self) -> &CMat {
        &self.metric
    }

    /// Eigenvalues of the metric, ascending.
    pub fn metric_eigenvalues(&self) -> &[f64] {
        &self.metric_eigenvalues
    }

    pub fn transition(&self) -> &TransitionOperator {
        &self.transition
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn norm(&self) -> f64 {
        linalg::op_norm(&self.c)
    }

    /// `cond(JC) = λ_max / λ_min` of the metric.
    pub fn metric_condition(&self) -> f64 {
        match (self.metric_eigenvalues.first(), self.metric_eigenvalues.last()) {
            (Some(&lo), Some(&hi)) => hi / lo,
            _ => 1.0,
        }
    }

    /// `‖C² − I‖`.
    pub fn involution_residual(&self) -> f64 {
        linalg::op_norm(&(&self.c * &self.c - linalg::identity(self.space.dim())))
    }

    pub fn metric_min_eigenvalue(&self) -> f64 {
        self.metric_eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    /// `|λ_max(e^Q) λ_min(e^Q) − 1|`; zero whenever `JQ = −QJ`, because
    /// `J e^Q J = e^{-Q}` makes the spectrum symmetric under `λ ↦ 1/λ`.
    pub fn spectral_symmetry_residual(&self) -> f64 {
        match (self.metric_eigenvalues.first(), self.metric_eigenvalues.last()) {
            (Some(&lo), Some(&hi)) => (lo * hi - 1.0).abs(),
            _ => 0.0,
        }
    }

    /// `‖C* G C − G‖` with `G = JC`: `C` is a fundamental symmetry of the
    /// space re-normed by `(·,·)_C`.
    pub fn fundamental_symmetry_residual(&self) -> f64 {
        let g = &self.metric;
        linalg::op_norm(&(self.c.adjoint() * g * &self.c - g))
    }

    /// `‖JQ + QJ‖`.
    pub fn generator_anticommutator(&self) -> f64 {
        let j = self.space.j();
        linalg::op_norm(&(j * &self.q + &self.q * j))
    }

    /// `C* = J e^{-Q}`, the operator of the dual pair (transition `−T`).
    pub fn adjoint(&self) -> Self {
        let c = self.c.adjoint();
        let metric = linalg::hermitian_part(&(self.space.j() * &c));
        let mut metric_eigenvalues: Vec<f64> =
            self.metric_eigenvalues.iter().map(|m| m.recip()).collect();
        metric_eigenvalues.reverse();
        Self {
            space: self.space.clone(),
            c,
            q: -&self.q,
            metric,
            metric_eigenvalues,
            transition: self.transition.dual(),
            tol: self.tol,
        }
    }

    /// `(f, g)_C = [Cf, g] = (e^Q f, g)`.
    pub fn inner_product(&self, f: &CVec, g: &CVec) -> Result<Complex64> {
        let n = self.space.dim();
        for v in [f, g] {
            if v.len() != n {
                return Err(KreinError::DimensionMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
        }
        Ok(g.dotc(&(&self.metric * f)))
    }

    /// Projections `(I ± C)/2` onto `L±`.
    pub fn projections(&self) -> (CMat, CMat) {
        let id = linalg::identity(self.space.dim());
        (
            (&id + &self.c).scale(0.5),
            (&id - &self.c).scale(0.5),
        )
    }

    /// `L± = (I ± C) H / 2`.
    pub fn subspaces(&self) -> SubspacePair {
        let (p, m) = self.projections();
        let plus = linalg::orthonormal_range_of_rank(&p, self.space.n_plus());
        let minus = linalg::orthonormal_range_of_rank(&m, self.space.n_minus());
        SubspacePair::new(
            Subspace::from_orthonormal(self.space.clone(), plus),
            Subspace::from_orthonormal(self.space.clone(), minus),
        )
        .expect("both subspaces share the space")
    }

    pub fn distance(&self, other: &COperator) -> f64 {
        linalg::op_norm(&(&self.c - &other.c))
    }
}

/// Smallest eigenvalue a metric may have and still count as positive:
/// rounding level relative to the largest eigenvalue. An absolute floor would
/// reject the legitimately ill-conditioned C of transitions with `‖T‖ → 1`.
fn positivity_floor(n: usize, max: f64) -> f64 {
    (n.max(1) as f64) * f64::EPSILON * max.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;

    fn plane() -> KreinSpace {
        KreinSpace::from_signature(&[1, -1]).unwrap()
    }

    fn t06() -> TransitionOperator {
        TransitionOperator::new(plane(), from_real_rows(&[&[0.0, 0.6], &[0.6, 0.0]])).unwrap()
    }

    fn line(a: f64, b: f64) -> Subspace {
        Subspace::new(plane(), from_real_rows(&[&[a], &[b]])).unwrap()
    }

    // t = 0.6: (I+T)^-1 (I-T) = (1-t²)^-1 [[1+t², -2t], [-2t, 1+t²]]
    //        = [[2.125, -1.875], [-1.875, 2.125]]
    fn metric06() -> CMat {
        from_real_rows(&[&[2.125, -1.875], &[-1.875, 2.125]])
    }

    fn c06() -> CMat {
        from_real_rows(&[&[2.125, -1.875], &[1.875, -2.125]])
    }

    #[test]
    fn fundamental_pair_gives_j() {
        let s = plane();
        let pair = SubspacePair::new(Subspace::h_plus(&s), Subspace::h_minus(&s)).unwrap();
        let c = COperator::from_subspace_pair(&pair).unwrap();
        assert!(linalg::op_norm(&(c.matrix() - s.j())) < 1e-15);
        let c = COperator::from_transition(&TransitionOperator::zero(s.clone())).unwrap();
        assert!(linalg::op_norm(&(c.matrix() - s.j())) < 1e-15);
        let c = COperator::from_generator(&s, &CMat::zeros(2, 2)).unwrap();
        assert!(linalg::op_norm(&(c.matrix() - s.j())) < 1e-15);
    }

    #[test]
    fn t06_closed_forms() {
        let c = COperator::from_transition(&t06()).unwrap();
        assert!(linalg::op_norm(&(c.metric() - metric06())) < 1e-13);
        assert!(linalg::op_norm(&(c.matrix() - c06())) < 1e-13);
        let eig = c.metric_eigenvalues();
        assert!((eig[0] - 0.25).abs() < 1e-13 && (eig[1] - 4.0).abs() < 1e-13);
        let pair = SubspacePair::new(line(1.0, 0.6), line(0.6, 1.0)).unwrap();
        let from_pair = COperator::from_subspace_pair(&pair).unwrap();
        assert!(from_pair.distance(&c) < 1e-13);
    }

    #[test]
    fn generator_closed_form() {
        // cosh(ln 4) = 2.125, sinh(ln 4) = 1.875, tanh(ln 2) = 0.6
        let a = 4f64.ln();
        let q = from_real_rows(&[&[0.0, -a], &[-a, 0.0]]);
        let c = COperator::from_generator(&plane(), &q).unwrap();
        assert!(linalg::op_norm(&(c.matrix() - c06())) < 1e-13);
        assert!(linalg::op_norm(&(c.transition().matrix() - t06().matrix())) < 1e-13);
    }

    #[test]
    fn generator_must_anticommute() {
        let q = from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!(matches!(
            COperator::from_generator(&plane(), &q),
            Err(KreinError::GeneratorNotAnticommuting { .. })
        ));
    }

    #[test]
    fn validate_examples() {
        let s = plane();
        let c = COperator::validate(&s, &s.j().clone()).unwrap();
        assert!(linalg::op_norm(c.generator()) < 1e-15);

        let c = COperator::validate(&s, &from_real_rows(&[&[1.25, 0.75], &[-0.75, -1.25]]))
            .unwrap();
        let eig = c.metric_eigenvalues();
        assert!((eig[0] - 0.5).abs() < 1e-14 && (eig[1] - 2.0).abs() < 1e-14);

        // J·[[0,1],[1,0]] = [[0,1],[-1,0]] is skew, eigenvalues ±i
        assert!(matches!(
            COperator::validate(&s, &from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])),
            Err(KreinError::MetricNotHermitian { .. })
        ));
        // C = I: JC = J has eigenvalues ±1
        assert!(matches!(
            COperator::validate(&s, &linalg::identity(2)),
            Err(KreinError::MetricNotPositive { .. })
        ));
        assert!(matches!(
            COperator::validate(&s, &from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]])),
            Err(KreinError::NotInvolution { .. })
        ));
    }

    #[test]
    fn adjoint_is_dual() {
        let s = plane();
        let j = COperator::validate(&s, &s.j().clone()).unwrap();
        assert!(linalg::op_norm(&(j.adjoint().matrix() - s.j())) < 1e-15);

        let c = COperator::from_transition(&t06()).unwrap();
        let dual = c.adjoint();
        let recovered = TransitionOperator::from_subspaces(&dual.subspaces()).unwrap();
        assert!(linalg::op_norm(&(recovered.matrix() + t06().matrix())) < 1e-13);
        assert!(c.adjoint().adjoint().distance(&c) < 1e-15);
    }

    #[test]
    fn c_inner_product_examples() {
        let s = plane();
        let f = CVec::from_vec(vec![linalg::c(1.0, 0.0), linalg::c(0.0, 0.0)]);
        let g = CVec::from_vec(vec![linalg::c(0.3, 0.2), linalg::c(-1.0, 0.5)]);
        let j = COperator::validate(&s, &s.j().clone()).unwrap();
        assert!((j.inner_product(&f, &g).unwrap() - g.dotc(&f)).norm() < 1e-15);
        let c = COperator::from_transition(&t06()).unwrap();
        assert!((c.inner_product(&f, &f).unwrap().re - 2.125).abs() < 1e-13);
    }

    #[test]
    fn subspaces_from_c_t06() {
        let c = COperator::from_transition(&t06()).unwrap();
        let pair = c.subspaces();
        assert!(pair.plus.same_span(&line(1.0, 0.6), 1e-13));
        assert!(pair.minus.same_span(&line(0.6, 1.0), 1e-13));
        let again = COperator::from_subspace_pair(&pair).unwrap();
        assert!(again.distance(&c) < 1e-12);
    }

    #[test]
    fn diagnostics_on_t06() {
        let c = COperator::from_transition(&t06()).unwrap();
        assert!(c.involution_residual() < 1e-13);
        assert!(c.spectral_symmetry_residual() < 1e-13);
        assert!(c.fundamental_symmetry_residual() < 1e-12);
        assert!(c.generator_anticommutator() < 1e-13);
        assert!((c.metric_condition() - 16.0).abs() < 1e-12);
        assert!((c.norm() - 4.0).abs() < 1e-13);
    }
}
