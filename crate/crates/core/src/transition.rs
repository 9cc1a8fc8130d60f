//! Operators of transition between the fundamental decomposition `H+ ⊕ H-`
//! and a J-orthogonal maximal dual pair `L+ ∔ L-`.
//!
//! A Hermitian strict contraction `T` anticommuting with `J` is block
//! off-diagonal in `H+ ⊕ H-` coordinates:
//!
//! ```text
//!     T = [ 0   K* ]      K : H+ -> H-   (n_minus x n_plus)
//!         [ K   0  ]
//! ```
//!
//! and `L± = (I + T) H±`. `K` is the graph contraction of `L+` over `H+`.

use rand::Rng;

use crate::error::{KreinError, Result};
use crate::linalg::{self, CMat};
use crate::space::{KreinSpace, Subspace, SubspacePair};

/// Below this gap `1 - ‖T‖` the associated C is reported as ill-conditioned.
pub const CONDITIONING_GAP: f64 = 1e-8;

/// Default gap below 1 for randomly sampled transition operators.
pub const DEFAULT_RANDOM_MARGIN: f64 = 1e-2;

#[derive(Debug, Clone)]
pub struct TransitionOperator {
    space: KreinSpace,
    t: CMat,
    k: CMat,
    norm: f64,
}

impl TransitionOperator {
    /// Validates `T = T*`, `JT = -TJ` and `‖T‖ < 1`.
    pub fn new(space: KreinSpace, t: CMat) -> Result<Self> {
        linalg::ensure_dim(&t, space.dim())?;
        let norm = linalg::op_norm(&t);
        let tol = space.tol() * (1.0 + norm);
        let herm = linalg::hermitian_residual(&t);
        if herm > tol {
            return Err(KreinError::InvalidTransition(format!(
                "T is not Hermitian (residual {herm:.3e})"
            )));
        }
        let anti = anticommutator(&space, &t);
        if anti > tol {
            return Err(KreinError::InvalidTransition(format!(
                "T does not anticommute with J (residual {anti:.3e})"
            )));
        }
        if norm >= 1.0 {
            return Err(KreinError::InvalidTransition(format!(
                "T is not a strict contraction (norm {norm})"
            )));
        }
        Ok(Self::assemble(space, t, norm))
    }

    /// Builds `T` from its graph block `K : H+ -> H-` (shape `n_minus x n_plus`).
    pub fn from_block(space: KreinSpace, k: CMat) -> Result<Self> {
        let expected = (space.n_minus(), space.n_plus());
        if k.shape() != expected {
            return Err(KreinError::ParameterShape {
                expected,
                found: k.shape(),
            });
        }
        let norm = linalg::op_norm(&k);
        if norm >= 1.0 {
            return Err(KreinError::InvalidTransition(format!(
                "graph block is not a strict contraction (norm {norm})"
            )));
        }
        let t = block_to_matrix(&space, &k);
        Ok(Self {
            space,
            t,
            k,
            norm,
        })
    }

    /// Skips validation; used where `T` comes out of an exact construction
    /// (for instance `-tanh(Q/2)`) and may sit at `‖T‖ = 1` in floating point.
    pub(crate) fn from_matrix_unchecked(space: KreinSpace, t: CMat) -> Self {
        let norm = linalg::op_norm(&t);
        Self::assemble(space, t, norm)
    }

    fn assemble(space: KreinSpace, t: CMat, norm: f64) -> Self {
        let k = space.basis_minus().adjoint() * &t * space.basis_plus();
        Self { space, t, k, norm }
    }

    pub fn zero(space: KreinSpace) -> Self {
        let k = CMat::zeros(space.n_minus(), space.n_plus());
        let n = space.dim();
        Self {
            space,
            t: CMat::zeros(n, n),
            k,
            norm: 0.0,
        }
    }

    /// Random transition operator whose singular values are uniform in
    /// `[0, 1 - margin]`.
    pub fn random<R: Rng + ?Sized>(space: KreinSpace, rng: &mut R, margin: f64) -> Self {
        let hi = (1.0 - margin).clamp(0.0, 1.0);
        let count = space.n_plus().min(space.n_minus());
        let values: Vec<f64> = (0..count).map(|_| rng.random_range(0.0..=hi)).collect();
        Self::random_with_singular_values(space, rng, &values)
    }

    /// Random singular vectors with prescribed singular values of the graph
    /// block (at most `min(n_plus, n_minus)` of them; missing ones are zero).
    pub fn random_with_singular_values<R: Rng + ?Sized>(
        space: KreinSpace,
        rng: &mut R,
        values: &[f64],
    ) -> Self {
        let (rows, cols) = (space.n_minus(), space.n_plus());
        let g = linalg::random_gaussian(rng, rows, cols);
        let svd = linalg::svd(&g);
        let r = rows.min(cols);
        let mut k = CMat::zeros(rows, cols);
        for (i, &s) in values.iter().take(r).enumerate() {
            k += svd.u.column(i) * svd.v.column(i).adjoint() * linalg::c(s, 0.0);
        }
        let norm = linalg::op_norm(&k);
        let t = block_to_matrix(&space, &k);
        Self {
            space,
            t,
            k,
            norm,
        }
    }

    pub fn space(&self) -> &KreinSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMat {
        &self.t
    }

    /// Graph block `K : H+ -> H-` in the orthonormal bases of `H±`.
    pub fn block(&self) -> &CMat {
        &self.k
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `‖JT + TJ‖`.
    pub fn anticommutator_residual(&self) -> f64 {
        anticommutator(&self.space, &self.t)
    }

    pub fn conditioning_warning(&self) -> Option<String> {
        let gap = 1.0 - self.norm;
        (gap < CONDITIONING_GAP).then(|| {
            format!("1 - ‖T‖ = {gap:.3e}: (I - T) is nearly singular and C is ill-conditioned")
        })
    }

    /// Transition operator of the dual decomposition `J L+ ∔ J L-`, which is `-T`.
    pub fn dual(&self) -> Self {
        Self {
            space: self.space.clone(),
            t: -&self.t,
            k: -&self.k,
            norm: self.norm,
        }
    }

    /// `L± = (I + T) H±`, returned with QR-orthonormalized bases.
    pub fn subspaces(&self) -> SubspacePair {
        let n = self.space.dim();
        let shift = linalg::identity(n) + &self.t;
        let plus = orthonormalize(&shift * self.space.basis_plus());
        let minus = orthonormalize(&shift * self.space.basis_minus());
        SubspacePair::new(
            Subspace::from_orthonormal(self.space.clone(), plus),
            Subspace::from_orthonormal(self.space.clone(), minus),
        )
        .expect("both subspaces share the space")
    }

    /// Recovers `T` from a maximal dual pair through the graph representation
    /// of `L+` over `H+`.
    pub fn from_subspaces(pair: &SubspacePair) -> Result<Self> {
        pair.require_maximal_dual_pair()?;
        let space = pair.space().clone();
        let b = pair.plus.orthonormal_basis();
        let x_plus = space.basis_plus().adjoint() * &b;
        let x_minus = space.basis_minus().adjoint() * &b;
        let inv = linalg::inverse(&x_plus).map_err(|_| KreinError::SingularGraph)?;
        let k = x_minus * inv;
        Self::from_block(space, k)
    }

    /// Oblique projections onto `L±` along `L∓`:
    /// `P_L+ = (I - T)^-1 (P+ - T P-)`, `P_L- = (I - T)^-1 (P- - T P+)`.
    pub fn oblique_projections(&self) -> (CMat, CMat) {
        let n = self.space.dim();
        let lhs = linalg::identity(n) - &self.t;
        let p_plus = self.space.p_plus();
        let p_minus = self.space.p_minus();
        let plus = linalg::solve(&lhs, &(p_plus - &self.t * p_minus))
            .expect("I - T is invertible for a strict contraction");
        let minus = linalg::solve(&lhs, &(p_minus - &self.t * p_plus))
            .expect("I - T is invertible for a strict contraction");
        (plus, minus)
    }
}

fn anticommutator(space: &KreinSpace, t: &CMat) -> f64 {
    linalg::op_norm(&(space.j() * t + t * space.j()))
}

fn block_to_matrix(space: &KreinSpace, k: &CMat) -> CMat {
    let up = space.basis_plus();
    let um = space.basis_minus();
    let lower = um * k * up.adjoint();
    let upper = lower.adjoint();
    lower + upper
}

fn orthonormalize(m: CMat) -> CMat {
    m.qr().q()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plane() -> KreinSpace {
        KreinSpace::from_signature(&[1, -1]).unwrap()
    }

    fn t06() -> TransitionOperator {
        TransitionOperator::new(plane(), from_real_rows(&[&[0.0, 0.6], &[0.6, 0.0]])).unwrap()
    }

    fn line(a: f64, b: f64) -> Subspace {
        Subspace::new(plane(), from_real_rows(&[&[a], &[b]])).unwrap()
    }

    #[test]
    fn zero_transition_gives_fundamental_decomposition() {
        let s = plane();
        let pair = TransitionOperator::zero(s.clone()).subspaces();
        assert!(pair.plus.same_span(&Subspace::h_plus(&s), 1e-14));
        assert!(pair.minus.same_span(&Subspace::h_minus(&s), 1e-14));
        let back = TransitionOperator::from_subspaces(&pair).unwrap();
        assert!(back.norm() < 1e-15);
    }

    #[test]
    fn tilted_pair_from_t06() {
        let pair = t06().subspaces();
        assert!(pair.plus.same_span(&line(1.0, 0.6), 1e-14));
        assert!(pair.minus.same_span(&line(0.6, 1.0), 1e-14));
        assert!(pair.is_maximal_dual_pair());
        let dual = t06().dual().subspaces();
        assert!(dual.plus.same_span(&line(1.0, -0.6), 1e-14));
    }

    #[test]
    fn round_trip_t06() {
        let pair = SubspacePair::new(line(1.0, 0.6), line(0.6, 1.0)).unwrap();
        let t = TransitionOperator::from_subspaces(&pair).unwrap();
        let expected = from_real_rows(&[&[0.0, 0.6], &[0.6, 0.0]]);
        assert!(linalg::op_norm(&(t.matrix() - expected)) < 1e-14);
    }

    #[test]
    fn non_maximal_pair_is_rejected() {
        let s = KreinSpace::from_signature(&[1, 1, -1]).unwrap();
        let plus = Subspace::new(s.clone(), from_real_rows(&[&[1.0], &[0.0], &[0.0]])).unwrap();
        let minus = Subspace::new(s, from_real_rows(&[&[0.0], &[0.0], &[1.0]])).unwrap();
        let pair = SubspacePair::new(plus, minus).unwrap();
        assert!(matches!(
            TransitionOperator::from_subspaces(&pair),
            Err(KreinError::NotMaximalDualPair(_))
        ));
    }

    #[test]
    fn oblique_projection_t06() {
        let (p, m) = t06().oblique_projections();
        let expected = from_real_rows(&[&[1.5625, -0.9375], &[0.9375, -0.5625]]);
        assert!(linalg::op_norm(&(&p - expected)) < 1e-14);
        assert!(linalg::op_norm(&(p + m - linalg::identity(2))) < 1e-14);
    }

    #[test]
    fn zero_transition_projections_are_fundamental() {
        let s = plane();
        let (p, m) = TransitionOperator::zero(s.clone()).oblique_projections();
        assert_eq!(&p, s.p_plus());
        assert_eq!(&m, s.p_minus());
    }

    #[test]
    fn validation_errors() {
        let s = plane();
        let not_herm = from_real_rows(&[&[0.0, 0.6], &[0.5, 0.0]]);
        assert!(TransitionOperator::new(s.clone(), not_herm).is_err());
        let commuting = from_real_rows(&[&[0.5, 0.0], &[0.0, 0.5]]);
        assert!(TransitionOperator::new(s.clone(), commuting).is_err());
        let too_big = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(TransitionOperator::new(s.clone(), too_big).is_err());
        let wrong_shape = CMat::zeros(2, 1);
        assert!(matches!(
            TransitionOperator::from_block(s, wrong_shape),
            Err(KreinError::ParameterShape { .. })
        ));
    }

    #[test]
    fn random_operators_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = KreinSpace::from_signature(&[1, 1, 1, -1, -1]).unwrap();
        for _ in 0..20 {
            let t = TransitionOperator::random(s.clone(), &mut rng, DEFAULT_RANDOM_MARGIN);
            assert!(t.norm() <= 0.99 + 1e-12);
            assert!(t.anticommutator_residual() < 1e-13);
            assert!(TransitionOperator::new(s.clone(), t.matrix().clone()).is_ok());
        }
    }

    #[test]
    fn conditioning_warning_near_unit_norm() {
        let s = plane();
        let t = 1.0 - 1e-10;
        let op = TransitionOperator::new(s, from_real_rows(&[&[0.0, t], &[t, 0.0]])).unwrap();
        assert!(op.conditioning_warning().is_some());
        assert!(t06().conditioning_warning().is_none());
    }
}
