//! Operator angles between subspaces, and the angles between the
//! fundamental subspaces `H±` and the subspaces `L±` of a dual pair.
//!
//! Angles between `H±` and `L± = (I + T) H±` are `arctan` of the singular
//! values of `T` restricted to `H±`, so they never exceed `π/4`; the margin
//! `π/4 − max angle` measures how far the pair is from producing an
//! unbounded `C`.

use std::f64::consts::FRAC_PI_4;

use serde::Serialize;

use crate::linalg::{self, CMat};
use crate::space::Subspace;
use crate::transition::TransitionOperator;

/// Singular values this far above 1 are rounding noise.
const CLAMP_SLACK: f64 = 1e-12;

fn clamp_unit(x: f64) -> f64 {
    if x > 1.0 && x <= 1.0 + CLAMP_SLACK {
        1.0
    } else {
        x.clamp(0.0, 1.0)
    }
}

/// Eigenvalues of the operator angle `Θ(M, N)` measured relative to `M`,
/// ascending, one per dimension of `M`.
///
/// Cosines come from the singular values of `Q_M* Q_N` and sines from those
/// of `(I − P_N) Q_M`; each angle uses whichever is better conditioned.
pub fn operator_angle(m: &Subspace, n: &Subspace) -> Vec<f64> {
    let qm = m.orthonormal_basis();
    let qn = n.orthonormal_basis();
    let km = qm.ncols();
    if km == 0 {
        return Vec::new();
    }
    let mut cosines = linalg::singular_values(&(qm.adjoint() * &qn));
    cosines.resize(km, 0.0);
    let residual = &qm - &qn * (qn.adjoint() * &qm);
    let mut sines = linalg::singular_values(&residual);
    sines.resize(km, 1.0);
    sines.reverse();

    let mut angles: Vec<f64> = cosines
        .iter()
        .zip(&sines)
        .map(|(&cos, &sin)| {
            if cos * cos >= 0.5 {
                clamp_unit(sin).asin()
            } else {
                clamp_unit(cos).acos()
            }
        })
        .collect();
    angles.sort_by(f64::total_cmp);
    angles
}

/// The operator `f(Θ(M, N))` as a matrix on the whole space: it acts on `M`
/// and vanishes on `M^⊥`. Built from the SVD of `(I − P_N) Q_M`, whose
/// right singular vectors diagonalize `Θ` and whose singular values are
/// `sin Θ`.
pub fn angle_operator_map(m: &Subspace, n: &Subspace, f: impl Fn(f64) -> f64) -> CMat {
    let qm = m.orthonormal_basis();
    let qn = n.orthonormal_basis();
    let dim = qm.nrows();
    if qm.ncols() == 0 {
        return CMat::zeros(dim, dim);
    }
    let residual = &qm - &qn * (qn.adjoint() * &qm);
    let linalg::Svd { s, v, .. } = linalg::svd(&residual);
    let values: Vec<f64> = s
        .iter()
        .map(|&s| f(clamp_unit(s).asin()))
        .collect();
    let inner = linalg::from_eigen(&values, &v);
    &qm * inner * qm.adjoint()
}

/// `Θ(M, N)` as a matrix.
pub fn angle_operator(m: &Subspace, n: &Subspace) -> CMat {
    angle_operator_map(m, n, |x| x)
}

#[derive(Debug, Clone, Serialize)]
pub struct AngleReport {
    /// Eigenvalues of `Θ(H+, L+)`, ascending.
    pub theta_plus: Vec<f64>,
    /// Eigenvalues of `Θ(H-, L-)`, ascending.
    pub theta_minus: Vec<f64>,
    /// Largest angle.
    pub norm_theta: f64,
    /// `π/4 − norm_theta`.
    pub bounded_margin: f64,
    /// Largest disagreement with the generic principal-angle computation on
    /// the explicit subspaces.
    pub cross_check: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Angles between `H±` and `L± = (I + T)H±`: `arctan` of the singular values
/// of `|T|` on `H±`.
pub fn krein_angles(t: &TransitionOperator) -> AngleReport {
    let space = t.space();
    let sv = linalg::singular_values(t.block());
    let angles = |count: usize| {
        let mut out: Vec<f64> = sv.iter().map(|s| s.atan()).collect();
        out.resize(count, 0.0);
        out.sort_by(f64::total_cmp);
        out
    };
    let theta_plus = angles(space.n_plus());
    let theta_minus = angles(space.n_minus());
    let norm_theta = sv.first().map_or(0.0, |s| s.atan());

    let pair = t.subspaces();
    let generic_plus = operator_angle(&Subspace::h_plus(space), &pair.plus);
    let generic_minus = operator_angle(&Subspace::h_minus(space), &pair.minus);
    let cross_check = theta_plus
        .iter()
        .zip(&generic_plus)
        .chain(theta_minus.iter().zip(&generic_minus))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    AngleReport {
        theta_plus,
        theta_minus,
        norm_theta,
        bounded_margin: FRAC_PI_4 - norm_theta,
        cross_check,
        warning: t.conditioning_warning(),
    }
}

/// `π/4 − max Θ(H±, L±)`; positive for every finite-dimensional transition
/// operator, and close to zero when `C` is badly conditioned.
pub fn boundedness_margin(t: &TransitionOperator) -> f64 {
    let norm = linalg::singular_values(t.block()).first().copied().unwrap_or(0.0);
    FRAC_PI_4 - norm.atan()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;
    use crate::space::KreinSpace;
    use std::f64::consts::FRAC_PI_2;

    fn plane() -> KreinSpace {
        KreinSpace::from_signature(&[1, -1]).unwrap()
    }

    fn line(a: f64, b: f64) -> Subspace {
        Subspace::new(plane(), from_real_rows(&[&[a], &[b]])).unwrap()
    }

    fn t_of(t: f64) -> TransitionOperator {
        TransitionOperator::new(plane(), from_real_rows(&[&[0.0, t], &[t, 0.0]])).unwrap()
    }

    #[test]
    fn generic_angle_examples() {
        let m = line(1.0, 0.0);
        assert_eq!(operator_angle(&m, &m), vec![0.0]);
        let a = operator_angle(&m, &line(0.0, 1.0));
        assert!((a[0] - FRAC_PI_2).abs() < 1e-15);
        let a = operator_angle(&m, &line(1.0, 1.0));
        assert!((a[0] - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn larger_subspace_relative_to_smaller() {
        let s = KreinSpace::from_signature(&[1, 1, -1]).unwrap();
        let plane12 = Subspace::new(
            s.clone(),
            from_real_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]),
        )
        .unwrap();
        let axis1 = Subspace::new(s, from_real_rows(&[&[1.0], &[0.0], &[0.0]])).unwrap();
        let a = operator_angle(&plane12, &axis1);
        assert_eq!(a.len(), 2);
        assert!(a[0].abs() < 1e-15 && (a[1] - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn krein_angle_examples() {
        let zero = krein_angles(&TransitionOperator::zero(plane()));
        assert_eq!(zero.theta_plus, vec![0.0]);
        assert_eq!(zero.bounded_margin, FRAC_PI_4);

        let r = krein_angles(&t_of(0.6));
        assert!((r.theta_plus[0] - 0.6f64.atan()).abs() < 1e-15);
        assert!((r.theta_plus[0] - 0.5404195002705842).abs() < 1e-15);
        assert!(r.cross_check < 1e-12);
        assert!((r.bounded_margin - 0.24497866312686414).abs() < 1e-15);
    }

    #[test]
    fn margin_near_unit_norm() {
        // π/4 − arctan(1 − δ) = arctan(δ / (2 − δ))
        let delta: f64 = 1e-6;
        let expected = (delta / (2.0 - delta)).atan();
        let margin = boundedness_margin(&t_of(1.0 - delta));
        assert!((margin - expected).abs() < 1e-15);
        assert!(margin > 0.0 && margin < 5.1e-7);
        let close = krein_angles(&t_of(1.0 - 1e-12));
        assert!(close.norm_theta < FRAC_PI_4 && FRAC_PI_4 - close.norm_theta < 1e-12);
    }

    #[test]
    fn angle_operator_on_a_line() {
        let m = line(1.0, 0.0);
        let op = angle_operator(&m, &line(1.0, 0.6));
        assert!((op[(0, 0)].re - 0.6f64.atan()).abs() < 1e-15);
        assert!(op[(1, 1)].norm() < 1e-15);
    }
}
