//! Randomized invariants across all modules.

use std::f64::consts::FRAC_PI_4;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use krein::angles::{angle_operator_map, krein_angles, operator_angle};
use krein::c_operator::COperator;
use krein::csymmetry::{
    construct_from_spectrum, decompose, naboko_estimate, spectral_c_for_j_nonnegative,
    EigenSystem, NabokoOptions,
};
use krein::extension::{build_partial_c, enumerate_extensions, reconstruct, schauder_expand, sign_separation};
use krein::linalg::{self, CMat, CVec};
use krein::models::{self, GridSpec, Orientation};
use krein::space::{Definiteness, KreinSpace, Subspace};
use krein::transition::TransitionOperator;

fn norm(m: &CMat) -> f64 {
    linalg::op_norm(m)
}

/// A non-diagonal fundamental symmetry `U diag(±1) U*` with both signs present.
fn random_space(rng: &mut ChaCha8Rng, dim: usize) -> KreinSpace {
    let n_plus = rng.random_range(1..dim);
    let signs: Vec<f64> = (0..dim).map(|i| if i < n_plus { 1.0 } else { -1.0 }).collect();
    let u = linalg::random_unitary(rng, dim);
    KreinSpace::new(linalg::from_eigen(&signs, &u)).unwrap()
}

fn signature_space(rng: &mut ChaCha8Rng, dim: usize) -> KreinSpace {
    let n_plus = rng.random_range(1..dim);
    let signs: Vec<i32> = (0..dim).map(|i| if i < n_plus { 1 } else { -1 }).collect();
    KreinSpace::from_signature(&signs).unwrap()
}

fn setup(seed: u64, dim: usize) -> (ChaCha8Rng, KreinSpace, TransitionOperator) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = random_space(&mut rng, dim);
    let t = TransitionOperator::random(space.clone(), &mut rng, 1e-2);
    (rng, space, t)
}

/// Well separated real values with both signs.
fn spread_spectrum(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|k| {
            let magnitude = 0.5 + k as f64 + rng.random_range(0.0..0.4);
            if rng.random_bool(0.5) { magnitude } else { -magnitude }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fundamental_projections(seed in any::<u64>(), dim in 2usize..=16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space(&mut rng, dim);
        let (p, m) = (space.p_plus(), space.p_minus());
        prop_assert!(norm(&(p * p - p)) < 1e-10);
        prop_assert!(norm(&(m * m - m)) < 1e-10);
        prop_assert!(norm(&(space.j() * p - p)) < 1e-10);
        prop_assert!(norm(&(space.j() * m + m)) < 1e-10);
    }

    #[test]
    fn indefinite_product_matches_sum(seed in any::<u64>(), dim in 2usize..=16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space(&mut rng, dim);
        let f = linalg::random_vector(&mut rng, dim);
        let g = linalg::random_vector(&mut rng, dim);
        let mut brute = num_complex::Complex64::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                brute += g[i].conj() * space.j()[(i, j)] * f[j];
            }
        }
        prop_assert!((space.indefinite_product(&f, &g).unwrap() - brute).norm() < 1e-12 * (1.0 + brute.norm()));
    }

    #[test]
    fn transition_subspaces_are_maximal_dual(seed in any::<u64>(), dim in 2usize..=16) {
        let (_, space, t) = setup(seed, dim);
        let pair = t.subspaces();
        let plus = space.classify(&pair.plus);
        let minus = space.classify(&pair.minus);
        prop_assert_eq!(plus.kind, Definiteness::Positive);
        prop_assert!(plus.maximal);
        prop_assert_eq!(minus.kind, Definiteness::Negative);
        prop_assert!(minus.maximal);
        let cross = pair.plus.basis().adjoint() * space.j() * pair.minus.basis();
        prop_assert!(norm(&cross) < 1e-10);
        prop_assert!(t.anticommutator_residual() <= space.tol() * (1.0 + t.norm()));
    }

    #[test]
    fn double_complement_restores_span(seed in any::<u64>(), dim in 2usize..=16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space(&mut rng, dim);
        let k = rng.random_range(1..dim);
        let s = Subspace::new(space.clone(), linalg::random_gaussian(&mut rng, dim, k)).unwrap();
        let back = space.j_orthogonal_complement(&space.j_orthogonal_complement(&s));
        let angles = operator_angle(&s, &back);
        prop_assert_eq!(back.dim(), k);
        prop_assert!(angles.iter().all(|&a| a < 1e-8));
    }

    #[test]
    fn oblique_projections_and_round_trip(seed in any::<u64>(), dim in 2usize..=12) {
        let (_, _, t) = setup(seed, dim);
        let (pp, pm) = t.oblique_projections();
        let scale = norm(&pp).max(1.0);
        prop_assert!(norm(&(&pp * &pp - &pp)) < 1e-9 * scale);
        prop_assert!(norm(&(&pm * &pm - &pm)) < 1e-9 * scale);
        prop_assert!(norm(&(&pp * &pm)) < 1e-9 * scale);
        let c = COperator::from_transition(&t).unwrap();
        prop_assert!(norm(&(&pp - &pm - c.matrix())) < 1e-9 * scale);
        let back = TransitionOperator::from_subspaces(&t.subspaces()).unwrap();
        prop_assert!(norm(&(back.matrix() - t.matrix())) < 1e-9);
    }

    #[test]
    fn c_routes_agree(seed in any::<u64>(), dim in 2usize..=12) {
        let (_, space, t) = setup(seed, dim);
        let from_t = COperator::from_transition(&t).unwrap();
        let from_pair = COperator::from_subspace_pair(&t.subspaces()).unwrap();
        // Q = log((I + T)^-1 (I − T)) computed independently of the metric
        let id = linalg::identity(dim);
        let m = linalg::hermitian_part(&linalg::solve(&(&id + t.matrix()), &(&id - t.matrix())).unwrap());
        let q = linalg::hermitian_function(&m, f64::ln);
        let from_q = COperator::from_generator(&space, &q).unwrap();
        let scale = from_t.norm();
        prop_assert!(norm(&(from_t.matrix() - from_pair.matrix())) < 1e-9 * scale);
        prop_assert!(norm(&(from_t.matrix() - from_q.matrix())) < 1e-9 * scale);
    }

    #[test]
    fn c_is_a_fundamental_symmetry_of_its_metric(seed in any::<u64>(), dim in 2usize..=12) {
        let (mut rng, space, t) = setup(seed, dim);
        let c = COperator::from_transition(&t).unwrap();
        let scale = c.norm();
        prop_assert!(c.involution_residual() < 1e-9 * scale);
        prop_assert!(linalg::hermitian_residual(c.metric()) < 1e-9 * scale);
        prop_assert!(c.metric_min_eigenvalue() > 0.0);
        let values = linalg::general_eigenvalues(c.matrix()).unwrap();
        let plus = values.iter().filter(|v| (*v - 1.0).norm() < 1e-6).count();
        let minus = values.iter().filter(|v| (*v + 1.0).norm() < 1e-6).count();
        prop_assert_eq!((plus, minus), (space.n_plus(), space.n_minus()));
        let f = linalg::random_vector(&mut rng, dim);
        let g = linalg::random_vector(&mut rng, dim);
        let direct = c.inner_product(&f, &g).unwrap();
        let swapped = c.inner_product(&(c.matrix() * &f), &(c.matrix() * &g)).unwrap();
        prop_assert!((direct - swapped).norm() < 1e-9 * scale * scale * (1.0 + direct.norm()));
        prop_assert!((c.norm() - norm(c.generator()).exp()).abs() < 1e-9 * scale);
        prop_assert!(c.spectral_symmetry_residual() < 1e-9 * scale);
    }

    #[test]
    fn angles_follow_the_modulus(seed in any::<u64>(), dim in 2usize..=12) {
        let (_, space, t) = setup(seed, dim);
        let report = krein_angles(&t);
        // arcsin(λ / √(1 + λ²)) on the eigenvalues of |T| restricted to H±
        let modulus = linalg::hermitian_function(t.matrix(), f64::abs);
        let oracle = |basis: &CMat| -> Vec<f64> {
            let mut v: Vec<f64> = linalg::hermitian_eigenvalues(&(basis.adjoint() * &modulus * basis))
                .iter()
                .map(|&l| { let l = l.max(0.0); (l / (1.0 + l * l).sqrt()).asin() })
                .collect();
            v.sort_by(f64::total_cmp);
            v
        };
        for (got, want) in report.theta_plus.iter().zip(oracle(space.basis_plus())) {
            prop_assert!((got.tan() - want.tan()).abs() < 1e-10);
        }
        for (got, want) in report.theta_minus.iter().zip(oracle(space.basis_minus())) {
            prop_assert!((got.tan() - want.tan()).abs() < 1e-10);
        }
        prop_assert!(report.cross_check < 1e-9);
        prop_assert!(report.norm_theta <= FRAC_PI_4 + 1e-10);

        let pair = t.subspaces();
        let c = COperator::from_transition(&t).unwrap();
        let lhs = linalg::hermitian_function(c.generator(), |x| (x / 2.0).tanh().abs());
        let rhs = angle_operator_map(&Subspace::h_plus(&space), &pair.plus, f64::tan)
            + angle_operator_map(&Subspace::h_minus(&space), &pair.minus, f64::tan);
        let gap = norm(&(&lhs - &rhs));
        prop_assert!(gap < 1e-10, "gap {:.2e}", gap);
    }

    #[test]
    fn planted_csymmetry_is_recovered(seed in any::<u64>(), dim in 2usize..=12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space(&mut rng, dim);
        let spectrum = spread_spectrum(&mut rng, dim);
        let conditioning = rng.random_range(1.0..5.0);
        let (h, c_true) = models::random_csymmetric(&space, &spectrum, conditioning, &mut rng).unwrap();
        let report = construct_from_spectrum(&space, &h).unwrap();
        prop_assert!(report.has_csymmetry());
        let c = report.c.as_ref().unwrap();
        let scale = norm(&h).max(1.0) * c.norm();
        prop_assert!(norm(&(c.matrix() - &c_true)) < 1e-8 * c.norm());
        prop_assert!(c.involution_residual() < 1e-8 * c.norm());
        prop_assert!(c.metric_min_eigenvalue() > 0.0);
        prop_assert!(report.commutator.unwrap() < 1e-8 * scale);
        prop_assert!(report.similarity_residual.unwrap() < 1e-8 * scale);
        prop_assert!(report.metric_condition.unwrap().is_finite());
        let d = decompose(&h, c).unwrap();
        prop_assert!(d.off_block < 1e-8 * scale);

        // any rescaling of the eigenvectors gives the same C
        let sys = report.eigensystem.as_ref().unwrap();
        let mut scaled = sys.vectors().clone();
        for mut col in scaled.column_iter_mut() {
            let z = num_complex::Complex64::from_polar(rng.random_range(0.1..10.0), rng.random_range(0.0..6.3));
            col.scale_mut(z.norm());
            col *= z / z.norm();
        }
        let rebuilt = EigenSystem::from_vectors(&space, &scaled, None).unwrap().c_matrix().unwrap();
        prop_assert!(norm(&(rebuilt - c.matrix())) < 1e-9 * c.norm());
    }

    #[test]
    fn spectral_route_matches_eigenvector_route(seed in any::<u64>(), dim in 2usize..=10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = signature_space(&mut rng, dim);
        let u = linalg::random_unitary(&mut rng, dim);
        let values: Vec<f64> = (0..dim).map(|k| 1.0 + k as f64 + rng.random_range(0.0..0.5)).collect();
        let h = space.j() * linalg::from_eigen(&values, &u);
        let spectral = spectral_c_for_j_nonnegative(&space, &h).unwrap();
        let eigen = construct_from_spectrum(&space, &h).unwrap();
        let (a, b) = (spectral.c.unwrap(), eigen.c.unwrap());
        prop_assert!(norm(&(a.matrix() - b.matrix())) < 1e-9 * a.norm());
    }

    #[test]
    fn spanning_eigensystems_are_c_orthonormal(seed in any::<u64>(), dim in 2usize..=10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space(&mut rng, dim);
        let spectrum = spread_spectrum(&mut rng, dim);
        let (h, _) = models::random_csymmetric(&space, &spectrum, 3.0, &mut rng).unwrap();
        let sys = EigenSystem::compute(&space, &h).unwrap();
        let family = enumerate_extensions(&build_partial_c(&sign_separation(&sys).unwrap()).unwrap()).unwrap();
        prop_assert!(family.unique());
        let c = family.canonical();
        prop_assert!(norm(&(&h * c.matrix() - c.matrix() * &h)) < 1e-9 * norm(&h) * c.norm());
        let f = sys.vectors();
        let gram = f.adjoint() * c.metric() * f;
        prop_assert!(norm(&(gram - linalg::identity(dim))) < 1e-9);

        let g = sys.biorthogonal();
        prop_assert!(norm(&(g.adjoint() * f - linalg::identity(dim))) < 1e-9);
        let x = linalg::random_vector(&mut rng, dim);
        let coeffs = schauder_expand(&sys, &x).unwrap();
        prop_assert!((reconstruct(&sys, &coeffs) - &x).norm() < 1e-9 * x.norm());
        // Cf = Σ [f, f_n] f_n
        let cx: CVec = (0..dim).fold(CVec::zeros(dim), |acc, n| {
            let fn_ = f.column(n).into_owned();
            acc + &fn_ * space.indefinite_product(&x, &fn_).unwrap()
        });
        prop_assert!((c.matrix() * &x - cx).norm() < 1e-9 * c.norm() * x.norm());
    }

    #[test]
    fn extension_members_extend_the_partial_c(seed in any::<u64>(), dim in 3usize..=10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space(&mut rng, dim);
        let spectrum = spread_spectrum(&mut rng, dim);
        let (h, _) = models::random_csymmetric(&space, &spectrum, 2.0, &mut rng).unwrap();
        let full = EigenSystem::compute(&space, &h).unwrap();
        let keep: Vec<usize> = (0..dim).filter(|_| rng.random_bool(0.5)).collect();
        let subset = CMat::from_fn(dim, keep.len(), |i, j| full.vectors()[(i, keep[j])]);
        let sys = EigenSystem::from_vectors(&space, &subset, None).unwrap();
        let pc = build_partial_c(&sign_separation(&sys).unwrap()).unwrap();
        prop_assert!(pc.g0_min_eigenvalue() > 0.0);
        prop_assert!(pc.involution_residual() < 1e-10);
        let basis = pc.domain_basis();
        let v = basis * linalg::random_vector(&mut rng, basis.ncols());
        let back = pc.apply(&pc.apply(&v).unwrap()).unwrap();
        prop_assert!((back - &v).norm() <= 1e-9 * v.norm());
        let family = enumerate_extensions(&pc).unwrap();
        let k1 = family.random_parameter(&mut rng, 0.05);
        let k2 = family.random_parameter(&mut rng, 0.05);
        let mut members = Vec::new();
        for k in [&k1, &k2] {
            let c = family.member(k).unwrap();
            let scale = c.norm();
            prop_assert!(c.involution_residual() < 1e-9 * scale);
            prop_assert!(c.metric_min_eigenvalue() > 0.0);
            prop_assert!(pc.agreement_residual(c.matrix()) < 1e-9 * scale);
            // (JC) J (JC) J = I
            let g = c.metric();
            let j = space.j();
            prop_assert!(norm(&(g * j * g * j - linalg::identity(dim))) < 1e-9 * scale * scale);
            members.push(c);
        }
        if norm(&(&k1 - &k2)) > 1e-6 {
            prop_assert!(norm(&(members[0].matrix() - members[1].matrix())) > 1e-8);
        }
    }

    #[test]
    fn model_hypotheses(half in 2usize..=40, length in 0.5f64..20.0) {
        let spec = GridSpec::new(2 * half, length).unwrap();
        let (h, space) = models::sgn_laplacian(&spec, Orientation::JNonnegative).unwrap();
        prop_assert!(space.is_j_selfadjoint(&h).unwrap());
        let jh = space.j() * &h;
        prop_assert!(linalg::hermitian_eigenvalues(&jh)[0] >= -1e-10 * norm(&h));
        prop_assert!(models::smallest_magnitudes(&h, 1).unwrap()[0] > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn hermitian_resolvent_integral_is_pi(seed in any::<u64>(), dim in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = linalg::random_gaussian(&mut rng, dim, dim);
        let h = linalg::hermitian_part(&a);
        let f = linalg::random_vector(&mut rng, dim);
        let est = naboko_estimate(&h, &f, &NabokoOptions::default()).unwrap();
        for p in &est.points {
            prop_assert!((p.value - std::f64::consts::PI).abs() < 1e-5);
        }
    }
}
