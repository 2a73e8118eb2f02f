mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tanjet::geometry::{
    grassmann_delta, jacobian_rank, lambda, lambda_of_jacobian, principal_angles, NormalFrame,
};
use tanjet::linalg::Matrix;
use tanjet::AnalyticMap;

/// `(n, p, seed)` with `1 <= p < n <= 5`.
fn shape() -> impl Strategy<Value = (usize, usize, u64)> {
    (2usize..=5).prop_flat_map(|n| (Just(n), 1..n, any::<u64>()))
}

fn rows_of(f: &NormalFrame<f64>) -> Vec<Vec<f64>> {
    f.basis().to_vec()
}

/// Mixes the basis by a random invertible matrix, keeping its span.
fn rebased(f: &NormalFrame<f64>, rng: &mut ChaCha8Rng) -> NormalFrame<f64> {
    let p = f.codim();
    let mix = loop {
        let m = common::gaussian_rows(rng, p, p);
        if common::smallest_singular(&m) > 0.2 {
            break m;
        }
    };
    let vs: Vec<Vec<f64>> = mix
        .iter()
        .map(|c| {
            (0..f.ambient())
                .map(|k| c.iter().zip(f.basis()).map(|(w, b)| w * b[k]).sum())
                .collect()
        })
        .collect();
    NormalFrame::from_vectors(f.point().to_vec(), &vs).unwrap()
}

/// Applies one orthogonal matrix to every vector of the frame.
fn rotated(f: &NormalFrame<f64>, q: &DMatrix<f64>) -> NormalFrame<f64> {
    let vs: Vec<Vec<f64>> = f
        .basis()
        .iter()
        .map(|v| (q * nalgebra::DVector::from_column_slice(v)).iter().copied().collect())
        .collect();
    NormalFrame::from_vectors(f.point().to_vec(), &vs).unwrap()
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let rows = common::gaussian_rows(rng, n, n);
    DMatrix::from_fn(n, n, |i, j| rows[i][j]).qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn delta_is_symmetric_and_bounded((n, p, seed) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = common::random_frame(&mut rng, n, p);
        let b = common::random_frame(&mut rng, n, p);
        let ab = grassmann_delta(&a, &b).unwrap();
        let ba = grassmann_delta(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&ab));
        prop_assert!(grassmann_delta(&a, &a).unwrap() <= 1e-7);
    }

    #[test]
    fn delta_depends_only_on_the_spans((n, p, seed) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = common::random_frame(&mut rng, n, p);
        let b = common::random_frame(&mut rng, n, p);
        let d = grassmann_delta(&a, &b).unwrap();
        let a2 = rebased(&a, &mut rng);
        let b2 = rebased(&b, &mut rng);
        prop_assert!((grassmann_delta(&a2, &b2).unwrap() - d).abs() <= 1e-9);
        prop_assert!(grassmann_delta(&a, &a2).unwrap() <= 1e-7);
        let q = random_orthogonal(&mut rng, n);
        let moved = grassmann_delta(&rotated(&a, &q), &rotated(&b, &q)).unwrap();
        prop_assert!((moved - d).abs() <= 1e-9);
    }

    #[test]
    fn delta_sits_between_chordal_bounds((n, p, seed) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = common::random_frame(&mut rng, n, p);
        let b = common::random_frame(&mut rng, n, p);
        let d = grassmann_delta(&a, &b).unwrap();
        let angles = principal_angles(&a, &b).unwrap();
        let top = angles.iter().copied().fold(0.0f64, f64::max);
        let chord = 2.0 * (top / 2.0).sin();
        prop_assert!(d <= chord + 1e-12);
        prop_assert!(d >= chord / (p as f64).sqrt() - 1e-12);
    }

    #[test]
    fn principal_angles_match_nalgebra((n, p, seed) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = common::random_frame(&mut rng, n, p);
        let b = common::random_frame(&mut rng, n, p);
        let qa = DMatrix::from_fn(n, p, |i, j| rows_of(&a)[j][i]);
        let qb = DMatrix::from_fn(n, p, |i, j| rows_of(&b)[j][i]);
        let mut cos: Vec<f64> = (qa.transpose() * qb).singular_values().iter().copied().collect();
        cos.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let angles = principal_angles(&a, &b).unwrap();
        for (t, c) in angles.iter().zip(&cos) {
            prop_assert!((t.cos() - c.min(1.0)).abs() <= 1e-10, "{} vs {}", t.cos(), c);
        }
    }

    #[test]
    fn lambda_is_the_smallest_singular_value(n in 2usize..=5, p in 1usize..=3, seed in any::<u64>()) {
        prop_assume!(p <= n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = common::gaussian_rows(&mut rng, p, n);
        let got = lambda_of_jacobian(&Matrix::from_rows(&rows));
        let want = common::smallest_singular(&rows);
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want), "{} vs {}", got, want);
    }

    #[test]
    fn rank_deficient_jacobians_have_zero_lambda(n in 2usize..=5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = common::gaussian_rows(&mut rng, 2, n);
        rows[1] = rows[0].iter().map(|v| -3.0 * v).collect();
        let m = Matrix::from_rows(&rows);
        prop_assert_eq!(jacobian_rank(&m), 1);
        prop_assert_eq!(lambda_of_jacobian(&m), 0.0);
    }

    #[test]
    fn lambda_moves_at_most_by_the_perturbation(
        x in prop::array::uniform3(-0.5f64..0.5),
        w in prop::array::uniform3(-1.0f64..1.0),
        delta in prop_oneof![Just(1e-3), Just(1e-4)],
    ) {
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(norm > 0.1);
        let f = "x1^2 + x2^2 - sin(x3)^2";
        let h = format!(
            "{:?}*x1 + {:?}*x2 + {:?}*x3",
            w[0] / norm, w[1] / norm, w[2] / norm
        );
        let g = AnalyticMap::parse(&format!("{f} + {delta:?}*({h})"), 3).unwrap();
        let f = AnalyticMap::parse(f, 3).unwrap();
        let shift = (lambda(&f, &x).unwrap() - lambda(&g, &x).unwrap()).abs();
        prop_assert!(shift <= delta * (1.0 + 1e-6), "{} > {}", shift, delta);
    }
}

#[test]
fn coordinate_planes_have_known_angles() {
    let e = |i: usize| {
        let mut v = vec![0.0f64; 4];
        v[i] = 1.0;
        v
    };
    let a = NormalFrame::from_vectors(vec![0.0; 4], &[e(0), e(1)]).unwrap();
    let b = NormalFrame::from_vectors(vec![0.0; 4], &[e(0), e(2)]).unwrap();
    let angles = principal_angles(&a, &b).unwrap();
    assert!(angles[0].abs() < 1e-15);
    assert!((angles[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    // One right angle out of two: sqrt((4/2) * sin²(π/4)) = 1.
    assert!((grassmann_delta(&a, &b).unwrap() - 1.0).abs() < 1e-15);
}
