use std::f64::consts::{FRAC_1_SQRT_2, PI};

use proptest::prelude::*;
use tanjet::geometry::{horn_contains, lambda};
use tanjet::linalg::{distance, dot, norm};
use tanjet::metrics::{delta_one_sided, hausdorff};
use tanjet::sampler::{
    continue_family, project_to_slice, read_jsonl, sample_slice, validate_is, write_jsonl,
    IsVerdict, RadiusSchedule, SamplerConfig, SphereSlice, DEDUPE_FACTOR, MAX_ITER,
};
use tanjet::AnalyticMap;

const CONE: &str = "x1^2 + x2^2 - x3^2";
const SINE: &str = "x1^2 + x2^2 - sin(x3)^2";

fn map(src: &str, n: usize) -> AnalyticMap {
    AnalyticMap::parse(src, n).unwrap()
}

fn cloud(slice: &SphereSlice) -> Vec<Vec<f64>> {
    slice.points().map(<[f64]>::to_vec).collect()
}

fn scaled(points: &[Vec<f64>], s: f64) -> Vec<Vec<f64>> {
    points.iter().map(|p| p.iter().map(|v| v * s).collect()).collect()
}

/// Residual, sphere, frame, separation and `Λ` invariants of a slice.
fn assert_slice_invariants(f: &AnalyticMap, slice: &SphereSlice) {
    let r = slice.radius;
    for s in &slice.samples {
        let x = s.point();
        let jac = f.jacobian(x).unwrap();
        let fx = f.evaluate(x).unwrap();
        assert!(norm(&fx) <= 1e-10 * jac.spectral_norm().max(1.0), "residual {fx:?} at {x:?}");
        assert!((norm(x) - r).abs() <= 1e-12 * r, "off sphere: {} vs {r}", norm(x));
        assert!(s.lambda > 0.0);
        assert!((s.lambda - lambda(f, x).unwrap()).abs() <= 1e-12 * s.lambda.max(1.0));

        let basis = s.frame.basis();
        for (i, u) in basis.iter().enumerate() {
            assert!((dot(u, u) - 1.0).abs() <= 1e-12);
            for v in &basis[..i] {
                assert!(dot(u, v).abs() <= 1e-10);
            }
        }
        for row in jac.to_rows() {
            let mut rest = row.clone();
            for u in basis {
                let c = dot(&row, u);
                for (a, b) in rest.iter_mut().zip(u) {
                    *a -= c * b;
                }
            }
            assert!(norm(&rest) <= 1e-8 * norm(&row).max(f64::MIN_POSITIVE));
        }
    }
    let pts = cloud(slice);
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[..i] {
            assert!(distance(p, q) >= DEDUPE_FACTOR * r, "duplicate pair at {p:?}");
        }
    }
}

#[test]
fn slices_satisfy_their_invariants() {
    let cfg = SamplerConfig::default();
    for (src, n) in [
        (CONE, 3),
        (SINE, 3),
        ("x3^3 - x1^2 - x2^2", 3),
        ("x1^2 + x2^2 - x3^2 - x4^2; x4 - x1*x2", 4),
        ("x1^2 - x2^3", 2),
    ] {
        let f = map(src, n);
        for r in [0.1, 0.0125] {
            let slice = sample_slice(&f, r, &cfg);
            assert!(!slice.is_empty(), "{src} at {r}");
            assert_slice_invariants(&f, &slice);
        }
    }
}

#[test]
fn sampling_is_deterministic() {
    let f = map(SINE, 3);
    let cfg = SamplerConfig {
        seed: 17,
        ..SamplerConfig::default()
    };
    let a = sample_slice(&f, 0.05, &cfg);
    let b = sample_slice(&f, 0.05, &cfg);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());

    let schedule = RadiusSchedule::geometric(0.1, 0.5, 4).unwrap();
    let fa = continue_family(&f, &schedule, &cfg);
    let fb = continue_family(&f, &schedule, &cfg);
    let (mut ja, mut jb) = (Vec::new(), Vec::new());
    write_jsonl(&fa, &mut ja).unwrap();
    write_jsonl(&fb, &mut jb).unwrap();
    assert_eq!(ja, jb);
    assert_eq!(read_jsonl(ja.as_slice()).unwrap().len(), fa.points().count());
}

#[test]
fn cone_circles_are_covered() {
    let f = map(CONE, 3);
    let r = 0.1;
    let slice = sample_slice(&f, r, &SamplerConfig::default());
    let rho = r * FRAC_1_SQRT_2;
    let circles: Vec<Vec<f64>> = (0..10_000)
        .flat_map(|i| {
            let phi = 2.0 * PI * i as f64 / 10_000.0;
            [1.0, -1.0].map(|z| vec![rho * phi.cos(), rho * phi.sin(), z * rho])
        })
        .collect();
    let gap = delta_one_sided(&cloud(&slice), &circles).unwrap();
    let bound = 2.0 * PI * rho / 100.0;
    assert!(gap <= bound, "coverage gap {gap} above {bound}");
}

#[test]
fn homogeneous_slices_scale() {
    let cfg = SamplerConfig::default();
    for (src, n) in [(CONE, 3), ("x1^2 + 2*x2^2 - x3^2 - x4^2", 4), ("x1*x2 - x3^2", 3)] {
        let f = map(src, n);
        let big = sample_slice(&f, 0.1, &cfg);
        let small = sample_slice(&f, 0.05, &cfg);
        let d = hausdorff(&scaled(&cloud(&big), 0.5), &cloud(&small)).unwrap();
        assert!(d <= DEDUPE_FACTOR * 0.05, "{src}: {d}");
    }
}

#[test]
fn reseeded_slices_agree() {
    let f = map(CONE, 3);
    let r = 0.1;
    let a = sample_slice(&f, r, &SamplerConfig::default());
    let b = sample_slice(
        &f,
        r,
        &SamplerConfig {
            seed: 99,
            ..SamplerConfig::default()
        },
    );
    assert_ne!(cloud(&a), cloud(&b));
    // As raw clouds the two differ by at most the spacing of either.
    let raw = hausdorff(&cloud(&a), &cloud(&b)).unwrap();
    assert!(raw <= 2.0 * 2.0 * PI * r * FRAC_1_SQRT_2 / 100.0, "{raw}");
    // Measured against the other slice itself, they coincide.
    for (from, to) in [(&a, &b), (&b, &a)] {
        for x in from.points() {
            let cloud_d = to.nearest(x).unwrap().0;
            let proj = project_to_slice(&f, x, to.radius, MAX_ITER).unwrap();
            let d = cloud_d.min(distance(&proj.point, x));
            assert!(d <= 2.0 * DEDUPE_FACTOR * r, "{d}");
        }
    }
}

#[test]
fn schedule_and_family_shape() {
    assert!(RadiusSchedule::new(vec![0.1, 0.1, 0.05]).is_err());
    assert!(RadiusSchedule::new(vec![0.05, 0.1]).is_err());
    assert!(RadiusSchedule::geometric(0.1, 1.5, 3).is_err());
    let schedule = RadiusSchedule::geometric(0.1, 0.5, 6).unwrap();
    let f = map(CONE, 3);
    let family = continue_family(&f, &schedule, &SamplerConfig::default());
    let radii = family.radii();
    assert_eq!(radii, schedule.radii());
    assert!(radii.windows(2).all(|w| w[0] > w[1]));
    for s in &family.slices {
        assert!(!s.is_empty());
        assert_slice_invariants(&f, s);
    }
    let report = validate_is(&f, &schedule, &SamplerConfig::default());
    assert_eq!(report.verdict, IsVerdict::IsolatedSingularity { dimension: 2 });
    assert_eq!(report.validity_radius, Some(0.1));
}

#[test]
fn non_isolated_singularities_are_flagged() {
    let schedule = RadiusSchedule::geometric(0.1, 0.5, 4).unwrap();
    let cfg = SamplerConfig::default();
    // The order-two truncation of the cusp vanishes on the whole x3 axis
    // with zero gradient there.
    let t2 = map("-x1^2 - x2^2", 3);
    assert!(matches!(
        validate_is(&t2, &schedule, &cfg).verdict,
        IsVerdict::SingularLocusTouches { .. }
    ));
    let point = map("x1^2 + x2^2 + x3^2", 3);
    assert!(matches!(
        validate_is(&point, &schedule, &cfg).verdict,
        IsVerdict::OriginIsolated | IsVerdict::EmptySlice { .. }
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn horn_membership_is_monotone_in_sigma(
        phi in 0.0f64..(2.0 * PI),
        z in -1.0f64..1.0,
        t in 0.02f64..0.1,
        s1 in 1.0f64..3.0,
        s2 in 1.0f64..3.0,
    ) {
        let f = map(CONE, 3);
        let schedule = RadiusSchedule::geometric(0.1, 0.5, 4).unwrap();
        let family = continue_family(&f, &schedule, &SamplerConfig { budget: 120, ..SamplerConfig::default() });
        let x = [t * phi.cos(), t * phi.sin(), t * z];
        let (lo, hi) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
        let at_hi = horn_contains(&family, &x, hi).unwrap();
        let at_lo = horn_contains(&family, &x, lo).unwrap();
        prop_assert!(!at_hi.contained || at_lo.contained);
        prop_assert_eq!(at_hi.distance, at_lo.distance);
    }
}
