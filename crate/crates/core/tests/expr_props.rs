use proptest::prelude::*;
use tanjet::AnalyticMap;

fn expr_source() -> impl Strategy<Value = String> {
    expr_with(4, 3.0)
}

fn expr_with(depth: u32, bound: f64) -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (1usize..=3).prop_map(|i| format!("x{i}")),
        (-bound..bound).prop_map(|c| format!("{c:?}")),
    ];
    leaf.prop_recursive(depth, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} + {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (inner.clone(), 0u32..=4).prop_map(|(a, e)| format!("({a})^{e}")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cosh(0.3*({a}))")),
            inner.clone().prop_map(|a| format!("tan(0.2*atan({a}))")),
            inner.clone().prop_map(|a| format!("log(2 + cos({a}))")),
            inner.clone().prop_map(|a| format!("sqrt(1.5 + sin({a}))")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("({a})/(2 + cos({b}))")),
        ]
    })
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-0.5f64..0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn unparse_round_trips(src in expr_source()) {
        let f = AnalyticMap::parse(&src, 3).unwrap();
        let text = f.unparse();
        let g = AnalyticMap::parse(&text, 3).unwrap();
        prop_assert_eq!(&f, &g, "{}", text);
        prop_assert_eq!(g.unparse(), text);
    }

    #[test]
    fn jacobian_matches_central_differences(src in expr_source(), x in point()) {
        let f = AnalyticMap::parse(&src, 3).unwrap();
        let jac = f.jacobian(&x).unwrap();
        let h = 1e-3;
        for i in 0..3 {
            let at = |d: f64| {
                let mut y = x;
                y[i] += d;
                f.evaluate(&y).unwrap()[0]
            };
            // Fourth-order five-point stencil.
            let fd = (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h);
            let scale = 1.0 + fd.abs() + f.evaluate(&x).unwrap()[0].abs();
            prop_assert!((jac[(0, i)] - fd).abs() <= 1e-6 * scale, "d/dx{}: {} vs {}", i + 1, jac[(0, i)], fd);
        }
    }

    #[test]
    fn single_precision_tracks_double(src in expr_with(2, 1.0), x in point()) {
        let f = AnalyticMap::parse(&src, 3).unwrap();
        let wide = f.evaluate(&x).unwrap()[0];
        let narrow = f.evaluate(&x.map(|v| v as f32)).unwrap()[0] as f64;
        prop_assert!((wide - narrow).abs() <= 1e-3 * (1.0 + wide.abs()), "{} vs {}", wide, narrow);
    }

    #[test]
    fn parser_never_panics(src in "[x0-9+*/^(). a-z-]{0,24}") {
        let _ = AnalyticMap::parse(&src, 3);
    }

    #[test]
    fn digest_follows_structure(a in expr_source(), b in expr_source()) {
        let f = AnalyticMap::parse(&a, 3).unwrap();
        let g = AnalyticMap::parse(&b, 3).unwrap();
        prop_assert_eq!(f == g, f.digest() == g.digest());
    }
}
