//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tanjet::geometry::NormalFrame;

/// Taylor coefficients at the origin up to total degree `k`, read off a
/// tensor Chebyshev interpolant of `f` on the cube `[-rho, rho]^n`.
pub fn chebyshev_taylor(
    f: &dyn Fn(&[f64]) -> f64,
    n: usize,
    k: u32,
    rho: f64,
    nodes: usize,
) -> BTreeMap<Vec<u32>, f64> {
    let theta: Vec<f64> = (0..nodes)
        .map(|i| std::f64::consts::PI * (i as f64 + 0.5) / nodes as f64)
        .collect();
    let t: Vec<f64> = theta.iter().map(|a| a.cos()).collect();

    // Samples on the grid, flattened with the first variable slowest.
    let total = nodes.pow(n as u32);
    let mut grid = vec![0.0; total];
    let mut x = vec![0.0; n];
    for (flat, slot) in grid.iter_mut().enumerate() {
        let mut rest = flat;
        for d in (0..n).rev() {
            x[d] = rho * t[rest % nodes];
            rest /= nodes;
        }
        *slot = f(&x);
    }

    // Discrete cosine transform along each axis in turn.
    let mut coef = grid;
    for axis in 0..n {
        let stride = nodes.pow((n - 1 - axis) as u32);
        let mut next = vec![0.0; total];
        for (flat, out) in next.iter_mut().enumerate() {
            let j = (flat / stride) % nodes;
            let base = flat - j * stride;
            let w = if j == 0 { 1.0 } else { 2.0 } / nodes as f64;
            let mut acc = 0.0;
            for (i, th) in theta.iter().enumerate() {
                acc += coef[base + i * stride] * (j as f64 * th).cos();
            }
            *out = w * acc;
        }
        coef = next;
    }

    // Monomial content of each Chebyshev polynomial, cheb[j][m] = [t^m] T_j.
    let mut cheb = vec![vec![0.0; nodes]; nodes];
    cheb[0][0] = 1.0;
    if nodes > 1 {
        cheb[1][1] = 1.0;
    }
    for j in 2..nodes {
        for m in 0..nodes {
            let up = if m > 0 { 2.0 * cheb[j - 1][m - 1] } else { 0.0 };
            cheb[j][m] = up - cheb[j - 2][m];
        }
    }

    let mut out = BTreeMap::new();
    let mut alpha = vec![0u32; n];
    loop {
        let deg: u32 = alpha.iter().sum();
        if deg <= k {
            let mut sum = 0.0;
            for (flat, &c) in coef.iter().enumerate() {
                let mut w = c;
                let mut rest = flat;
                for d in (0..n).rev() {
                    w *= cheb[rest % nodes][alpha[d] as usize];
                    rest /= nodes;
                }
                sum += w;
            }
            out.insert(alpha.clone(), sum / rho.powi(deg as i32));
        }
        let mut d = n;
        loop {
            if d == 0 {
                return out;
            }
            d -= 1;
            alpha[d] += 1;
            if alpha[d] <= k {
                break;
            }
            alpha[d] = 0;
        }
    }
}

/// Smallest singular value of a `p x n` matrix (`p <= n`) via nalgebra.
pub fn smallest_singular(rows: &[Vec<f64>]) -> f64 {
    let (p, n) = (rows.len(), rows[0].len());
    let m = DMatrix::from_fn(p, n, |i, j| rows[i][j]);
    m.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn spectral_norm(rows: &[Vec<f64>]) -> f64 {
    let (p, n) = (rows.len(), rows[0].len());
    let m = DMatrix::from_fn(p, n, |i, j| rows[i][j]);
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

pub fn gaussian_rows(rng: &mut ChaCha8Rng, p: usize, n: usize) -> Vec<Vec<f64>> {
    (0..p)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

/// Random frame of `p` generic (not orthonormalized) vectors in `R^n`.
pub fn random_frame(rng: &mut ChaCha8Rng, n: usize, p: usize) -> NormalFrame<f64> {
    loop {
        let vs = gaussian_rows(rng, p, n);
        if smallest_singular(&vs) > 0.1 {
            return NormalFrame::from_vectors(vec![0.0; n], &vs).expect("full rank");
        }
    }
}

/// `floor(max{a s, b + s + 1, a m}) + 1`, written out longhand.
pub fn k0_reference(a: f64, b: f64, s: f64, m: f64) -> u32 {
    let mut c = [a * s, b + s + 1.0, a * m];
    c.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let top = c[2];
    let mut k = 0u32;
    while (k as f64) <= top {
        k += 1;
    }
    k
}

/// Height `z > 0` where the rotation surface `rho(z)^2 = profile(z)` meets
/// the sphere of radius `r`, by bisection on `z^2 + profile(z) = r^2`.
pub fn slice_height(profile: &dyn Fn(f64) -> f64, r: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, r);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid + profile(mid) < r * r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sup over `samples` azimuths of the distance from the slice of
/// `x1^2 + x2^2 = sin(x3)^2` to the slice of `x1^2 + x2^2 = q(x3)`, both
/// on the sphere of radius `r`. Each slice is a pair of horizontal circles.
pub fn sine_slice_distance(q: &dyn Fn(f64) -> f64, r: f64, samples: usize) -> f64 {
    let sine = |z: f64| z.sin() * z.sin();
    let zf = slice_height(&sine, r);
    let zg = slice_height(q, r);
    let (rf, rg) = (sine(zf).sqrt(), q(zg).max(0.0).sqrt());
    let mut sup: f64 = 0.0;
    for i in 0..samples {
        let phi = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
        let p = [rf * phi.cos(), rf * phi.sin(), zf];
        let mut best = f64::INFINITY;
        for sign in [1.0, -1.0] {
            let c = [rg * phi.cos(), rg * phi.sin(), sign * zg];
            let d = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)).sqrt();
            best = best.min(d);
        }
        sup = sup.max(best);
    }
    sup
}

/// Maclaurin coefficients of `sin(z)^2 = (1 - cos 2z)/2`.
pub fn sine_squared_coefficients(k: u32) -> Vec<f64> {
    let mut c = vec![0.0; k as usize + 1];
    let mut m = 1;
    while 2 * m <= k as usize {
        let mut fact = 1.0;
        for i in 1..=2 * m {
            fact *= i as f64;
        }
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        c[2 * m] = sign * 2f64.powi(2 * m as i32 - 1) / fact;
        m += 1;
    }
    c
}

/// Function battery for the jet checks: `(source, arity)`.
pub const BATTERY: &[(&str, usize)] = &[
    ("sin(x1)", 1),
    ("cos(x1)", 1),
    ("exp(x1)", 1),
    ("log(1 + x1)", 1),
    ("sqrt(1 + x1)", 1),
    ("sin(x1 + 2*x2)", 2),
    ("exp(x1)*cos(x2)", 2),
    ("log(1 + sin(x1)*x2)", 2),
    ("sqrt(1 + x1 - x2^2)", 2),
    ("sin(exp(x1) - 1 + x2)", 2),
    ("exp(sin(x1*x2) + x3)", 3),
    ("log(1 + sin(x1 + x2*x3))", 3),
    ("sqrt(1 + x1*cos(x2) + x3^2)", 3),
    ("cos(sqrt(1 + x1) - exp(x2*x3))", 3),
    ("exp(log(1 + x1^2 + x2)*sin(x3))", 3),
    ("sin(cos(exp(x1 + x2 - x3) - 1))", 3),
    ("x1^2 + x2^2 - sin(x3)^2", 3),
];

/// Relative agreement against the interpolation oracle. Coefficients that
/// vanish identically are measured against `1e-3 * scale`, with `scale` the
/// largest coefficient of the same function.
pub fn coefficients_agree(series: f64, oracle: f64, scale: f64) -> bool {
    (series - oracle).abs() <= 1e-4 * series.abs().max(oracle.abs()).max(1e-3 * scale)
}

/// Compares `taylor(f, k)` with the interpolation oracle for every battery
/// entry and returns a description of each disagreement.
pub fn jet_battery_failures(k: u32) -> Vec<String> {
    use tanjet::jets::taylor;
    use tanjet::AnalyticMap;

    let mut bad = Vec::new();
    for &(src, n) in BATTERY {
        let f = AnalyticMap::parse(src, n).expect("battery parses");
        let series = &taylor::<f64>(&f, k).expect("battery expands")[0];
        let eval = |x: &[f64]| f.evaluate(x).expect("inside domain")[0];
        let oracle = chebyshev_taylor(&eval, n, k, 0.3, 16);
        let scale = oracle.values().fold(0.0f64, |m, v| m.max(v.abs()));
        for (alpha, want) in &oracle {
            let got = series.coefficient(alpha);
            if !coefficients_agree(got, *want, scale) {
                bad.push(format!("{src} {alpha:?}: series {got:e}, oracle {want:e}"));
            }
        }
    }
    bad
}

/// Univariate expansions whose coefficients are exactly representable or
/// are correctly rounded reciprocals.
pub fn maclaurin_tables(k: u32) -> Vec<(&'static str, Vec<f64>)> {
    let fact = |m: u32| (1..=m).map(f64::from).product::<f64>();
    let alternating = |m: u32, phase: u32| match (m + phase) % 4 {
        1 => 1.0 / fact(m),
        3 => -1.0 / fact(m),
        _ => 0.0,
    };
    let mut sqrt = vec![1.0];
    for m in 1..=k {
        // binomial(1/2, m) from binomial(1/2, m - 1); every value is dyadic.
        let prev = sqrt[m as usize - 1];
        sqrt.push(prev * (0.5 - f64::from(m - 1)) / f64::from(m));
    }
    vec![
        ("sin(x1)", (0..=k).map(|m| alternating(m, 0)).collect()),
        ("cos(x1)", (0..=k).map(|m| alternating(m, 1)).collect()),
        ("exp(x1)", (0..=k).map(|m| 1.0 / fact(m)).collect()),
        (
            "log(1 + x1)",
            (0..=k)
                .map(|m| match m {
                    0 => 0.0,
                    m if m % 2 == 1 => 1.0 / f64::from(m),
                    m => -1.0 / f64::from(m),
                })
                .collect(),
        ),
        ("sqrt(1 + x1)", sqrt),
    ]
}

/// Every coefficient of the tables above that `taylor` does not reproduce
/// bit for bit.
pub fn maclaurin_mismatches(k: u32) -> Vec<String> {
    use tanjet::jets::taylor;
    use tanjet::AnalyticMap;

    let mut bad = Vec::new();
    for (src, table) in maclaurin_tables(k) {
        let s = &taylor::<f64>(&AnalyticMap::parse(src, 1).unwrap(), k).unwrap()[0];
        for (m, want) in table.iter().enumerate() {
            let got = s.coefficient(&[m as u32]);
            if got != *want {
                bad.push(format!("{src} degree {m}: {got:e} vs {want:e}"));
            }
        }
    }
    bad
}
