use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generalized golden ratio: the positive root of `x^(d+1) = x + 1`.
fn harmonious(d: usize) -> f64 {
    let mut x = 2.0f64;
    for _ in 0..64 {
        x = (1.0 + x).powf(1.0 / (d as f64 + 1.0));
    }
    x
}

/// `count` quasi-uniform unit directions in `R^n`.
///
/// A randomly shifted Kronecker sequence in the unit cube is pushed through
/// Box–Muller and normalized. The shift is drawn from `seed`, so equal seeds
/// give identical directions.
pub fn directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let m = n.div_ceil(2) * 2;
    let phi = harmonious(m);
    let alpha: Vec<f64> = (1..=m).map(|j| phi.powi(-(j as i32)).fract()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        i += 1;
        let u: Vec<f64> = shift
            .iter()
            .zip(&alpha)
            .map(|(s, a)| (s + i as f64 * a).fract())
            .collect();
        let mut g = Vec::with_capacity(m);
        for pair in u.chunks(2) {
            let u1 = if pair[0] > 0.0 { pair[0] } else { 1.0 - pair[0] };
            let rad = (-2.0 * u1.ln()).sqrt();
            let ang = std::f64::consts::TAU * pair[1];
            g.push(rad * ang.cos());
            g.push(rad * ang.sin());
        }
        g.truncate(n);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            out.push(g.into_iter().map(|v| v / norm).collect());
        }
    }
    out
}
