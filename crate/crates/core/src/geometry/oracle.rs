//! Direct minimization of `max_j |v1_j - v2_j|` over pairs of orthonormal
//! bases, used to cross-check the closed form in [`super::grassmann_delta`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GeometryError, NormalFrame};
use crate::linalg::orthonormalize;
use crate::scalar::Scalar;

/// `exp(K)` for a small skew-symmetric `K`, by scaling and squaring.
fn expm(k: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let p = k.len();
    let norm: f64 = k.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a: Vec<Vec<f64>> = k.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
    let mut result = identity(p);
    let mut term = identity(p);
    for m in 1..=18 {
        term = matmul(&term, &a);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= m as f64;
            }
        }
        for (r, t) in result.iter_mut().zip(&term) {
            for (x, y) in r.iter_mut().zip(t) {
                *x += y;
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

fn identity(p: usize) -> Vec<Vec<f64>> {
    (0..p)
        .map(|i| (0..p).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, m) = (a.len(), b[0].len());
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Orthogonal `p×p` matrix from `p(p-1)/2` angles, optionally composed
/// with a reflection so both components of `O(p)` are reachable.
fn orthogonal(p: usize, params: &[f64], reflect: bool) -> Vec<Vec<f64>> {
    let mut k = vec![vec![0.0; p]; p];
    let mut idx = 0;
    for i in 0..p {
        for j in i + 1..p {
            k[i][j] = params[idx];
            k[j][i] = -params[idx];
            idx += 1;
        }
    }
    let mut q = expm(&k);
    if reflect {
        for row in q.iter_mut() {
            row[0] = -row[0];
        }
    }
    q
}

struct Problem {
    p: usize,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    reflect: (bool, bool),
}

impl Problem {
    fn objective(&self, params: &[f64]) -> f64 {
        let half = params.len() / 2;
        let qa = orthogonal(self.p, &params[..half], self.reflect.0);
        let qb = orthogonal(self.p, &params[half..], self.reflect.1);
        let a = matmul(&qa, &self.a);
        let b = matmul(&qb, &self.b);
        a.iter()
            .zip(&b)
            .map(|(u, v)| {
                u.iter()
                    .zip(v)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Pattern search polling a fresh random orthonormal direction set at
    /// every step, which keeps making progress along nonsmooth ridges of
    /// the max.
    fn minimize(&self, start: Vec<f64>, steps: usize, rng: &mut ChaCha8Rng) -> f64 {
        let dim = start.len();
        let mut x = start;
        let mut fx = self.objective(&x);
        let mut h = 0.5;
        let mut polls = 0usize;
        while h > 1e-11 && polls < steps {
            let dirs = loop {
                let raw: Vec<Vec<f64>> = (0..dim)
                    .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
                    .collect();
                if let Some(d) = orthonormalize(&raw, 1e-8) {
                    break d;
                }
            };
            let mut improved = false;
            'poll: for d in &dirs {
                for sign in [1.0, -1.0] {
                    let y: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + sign * h * di).collect();
                    let fy = self.objective(&y);
                    polls += 1;
                    if fy < fx {
                        x = y;
                        fx = fy;
                        improved = true;
                        break 'poll;
                    }
                }
            }
            h = if improved { (h * 2.0).min(1.0) } else { h * 0.5 };
        }
        fx
    }
}

/// Numerical infimum of `max_j |v1_j - v2_j|` over orthonormal bases of the
/// two normal spaces, by multi-start derivative-free search.
///
/// Each restart polls at most `steps` times. The result is an upper bound
/// on the exact value and is deterministic.
pub fn grassmann_delta_oracle<T: Scalar>(
    a: &NormalFrame<T>,
    b: &NormalFrame<T>,
    restarts: usize,
    steps: usize,
) -> Result<T, GeometryError> {
    if a.codim() != b.codim() || a.ambient() != b.ambient() {
        return Err(GeometryError::DimensionMismatch {
            left: (a.codim(), a.ambient()),
            right: (b.codim(), b.ambient()),
        });
    }
    let lossy = |f: &NormalFrame<T>| -> Vec<Vec<f64>> {
        f.basis()
            .iter()
            .map(|v| v.iter().map(|x| x.to_f64_lossy()).collect())
            .collect()
    };
    let p = a.codim();
    let dim = p * (p - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(0x0dd5_eed5);
    let mut best = f64::INFINITY;
    for reflect in [(false, false), (false, true), (true, false), (true, true)] {
        let problem = Problem {
            p,
            a: lossy(a),
            b: lossy(b),
            reflect,
        };
        if dim == 0 {
            best = best.min(problem.objective(&[]));
            continue;
        }
        for r in 0..restarts.max(1) {
            let start: Vec<f64> = if r == 0 {
                vec![0.0; dim]
            } else {
                (0..dim)
                    .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
                    .collect()
            };
            best = best.min(problem.minimize(start, steps, &mut rng));
        }
    }
    Ok(T::lit(best))
}
