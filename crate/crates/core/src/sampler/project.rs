use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::AnalyticMap;
use crate::geometry::jacobian_rank;
use crate::linalg::{norm, svd, Matrix};

/// Residual acceptance: `|f(x)| <= RESIDUAL_TOL * max(1, |J(x)|)`.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Default Gauss–Newton iteration cap.
pub const MAX_ITER: usize = 50;

const PINV_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProjectionError {
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("converged to a singular point of the zero set")]
    Singular,
    #[error("evaluation left the domain of the map")]
    Domain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub point: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Gauss–Newton with the minimum-norm pseudo-inverse step. With `radius`
/// set, the sphere constraint `(|x|^2 - r^2) / (2r)` is appended as an
/// extra equation and the result is rescaled onto the sphere.
///
/// Iteration continues past the acceptance tolerance until the step stalls
/// near rounding level.
fn gauss_newton(
    f: &AnalyticMap,
    x0: &[f64],
    radius: Option<f64>,
    max_iter: usize,
) -> Result<(Vec<f64>, usize, f64, Matrix<f64>), ProjectionError> {
    let n = f.arity();
    let mut x = x0.to_vec();
    if let Some(r) = radius {
        let nx = norm(&x);
        if nx > 0.0 {
            x.iter_mut().for_each(|v| *v *= r / nx);
        }
    }
    let mut iterations = 0;
    let mut prev_step = f64::INFINITY;
    for _ in 0..max_iter {
        let (fx, jac) = f.evaluate_with_jacobian(&x).map_err(|_| ProjectionError::Domain)?;
        let scale = radius.unwrap_or_else(|| norm(&x)).max(1.0e-300);
        let mut rows = jac.to_rows();
        let mut rhs = fx;
        if let Some(r) = radius {
            rows.push(x.iter().map(|v| v / r).collect());
            rhs.push((x.iter().map(|v| v * v).sum::<f64>() - r * r) / (2.0 * r));
        }
        let a = Matrix::from_rows(&rows);
        let step = svd(&a).solve(&rhs, PINV_TOL);
        let mut len = norm(&step);
        if !len.is_finite() {
            return Err(ProjectionError::Domain);
        }
        if len <= 4.0 * f64::EPSILON * scale {
            break;
        }
        let clamp = if let Some(r) = radius { (r / len).min(1.0) } else { 1.0 };
        for (xi, si) in x.iter_mut().zip(&step) {
            *xi -= clamp * si;
        }
        len *= clamp;
        iterations += 1;
        let stalled = len >= 0.5 * prev_step && len < 1e-12 * scale;
        prev_step = len;
        if stalled {
            break;
        }
        debug_assert_eq!(x.len(), n);
    }
    if let Some(r) = radius {
        let nx = norm(&x);
        if nx == 0.0 {
            return Err(ProjectionError::Singular);
        }
        x.iter_mut().for_each(|v| *v *= r / nx);
    }
    let (fx, jac) = f.evaluate_with_jacobian(&x).map_err(|_| ProjectionError::Domain)?;
    let residual = norm(&fx);
    if !(residual <= RESIDUAL_TOL * jac.spectral_norm().max(1.0)) {
        return Err(ProjectionError::NoConvergence {
            iterations,
            residual,
        });
    }
    Ok((x, iterations, residual, jac))
}

/// Projects `x0` onto `V(f)`. Fails when the iteration does not reach the
/// residual tolerance or lands on a singular point.
pub fn project_to_variety(
    f: &AnalyticMap,
    x0: &[f64],
    max_iter: usize,
) -> Result<Projection, ProjectionError> {
    let (point, iterations, residual, jac) = gauss_newton(f, x0, None, max_iter)?;
    if jacobian_rank(&jac) < f.codomain() {
        return Err(ProjectionError::Singular);
    }
    Ok(Projection {
        point,
        iterations,
        residual,
    })
}

/// Projects `x0` onto `V(f) ∩ S_r`. Singular landing points are returned;
/// callers classify them.
pub fn project_to_slice(
    f: &AnalyticMap,
    x0: &[f64],
    r: f64,
    max_iter: usize,
) -> Result<Projection, ProjectionError> {
    let (point, iterations, residual, _) = gauss_newton(f, x0, Some(r), max_iter)?;
    Ok(Projection {
        point,
        iterations,
        residual,
    })
}
