//! Set distances, log-log decay fits, Łojasiewicz-type exponent estimates
//! and the truncation bound `k₀`.

mod exponents;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::distance;
use crate::scalar::Scalar;

pub use exponents::{
    estimate_alpha, estimate_beta_sigma, estimate_gamma, estimate_mu, estimate_profile, k0_bound,
    AlphaEstimate, BetaSigmaEstimate, EstimatorConfig, ExponentProfile, GammaEstimate,
};

/// Distances at or below this are treated as exact containment.
pub const ZERO_FLOOR: f64 = 1e-12;

/// Slopes must beat the target order by more than this to count as larger;
/// it only absorbs rounding in fits of exact power laws.
pub const SLOPE_RESOLUTION: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("point set is empty")]
    Empty,
    #[error("need at least 3 pairs above the zero floor, have {usable}")]
    TooFewPairs { usable: usize },
    #[error("radius {0} is outside (0, 1)")]
    BadRadius(f64),
    #[error("radii in a fit must be distinct")]
    RepeatedRadius,
    #[error("no probe produced a usable ratio")]
    NoValidProbes,
    #[error("map does not define an isolated singularity on the family: {0}")]
    NotIs(String),
    #[error("sigma must exceed 1, got {0}")]
    SigmaTooSmall(f64),
    #[error("exponent inputs must be finite and non-negative")]
    NonFinite,
}

/// `δ(A, B) = sup_{x ∈ B} d(x, A)`. The supremum runs over the second set.
pub fn delta_one_sided<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Result<T, MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(b.iter()
        .map(|x| {
            a.iter()
                .map(|y| distance(x, y))
                .fold(T::infinity(), T::min)
        })
        .fold(T::zero(), T::max))
}

pub fn hausdorff<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Result<T, MetricsError> {
    Ok(delta_one_sided(a, b)?.max(delta_one_sided(b, a)?))
}

/// Least-squares fit of `log d` against `log r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ExponentFit<T: Scalar> {
    pub pairs: Vec<(T, T)>,
    pub slope: Option<T>,
    pub intercept: Option<T>,
    pub max_residual: Option<T>,
    pub exact_zero: bool,
    pub used: usize,
}

impl<T: Scalar> ExponentFit<T> {
    /// Exact containment, or a slope strictly above `s`.
    pub fn exceeds(&self, s: T) -> bool {
        self.exact_zero || self.slope.is_some_and(|q| q > s + T::lit(SLOPE_RESOLUTION))
    }
}

pub fn fit_exponent<T: Scalar>(pairs: &[(T, T)], zero_floor: T) -> Result<ExponentFit<T>, MetricsError> {
    for (i, &(r, _)) in pairs.iter().enumerate() {
        if !(r > T::zero() && r < T::one()) {
            return Err(MetricsError::BadRadius(r.to_f64_lossy()));
        }
        if pairs[..i].iter().any(|&(q, _)| q == r) {
            return Err(MetricsError::RepeatedRadius);
        }
    }
    if pairs.len() < 3 {
        return Err(MetricsError::TooFewPairs { usable: pairs.len() });
    }
    if pairs.iter().all(|&(_, d)| d <= zero_floor) {
        return Ok(ExponentFit {
            pairs: pairs.to_vec(),
            slope: None,
            intercept: None,
            max_residual: None,
            exact_zero: true,
            used: 0,
        });
    }
    let logs: Vec<(T, T)> = pairs
        .iter()
        .filter(|&&(_, d)| d > zero_floor)
        .map(|&(r, d)| (r.ln(), d.ln()))
        .collect();
    if logs.len() < 3 {
        return Err(MetricsError::TooFewPairs { usable: logs.len() });
    }
    let m = T::lit(logs.len() as f64);
    let mx = logs.iter().map(|p| p.0).sum::<T>() / m;
    let my = logs.iter().map(|p| p.1).sum::<T>() / m;
    let sxx: T = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: T = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = logs
        .iter()
        .map(|&(x, y)| (y - intercept - slope * x).abs())
        .fold(T::zero(), T::max);
    Ok(ExponentFit {
        pairs: pairs.to_vec(),
        slope: Some(slope),
        intercept: Some(intercept),
        max_residual: Some(max_residual),
        exact_zero: false,
        used: logs.len(),
    })
}
