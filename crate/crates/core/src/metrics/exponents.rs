use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::expr::AnalyticMap;
use crate::geometry::{distance_to_zero_set, lambda_of_jacobian};
use crate::linalg::{distance, norm};
use crate::sampler::{directions, validate_family, SphereSliceFamily, TangentSample};

/// Lower bound on logged quantities; values at or below it are skipped.
const TINY: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub alpha_margin: f64,
    pub beta_margin: f64,
    pub sigma_margin: f64,
    pub gamma_margin: f64,
    pub mu_margin: f64,
    /// Normal offsets `|x|^q` used for the α probes.
    pub probe_exponents: Vec<f64>,
    /// Base points drawn from each slice.
    pub base_points: usize,
    pub robustness_rounds: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            alpha_margin: 0.05,
            beta_margin: 0.05,
            sigma_margin: 0.05,
            gamma_margin: 0.02,
            mu_margin: 0.1,
            probe_exponents: vec![1.2, 1.5, 2.0],
            base_points: 32,
            robustness_rounds: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub value: f64,
    pub sup_ratio: f64,
    pub probes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimate {
    pub value: f64,
    pub inf_slope: Option<f64>,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaSigmaEstimate {
    pub beta: f64,
    pub sigma: f64,
    pub sup_ratio: Option<f64>,
    pub points: usize,
    /// Ball perturbations that raised β.
    pub enlargements: usize,
    /// Ball perturbations where some `φ` vanished outright.
    pub unresolved: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentProfile {
    pub s: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub mu: f64,
    pub eta: f64,
    pub tau: f64,
    pub k0: u32,
    pub validity_radius: Option<f64>,
    pub config: EstimatorConfig,
    pub alpha_probes: usize,
    pub beta_points: usize,
    pub gamma_pairs: usize,
    pub robustness_enlargements: usize,
}

fn log_ratio(num: f64, den: f64) -> Option<f64> {
    let inside = |v: f64| v > TINY && v < 1.0;
    (inside(num) && inside(den)).then(|| num.ln() / den.ln())
}

/// Evenly strided subsample of every slice, at most `per_slice` each.
fn base_points(family: &SphereSliceFamily, per_slice: usize) -> Vec<&TangentSample> {
    family
        .slices
        .iter()
        .flat_map(|s| {
            let stride = s.samples.len().div_ceil(per_slice.max(1)).max(1);
            s.samples.iter().step_by(stride)
        })
        .collect()
}

/// `Λf` followed by each `|∇f_i|`.
fn phis(f: &AnalyticMap, x: &[f64]) -> Option<Vec<f64>> {
    let jac = f.jacobian(x).ok()?;
    let mut out = vec![lambda_of_jacobian(&jac)];
    out.extend((0..jac.rows()).map(|i| norm(jac.row(i))));
    Some(out)
}

/// `α̂ = (1 + margin) · sup log|f(x)| / log d(x, V)` over probes pushed off
/// the slices along normals by `|x|^q`.
pub fn estimate_alpha(
    f: &AnalyticMap,
    family: &SphereSliceFamily,
    config: &EstimatorConfig,
) -> Result<AlphaEstimate, MetricsError> {
    let mut probes = Vec::new();
    for s in base_points(family, config.base_points) {
        let x = s.point();
        let nx = norm(x);
        for &q in &config.probe_exponents {
            let t = nx.powf(q);
            for n in s.frame.basis() {
                for sign in [1.0, -1.0] {
                    probes.push(x.iter().zip(n).map(|(a, b)| a + sign * t * b).collect::<Vec<_>>());
                }
            }
        }
    }
    let ratios: Vec<Option<f64>> = probes
        .par_iter()
        .map(|p| {
            let fp = norm(&f.evaluate(p).ok()?);
            let (d, _) = distance_to_zero_set(family, p).ok()?;
            log_ratio(fp, d)
        })
        .collect();
    let valid: Vec<f64> = ratios.into_iter().flatten().collect();
    let sup = valid
        .iter()
        .copied()
        .reduce(f64::max)
        .ok_or(MetricsError::NoValidProbes)?;
    Ok(AlphaEstimate {
        value: (1.0 + config.alpha_margin) * sup,
        sup_ratio: sup,
        probes: valid.len(),
    })
}

/// Hölder exponent of the gradients from two-scale difference quotients:
/// at separations `h1 > h2` the local order is
/// `log(D(h1) / D(h2)) / log(h1 / h2)` with `D(h) = |∇f_i(x + h u) - ∇f_i(x)|`.
/// The estimate is the infimum over base points, directions and components,
/// clamped to `1 - margin`.
pub fn estimate_gamma(
    f: &AnalyticMap,
    family: &SphereSliceFamily,
    config: &EstimatorConfig,
) -> GammaEstimate {
    let n = f.arity();
    let fixed = directions(n, 3, 0);
    let bases = base_points(family, config.base_points);
    let slopes: Vec<Vec<f64>> = bases
        .par_iter()
        .map(|s| {
            let x = s.point();
            let nx = norm(x);
            let (h1, h2) = (1e-2 * nx, 1e-3 * nx);
            let Ok(j0) = f.jacobian(x) else {
                return Vec::new();
            };
            let mut out = Vec::new();
            for u in s.frame.basis().iter().chain(&fixed) {
                let at = |h: f64| {
                    let y: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + h * b).collect();
                    f.jacobian(&y).ok()
                };
                let (Some(j1), Some(j2)) = (at(h1), at(h2)) else {
                    continue;
                };
                for i in 0..j0.rows() {
                    let d1 = distance(j1.row(i), j0.row(i));
                    let d2 = distance(j2.row(i), j0.row(i));
                    let noise = 1e-10 * (norm(j0.row(i)) + d1);
                    if d2 <= noise.max(TINY) {
                        continue;
                    }
                    out.push((d1 / d2).ln() / (h1 / h2).ln());
                }
            }
            out
        })
        .collect();
    let all: Vec<f64> = slopes.into_iter().flatten().collect();
    let inf = all.iter().copied().reduce(f64::min);
    let cap = 1.0 - config.gamma_margin;
    GammaEstimate {
        value: inf.map_or(cap, |v| v.min(cap)),
        inf_slope: inf,
        pairs: all.len(),
    }
}

fn sigma_from(beta: f64, s: f64, gamma: f64, margin: f64) -> f64 {
    ((beta + s) / gamma).max(1.0) * (1.0 + margin)
}

/// `β̂` from `sup log φ(x) / log |x|` over slice points with `φ ∈ {Λf, |∇f_i|}`,
/// then `σ̂ = max(1, (β̂ + s)/γ̂)(1 + margin)`, then enlarged until `φ` stays
/// above `|x|^β̂` on the balls `B(x, |x|^σ̂)`.
pub fn estimate_beta_sigma(
    f: &AnalyticMap,
    family: &SphereSliceFamily,
    s: f64,
    gamma: f64,
    config: &EstimatorConfig,
) -> Result<BetaSigmaEstimate, MetricsError> {
    let report = validate_family(family);
    if !report.verdict.is_is() {
        return Err(MetricsError::NotIs(report.verdict.to_string()));
    }
    let samples: Vec<&TangentSample> = family.samples().collect();
    let ratios: Vec<f64> = samples
        .par_iter()
        .flat_map_iter(|smp| {
            let nx = norm(smp.point());
            phis(f, smp.point())
                .unwrap_or_default()
                .into_iter()
                .filter_map(move |p| log_ratio(p, nx))
        })
        .collect();
    let sup = ratios.iter().copied().reduce(f64::max);
    let m = config.beta_margin;
    let mut beta = sup.map_or(m, |v| ((1.0 + m) * v).max(m));
    let mut sigma = sigma_from(beta, s, gamma, config.sigma_margin);
    let bases = base_points(family, config.base_points);
    let n = f.arity();
    let mut enlargements = 0;
    let mut unresolved = 0;
    for _ in 0..config.robustness_rounds {
        let found: Vec<(usize, usize, Option<f64>)> = bases
            .par_iter()
            .map(|smp| {
                let x = smp.point();
                let nx = norm(x);
                let rad = 0.999 * nx.powf(sigma);
                let floor = nx.powf(beta);
                let mut dirs: Vec<Vec<f64>> = smp.frame.basis().to_vec();
                dirs.extend((0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()));
                let (mut up, mut bad, mut worst) = (0, 0, None::<f64>);
                for u in &dirs {
                    for sign in [1.0, -1.0] {
                        let y: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + sign * rad * b).collect();
                        for p in phis(f, &y).unwrap_or_default() {
                            if p > floor {
                                continue;
                            }
                            match log_ratio(p, nx) {
                                Some(r) => {
                                    up += 1;
                                    worst = Some(worst.map_or(r, |w: f64| w.max(r)));
                                }
                                None => bad += 1,
                            }
                        }
                    }
                }
                (up, bad, worst)
            })
            .collect();
        let round_up: usize = found.iter().map(|t| t.0).sum();
        unresolved = found.iter().map(|t| t.1).sum();
        let worst = found.iter().filter_map(|t| t.2).reduce(f64::max);
        match worst {
            Some(w) if round_up > 0 => {
                enlargements += round_up;
                beta = beta.max((1.0 + m) * w);
                sigma = sigma_from(beta, s, gamma, config.sigma_margin);
            }
            _ => break,
        }
    }
    Ok(BetaSigmaEstimate {
        beta,
        sigma,
        sup_ratio: sup,
        points: ratios.len(),
        enlargements,
        unresolved,
    })
}

/// `μ̂ = σ̂ (1 + margin)`.
pub fn estimate_mu(sigma: f64, margin: f64) -> Result<f64, MetricsError> {
    if !(sigma > 1.0) {
        return Err(MetricsError::SigmaTooSmall(sigma));
    }
    Ok(sigma * (1.0 + margin))
}

/// `k₀ = ⌊max{ασ, β + σ + 1, αμ}⌋ + 1`.
pub fn k0_bound(alpha: f64, beta: f64, sigma: f64, mu: f64) -> Result<u32, MetricsError> {
    let inputs = [alpha, beta, sigma, mu];
    if inputs.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(MetricsError::NonFinite);
    }
    let m = (alpha * sigma).max(beta + sigma + 1.0).max(alpha * mu);
    if m >= u32::MAX as f64 {
        return Err(MetricsError::NonFinite);
    }
    Ok(m.floor() as u32 + 1)
}

/// All exponents for `f` on its own sampled family, with
/// `η = (β + s + γσ)/2` and `τ = η - β`.
pub fn estimate_profile(
    f: &AnalyticMap,
    family: &SphereSliceFamily,
    s: f64,
    config: &EstimatorConfig,
) -> Result<ExponentProfile, MetricsError> {
    let gamma = estimate_gamma(f, family, config);
    let bs = estimate_beta_sigma(f, family, s, gamma.value, config)?;
    let alpha = estimate_alpha(f, family, config)?;
    let mu = estimate_mu(bs.sigma, config.mu_margin)?;
    let k0 = k0_bound(alpha.value, bs.beta, bs.sigma, mu)?;
    let eta = (bs.beta + s + gamma.value * bs.sigma) / 2.0;
    Ok(ExponentProfile {
        s,
        alpha: alpha.value,
        beta: bs.beta,
        gamma: gamma.value,
        sigma: bs.sigma,
        mu,
        eta,
        tau: eta - bs.beta,
        k0,
        validity_radius: validate_family(family).validity_radius,
        config: config.clone(),
        alpha_probes: alpha.probes,
        beta_points: bs.points,
        gamma_pairs: gamma.pairs,
        robustness_enlargements: bs.enlargements,
    })
}
