//! End-to-end checks of s-equivalence and tangential s-equivalence between
//! zero sets, the truncation search, and the batch corpus runner.

mod corpus;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::AnalyticMap;
use crate::geometry::{best_tangent_match, GeometryError};
use crate::jets::{truncate_map, SeriesError};
use crate::linalg::distance;
use crate::metrics::{
    estimate_profile, fit_exponent, EstimatorConfig, ExponentFit, ExponentProfile, MetricsError,
    ZERO_FLOOR,
};
use crate::sampler::{
    continue_family, project_to_slice, validate_family, IsReport, IsVerdict, RadiusSchedule,
    SamplerConfig, SphereSlice, SphereSliceFamily,
};

pub use corpus::{
    corpus_run, load_corpus, parse_corpus, CorpusConfig, CorpusEntry, CorpusError, CorpusOutcome,
    EntryOutcome, Mode, ScheduleEntry, DEFAULT_CORPUS,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

const EVIDENCE: &str = "verdicts compare log-log decay slopes on a geometric radius schedule \
against s; a slope above s is finite-sample evidence of horn containment, not a proof";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub s: f64,
    pub schedule: RadiusSchedule,
    pub sampler: SamplerConfig,
    /// Nearest samples tried per tangent match.
    pub match_candidates: usize,
    pub zero_floor: f64,
    pub k_min: u32,
    pub k_headroom: u32,
    /// Hard ceiling on the truncation order searched.
    pub k_cap: u32,
    pub estimator: EstimatorConfig,
}

impl VerifyConfig {
    pub fn new(s: f64) -> Self {
        Self {
            s,
            schedule: RadiusSchedule::geometric(0.1, 0.5, 6).expect("valid default schedule"),
            sampler: SamplerConfig::default(),
            match_candidates: 8,
            zero_floor: ZERO_FLOOR,
            k_min: 2,
            k_headroom: 2,
            k_cap: 12,
            estimator: EstimatorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("{which} does not define an isolated singularity: {verdict}")]
    NotIs { which: String, verdict: IsVerdict },
    #[error("zero sets have dimensions {f} and {g}")]
    DimensionMismatch { f: usize, g: usize },
    #[error("maps have arities {f} and {g}")]
    ArityMismatch { f: usize, g: usize },
    #[error("no truncation order up to {cap} passed")]
    NoPassingK { cap: u32, attempts: Vec<KAttempt> },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

impl VerifyError {
    /// Failures of the numerical hypotheses (empty slices, non-IS input)
    /// as opposed to usage errors.
    pub fn is_numeric(&self) -> bool {
        !matches!(self, VerifyError::ArityMismatch { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Fitted,
    ExactZero,
    Insufficient,
}

/// Serialized summary of one decay fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub status: FitStatus,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub max_residual: Option<f64>,
    pub used: usize,
    pub passes: bool,
}

impl FitSummary {
    fn new(pairs: &[(f64, f64)], zero_floor: f64, s: f64) -> Self {
        match fit_exponent(pairs, zero_floor) {
            Ok(fit) => Self::from_fit(&fit, s),
            Err(_) => Self {
                status: FitStatus::Insufficient,
                slope: None,
                intercept: None,
                max_residual: None,
                used: pairs.iter().filter(|p| p.1 > zero_floor).count(),
                passes: false,
            },
        }
    }

    fn from_fit(fit: &ExponentFit<f64>, s: f64) -> Self {
        Self {
            status: if fit.exact_zero {
                FitStatus::ExactZero
            } else {
                FitStatus::Fitted
            },
            slope: fit.slope,
            intercept: fit.intercept,
            max_residual: fit.max_residual,
            used: fit.used,
            passes: fit.exceeds(s),
        }
    }

    /// Slope with exact containment read as `+∞`.
    pub fn effective_slope(&self) -> Option<f64> {
        match self.status {
            FitStatus::ExactZero => Some(f64::INFINITY),
            _ => self.slope,
        }
    }
}

/// Per-radius maxima. "Forward" quantities take the supremum over the
/// points of `f` (so `distance_forward = δ(V_g ∩ S_r, V_f ∩ S_r)`),
/// "backward" ones over the points of `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusRow {
    pub r: f64,
    pub slice_f: usize,
    pub slice_g: usize,
    pub distance_forward: f64,
    pub distance_backward: f64,
    pub match_forward: Option<f64>,
    pub match_backward: Option<f64>,
    pub delta_forward: Option<f64>,
    pub delta_backward: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fits {
    pub distance_forward: FitSummary,
    pub distance_backward: FitSummary,
    pub match_forward: Option<FitSummary>,
    pub match_backward: Option<FitSummary>,
    pub delta_forward: Option<FitSummary>,
    pub delta_backward: Option<FitSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub tool_version: String,
    pub f: String,
    pub g: String,
    pub arity: usize,
    pub s: f64,
    pub validity_radius: Option<f64>,
    pub radii: Vec<f64>,
    pub is_f: IsVerdict,
    pub is_g: IsVerdict,
    pub rows: Vec<RadiusRow>,
    pub fits: Fits,
    pub s_equivalent: bool,
    pub tangentially_s_equivalent: Option<bool>,
    /// Smallest fitted slope among the columns behind the verdicts.
    pub supported_order: Option<f64>,
    pub tau: Option<f64>,
    pub profile: Option<ExponentProfile>,
    pub evidence: String,
    pub config: VerifyConfig,
}

/// `d(x, V_g ∩ S_r)`: nearest cloud point, refined by projecting onto the slice.
fn slice_distance(g: &AnalyticMap, slice: &SphereSlice, x: &[f64]) -> f64 {
    let cloud = slice.nearest(x).map_or(f64::INFINITY, |(d, _)| d);
    match project_to_slice(g, x, slice.radius, crate::sampler::MAX_ITER) {
        Ok(p) => cloud.min(distance(&p.point, x)),
        Err(_) => cloud,
    }
}

fn sup_distance(from: &SphereSlice, to_map: &AnalyticMap, to: &SphereSlice) -> f64 {
    let pts: Vec<&[f64]> = from.points().collect();
    pts.par_iter()
        .map(|x| slice_distance(to_map, to, x))
        .reduce(|| 0.0, f64::max)
}

/// Maxima of match distance and `Δ` over the samples of `from`.
fn sup_match(
    from: &SphereSlice,
    to: &SphereSliceFamily,
    m: usize,
) -> Result<(f64, f64), GeometryError> {
    let found: Result<Vec<(f64, f64)>, GeometryError> = from
        .samples
        .par_iter()
        .map(|s| best_tangent_match(to, s.point(), &s.frame, m).map(|t| (t.distance, t.delta)))
        .collect();
    Ok(found?
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (d, t)| (a.max(d), b.max(t))))
}

fn require_is(which: &str, report: &IsReport) -> Result<usize, VerifyError> {
    report.verdict.dimension().ok_or_else(|| VerifyError::NotIs {
        which: which.to_string(),
        verdict: report.verdict.clone(),
    })
}

struct Sampled {
    family: SphereSliceFamily,
    report: IsReport,
}

fn sample(f: &AnalyticMap, config: &VerifyConfig) -> Sampled {
    let family = continue_family(f, &config.schedule, &config.sampler);
    let report = validate_family(&family);
    Sampled { family, report }
}

fn compare(
    f: &Sampled,
    g: &Sampled,
    config: &VerifyConfig,
    tangential: bool,
) -> Result<EquivalenceReport, VerifyError> {
    let (ff, gf) = (&f.family.map, &g.family.map);
    if ff.arity() != gf.arity() {
        return Err(VerifyError::ArityMismatch {
            f: ff.arity(),
            g: gf.arity(),
        });
    }
    let df = require_is("f", &f.report)?;
    let dg = require_is("g", &g.report)?;
    if df != dg {
        return Err(VerifyError::DimensionMismatch { f: df, g: dg });
    }
    let mut rows = Vec::with_capacity(config.schedule.len());
    for (sf, sg) in f.family.slices.iter().zip(&g.family.slices) {
        let mut row = RadiusRow {
            r: sf.radius,
            slice_f: sf.points().count(),
            slice_g: sg.points().count(),
            distance_forward: sup_distance(sf, gf, sg),
            distance_backward: sup_distance(sg, ff, sf),
            match_forward: None,
            match_backward: None,
            delta_forward: None,
            delta_backward: None,
        };
        if tangential {
            let (mf, tf) = sup_match(sf, &g.family, config.match_candidates)?;
            let (mb, tb) = sup_match(sg, &f.family, config.match_candidates)?;
            row.match_forward = Some(mf);
            row.match_backward = Some(mb);
            row.delta_forward = Some(tf);
            row.delta_backward = Some(tb);
        }
        rows.push(row);
    }
    let (s, floor) = (config.s, config.zero_floor);
    let column = |get: &dyn Fn(&RadiusRow) -> Option<f64>| -> Option<FitSummary> {
        let pairs: Option<Vec<(f64, f64)>> = rows.iter().map(|r| get(r).map(|v| (r.r, v))).collect();
        pairs.map(|p| FitSummary::new(&p, floor, s))
    };
    let fits = Fits {
        distance_forward: column(&|r| Some(r.distance_forward)).expect("always present"),
        distance_backward: column(&|r| Some(r.distance_backward)).expect("always present"),
        match_forward: column(&|r| r.match_forward),
        match_backward: column(&|r| r.match_backward),
        delta_forward: column(&|r| r.delta_forward),
        delta_backward: column(&|r| r.delta_backward),
    };
    let s_equivalent = fits.distance_forward.passes && fits.distance_backward.passes;
    let tangential_fits = [
        &fits.match_forward,
        &fits.match_backward,
        &fits.delta_forward,
        &fits.delta_backward,
    ];
    let tangentially = tangential.then(|| {
        s_equivalent && tangential_fits.iter().all(|f| f.as_ref().is_some_and(|f| f.passes))
    });
    let supported_order = [Some(&fits.distance_forward), Some(&fits.distance_backward)]
        .into_iter()
        .chain(tangential_fits.iter().map(|f| f.as_ref()))
        .flatten()
        .map(|f| f.effective_slope())
        .try_fold(f64::INFINITY, |acc, v| v.map(|v| acc.min(v)))
        .filter(|v| v.is_finite());
    let validity_radius = match (f.report.validity_radius, g.report.validity_radius) {
        (Some(a), Some(b)) => Some(a.min(b)),
        _ => None,
    };
    Ok(EquivalenceReport {
        tool_version: TOOL_VERSION.to_string(),
        f: ff.unparse(),
        g: gf.unparse(),
        arity: ff.arity(),
        s,
        validity_radius,
        radii: config.schedule.radii().to_vec(),
        is_f: f.report.verdict.clone(),
        is_g: g.report.verdict.clone(),
        rows,
        fits,
        s_equivalent,
        tangentially_s_equivalent: tangentially,
        supported_order,
        tau: None,
        profile: None,
        evidence: EVIDENCE.to_string(),
        config: config.clone(),
    })
}

fn sample_both(f: &AnalyticMap, g: &AnalyticMap, config: &VerifyConfig) -> (Sampled, Sampled) {
    rayon::join(|| sample(f, config), || sample(g, config))
}

/// Distance part: `δ` in both directions per radius and its decay slopes.
pub fn check_s_equivalence(
    f: &AnalyticMap,
    g: &AnalyticMap,
    config: &VerifyConfig,
) -> Result<EquivalenceReport, VerifyError> {
    let (a, b) = sample_both(f, g, config);
    compare(&a, &b, config, false)
}

/// Distance part plus best tangent matches (distance and `Δ`) both ways.
pub fn check_tangential(
    f: &AnalyticMap,
    g: &AnalyticMap,
    config: &VerifyConfig,
) -> Result<EquivalenceReport, VerifyError> {
    let (a, b) = sample_both(f, g, config);
    compare(&a, &b, config, true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KAttempt {
    pub k: u32,
    pub map: String,
    pub is_verdict: IsVerdict,
    pub s_equivalent: Option<bool>,
    pub tangentially_s_equivalent: Option<bool>,
    pub fits: Option<Fits>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Approximation {
    pub k_star: u32,
    pub k0: u32,
    pub truncation: String,
    pub report: EquivalenceReport,
    pub profile: ExponentProfile,
    pub attempts: Vec<KAttempt>,
}

fn attempt(
    f: &Sampled,
    k: u32,
    config: &VerifyConfig,
) -> Result<(KAttempt, Option<EquivalenceReport>), VerifyError> {
    let g = truncate_map(&f.family.map, k)?;
    let sg = sample(&g, config);
    let mut out = KAttempt {
        k,
        map: g.unparse(),
        is_verdict: sg.report.verdict.clone(),
        s_equivalent: None,
        tangentially_s_equivalent: None,
        fits: None,
    };
    if !sg.report.verdict.is_is() || sg.report.verdict.dimension() != f.report.verdict.dimension() {
        return Ok((out, None));
    }
    let report = compare(f, &sg, config, true)?;
    out.s_equivalent = Some(report.s_equivalent);
    out.tangentially_s_equivalent = report.tangentially_s_equivalent;
    out.fits = Some(report.fits.clone());
    Ok((out, Some(report)))
}

/// Compares `f` with each truncation `T^k f` for the given orders.
pub fn sweep_truncations(
    f: &AnalyticMap,
    ks: &[u32],
    config: &VerifyConfig,
) -> Result<Vec<KAttempt>, VerifyError> {
    let sf = sample(f, config);
    require_is("f", &sf.report)?;
    ks.iter()
        .map(|&k| attempt(&sf, k, config).map(|a| a.0))
        .collect()
}

/// Smallest `k` with `V(f)` tangentially s-equivalent to `V(T^k f)`,
/// searched from `k_min` up to `k₀ + headroom` (at most `k_cap`).
pub fn approximate(f: &AnalyticMap, config: &VerifyConfig) -> Result<Approximation, VerifyError> {
    let sf = sample(f, config);
    require_is("f", &sf.report)?;
    let profile = estimate_profile(f, &sf.family, config.s, &config.estimator)?;
    let k_max = (profile.k0 + config.k_headroom).max(config.k_min).min(config.k_cap);
    let mut attempts = Vec::new();
    for k in config.k_min..=k_max {
        let (a, report) = attempt(&sf, k, config)?;
        let passed = a.tangentially_s_equivalent == Some(true);
        let map = a.map.clone();
        attempts.push(a);
        if let (true, Some(mut report)) = (passed, report) {
            report.tau = Some(profile.tau);
            report.profile = Some(profile.clone());
            return Ok(Approximation {
                k_star: k,
                k0: profile.k0,
                truncation: map,
                report,
                profile,
                attempts,
            });
        }
    }
    Err(VerifyError::NoPassingK {
        cap: k_max,
        attempts,
    })
}
