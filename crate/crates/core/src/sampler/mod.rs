//! Point clouds on the slices `V(f) ∩ S_r`, their normal frames, and the
//! isolated-singularity check built on them.

mod io;
mod project;
mod seeds;
mod validate;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::AnalyticMap;
use crate::geometry::{frame_from_jacobian, lambda_of_jacobian, NormalFrame};
use crate::linalg::distance;

pub use io::{read_jsonl, write_csv, write_jsonl, SliceRecord};
pub use project::{
    project_to_slice, project_to_variety, Projection, ProjectionError, MAX_ITER, RESIDUAL_TOL,
};
pub use seeds::directions;
pub use validate::{validate_family, validate_is, IsReport, IsRow, IsVerdict, LAMBDA_FLOOR};

/// Converged points closer than this fraction of `r` are merged.
pub const DEDUPE_FACTOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("radius schedule is empty")]
    Empty,
    #[error("radius {0} is not in (0, 1)")]
    OutOfRange(f64),
    #[error("radii must be strictly decreasing")]
    NotDecreasing,
    #[error("ratio {0} is not in (0, 1)")]
    BadRatio(f64),
}

/// Strictly decreasing radii `r_0 > r_1 > ... > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RadiusSchedule(Vec<f64>);

impl RadiusSchedule {
    pub fn new(radii: Vec<f64>) -> Result<Self, ScheduleError> {
        if radii.is_empty() {
            return Err(ScheduleError::Empty);
        }
        for &r in &radii {
            if !(r > 0.0 && r < 1.0) {
                return Err(ScheduleError::OutOfRange(r));
            }
        }
        if radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(ScheduleError::NotDecreasing);
        }
        Ok(Self(radii))
    }

    /// `r_j = first * ratio^j` for `j < count`.
    pub fn geometric(first: f64, ratio: f64, count: usize) -> Result<Self, ScheduleError> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(ScheduleError::BadRatio(ratio));
        }
        Self::new((0..count).map(|j| first * ratio.powi(j as i32)).collect())
    }

    pub fn radii(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for RadiusSchedule {
    type Error = ScheduleError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<RadiusSchedule> for Vec<f64> {
    fn from(s: RadiusSchedule) -> Self {
        s.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Seeds per slice.
    pub budget: usize,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            budget: 500,
            seed: 0,
            max_iter: MAX_ITER,
        }
    }
}

/// A regular point of `V(f) ∩ S_r` with its normal frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentSample {
    pub radius: f64,
    pub frame: NormalFrame<f64>,
    pub lambda: f64,
}

impl TangentSample {
    pub fn point(&self) -> &[f64] {
        self.frame.point()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereSlice {
    pub radius: f64,
    pub samples: Vec<TangentSample>,
    /// Converged points where the Jacobian drops rank.
    pub singular: Vec<Vec<f64>>,
    pub seeds: usize,
    pub converged: usize,
}

impl SphereSlice {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty() && self.singular.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.samples
            .iter()
            .map(TangentSample::point)
            .chain(self.singular.iter().map(Vec::as_slice))
    }

    pub fn min_lambda(&self) -> Option<f64> {
        self.samples.iter().map(|s| s.lambda).reduce(f64::min)
    }

    /// Nearest slice point to `x`, with its distance.
    pub fn nearest(&self, x: &[f64]) -> Option<(f64, &[f64])> {
        self.points()
            .map(|p| (distance(p, x), p))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub map: String,
    pub arity: usize,
    pub digest: String,
    pub config: SamplerConfig,
}

/// Slices of one zero set along a radius schedule.
#[derive(Debug, Clone)]
pub struct SphereSliceFamily {
    pub map: AnalyticMap,
    pub slices: Vec<SphereSlice>,
    pub provenance: Provenance,
}

impl SphereSliceFamily {
    pub fn radii(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.radius).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.iter().all(SphereSlice::is_empty)
    }

    pub fn samples(&self) -> impl Iterator<Item = &TangentSample> + '_ {
        self.slices.iter().flat_map(|s| s.samples.iter())
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.slices.iter().flat_map(SphereSlice::points)
    }

    /// Nearest cloud point over all slices.
    pub fn nearest(&self, x: &[f64]) -> Option<(f64, &[f64])> {
        self.points()
            .map(|p| (distance(p, x), p))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// The `m` samples with frames nearest to `x`, closest first.
    pub fn nearest_samples(&self, x: &[f64], m: usize) -> Vec<(f64, &TangentSample)> {
        let mut all: Vec<(f64, &TangentSample)> =
            self.samples().map(|s| (distance(s.point(), x), s)).collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0));
        all.truncate(m);
        all
    }
}

enum Landing {
    Regular(TangentSample),
    Singular(Vec<f64>),
}

fn land(f: &AnalyticMap, seed: &[f64], r: f64, max_iter: usize) -> Option<Landing> {
    let proj = project_to_slice(f, seed, r, max_iter).ok()?;
    let jac = f.jacobian(&proj.point).ok()?;
    Some(match frame_from_jacobian(&proj.point, &jac) {
        Ok(frame) => Landing::Regular(TangentSample {
            radius: r,
            lambda: lambda_of_jacobian(&jac),
            frame,
        }),
        Err(_) => Landing::Singular(proj.point),
    })
}

fn slice_from_seeds(f: &AnalyticMap, seeds: &[Vec<f64>], r: f64, max_iter: usize) -> SphereSlice {
    let landed: Vec<Option<Landing>> = seeds.par_iter().map(|s| land(f, s, r, max_iter)).collect();
    let radius_tol = DEDUPE_FACTOR * r;
    let mut slice = SphereSlice {
        radius: r,
        samples: Vec::new(),
        singular: Vec::new(),
        seeds: seeds.len(),
        converged: 0,
    };
    for l in landed.into_iter().flatten() {
        slice.converged += 1;
        let p = match &l {
            Landing::Regular(s) => s.point(),
            Landing::Singular(p) => p.as_slice(),
        };
        if slice.points().any(|q| distance(p, q) < radius_tol) {
            continue;
        }
        match l {
            Landing::Regular(s) => slice.samples.push(s),
            Landing::Singular(p) => slice.singular.push(p),
        }
    }
    slice
}

/// Samples `V(f) ∩ S_r` from `budget` quasi-uniform seeds on `S_r`.
pub fn sample_slice(f: &AnalyticMap, r: f64, config: &SamplerConfig) -> SphereSlice {
    let seeds: Vec<Vec<f64>> = directions(f.arity(), config.budget, config.seed)
        .into_iter()
        .map(|d| d.into_iter().map(|v| v * r).collect())
        .collect();
    slice_from_seeds(f, &seeds, r, config.max_iter)
}

fn provenance(f: &AnalyticMap, config: &SamplerConfig) -> Provenance {
    Provenance {
        map: f.unparse(),
        arity: f.arity(),
        digest: f.digest(),
        config: *config,
    }
}

/// Samples every radius of the schedule. Each slice after the first is
/// warm-started from the previous slice rescaled, topped up with fresh
/// seeds (seed offset by the slice index) to the budget.
pub fn continue_family(
    f: &AnalyticMap,
    schedule: &RadiusSchedule,
    config: &SamplerConfig,
) -> SphereSliceFamily {
    let mut slices: Vec<SphereSlice> = Vec::with_capacity(schedule.len());
    for (j, &r) in schedule.radii().iter().enumerate() {
        let mut seeds: Vec<Vec<f64>> = match slices.last() {
            Some(prev) => prev
                .points()
                .take(config.budget)
                .map(|p| p.iter().map(|v| v * r / prev.radius).collect())
                .collect(),
            None => Vec::new(),
        };
        let fresh = config.budget - seeds.len();
        seeds.extend(
            directions(f.arity(), fresh, config.seed.wrapping_add(j as u64))
                .into_iter()
                .map(|d| d.into_iter().map(|v| v * r).collect::<Vec<f64>>()),
        );
        slices.push(slice_from_seeds(f, &seeds, r, config.max_iter));
    }
    SphereSliceFamily {
        map: f.clone(),
        slices,
        provenance: provenance(f, config),
    }
}
