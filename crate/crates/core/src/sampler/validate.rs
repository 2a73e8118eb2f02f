use std::fmt;

use serde::{Deserialize, Serialize};

use super::{continue_family, RadiusSchedule, SamplerConfig, SphereSlice, SphereSliceFamily};
use crate::expr::AnalyticMap;
use crate::geometry::jacobian_rank;

/// Slices whose smallest `Λ` is at or below this count as touching the
/// singular locus.
pub const LAMBDA_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IsVerdict {
    IsolatedSingularity { dimension: usize },
    OriginIsolated,
    SingularLocusTouches { radius: f64 },
    EmptySlice { radius: f64 },
    DimensionMismatch { expected: usize, found: usize },
    DegenerateMap,
}

impl IsVerdict {
    pub fn is_is(&self) -> bool {
        matches!(self, IsVerdict::IsolatedSingularity { .. })
    }

    pub fn dimension(&self) -> Option<usize> {
        match self {
            IsVerdict::IsolatedSingularity { dimension } => Some(*dimension),
            _ => None,
        }
    }
}

impl fmt::Display for IsVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IsVerdict::IsolatedSingularity { dimension } => write!(f, "IS of dimension {dimension}"),
            IsVerdict::OriginIsolated => f.write_str("O isolated"),
            IsVerdict::SingularLocusTouches { radius } => {
                write!(f, "singular locus touches slice (r = {radius})")
            }
            IsVerdict::EmptySlice { radius } => write!(f, "empty slice (r = {radius})"),
            IsVerdict::DimensionMismatch { expected, found } => {
                write!(f, "dimension {found} differs from expected {expected}")
            }
            IsVerdict::DegenerateMap => f.write_str("degenerate (zero) map"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsRow {
    pub radius: f64,
    pub cardinality: usize,
    pub singular_points: usize,
    pub min_lambda: Option<f64>,
    /// Majority vote of `n - rank J` over the slice.
    pub dimension: Option<usize>,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsReport {
    pub rows: Vec<IsRow>,
    pub verdict: IsVerdict,
    pub lambda_floor: f64,
    /// Largest radius below which every tested radius passes.
    pub validity_radius: Option<f64>,
}

fn row(f: &AnalyticMap, slice: &SphereSlice) -> IsRow {
    let n = f.arity();
    let p = f.codomain();
    let mut votes = vec![0usize; n + 1];
    votes[n - p] += slice.samples.len();
    for x in &slice.singular {
        let rank = f.jacobian(x).map(|j| jacobian_rank(&j)).unwrap_or(0);
        votes[n - rank] += 1;
    }
    let dimension = if slice.is_empty() {
        None
    } else {
        // ties resolve towards the larger dimension
        votes
            .iter()
            .enumerate()
            .max_by_key(|&(d, &c)| (c, d))
            .map(|(d, _)| d)
    };
    let min_lambda = slice.min_lambda();
    let passes = !slice.is_empty()
        && slice.singular.is_empty()
        && min_lambda.is_some_and(|l| l > LAMBDA_FLOOR)
        && dimension == Some(n - p);
    IsRow {
        radius: slice.radius,
        cardinality: slice.samples.len() + slice.singular.len(),
        singular_points: slice.singular.len(),
        min_lambda,
        dimension,
        passes,
    }
}

/// Isolated-singularity check on an already sampled family.
pub fn validate_family(family: &SphereSliceFamily) -> IsReport {
    let f = &family.map;
    let expected = f.arity() - f.codomain();
    let rows: Vec<IsRow> = family.slices.iter().map(|s| row(f, s)).collect();
    let touching = rows.iter().find(|r| {
        r.singular_points > 0 || r.min_lambda.is_some_and(|l| l <= LAMBDA_FLOOR)
    });
    let verdict = if f.is_zero() {
        IsVerdict::DegenerateMap
    } else if rows.iter().all(|r| r.cardinality == 0) {
        IsVerdict::OriginIsolated
    } else if let Some(r) = touching {
        IsVerdict::SingularLocusTouches { radius: r.radius }
    } else if let Some(r) = rows.iter().find(|r| r.cardinality == 0) {
        IsVerdict::EmptySlice { radius: r.radius }
    } else if let Some(found) = rows
        .iter()
        .filter_map(|r| r.dimension)
        .find(|&d| d != expected)
    {
        IsVerdict::DimensionMismatch { expected, found }
    } else {
        IsVerdict::IsolatedSingularity {
            dimension: expected,
        }
    };
    let mut validity_radius = None;
    for r in rows.iter().rev() {
        if !r.passes {
            break;
        }
        validity_radius = Some(r.radius);
    }
    IsReport {
        rows,
        verdict,
        lambda_floor: LAMBDA_FLOOR,
        validity_radius,
    }
}

/// Samples `f` along `schedule` and checks that `O` is a non-isolated point
/// of `V(f)` with `f` submersive on the slices.
pub fn validate_is(f: &AnalyticMap, schedule: &RadiusSchedule, config: &SamplerConfig) -> IsReport {
    validate_family(&continue_family(f, schedule, config))
}
