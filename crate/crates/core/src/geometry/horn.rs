use serde::{Deserialize, Serialize};

use super::{grassmann_delta, normal_frame, GeometryError, NormalFrame};
use crate::linalg::{distance, norm};
use crate::sampler::{project_to_variety, SphereSliceFamily, TangentSample, MAX_ITER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HornWitness {
    pub contained: bool,
    pub distance: f64,
    pub witness: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentMatch {
    pub distance: f64,
    pub delta: f64,
    pub witness: Vec<f64>,
}

impl TangentMatch {
    pub fn score(&self) -> f64 {
        self.distance.max(self.delta)
    }
}

fn nonzero(x: &[f64]) -> Result<f64, GeometryError> {
    let nx = norm(x);
    if nx == 0.0 {
        return Err(GeometryError::AtOrigin);
    }
    Ok(nx)
}

/// Upper bound on `d(x, V)` from the cloud, refined by projecting `x` onto
/// the family's zero set. Returns the distance and the nearest point found.
pub fn distance_to_zero_set(family: &SphereSliceFamily, x: &[f64]) -> Result<(f64, Vec<f64>), GeometryError> {
    let (mut d, y) = family.nearest(x).ok_or(GeometryError::EmptyFamily)?;
    let mut y = y.to_vec();
    if let Ok(p) = project_to_variety(&family.map, x, MAX_ITER) {
        let dp = distance(&p.point, x);
        if dp < d {
            d = dp;
            y = p.point;
        }
    }
    Ok((d, y))
}

/// Membership of `x` in `H(V, σ) = { x : d(x, V) < |x|^σ }`.
pub fn horn_contains(
    family: &SphereSliceFamily,
    x: &[f64],
    sigma: f64,
) -> Result<HornWitness, GeometryError> {
    let nx = nonzero(x)?;
    let (d, y) = distance_to_zero_set(family, x)?;
    Ok(HornWitness {
        contained: d < nx.powf(sigma),
        distance: d,
        witness: y,
    })
}

/// Best `y` on the family minimizing `max(|x - y|, Δ(T_y, T))` among the
/// `m` nearest samples and the projection of `x` onto the zero set.
pub fn best_tangent_match(
    family: &SphereSliceFamily,
    x: &[f64],
    frame: &NormalFrame<f64>,
    m: usize,
) -> Result<TangentMatch, GeometryError> {
    let mut best: Option<TangentMatch> = None;
    let mut consider = |cand: TangentMatch| {
        if best.as_ref().is_none_or(|b| cand.score() < b.score()) {
            best = Some(cand);
        }
    };
    for (d, s) in family.nearest_samples(x, m) {
        consider(TangentMatch {
            distance: d,
            delta: grassmann_delta(&s.frame, frame)?,
            witness: s.point().to_vec(),
        });
    }
    if let Ok(p) = project_to_variety(&family.map, x, MAX_ITER) {
        if let Ok(fy) = normal_frame::<f64>(&family.map, &p.point) {
            consider(TangentMatch {
                distance: distance(&p.point, x),
                delta: grassmann_delta(&fy, frame)?,
                witness: p.point,
            });
        }
    }
    best.ok_or(GeometryError::EmptyFamily)
}

/// Membership of a tangent sample in the tangential horn of order `τ`:
/// some `y` with both `|x - y|` and `Δ(T_y, T_x)` below `|x|^τ`.
pub fn tangential_horn_contains(
    family: &SphereSliceFamily,
    sample: &TangentSample,
    tau: f64,
    m: usize,
) -> Result<(bool, TangentMatch), GeometryError> {
    let nx = nonzero(sample.point())?;
    let best = best_tangent_match(family, sample.point(), &sample.frame, m)?;
    Ok((best.score() < nx.powf(tau), best))
}
