//! Normal frames, the co-rank function `Λ`, the distance `Δ` between
//! tangent planes, and horn-neighbourhood membership tests.

mod horn;
mod oracle;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{AnalyticMap, EvalError};
use crate::linalg::{dot, orthonormalize, svd, Matrix};
use crate::scalar::Scalar;

pub use horn::{
    best_tangent_match, distance_to_zero_set, horn_contains, tangential_horn_contains, HornWitness,
    TangentMatch,
};
pub use oracle::grassmann_delta_oracle;

/// Singular values at or below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("Jacobian has rank {rank} < {codim} at the point (singular point)")]
    RankDeficient { rank: usize, codim: usize },
    #[error("frames have shapes {left:?} and {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("the point is the origin")]
    AtOrigin,
    #[error("point cloud family is empty")]
    EmptyFamily,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Orthonormal basis of the normal space `ν(T_x)` at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NormalFrame<T: Scalar> {
    point: Vec<T>,
    basis: Vec<Vec<T>>,
}

impl<T: Scalar> NormalFrame<T> {
    /// Orthonormalizes `vectors` into a frame at `point`.
    pub fn from_vectors(point: Vec<T>, vectors: &[Vec<T>]) -> Result<Self, GeometryError> {
        let n = point.len();
        if vectors.is_empty() || vectors.iter().any(|v| v.len() != n) {
            return Err(GeometryError::DimensionMismatch {
                left: (vectors.len(), vectors.first().map_or(0, Vec::len)),
                right: (vectors.len(), n),
            });
        }
        let basis = orthonormalize(vectors, T::lit(RANK_TOL)).ok_or(
            GeometryError::RankDeficient {
                rank: vectors.len() - 1,
                codim: vectors.len(),
            },
        )?;
        Ok(Self { point, basis })
    }

    pub fn point(&self) -> &[T] {
        &self.point
    }

    pub fn basis(&self) -> &[Vec<T>] {
        &self.basis
    }

    /// Codimension `p`.
    pub fn codim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.point.len()
    }
}

/// Numerical rank of a Jacobian under [`RANK_TOL`].
pub fn jacobian_rank<T: Scalar>(jac: &Matrix<T>) -> usize {
    svd(jac).rank(T::lit(RANK_TOL))
}

/// Normal frame of `V(f)` at `x`: the orthonormalized gradient rows.
pub fn normal_frame<T: Scalar>(f: &AnalyticMap, x: &[T]) -> Result<NormalFrame<T>, GeometryError> {
    let jac = f.jacobian(x)?;
    frame_from_jacobian(x, &jac)
}

pub(crate) fn frame_from_jacobian<T: Scalar>(
    x: &[T],
    jac: &Matrix<T>,
) -> Result<NormalFrame<T>, GeometryError> {
    let p = jac.rows();
    let rank = jacobian_rank(jac);
    if rank < p {
        return Err(GeometryError::RankDeficient { rank, codim: p });
    }
    let basis = orthonormalize(&jac.to_rows(), T::lit(RANK_TOL))
        .ok_or(GeometryError::RankDeficient { rank, codim: p })?;
    Ok(NormalFrame {
        point: x.to_vec(),
        basis,
    })
}

/// `Λ` of a Jacobian: its `p`-th singular value when of full row rank `p`,
/// otherwise zero.
pub fn lambda_of_jacobian<T: Scalar>(jac: &Matrix<T>) -> T {
    let p = jac.rows();
    let s = svd(jac);
    if s.rank(T::lit(RANK_TOL)) < p {
        return T::zero();
    }
    s.singular[p - 1]
}

/// `Λf(x) = inf { |d_x f(v)| : v ⟂ ker d_x f, |v| = 1 }`, zero off full rank.
pub fn lambda<T: Scalar>(f: &AnalyticMap, x: &[T]) -> Result<T, EvalError> {
    Ok(lambda_of_jacobian(&f.jacobian(x)?))
}

/// Principal angles between the spans of two orthonormal frames, ascending.
pub fn principal_angles<T: Scalar>(
    a: &NormalFrame<T>,
    b: &NormalFrame<T>,
) -> Result<Vec<T>, GeometryError> {
    if a.codim() != b.codim() || a.ambient() != b.ambient() {
        return Err(GeometryError::DimensionMismatch {
            left: (a.codim(), a.ambient()),
            right: (b.codim(), b.ambient()),
        });
    }
    let p = a.codim();
    let mut cross = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            cross[(i, j)] = dot(&a.basis[i], &b.basis[j]);
        }
    }
    // Residual of b's vectors after projecting onto span(a): its singular
    // values are the sines, accurate where the cosines are not.
    let residual: Vec<Vec<T>> = (0..p)
        .map(|j| {
            let mut r = b.basis[j].clone();
            for i in 0..p {
                let c = cross[(i, j)];
                for (rk, &ak) in r.iter_mut().zip(&a.basis[i]) {
                    *rk -= c * ak;
                }
            }
            r
        })
        .collect();
    let cosines = svd(&cross).singular;
    let sines = svd(&Matrix::from_rows(&residual)).singular;
    Ok((0..p)
        .map(|j| {
            let c = cosines[j].max(T::zero()).min(T::one());
            let s = sines[p - 1 - j].max(T::zero()).min(T::one());
            s.atan2(c)
        })
        .collect())
}

/// Distance between tangent planes through their normal spaces: the
/// infimum over orthonormal bases `B1, B2` of `max_j |v1_j - v2_j|`.
///
/// Writing `θ_j` for the principal angles, the infimum equals
/// `sqrt((4/p) Σ sin²(θ_j/2))`: pairing principal vectors and mixing them
/// with a common rotation equalizes all `p` columns. For `p = 1` this is the
/// chord `2 sin(θ/2)`.
pub fn grassmann_delta<T: Scalar>(a: &NormalFrame<T>, b: &NormalFrame<T>) -> Result<T, GeometryError> {
    let angles = principal_angles(a, b)?;
    let p = T::lit(angles.len() as f64);
    let sum: T = angles
        .iter()
        .map(|&t| {
            let h = (t * T::lit(0.5)).sin();
            h * h
        })
        .sum();
    Ok(T::lit(2.0) * (sum / p).sqrt())
}
