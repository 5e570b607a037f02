//! The manifold contract shared by every solver component.
//!
//! A [`Manifold`] supplies the metric, the orthogonal projection onto tangent
//! spaces, a retraction and a vector transport. The transport is either the
//! exact differentiated retraction `DR_x(eta)[xi]` or, where no cheap closed
//! form exists, the orthogonal projection of `xi` onto the tangent space at
//! `R_x(eta)`. Which one was used travels with the result as a
//! [`TransportKind`] so downstream diagnostics can tell them apart.

use std::fmt::Debug;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use thiserror::Error;

/// Tolerance on a point's defining constraint (unit norms).
pub const POINT_TOL: f64 = 1e-12;
/// Tolerance on orthonormality constraints accumulated through QR/SVD.
pub const ORTHO_TOL: f64 = 1e-10;
/// Tolerance on tangency tests, relative to `max(1, |xi|)`.
pub const TANGENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("degenerate retraction step: {0}")]
    DegenerateStep(String),
    #[error("degenerate transport: transported vector vanished for a nonzero input")]
    DegenerateTransport,
    #[error("ambiguous rank truncation: singular values {k} and {next} coincide")]
    AmbiguousTruncation { k: f64, next: f64 },
    #[error("rank drop: k-th singular value {0:e} below threshold")]
    RankDrop(f64),
}

pub type Result<T> = std::result::Result<T, GeometryError>;

pub(crate) fn shape_mismatch(what: &str, expected: (usize, usize), got: (usize, usize)) -> GeometryError {
    GeometryError::Contract(format!(
        "{what}: expected shape {}x{}, got {}x{}",
        expected.0, expected.1, got.0, got.1
    ))
}

/// Linear-space operations on tangent vectors that share a base point.
pub trait TangentVector: Clone + Debug + Send + Sync {
    fn scaled(&self, a: f64) -> Self;
    /// `self += a * other`
    fn axpy(&mut self, a: f64, other: &Self);
    /// Coordinate-wise shape, used for contract checks.
    fn shape(&self) -> Vec<(usize, usize)>;

    fn lincomb(a: f64, u: &Self, b: f64, v: &Self) -> Self {
        let mut out = u.scaled(a);
        out.axpy(b, v);
        out
    }
}

impl TangentVector for DVector<f64> {
    fn scaled(&self, a: f64) -> Self {
        self * a
    }
    fn axpy(&mut self, a: f64, other: &Self) {
        for (s, o) in self.as_mut_slice().iter_mut().zip(other.as_slice()) {
            *s += a * o;
        }
    }
    fn shape(&self) -> Vec<(usize, usize)> {
        vec![(self.nrows(), 1)]
    }
}

impl TangentVector for DMatrix<f64> {
    fn scaled(&self, a: f64) -> Self {
        self * a
    }
    fn axpy(&mut self, a: f64, other: &Self) {
        for (s, o) in self.as_mut_slice().iter_mut().zip(other.as_slice()) {
            *s += a * o;
        }
    }
    fn shape(&self) -> Vec<(usize, usize)> {
        vec![self.shape()]
    }
}

/// How a transported vector was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportKind {
    /// Exact differentiated retraction.
    Differentiated,
    /// Orthogonal projection onto the tangent space at the new point.
    Projection,
}

#[derive(Debug, Clone)]
pub struct Transported<T> {
    pub vector: T,
    pub kind: TransportKind,
}

/// A transported vector rescaled so that its norm never exceeds the norm of
/// the vector it came from.
#[derive(Debug, Clone)]
pub struct ScaledTransport<T> {
    pub vector: T,
    /// The unscaled transport, kept for diagnostics.
    pub unscaled: T,
    /// `min(1, |xi|_x / |T(xi)|_y)`
    pub scale: f64,
    pub source_norm: f64,
    pub unscaled_norm: f64,
    pub kind: TransportKind,
}

pub trait Manifold: Debug + Send + Sync {
    type Point: Clone + Debug + Send + Sync;
    type Tangent: TangentVector;
    /// Ambient (embedding space) representation used for Euclidean gradients.
    type Ambient: Clone + Debug + Send + Sync;

    fn name(&self) -> &'static str;

    /// Intrinsic dimension.
    fn dimension(&self) -> usize;

    fn inner(&self, x: &Self::Point, u: &Self::Tangent, v: &Self::Tangent) -> Result<f64>;

    fn norm(&self, x: &Self::Point, u: &Self::Tangent) -> Result<f64> {
        Ok(self.inner(x, u, u)?.max(0.0).sqrt())
    }

    fn project(&self, x: &Self::Point, z: &Self::Ambient) -> Result<Self::Tangent>;

    fn retract(&self, x: &Self::Point, eta: &Self::Tangent) -> Result<Self::Point>;

    /// Transport `xi` from `x` to `y = R_x(eta)`, with `y` already computed.
    fn transport_to(
        &self,
        x: &Self::Point,
        eta: &Self::Tangent,
        y: &Self::Point,
        xi: &Self::Tangent,
    ) -> Result<Transported<Self::Tangent>>;

    /// The transport this manifold provides natively.
    fn transport_kind(&self) -> TransportKind;

    fn transport_diff(
        &self,
        x: &Self::Point,
        eta: &Self::Tangent,
        xi: &Self::Tangent,
    ) -> Result<Transported<Self::Tangent>> {
        let y = self.retract(x, eta)?;
        self.transport_to(x, eta, &y, xi)
    }

    /// Scaled transport: `s * T(xi)` with `s = min(1, |xi| / |T(xi)|)`.
    fn transport_scaled(
        &self,
        x: &Self::Point,
        eta: &Self::Tangent,
        xi: &Self::Tangent,
    ) -> Result<ScaledTransport<Self::Tangent>> {
        let y = self.retract(x, eta)?;
        let t = self.transport_to(x, eta, &y, xi)?;
        let source_norm = self.norm(x, xi)?;
        scale_transport(self, &y, source_norm, t)
    }

    fn check_point(&self, x: &Self::Point) -> bool;

    fn check_tangent(&self, x: &Self::Point, v: &Self::Tangent) -> bool;

    fn zero_tangent(&self, x: &Self::Point) -> Self::Tangent;

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Point;

    /// A random tangent vector at `x` with unit norm.
    fn random_tangent<R: Rng + ?Sized>(&self, x: &Self::Point, rng: &mut R) -> Self::Tangent;

    /// Flattened ambient coordinates of a point (e.g. `U S V^T` for fixed rank).
    fn embed_point(&self, x: &Self::Point) -> DVector<f64>;

    /// Flattened ambient coordinates of a tangent vector at `x`.
    fn embed_tangent(&self, x: &Self::Point, v: &Self::Tangent) -> DVector<f64>;
}

/// Apply the norm-capping scale to an already transported vector.
pub fn scale_transport<M: Manifold + ?Sized>(
    manifold: &M,
    y: &M::Point,
    source_norm: f64,
    transported: Transported<M::Tangent>,
) -> Result<ScaledTransport<M::Tangent>> {
    let unscaled_norm = manifold.norm(y, &transported.vector)?;
    if !unscaled_norm.is_finite() || (unscaled_norm == 0.0 && source_norm > 0.0) {
        return Err(GeometryError::DegenerateTransport);
    }
    let scale = if unscaled_norm <= source_norm { 1.0 } else { source_norm / unscaled_norm };
    let vector = if scale == 1.0 {
        transported.vector.clone()
    } else {
        transported.vector.scaled(scale)
    };
    Ok(ScaledTransport {
        vector,
        unscaled: transported.vector,
        scale,
        source_norm,
        unscaled_norm,
        kind: transported.kind,
    })
}

pub(crate) fn sym(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

pub(crate) fn standard_normal_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    use rand_distr::StandardNormal;
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub(crate) fn flatten(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::Sphere;

    #[test]
    fn scaled_transport_caps_norm() {
        let s = Sphere::new(2);
        let y = DVector::from_vec(vec![1.0, 0.0]);
        let t = Transported { vector: DVector::from_vec(vec![0.0, 2.0]), kind: TransportKind::Differentiated };
        let out = scale_transport(&s, &y, 1.0, t).unwrap();
        assert_eq!(out.scale, 0.5);
        assert!((out.vector.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scaled_transport_keeps_short_vectors() {
        let s = Sphere::new(2);
        let y = DVector::from_vec(vec![1.0, 0.0]);
        let t = Transported { vector: DVector::from_vec(vec![0.0, 0.5]), kind: TransportKind::Differentiated };
        let out = scale_transport(&s, &y, 1.0, t).unwrap();
        assert_eq!(out.scale, 1.0);
        assert_eq!(out.vector, out.unscaled);
    }

    #[test]
    fn vanished_transport_is_degenerate() {
        let s = Sphere::new(2);
        let y = DVector::from_vec(vec![1.0, 0.0]);
        let t = Transported { vector: DVector::zeros(2), kind: TransportKind::Differentiated };
        assert_eq!(scale_transport(&s, &y, 1.0, t).unwrap_err(), GeometryError::DegenerateTransport);
    }
}
