//! Concrete geometries: Euclidean space, the unit sphere, the oblique
//! manifold, the Stiefel manifold and the embedded fixed-rank manifold.

mod euclidean;
mod fixed_rank;
mod oblique;
mod sphere;
mod stiefel;

pub use euclidean::Euclidean;
pub use fixed_rank::{FixedRank, FixedRankPoint, FixedRankTangent};
pub use oblique::Oblique;
pub use sphere::Sphere;
pub use stiefel::Stiefel;

use nalgebra::DMatrix;

/// Thin QR with the diagonal of `R` made nonnegative, so the factorization
/// (and every retraction built on it) is deterministic.
pub(crate) fn qr_positive(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let qr = a.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for j in 0..r.nrows() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
            r.row_mut(j).neg_mut();
        }
    }
    (q, r)
}

pub(crate) fn hcat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}
