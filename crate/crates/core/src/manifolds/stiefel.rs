use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::qr_positive;
use crate::geometry::{
    flatten, shape_mismatch, standard_normal_matrix, sym, GeometryError, Manifold, Result, TransportKind,
    Transported, ORTHO_TOL, TANGENT_TOL,
};

/// `St(p, n)`: `n x p` matrices with orthonormal columns, QR retraction and
/// projection-based transport.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stiefel {
    n: usize,
    p: usize,
}

impl Stiefel {
    /// Points are `n x p` with `p <= n`.
    pub fn new(n: usize, p: usize) -> Self {
        assert!(p <= n, "Stiefel manifold needs p <= n (got p = {p}, n = {n})");
        Self { n, p }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n, self.p)
    }

    fn check_shape(&self, what: &str, m: &DMatrix<f64>) -> Result<()> {
        if m.shape() != (self.n, self.p) {
            return Err(shape_mismatch(what, (self.n, self.p), m.shape()));
        }
        Ok(())
    }
}

impl Manifold for Stiefel {
    type Point = DMatrix<f64>;
    type Tangent = DMatrix<f64>;
    type Ambient = DMatrix<f64>;

    fn name(&self) -> &'static str {
        "stiefel"
    }

    fn dimension(&self) -> usize {
        self.n * self.p - self.p * (self.p + 1) / 2
    }

    fn inner(&self, x: &DMatrix<f64>, u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<f64> {
        self.check_shape("point", x)?;
        self.check_shape("tangent", u)?;
        self.check_shape("tangent", v)?;
        Ok(u.dot(v))
    }

    fn project(&self, x: &DMatrix<f64>, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_shape("point", x)?;
        self.check_shape("ambient", z)?;
        Ok(z - x * sym(&(x.transpose() * z)))
    }

    fn retract(&self, x: &DMatrix<f64>, eta: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_shape("point", x)?;
        self.check_shape("tangent", eta)?;
        let (q, r) = qr_positive(&(x + eta));
        if (0..self.p).any(|j| !(r[(j, j)] > 0.0)) {
            return Err(GeometryError::DegenerateStep("X + eta is rank deficient".into()));
        }
        Ok(q)
    }

    fn transport_to(
        &self,
        _x: &DMatrix<f64>,
        _eta: &DMatrix<f64>,
        y: &DMatrix<f64>,
        xi: &DMatrix<f64>,
    ) -> Result<Transported<DMatrix<f64>>> {
        Ok(Transported { vector: self.project(y, xi)?, kind: TransportKind::Projection })
    }

    fn transport_kind(&self) -> TransportKind {
        TransportKind::Projection
    }

    fn check_point(&self, x: &DMatrix<f64>) -> bool {
        x.shape() == (self.n, self.p)
            && (x.transpose() * x - DMatrix::identity(self.p, self.p)).amax() <= ORTHO_TOL
    }

    fn check_tangent(&self, x: &DMatrix<f64>, v: &DMatrix<f64>) -> bool {
        if x.shape() != (self.n, self.p) || v.shape() != x.shape() {
            return false;
        }
        let xtv = x.transpose() * v;
        (&xtv + xtv.transpose()).amax() <= TANGENT_TOL * v.norm().max(1.0)
    }

    fn zero_tangent(&self, _x: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::zeros(self.n, self.p)
    }

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> DMatrix<f64> {
        qr_positive(&standard_normal_matrix(rng, self.n, self.p)).0
    }

    fn random_tangent<R: Rng + ?Sized>(&self, x: &DMatrix<f64>, rng: &mut R) -> DMatrix<f64> {
        let z = standard_normal_matrix(rng, self.n, self.p);
        let v = self.project(x, &z).expect("shapes agree");
        let n = v.norm();
        v / n
    }

    fn embed_point(&self, x: &DMatrix<f64>) -> DVector<f64> {
        flatten(x)
    }

    fn embed_tangent(&self, _x: &DMatrix<f64>, v: &DMatrix<f64>) -> DVector<f64> {
        flatten(v)
    }
}
