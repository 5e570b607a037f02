use nalgebra::{DVector, DVectorView, DVectorViewMut};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::{
    shape_mismatch, GeometryError, Manifold, Result, TransportKind, Transported, POINT_TOL, TANGENT_TOL,
};

/// Unit sphere `S^{n-1}` in `R^n` with the normalization retraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sphere {
    n: usize,
}

impl Sphere {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    fn check_len(&self, what: &str, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.n {
            return Err(shape_mismatch(what, (self.n, 1), (v.len(), 1)));
        }
        Ok(())
    }
}

// Column kernels shared with the oblique manifold.

pub(crate) fn project_col(x: DVectorView<f64>, z: DVectorView<f64>, mut out: DVectorViewMut<f64>) {
    let c = x.dot(&z);
    out.copy_from(&z);
    out.axpy(-c, &x, 1.0);
}

/// Writes `(x + eta)/|x + eta|` into `out` and returns `|x + eta|`.
pub(crate) fn retract_col(x: DVectorView<f64>, eta: DVectorView<f64>, mut out: DVectorViewMut<f64>) -> Result<f64> {
    out.copy_from(&x);
    out += &eta;
    let nrm = out.norm();
    if !(nrm > 0.0) || !nrm.is_finite() {
        return Err(GeometryError::DegenerateStep("x + eta vanishes on the sphere".into()));
    }
    out /= nrm;
    Ok(nrm)
}

/// `DR_x(eta)[xi] = (I - y y^T) xi / |x + eta|` for `y = R_x(eta)`.
pub(crate) fn transport_col(
    x: DVectorView<f64>,
    eta: DVectorView<f64>,
    y: DVectorView<f64>,
    xi: DVectorView<f64>,
    mut out: DVectorViewMut<f64>,
) -> Result<()> {
    let nrm = (x + eta).norm();
    if !(nrm > 0.0) {
        return Err(GeometryError::DegenerateStep("x + eta vanishes on the sphere".into()));
    }
    let c = y.dot(&xi);
    out.copy_from(&xi);
    out.axpy(-c, &y, 1.0);
    out /= nrm;
    Ok(())
}

impl Manifold for Sphere {
    type Point = DVector<f64>;
    type Tangent = DVector<f64>;
    type Ambient = DVector<f64>;

    fn name(&self) -> &'static str {
        "sphere"
    }

    fn dimension(&self) -> usize {
        self.n - 1
    }

    fn inner(&self, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        self.check_len("point", x)?;
        self.check_len("tangent", u)?;
        self.check_len("tangent", v)?;
        Ok(u.dot(v))
    }

    fn project(&self, x: &DVector<f64>, z: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len("point", x)?;
        self.check_len("ambient", z)?;
        let mut out = DVector::zeros(self.n);
        project_col(x.as_view(), z.as_view(), out.as_view_mut());
        Ok(out)
    }

    fn retract(&self, x: &DVector<f64>, eta: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len("point", x)?;
        self.check_len("tangent", eta)?;
        let mut out = DVector::zeros(self.n);
        retract_col(x.as_view(), eta.as_view(), out.as_view_mut())?;
        Ok(out)
    }

    fn transport_to(
        &self,
        x: &DVector<f64>,
        eta: &DVector<f64>,
        y: &DVector<f64>,
        xi: &DVector<f64>,
    ) -> Result<Transported<DVector<f64>>> {
        self.check_len("tangent", xi)?;
        let mut out = DVector::zeros(self.n);
        transport_col(x.as_view(), eta.as_view(), y.as_view(), xi.as_view(), out.as_view_mut())?;
        Ok(Transported { vector: out, kind: TransportKind::Differentiated })
    }

    fn transport_kind(&self) -> TransportKind {
        TransportKind::Differentiated
    }

    fn check_point(&self, x: &DVector<f64>) -> bool {
        x.len() == self.n && (x.norm() - 1.0).abs() <= POINT_TOL
    }

    fn check_tangent(&self, x: &DVector<f64>, v: &DVector<f64>) -> bool {
        x.len() == self.n && v.len() == self.n && x.dot(v).abs() <= TANGENT_TOL * v.norm().max(1.0)
    }

    fn zero_tangent(&self, _x: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(self.n)
    }

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let v: DVector<f64> = DVector::from_fn(self.n, |_, _| rng.sample(StandardNormal));
        let n = v.norm();
        v / n
    }

    fn random_tangent<R: Rng + ?Sized>(&self, x: &DVector<f64>, rng: &mut R) -> DVector<f64> {
        let z: DVector<f64> = DVector::from_fn(self.n, |_, _| rng.sample(StandardNormal));
        let v = self.project(x, &z).expect("shapes agree");
        let n = v.norm();
        v / n
    }

    fn embed_point(&self, x: &DVector<f64>) -> DVector<f64> {
        x.clone()
    }

    fn embed_tangent(&self, _x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        v.clone()
    }
}
