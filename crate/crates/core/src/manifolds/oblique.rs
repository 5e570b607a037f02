use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::sphere::{project_col, retract_col, transport_col};
use crate::geometry::{
    flatten, shape_mismatch, standard_normal_matrix, Manifold, Result, TransportKind, Transported, POINT_TOL,
    TANGENT_TOL,
};

/// Matrices with unit-norm columns, i.e. a product of `cols` spheres in
/// `R^rows`. All operations act column by column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Oblique {
    rows: usize,
    cols: usize,
}

impl Oblique {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn check_shape(&self, what: &str, m: &DMatrix<f64>) -> Result<()> {
        if m.shape() != (self.rows, self.cols) {
            return Err(shape_mismatch(what, (self.rows, self.cols), m.shape()));
        }
        Ok(())
    }
}

impl Manifold for Oblique {
    type Point = DMatrix<f64>;
    type Tangent = DMatrix<f64>;
    type Ambient = DMatrix<f64>;

    fn name(&self) -> &'static str {
        "oblique"
    }

    fn dimension(&self) -> usize {
        (self.rows - 1) * self.cols
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
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for j in 0..self.cols {
            project_col(x.column(j), z.column(j), out.column_mut(j));
        }
        Ok(out)
    }

    fn retract(&self, x: &DMatrix<f64>, eta: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_shape("point", x)?;
        self.check_shape("tangent", eta)?;
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for j in 0..self.cols {
            retract_col(x.column(j), eta.column(j), out.column_mut(j))?;
        }
        Ok(out)
    }

    fn transport_to(
        &self,
        x: &DMatrix<f64>,
        eta: &DMatrix<f64>,
        y: &DMatrix<f64>,
        xi: &DMatrix<f64>,
    ) -> Result<Transported<DMatrix<f64>>> {
        self.check_shape("tangent", xi)?;
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for j in 0..self.cols {
            transport_col(x.column(j), eta.column(j), y.column(j), xi.column(j), out.column_mut(j))?;
        }
        Ok(Transported { vector: out, kind: TransportKind::Differentiated })
    }

    fn transport_kind(&self) -> TransportKind {
        TransportKind::Differentiated
    }

    fn check_point(&self, x: &DMatrix<f64>) -> bool {
        x.shape() == (self.rows, self.cols) && x.column_iter().all(|c| (c.norm() - 1.0).abs() <= POINT_TOL)
    }

    fn check_tangent(&self, x: &DMatrix<f64>, v: &DMatrix<f64>) -> bool {
        let tol = TANGENT_TOL * v.norm().max(1.0);
        x.shape() == (self.rows, self.cols)
            && v.shape() == x.shape()
            && x.column_iter().zip(v.column_iter()).all(|(a, b)| a.dot(&b).abs() <= tol)
    }

    fn zero_tangent(&self, _x: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::zeros(self.rows, self.cols)
    }

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> DMatrix<f64> {
        let mut z = standard_normal_matrix(rng, self.rows, self.cols);
        for mut c in z.column_iter_mut() {
            let n = c.norm();
            c /= n;
        }
        z
    }

    fn random_tangent<R: Rng + ?Sized>(&self, x: &DMatrix<f64>, rng: &mut R) -> DMatrix<f64> {
        let z = standard_normal_matrix(rng, self.rows, self.cols);
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::Sphere;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn retract_normalizes_columns() {
        let ob = Oblique::new(2, 2);
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let eta = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 1.0, 0.0]);
        let y = ob.retract(&x, &eta).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((y[(0, 0)] - h).abs() < 1e-15 && (y[(1, 0)] - h).abs() < 1e-15);
        assert!((y[(0, 1)] - 3.0 / 10f64.sqrt()).abs() < 1e-15);
        assert!(ob.check_point(&y));
    }

    #[test]
    fn one_column_matches_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ob = Oblique::new(4, 1);
        let s = Sphere::new(4);
        for _ in 0..20 {
            let x = ob.random_point(&mut rng);
            let eta = ob.random_tangent(&x, &mut rng) * 0.7;
            let xi = ob.random_tangent(&x, &mut rng);
            let z = standard_normal_matrix(&mut rng, 4, 1);
            let xs = x.column(0).into_owned();
            let es = eta.column(0).into_owned();
            let is = xi.column(0).into_owned();
            let zs = z.column(0).into_owned();
            let d = |a: &DMatrix<f64>, b: &DVector<f64>| (a.column(0) - b).norm();
            assert!(d(&ob.project(&x, &z).unwrap(), &s.project(&xs, &zs).unwrap()) < 1e-12);
            assert!(d(&ob.retract(&x, &eta).unwrap(), &s.retract(&xs, &es).unwrap()) < 1e-12);
            let t1 = ob.transport_scaled(&x, &eta, &xi).unwrap();
            let t2 = s.transport_scaled(&xs, &es, &is).unwrap();
            assert!(d(&t1.vector, &t2.vector) < 1e-12);
            assert!((t1.scale - t2.scale).abs() < 1e-12);
        }
    }
}
