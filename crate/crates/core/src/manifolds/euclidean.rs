use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::{shape_mismatch, Manifold, Result, TransportKind, Transported};

/// Flat `R^n` with retraction `x + eta` and identity transport.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Euclidean {
    n: usize,
}

impl Euclidean {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    fn check_len(&self, what: &str, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.n {
            return Err(shape_mismatch(what, (self.n, 1), (v.len(), 1)));
        }
        Ok(())
    }
}

impl Manifold for Euclidean {
    type Point = DVector<f64>;
    type Tangent = DVector<f64>;
    type Ambient = DVector<f64>;

    fn name(&self) -> &'static str {
        "euclidean"
    }

    fn dimension(&self) -> usize {
        self.n
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
        Ok(z.clone())
    }

    fn retract(&self, x: &DVector<f64>, eta: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len("point", x)?;
        self.check_len("tangent", eta)?;
        Ok(x + eta)
    }

    fn transport_to(
        &self,
        _x: &DVector<f64>,
        _eta: &DVector<f64>,
        _y: &DVector<f64>,
        xi: &DVector<f64>,
    ) -> Result<Transported<DVector<f64>>> {
        self.check_len("tangent", xi)?;
        Ok(Transported { vector: xi.clone(), kind: TransportKind::Differentiated })
    }

    fn transport_kind(&self) -> TransportKind {
        TransportKind::Differentiated
    }

    fn check_point(&self, x: &DVector<f64>) -> bool {
        x.len() == self.n && x.iter().all(|v| v.is_finite())
    }

    fn check_tangent(&self, x: &DVector<f64>, v: &DVector<f64>) -> bool {
        self.check_point(x) && v.len() == self.n
    }

    fn zero_tangent(&self, _x: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(self.n)
    }

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        DVector::from_fn(self.n, |_, _| rng.sample(StandardNormal))
    }

    fn random_tangent<R: Rng + ?Sized>(&self, _x: &DVector<f64>, rng: &mut R) -> DVector<f64> {
        let v: DVector<f64> = DVector::from_fn(self.n, |_, _| rng.sample(StandardNormal));
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retract_adds() {
        let e = Euclidean::new(2);
        let x = DVector::from_vec(vec![1.0, 2.0]);
        let eta = DVector::from_vec(vec![1.0, -1.0]);
        assert_eq!(e.retract(&x, &eta).unwrap(), DVector::from_vec(vec![2.0, 1.0]));
    }

    #[test]
    fn transport_is_never_rescaled() {
        let e = Euclidean::new(3);
        let x = DVector::from_vec(vec![0.0, 1.0, 2.0]);
        let eta = DVector::from_vec(vec![5.0, -1.0, 0.5]);
        let xi = DVector::from_vec(vec![3.0, 4.0, 0.0]);
        let out = e.transport_scaled(&x, &eta, &xi).unwrap();
        assert_eq!(out.scale, 1.0);
        assert_eq!(out.vector, xi);
    }
}
