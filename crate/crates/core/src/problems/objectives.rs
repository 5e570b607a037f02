//! The seven benchmark cost functions.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::generators::{make_spd, random_graph, random_mask};
use super::Objective;
use crate::geometry::{standard_normal_matrix, Result};
use crate::manifolds::{FixedRank, FixedRankPoint, Oblique, Sphere, Stiefel};

/// `f(x) = x^T A x` on the unit sphere.
#[derive(Debug, Clone)]
pub struct Rayleigh {
    sphere: Sphere,
    a: DMatrix<f64>,
}

impl Rayleigh {
    pub fn new(a: DMatrix<f64>) -> Self {
        assert!(a.is_square(), "Rayleigh quotient needs a square matrix");
        Self { sphere: Sphere::new(a.nrows()), a }
    }

    pub fn generate<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self::new(make_spd(n, rng))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }
}

impl Objective for Rayleigh {
    type Space = Sphere;

    fn manifold(&self) -> &Sphere {
        &self.sphere
    }

    fn cost(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.a * x))
    }

    fn euclidean_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x * 2.0
    }

    fn cost_and_gradient(&self, x: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        let ax = &self.a * x;
        let f = x.dot(&ax);
        // 2 (A x - (x^T A x) x)
        let mut g = ax * 2.0;
        g.axpy(-2.0 * f, x, 1.0);
        Ok((f, g))
    }
}

/// Quartic `sum x_i^4 + 2 sum_{(i,j) in E} x_i^2 x_j^2` on the sphere, whose
/// global minimum is the reciprocal of the graph's stability number.
#[derive(Debug, Clone)]
pub struct Stability {
    sphere: Sphere,
    edges: Vec<(usize, usize)>,
    adjacency: DMatrix<f64>,
}

impl Stability {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adjacency = DMatrix::zeros(n, n);
        for &(i, j) in &edges {
            assert!(i < n && j < n && i != j, "edge ({i}, {j}) out of range for {n} vertices");
            adjacency[(i, j)] = 1.0;
            adjacency[(j, i)] = 1.0;
        }
        Self { sphere: Sphere::new(n), edges, adjacency }
    }

    pub fn generate<R: Rng + ?Sized>(n: usize, edge_prob: f64, rng: &mut R) -> Self {
        Self::new(n, random_graph(n, edge_prob, rng))
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.nrows()
    }
}

impl Objective for Stability {
    type Space = Sphere;

    fn manifold(&self) -> &Sphere {
        &self.sphere
    }

    fn cost(&self, x: &DVector<f64>) -> f64 {
        let y = x.component_mul(x);
        y.dot(&y) + y.dot(&(&self.adjacency * &y))
    }

    fn euclidean_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let y = x.component_mul(x);
        let inner = &y + &self.adjacency * &y;
        x.component_mul(&inner) * 4.0
    }
}

/// `f(X) = tr(X^T A X N)` on `St(p, n)` with `N = diag(1, ..., p)`.
#[derive(Debug, Clone)]
pub struct Brockett {
    stiefel: Stiefel,
    a: DMatrix<f64>,
    weights: DVector<f64>,
}

impl Brockett {
    pub fn new(a: DMatrix<f64>, weights: DVector<f64>) -> Self {
        assert!(a.is_square());
        Self { stiefel: Stiefel::new(a.nrows(), weights.len()), a, weights }
    }

    pub fn generate<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> Self {
        let weights = DVector::from_fn(p, |i, _| (i + 1) as f64);
        Self::new(make_spd(n, rng), weights)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    fn scale_columns(&self, mut m: DMatrix<f64>) -> DMatrix<f64> {
        for (j, mut c) in m.column_iter_mut().enumerate() {
            c *= self.weights[j];
        }
        m
    }
}

impl Objective for Brockett {
    type Space = Stiefel;

    fn manifold(&self) -> &Stiefel {
        &self.stiefel
    }

    fn cost(&self, x: &DMatrix<f64>) -> f64 {
        let ax = &self.a * x;
        x.column_iter().zip(ax.column_iter()).enumerate().map(|(j, (xc, ac))| self.weights[j] * xc.dot(&ac)).sum()
    }

    fn euclidean_gradient(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.scale_columns(&self.a * x * 2.0)
    }
}

/// `f(X) = |X - A|_F^2` over matrices with unit-norm columns.
#[derive(Debug, Clone)]
pub struct ClosestUnitNorm {
    oblique: Oblique,
    a: DMatrix<f64>,
}

impl ClosestUnitNorm {
    pub fn new(a: DMatrix<f64>) -> Self {
        Self { oblique: Oblique::new(a.nrows(), a.ncols()), a }
    }

    pub fn generate<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Self {
        Self::new(standard_normal_matrix(rng, m, n))
    }

    pub fn target(&self) -> &DMatrix<f64> {
        &self.a
    }
}

impl Objective for ClosestUnitNorm {
    type Space = Oblique;

    fn manifold(&self) -> &Oblique {
        &self.oblique
    }

    fn cost(&self, x: &DMatrix<f64>) -> f64 {
        sum_of_squares((x - &self.a).as_slice())
    }

    fn euclidean_gradient(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        (x - &self.a) * 2.0
    }
}

/// `f(X) = sum_i |X^T C_i X - ddiag(X^T C_i X)|_F^2` on the oblique manifold.
#[derive(Debug, Clone)]
pub struct OffDiagonal {
    oblique: Oblique,
    mats: Vec<DMatrix<f64>>,
}

fn off_diagonal(mut m: DMatrix<f64>) -> DMatrix<f64> {
    m.fill_diagonal(0.0);
    m
}

impl OffDiagonal {
    pub fn new(mats: Vec<DMatrix<f64>>, p: usize) -> Self {
        let n = mats.first().map(|c| c.nrows()).expect("at least one matrix");
        assert!(mats.iter().all(|c| c.shape() == (n, n)));
        Self { oblique: Oblique::new(n, p), mats }
    }

    /// `C_i = (B_i + B_i^T) / 2` with standard normal `B_i`.
    pub fn generate<R: Rng + ?Sized>(num_mats: usize, n: usize, p: usize, rng: &mut R) -> Self {
        let mats = (0..num_mats)
            .map(|_| {
                let b = standard_normal_matrix(rng, n, n);
                (&b + b.transpose()) * 0.5
            })
            .collect();
        Self::new(mats, p)
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.mats
    }
}

impl Objective for OffDiagonal {
    type Space = Oblique;

    fn manifold(&self) -> &Oblique {
        &self.oblique
    }

    fn cost(&self, x: &DMatrix<f64>) -> f64 {
        self.mats.iter().map(|c| off_diagonal(x.transpose() * c * x).norm_squared()).sum()
    }

    fn euclidean_gradient(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(x.nrows(), x.ncols());
        for c in &self.mats {
            let cx = c * x;
            let e = off_diagonal(x.transpose() * &cx);
            g += cx * e * 4.0;
        }
        g
    }
}

/// `f(X) = |P_Omega(X - A)|_F^2` on the rank-`k` manifold. With a full mask
/// this is the plain low-rank approximation problem.
#[derive(Debug, Clone)]
pub struct MaskedLowRank {
    space: FixedRank,
    a: DMatrix<f64>,
    mask: Option<DMatrix<f64>>,
}

impl MaskedLowRank {
    pub fn approximation(a: DMatrix<f64>, k: usize) -> Self {
        Self { space: FixedRank::new(a.nrows(), a.ncols(), k), a, mask: None }
    }

    pub fn completion(a: DMatrix<f64>, mask: DMatrix<f64>, k: usize) -> Self {
        assert_eq!(a.shape(), mask.shape());
        Self { space: FixedRank::new(a.nrows(), a.ncols(), k), a, mask: Some(mask) }
    }

    pub fn generate_approximation<R: Rng + ?Sized>(m: usize, n: usize, k: usize, rng: &mut R) -> Self {
        Self::approximation(standard_normal_matrix(rng, m, n), k)
    }

    pub fn generate_completion<R: Rng + ?Sized>(m: usize, n: usize, k: usize, fill: f64, rng: &mut R) -> Self {
        let a = standard_normal_matrix(rng, m, n);
        let mask = random_mask(m, n, fill, rng);
        Self::completion(a, mask, k)
    }

    pub fn target(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn mask(&self) -> Option<&DMatrix<f64>> {
        self.mask.as_ref()
    }

    fn residual(&self, x: &FixedRankPoint) -> DMatrix<f64> {
        let r = x.to_dense() - &self.a;
        match &self.mask {
            Some(mask) => r.component_mul(mask),
            None => r,
        }
    }
}

impl Objective for MaskedLowRank {
    type Space = FixedRank;

    fn manifold(&self) -> &FixedRank {
        &self.space
    }

    fn cost(&self, x: &FixedRankPoint) -> f64 {
        sum_of_squares(self.residual(x).as_slice())
    }

    fn euclidean_gradient(&self, x: &FixedRankPoint) -> DMatrix<f64> {
        self.residual(x) * 2.0
    }

    fn cost_and_gradient(&self, x: &FixedRankPoint) -> Result<(f64, crate::manifolds::FixedRankTangent)> {
        use crate::geometry::Manifold;
        let r = self.residual(x);
        let f = sum_of_squares(r.as_slice());
        Ok((f, self.space.project(x, &(r * 2.0))?))
    }
}

/// `sum v_i^2` with exact products (FMA) and Neumaier summation, so large
/// residual costs are resolved to about one ulp near a minimizer.
pub(crate) fn sum_of_squares(values: &[f64]) -> f64 {
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    let mut add = |t: f64| {
        let s = sum + t;
        comp += if sum.abs() >= t.abs() { (sum - s) + t } else { (t - s) + sum };
        sum = s;
    };
    for &v in values {
        let p = v * v;
        add(p);
        add(v.mul_add(v, -p));
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_keeps_small_terms() {
        let mut v = vec![1e8];
        v.extend(std::iter::repeat_n(1.0, 10_000));
        assert_eq!(sum_of_squares(&v), 1e16 + 1e4);
        assert_eq!(sum_of_squares(&[3.0, 4.0]), 25.0);
    }
}
