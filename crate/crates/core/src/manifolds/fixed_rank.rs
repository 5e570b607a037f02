//! The manifold of `m x n` real matrices of rank exactly `k`, embedded in
//! `R^{m x n}`.
//!
//! Points are kept factored as `U S V^T` with orthonormal `U` (`m x k`) and
//! `V` (`n x k`). A tangent vector at that point is the triple
//! `(M, U_p, V_p)` standing for the ambient matrix
//! `U M V^T + U_p V^T + U V_p^T`, with `U^T U_p = 0` and `V^T V_p = 0`.
//! The retraction is the rank-`k` truncated SVD of `X + xi`, computed from a
//! `2k x 2k` core so it never forms an `m x n` matrix.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{hcat, qr_positive};
use crate::geometry::{
    flatten, shape_mismatch, standard_normal_matrix, GeometryError, Manifold, Result, TangentVector,
    TransportKind, Transported, ORTHO_TOL, TANGENT_TOL,
};

/// Singular value below which a retraction is reported as a rank drop.
pub const RANK_DROP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FixedRankPoint {
    pub u: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub v: DMatrix<f64>,
}

impl FixedRankPoint {
    pub fn to_dense(&self) -> DMatrix<f64> {
        &self.u * &self.s * self.v.transpose()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedRankTangent {
    pub m: DMatrix<f64>,
    pub up: DMatrix<f64>,
    pub vp: DMatrix<f64>,
}

impl TangentVector for FixedRankTangent {
    fn scaled(&self, a: f64) -> Self {
        Self { m: &self.m * a, up: &self.up * a, vp: &self.vp * a }
    }

    fn axpy(&mut self, a: f64, other: &Self) {
        TangentVector::axpy(&mut self.m, a, &other.m);
        TangentVector::axpy(&mut self.up, a, &other.up);
        TangentVector::axpy(&mut self.vp, a, &other.vp);
    }

    fn shape(&self) -> Vec<(usize, usize)> {
        vec![self.m.shape(), self.up.shape(), self.vp.shape()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedRank {
    m: usize,
    n: usize,
    k: usize,
}

impl FixedRank {
    pub fn new(m: usize, n: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= m.min(n), "rank k = {k} must lie in 1..=min(m, n) for {m}x{n}");
        Self { m, n, k }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.m, self.n, self.k)
    }

    /// Dense ambient matrix `U M V^T + U_p V^T + U V_p^T`.
    pub fn ambient(&self, x: &FixedRankPoint, t: &FixedRankTangent) -> DMatrix<f64> {
        (&x.u * &t.m + &t.up) * x.v.transpose() + &x.u * t.vp.transpose()
    }

    /// Best rank-`k` approximation of a dense matrix, in factored form.
    pub fn truncate_dense(&self, a: &DMatrix<f64>) -> Result<FixedRankPoint> {
        if a.shape() != (self.m, self.n) {
            return Err(shape_mismatch("dense matrix", (self.m, self.n), a.shape()));
        }
        let (u, s, v) = sorted_svd(a);
        self.truncate(&u, &s, &v)
    }

    fn truncate(&self, u: &DMatrix<f64>, s: &DVector<f64>, v: &DMatrix<f64>) -> Result<FixedRankPoint> {
        let k = self.k;
        if s.len() < k || s[k - 1] < RANK_DROP_TOL {
            return Err(GeometryError::RankDrop(if s.len() < k { 0.0 } else { s[k - 1] }));
        }
        if s.len() > k {
            let scale = s[0].max(1.0);
            if s[k - 1] - s[k] <= 1e-12 * scale {
                return Err(GeometryError::AmbiguousTruncation { k: s[k - 1], next: s[k] });
            }
        }
        Ok(FixedRankPoint {
            u: u.columns(0, k).into_owned(),
            s: DMatrix::from_diagonal(&s.rows(0, k).into_owned()),
            v: v.columns(0, k).into_owned(),
        })
    }

    fn check_point_shape(&self, x: &FixedRankPoint) -> Result<()> {
        let (m, n, k) = (self.m, self.n, self.k);
        if x.u.shape() != (m, k) {
            return Err(shape_mismatch("U", (m, k), x.u.shape()));
        }
        if x.s.shape() != (k, k) {
            return Err(shape_mismatch("S", (k, k), x.s.shape()));
        }
        if x.v.shape() != (n, k) {
            return Err(shape_mismatch("V", (n, k), x.v.shape()));
        }
        Ok(())
    }

    fn check_tangent_shape(&self, t: &FixedRankTangent) -> Result<()> {
        let (m, n, k) = (self.m, self.n, self.k);
        if t.m.shape() != (k, k) {
            return Err(shape_mismatch("M", (k, k), t.m.shape()));
        }
        if t.up.shape() != (m, k) {
            return Err(shape_mismatch("U_p", (m, k), t.up.shape()));
        }
        if t.vp.shape() != (n, k) {
            return Err(shape_mismatch("V_p", (n, k), t.vp.shape()));
        }
        Ok(())
    }

    /// Tangent projection given the two products `Z V` and `Z^T U`.
    fn project_from_products(&self, x: &FixedRankPoint, zv: DMatrix<f64>, ztu: DMatrix<f64>) -> FixedRankTangent {
        let m = x.u.transpose() * &zv;
        let up = zv - &x.u * &m;
        let vp = ztu - &x.v * m.transpose();
        FixedRankTangent { m, up, vp }
    }
}

/// SVD with singular values sorted in decreasing order.
pub(crate) fn sorted_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let s = svd.singular_values;
    let residual = (&u * DMatrix::from_diagonal(&s) * &vt - a).norm();
    if !(residual <= SVD_RESIDUAL_TOL * a.norm().max(f64::MIN_POSITIVE)) {
        // nalgebra's bidiagonal iteration can return a wrong factorization for
        // some rank-deficient inputs
        log::debug!("svd residual {residual:e}, falling back to eigendecomposition");
        return gram_svd(a);
    }
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let u_sorted = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let v_sorted = DMatrix::from_fn(vt.ncols(), order.len(), |r, c| vt[(order[c], r)]);
    let s_sorted = DVector::from_iterator(order.len(), order.iter().map(|&i| s[i]));
    (u_sorted, s_sorted, v_sorted)
}

const SVD_RESIDUAL_TOL: f64 = 1e-10;

/// Thin SVD through the eigendecomposition of `A^T A`. Accurate for the
/// singular pairs well above `sqrt(eps) * sigma_max`; left vectors of the
/// negligible ones are set to zero.
fn gram_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let r = a.nrows().min(a.ncols());
    let eig = (a.transpose() * a).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    order.truncate(r);
    let v = DMatrix::from_fn(a.ncols(), r, |row, c| eig.eigenvectors[(row, order[c])]);
    let s = DVector::from_iterator(r, order.iter().map(|&i| eig.eigenvalues[i].max(0.0).sqrt()));
    let av = a * &v;
    let floor = f64::EPSILON.sqrt() * s.max();
    let u = DMatrix::from_fn(a.nrows(), r, |row, c| if s[c] > floor { av[(row, c)] / s[c] } else { 0.0 });
    (u, s, v)
}

impl Manifold for FixedRank {
    type Point = FixedRankPoint;
    type Tangent = FixedRankTangent;
    type Ambient = DMatrix<f64>;

    fn name(&self) -> &'static str {
        "fixed_rank"
    }

    fn dimension(&self) -> usize {
        (self.m + self.n - self.k) * self.k
    }

    fn inner(&self, x: &FixedRankPoint, a: &FixedRankTangent, b: &FixedRankTangent) -> Result<f64> {
        self.check_point_shape(x)?;
        self.check_tangent_shape(a)?;
        self.check_tangent_shape(b)?;
        Ok(a.m.dot(&b.m) + a.up.dot(&b.up) + a.vp.dot(&b.vp))
    }

    fn project(&self, x: &FixedRankPoint, z: &DMatrix<f64>) -> Result<FixedRankTangent> {
        self.check_point_shape(x)?;
        if z.shape() != (self.m, self.n) {
            return Err(shape_mismatch("ambient", (self.m, self.n), z.shape()));
        }
        Ok(self.project_from_products(x, z * &x.v, z.transpose() * &x.u))
    }

    fn retract(&self, x: &FixedRankPoint, t: &FixedRankTangent) -> Result<FixedRankPoint> {
        self.check_point_shape(x)?;
        self.check_tangent_shape(t)?;
        let k = self.k;
        // X + xi = [U U_p] [[S + M, I], [I, 0]] [V V_p]^T
        let (qu, ru) = qr_positive(&hcat(&x.u, &t.up));
        let (qv, rv) = qr_positive(&hcat(&x.v, &t.vp));
        let mut core = DMatrix::zeros(2 * k, 2 * k);
        core.view_mut((0, 0), (k, k)).copy_from(&(&x.s + &t.m));
        core.view_mut((0, k), (k, k)).fill_with_identity();
        core.view_mut((k, 0), (k, k)).fill_with_identity();
        let small = &ru * core * rv.transpose();
        let (uc, s, vc) = sorted_svd(&small);
        let trunc = self.truncate(&uc, &s, &vc)?;
        Ok(FixedRankPoint { u: qu * trunc.u, s: trunc.s, v: qv * trunc.v })
    }

    fn transport_to(
        &self,
        x: &FixedRankPoint,
        _eta: &FixedRankTangent,
        y: &FixedRankPoint,
        xi: &FixedRankTangent,
    ) -> Result<Transported<FixedRankTangent>> {
        self.check_point_shape(y)?;
        self.check_tangent_shape(xi)?;
        // Z = (U M + U_p) V^T + U V_p^T, applied through its factors.
        let left = &x.u * &xi.m + &xi.up;
        let zv = &left * (x.v.transpose() * &y.v) + &x.u * (xi.vp.transpose() * &y.v);
        let ztu = &x.v * (left.transpose() * &y.u) + &xi.vp * (x.u.transpose() * &y.u);
        Ok(Transported { vector: self.project_from_products(y, zv, ztu), kind: TransportKind::Projection })
    }

    fn transport_kind(&self) -> TransportKind {
        TransportKind::Projection
    }

    fn check_point(&self, x: &FixedRankPoint) -> bool {
        if self.check_point_shape(x).is_err() {
            return false;
        }
        let ik = DMatrix::<f64>::identity(self.k, self.k);
        let ortho = (x.u.transpose() * &x.u - &ik).amax() <= ORTHO_TOL
            && (x.v.transpose() * &x.v - &ik).amax() <= ORTHO_TOL;
        let smin = x.s.clone().singular_values().min();
        ortho && smin > RANK_DROP_TOL
    }

    fn check_tangent(&self, x: &FixedRankPoint, t: &FixedRankTangent) -> bool {
        if self.check_point_shape(x).is_err() || self.check_tangent_shape(t).is_err() {
            return false;
        }
        let size = (t.m.norm_squared() + t.up.norm_squared() + t.vp.norm_squared()).sqrt();
        let tol = TANGENT_TOL * size.max(1.0);
        (x.u.transpose() * &t.up).amax() <= tol && (x.v.transpose() * &t.vp).amax() <= tol
    }

    fn zero_tangent(&self, _x: &FixedRankPoint) -> FixedRankTangent {
        let k = self.k;
        FixedRankTangent {
            m: DMatrix::zeros(k, k),
            up: DMatrix::zeros(self.m, k),
            vp: DMatrix::zeros(self.n, k),
        }
    }

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> FixedRankPoint {
        let u = qr_positive(&standard_normal_matrix(rng, self.m, self.k)).0;
        let v = qr_positive(&standard_normal_matrix(rng, self.n, self.k)).0;
        let mut s: Vec<f64> = (0..self.k).map(|_| rng.random::<f64>()).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        FixedRankPoint { u, s: DMatrix::from_diagonal(&DVector::from_vec(s)), v }
    }

    fn random_tangent<R: Rng + ?Sized>(&self, x: &FixedRankPoint, rng: &mut R) -> FixedRankTangent {
        let m = standard_normal_matrix(rng, self.k, self.k);
        let gu = standard_normal_matrix(rng, self.m, self.k);
        let gv = standard_normal_matrix(rng, self.n, self.k);
        let up = &gu - &x.u * (x.u.transpose() * &gu);
        let vp = &gv - &x.v * (x.v.transpose() * &gv);
        let t = FixedRankTangent { m, up, vp };
        let nrm = self.norm(x, &t).expect("shapes agree");
        t.scaled(1.0 / nrm)
    }

    fn embed_point(&self, x: &FixedRankPoint) -> DVector<f64> {
        flatten(&x.to_dense())
    }

    fn embed_tangent(&self, x: &FixedRankPoint, t: &FixedRankTangent) -> DVector<f64> {
        flatten(&self.ambient(x, t))
    }
}
