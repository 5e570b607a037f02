//! Seeded instance data.
//!
//! Every instance is drawn from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded
//! with `seed_from_u64(seed)`. Stream 0 produces the problem data, stream 1
//! the initial iterate, so changing how an initial point is drawn never
//! changes the instance. Normal variates come from `rand_distr::StandardNormal`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::standard_normal_matrix;

const DATA_STREAM: u64 = 0;
const INIT_STREAM: u64 = 1;

pub fn instance_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(DATA_STREAM);
    rng
}

pub fn initial_point_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(INIT_STREAM);
    rng
}

/// `B^T B + 1e-3 I` with `B` an `n x n` standard normal matrix.
pub fn make_spd<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let b = standard_normal_matrix(rng, n, n);
    let mut a = b.tr_mul(&b);
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
        a[(i, i)] += 1e-3;
    }
    a
}

/// Erdős–Rényi `G(n, p)`: every unordered pair `(i, j)`, `i < j`, visited in
/// lexicographic order and kept with probability `p`.
pub fn random_graph<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Entry mask with each entry observed independently with probability `p`.
pub fn random_mask<R: Rng + ?Sized>(m: usize, n: usize, p: f64, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| if rng.random::<f64>() < p { 1.0 } else { 0.0 })
}
