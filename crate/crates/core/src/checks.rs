//! Self-checks run by `hybrid-rcg check`: geometry properties, gradient
//! finite differences, beta formula reductions and line-search conditions.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{standard_normal_matrix, Manifold, Result as GeoResult, TangentVector, TransportKind};
use crate::linesearch::LineSearchStatus;
use crate::manifolds::{Euclidean, FixedRank, Oblique, Sphere, Stiefel};
use crate::problems::{initial_point_rng, InstanceSpec, Objective, ProblemId};
use crate::solver::{sigma, BetaInputs, BetaRule, ConjugateGradient, SolverConfig};
use crate::with_objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Geometry,
    Gradients,
    Beta,
    LineSearch,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Geometry, Suite::Gradients, Suite::Beta, Suite::LineSearch];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::Gradients => "gradients",
            Suite::Beta => "beta",
            Suite::LineSearch => "linesearch",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| format!("unknown suite `{s}` (expected geometry, gradients, beta or linesearch)"))
    }
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub trials: usize,
    pub seed: u64,
    /// Perturb every objective's gradient; the gradient suite must then fail.
    pub corrupt_gradient: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self { trials: 100, seed: 7, corrupt_gradient: false }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub suite: Suite,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} {} ({} cases", self.suite, self.cases)?;
        if let Some(first) = self.failures.first() {
            write!(f, ", {} failed; first: {first}", self.failures.len())?;
        }
        write!(f, ")")
    }
}

pub fn run(suite: Suite, opts: &CheckOptions) -> SuiteResult {
    let mut r = SuiteResult { suite, cases: 0, failures: Vec::new() };
    match suite {
        Suite::Geometry => geometry(opts, &mut r),
        Suite::Gradients => gradients(opts, &mut r),
        Suite::Beta => beta(opts, &mut r),
        Suite::LineSearch => line_search(opts, &mut r),
    }
    r
}

pub fn run_all(opts: &CheckOptions) -> Vec<SuiteResult> {
    Suite::ALL.into_iter().map(|s| run(s, opts)).collect()
}

fn rel_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-12)
}

/// Retraction at `t = 0`, first-order rigidity, projection idempotence,
/// scaled transport non-expansion and, for closed-form transports, agreement
/// with a central difference of the retraction.
/// `ambient` draws a random ambient vector, `lift` maps a tangent vector to
/// its ambient representation.
pub fn manifold_properties<M, R, F, L>(m: &M, trials: usize, rng: &mut R, ambient: F, lift: L) -> Vec<String>
where
    M: Manifold,
    R: Rng,
    F: Fn(&M::Point, &mut R) -> M::Ambient,
    L: Fn(&M::Point, &M::Tangent) -> M::Ambient,
{
    let mut fails = Vec::new();
    let h = 1e-6;
    let name = m.name();
    for trial in 0..trials {
        let mut fail = |what: String| fails.push(format!("{name} trial {trial}: {what}"));
        let x = m.random_point(rng);
        let eta = m.random_tangent(&x, rng).scaled(rng.random_range(0.05..0.5));
        let xi = m.random_tangent(&x, rng);
        let result: GeoResult<()> = (|| {
            if !m.check_point(&x) {
                fail("random point off the manifold".into());
            }
            let x0 = m.retract(&x, &m.zero_tangent(&x))?;
            if (m.embed_point(&x0) - m.embed_point(&x)).amax() > 1e-12 {
                fail("R_x(0) != x".into());
            }
            let y = m.retract(&x, &eta)?;
            if !m.check_point(&y) {
                fail("retraction left the manifold".into());
            }
            let fd = (m.embed_point(&m.retract(&x, &eta.scaled(h))?)
                - m.embed_point(&m.retract(&x, &eta.scaled(-h))?))
                / (2.0 * h);
            let e = rel_err(&fd, &m.embed_tangent(&x, &eta));
            if e > 1e-5 {
                fail(format!("d/dt R_x(t eta) at 0 differs from eta by {e:e}"));
            }
            let z = ambient(&x, rng);
            let p = m.project(&x, &z)?;
            let p_amb = m.embed_tangent(&x, &p);
            if !m.check_tangent(&x, &p) {
                fail("projection is not tangent".into());
            }
            let pp = m.embed_tangent(&x, &m.project(&x, &lift(&x, &p))?);
            if rel_err(&pp, &p_amb) > 1e-10 {
                fail("projection is not idempotent".into());
            }
            let t = m.transport_to(&x, &eta, &y, &xi)?;
            if !m.check_tangent(&y, &t.vector) {
                fail("transported vector is not tangent at the new point".into());
            }
            let scaled = m.transport_scaled(&x, &eta, &xi)?;
            let (src, dst) = (m.norm(&x, &xi)?, m.norm(&y, &scaled.vector)?);
            if dst > src * (1.0 + 1e-12) + 1e-15 {
                fail(format!("scaled transport grew the norm: {dst} > {src}"));
            }
            if t.kind == TransportKind::Differentiated {
                let fd = (m.embed_point(&m.retract(&x, &lincomb(&eta, h, &xi))?)
                    - m.embed_point(&m.retract(&x, &lincomb(&eta, -h, &xi))?))
                    / (2.0 * h);
                let e = rel_err(&fd, &m.embed_tangent(&y, &t.vector));
                if e > 1e-5 {
                    fail(format!("transport differs from the differentiated retraction by {e:e}"));
                }
            }
            Ok(())
        })();
        if let Err(e) = result {
            fails.push(format!("{name} trial {trial}: {e}"));
        }
    }
    fails
}

fn lincomb<T: TangentVector>(eta: &T, h: f64, xi: &T) -> T {
    let mut out = eta.clone();
    out.axpy(h, xi);
    out
}

/// Fixed-rank retraction against a dense SVD of `X + xi`, truncated to rank k.
pub fn fixed_rank_vs_dense<R: Rng>(m: usize, n: usize, k: usize, trials: usize, rng: &mut R) -> Vec<String> {
    let fr = FixedRank::new(m, n, k);
    let mut fails = Vec::new();
    for trial in 0..trials {
        let x = fr.random_point(rng);
        let smin = x.s[(k - 1, k - 1)];
        let eta = fr.random_tangent(&x, rng).scaled(0.5 * smin);
        let dense = x.to_dense() + fr.ambient(&x, &eta);
        let svd = dense.clone().svd(true, true);
        let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
        idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let u = svd.u.as_ref().expect("u");
        let vt = svd.v_t.as_ref().expect("v_t");
        let mut best = DMatrix::zeros(m, n);
        for &i in idx.iter().take(k) {
            best += u.column(i) * vt.row(i) * svd.singular_values[i];
        }
        match fr.retract(&x, &eta) {
            Ok(y) => {
                let d = (y.to_dense() - &best).amax();
                if d > 1e-8 {
                    fails.push(format!("fixed_rank trial {trial}: differs from dense truncation by {d:e}"));
                }
            }
            Err(e) => fails.push(format!("fixed_rank trial {trial}: {e}")),
        }
    }
    fails
}

fn geometry(opts: &CheckOptions, r: &mut SuiteResult) {
    let rng = &mut ChaCha8Rng::seed_from_u64(opts.seed);
    let t = opts.trials;
    let vec_amb = |n: usize| move |_: &DVector<f64>, rng: &mut ChaCha8Rng| standard_normal_matrix(rng, n, 1).column(0).into_owned();
    let mat_amb = |m: usize, n: usize| move |_: &DMatrix<f64>, rng: &mut ChaCha8Rng| standard_normal_matrix(rng, m, n);
    let fr = FixedRank::new(9, 7, 3);
    let f = &mut r.failures;
    f.extend(manifold_properties(&Euclidean::new(5), t, rng, vec_amb(5), |_, v| v.clone()));
    f.extend(manifold_properties(&Sphere::new(6), t, rng, vec_amb(6), |_, v| v.clone()));
    f.extend(manifold_properties(&Oblique::new(4, 3), t, rng, mat_amb(4, 3), |_, v| v.clone()));
    f.extend(manifold_properties(&Stiefel::new(7, 3), t, rng, mat_amb(7, 3), |_, v| v.clone()));
    f.extend(manifold_properties(&fr, t, rng, |_, rng| standard_normal_matrix(rng, 9, 7), |x, v| fr.ambient(x, v)));
    r.failures.extend(fixed_rank_vs_dense(12, 10, 3, t, rng));
    r.cases = 6 * t;
}

/// Wraps an objective and returns a slightly wrong gradient.
#[derive(Debug)]
pub struct CorruptedGradient<O>(pub O);

impl<O: Objective> Objective for CorruptedGradient<O> {
    type Space = O::Space;

    fn manifold(&self) -> &Self::Space {
        self.0.manifold()
    }
    fn cost(&self, x: &<O::Space as Manifold>::Point) -> f64 {
        self.0.cost(x)
    }
    fn euclidean_gradient(&self, x: &<O::Space as Manifold>::Point) -> <O::Space as Manifold>::Ambient {
        self.0.euclidean_gradient(x)
    }
    fn gradient(&self, x: &<O::Space as Manifold>::Point) -> GeoResult<<O::Space as Manifold>::Tangent> {
        Ok(self.0.gradient(x)?.scaled(1.01))
    }
    fn cost_and_gradient(
        &self,
        x: &<O::Space as Manifold>::Point,
    ) -> GeoResult<(f64, <O::Space as Manifold>::Tangent)> {
        Ok((self.cost(x), self.gradient(x)?))
    }
}

/// Largest relative error between `<grad f(x), xi>` and a central difference
/// of `f(R_x(t xi))` over `probes` random unit tangents.
pub fn gradient_fd_error<O: Objective, R: Rng>(objective: &O, x: &<O::Space as Manifold>::Point, probes: usize, rng: &mut R) -> GeoResult<f64> {
    let m = objective.manifold();
    let g = objective.gradient(x)?;
    let h = 1e-5;
    let mut worst = 0.0_f64;
    for _ in 0..probes {
        let xi = m.random_tangent(x, rng);
        let exact = m.inner(x, &g, &xi)?;
        let fp = objective.cost(&m.retract(x, &xi.scaled(h))?);
        let fm = objective.cost(&m.retract(x, &xi.scaled(-h))?);
        let fd = (fp - fm) / (2.0 * h);
        let scale = exact.abs().max(fd.abs()).max(1e-8);
        worst = worst.max((fd - exact).abs() / scale);
    }
    Ok(worst)
}

fn gradients(opts: &CheckOptions, r: &mut SuiteResult) {
    let rng = &mut ChaCha8Rng::seed_from_u64(opts.seed);
    for id in ProblemId::ALL {
        for seed in 1..=3u64 {
            r.cases += 1;
            let spec = InstanceSpec::new(id, id.default_params(true), seed);
            let problem = match spec.build() {
                Ok(p) => p,
                Err(e) => {
                    r.failures.push(format!("{id} seed {seed}: {e}"));
                    continue;
                }
            };
            let err = with_objective!(&problem, obj => {
                let x = obj.manifold().random_point(&mut initial_point_rng(seed));
                if opts.corrupt_gradient {
                    gradient_fd_error(&CorruptedGradient(obj), &x, 20, rng)
                } else {
                    gradient_fd_error(obj, &x, 20, rng)
                }
            });
            match err {
                Ok(e) if e < 1e-4 => {}
                Ok(e) => r.failures.push(format!("{id} seed {seed}: relative error {e:e}")),
                Err(e) => r.failures.push(format!("{id} seed {seed}: {e}")),
            }
        }
    }
}

fn beta(opts: &CheckOptions, r: &mut SuiteResult) {
    let rng = &mut ChaCha8Rng::seed_from_u64(opts.seed);
    let sig = sigma(0.9);
    let trials = opts.trials * 10;
    for trial in 0..trials {
        r.cases += 1;
        let n = rng.random_range(2..12);
        let e = Euclidean::new(n);
        let x = e.random_point(rng);
        let gp = e.random_tangent(&x, rng).scaled(rng.random_range(0.1..3.0));
        let g = e.random_tangent(&x, rng).scaled(rng.random_range(0.1..3.0));
        let mut dp = e.random_tangent(&x, rng);
        if gp.dot(&dp) > 0.0 {
            dp = -dp;
        }
        let step = dp.scaled(0.3);
        let y = e.retract(&x, &step).expect("euclidean retraction");
        let tdir = e.transport_to(&x, &step, &y, &dp).expect("identity").vector;
        let tgrad = e.transport_to(&x, &step, &y, &gp).expect("identity").vector;
        let inputs = BetaInputs {
            grad_sq: e.inner(&y, &g, &g).unwrap(),
            prev_grad_sq: e.inner(&x, &gp, &gp).unwrap(),
            grad_dot_transported_dir: e.inner(&y, &g, &tdir).unwrap(),
            prev_slope: e.inner(&x, &gp, &dp).unwrap(),
            grad_dot_transported_grad: Some(e.inner(&y, &g, &tgrad).unwrap()),
        };
        let yk = &g - &gp;
        let den = dp.dot(&yk);
        let flat = [
            (BetaRule::Fr, g.dot(&g) / gp.dot(&gp)),
            (BetaRule::Dy, g.dot(&g) / den),
            (BetaRule::Prp, g.dot(&yk) / gp.dot(&gp)),
            (BetaRule::Hs, g.dot(&yk) / den),
        ];
        for (rule, want) in flat {
            match rule.compute(&inputs, sig) {
                Ok(got) if (got - want).abs() <= 1e-12 * want.abs().max(1.0) => {}
                Ok(got) => r.failures.push(format!("trial {trial}: {rule} = {got}, flat formula {want}")),
                Err(e) => {
                    if den.abs() > 1e-10 {
                        r.failures.push(format!("trial {trial}: {rule}: {e}"));
                    }
                }
            }
        }
        if let Ok(dy) = inputs.dy() {
            if dy > 1e-30 {
                for (rule, lo) in [(BetaRule::Hybrid1, 0.0), (BetaRule::Hybrid2, -sig)] {
                    let ratio = rule.compute(&inputs, sig).unwrap() / dy;
                    if ratio < lo - 1e-12 || ratio > 1.0 + 1e-12 {
                        r.failures.push(format!("trial {trial}: {rule} ratio {ratio} outside [{lo}, 1]"));
                    }
                }
            }
        }
    }
}

fn line_search(opts: &CheckOptions, r: &mut SuiteResult) {
    let _ = opts;
    let config = SolverConfig { max_iters: 300, ..SolverConfig::with_beta(BetaRule::Hybrid1) };
    let solver = ConjugateGradient::new(config).expect("default config is valid");
    for id in ProblemId::ALL {
        let spec = InstanceSpec::new(id, id.default_params(true), 1);
        let problem = spec.build().expect("default instances build");
        let trace = with_objective!(&problem, obj => {
            let x0 = obj.manifold().random_point(&mut initial_point_rng(1));
            solver.solve(obj, x0).map(|s| s.report.trace)
        });
        let trace = match trace {
            Ok(t) => t,
            Err(e) => {
                r.failures.push(format!("{id}: {e}"));
                continue;
            }
        };
        for row in trace.iter().skip(1) {
            r.cases += 1;
            if row.line_search == Some(LineSearchStatus::StrongWolfe)
                && (row.armijo_ok != Some(true) || row.curvature_ok != Some(true))
            {
                r.failures.push(format!("{id} k = {}: accepted step violates strong Wolfe", row.k));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_on_small_trial_counts() {
        let opts = CheckOptions { trials: 5, ..Default::default() };
        for s in Suite::ALL {
            let r = run(s, &opts);
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn corrupted_gradient_is_caught() {
        let opts = CheckOptions { trials: 1, corrupt_gradient: true, ..Default::default() };
        assert!(!run(Suite::Gradients, &opts).passed());
    }
}
