//! Strong Wolfe step selection along a retraction curve.
//!
//! For `phi(a) = f(R_x(a eta))` the derivative is taken through the
//! manifold's transport, `dphi(a) = <grad f(R_x(a eta)), T_{a eta}(eta)>`,
//! which is exact when the transport is the differentiated retraction. The
//! search brackets an acceptable step by doubling, then zooms with safeguarded
//! two-point cubic interpolation and falls back to bisection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Manifold, TangentVector, Transported};
use crate::problems::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearchConfig {
    pub c1: f64,
    pub c2: f64,
    pub alpha_init: f64,
    pub alpha_max: f64,
    pub max_evals: usize,
    pub zoom_max: usize,
    /// Absolute tolerance on function-value comparisons. Near a minimizer
    /// the achievable decrease can fall below the rounding error of `f`;
    /// comparisons then defer to the slopes.
    pub f_tolerance: f64,
    /// Diagnostic mode: plain Armijo backtracking, no curvature condition.
    pub armijo_only: bool,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self {
            c1: 1e-4,
            c2: 0.9,
            alpha_init: 1.0,
            alpha_max: 1e6,
            max_evals: 50,
            zoom_max: 30,
            f_tolerance: 1e-12,
            armijo_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line search constants must satisfy 0 < c1 < c2 < 1 (got c1 = {c1}, c2 = {c2})")]
    WolfeConstants { c1: f64, c2: f64 },
    #[error("invalid line search setting: {0}")]
    Invalid(String),
}

impl LineSearchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let (c1, c2) = (self.c1, self.c2);
        if !(0.0 < c1 && c1 < c2 && c2 < 1.0) {
            return Err(ConfigError::WolfeConstants { c1, c2 });
        }
        if !(self.alpha_init > 0.0) || !(self.alpha_max >= self.alpha_init) {
            return Err(ConfigError::Invalid(format!(
                "need 0 < alpha_init <= alpha_max (got {} and {})",
                self.alpha_init, self.alpha_max
            )));
        }
        if !(self.f_tolerance >= 0.0) {
            return Err(ConfigError::Invalid(format!("f_tolerance must be >= 0, got {}", self.f_tolerance)));
        }
        if self.max_evals == 0 {
            return Err(ConfigError::Invalid("max_evals must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineSearchStatus {
    StrongWolfe,
    /// Armijo backtracking succeeded (diagnostic mode only).
    Armijo,
    /// Evaluation budget exhausted; the best Armijo step, if any, is returned.
    MaxEvals,
    /// `dphi(0) >= 0` or no finite trial could be formed.
    Degenerate,
}

/// One evaluated trial step.
#[derive(Debug, Clone)]
pub struct Trial<P, T> {
    pub alpha: f64,
    pub point: P,
    pub f: f64,
    pub grad: T,
    /// `T_{alpha eta}(eta)`, the transported search direction.
    pub transported: Transported<T>,
    pub dphi: f64,
}

#[derive(Debug, Clone)]
pub struct LineSearchResult<P, T> {
    pub phi0: f64,
    pub dphi0: f64,
    pub eval_count: usize,
    pub status: LineSearchStatus,
    /// The accepted step; `None` when nothing usable was found.
    pub step: Option<Trial<P, T>>,
}

impl<P, T> LineSearchResult<P, T> {
    pub fn alpha(&self) -> Option<f64> {
        self.step.as_ref().map(|s| s.alpha)
    }
}

/// Post-hoc check of the two strong Wolfe inequalities with additive slack.
/// Returns `(armijo, curvature)`.
pub fn strong_wolfe_holds(
    phi0: f64,
    dphi0: f64,
    alpha: f64,
    phi_a: f64,
    dphi_a: f64,
    c1: f64,
    c2: f64,
    slack: f64,
) -> (bool, bool) {
    let armijo = phi_a <= phi0 + c1 * alpha * dphi0 + slack;
    let curvature = dphi_a.abs() <= c2 * dphi0.abs() + slack;
    (armijo, curvature)
}

type PointOf<O> = <<O as Objective>::Space as Manifold>::Point;
type TangentOf<O> = <<O as Objective>::Space as Manifold>::Tangent;

/// The one-dimensional restriction `phi(a) = f(R_x(a eta))`.
pub struct RetractionCurve<'a, O: Objective> {
    objective: &'a O,
    x: &'a PointOf<O>,
    eta: &'a TangentOf<O>,
    evals: usize,
}

impl<'a, O: Objective> RetractionCurve<'a, O> {
    pub fn new(objective: &'a O, x: &'a PointOf<O>, eta: &'a TangentOf<O>) -> Self {
        Self { objective, x, eta, evals: 0 }
    }

    pub fn evals(&self) -> usize {
        self.evals
    }

    /// Evaluate `phi` and `dphi` at `alpha`; `None` if the retraction or the
    /// transport is undefined there.
    pub fn eval(&mut self, alpha: f64) -> Option<Trial<PointOf<O>, TangentOf<O>>> {
        self.evals += 1;
        let m = self.objective.manifold();
        let step = self.eta.scaled(alpha);
        let y = m.retract(self.x, &step).ok()?;
        let (f, grad) = self.objective.cost_and_gradient(&y).ok()?;
        let transported = m.transport_to(self.x, &step, &y, self.eta).ok()?;
        let dphi = m.inner(&y, &grad, &transported.vector).ok()?;
        if !f.is_finite() || !dphi.is_finite() {
            return None;
        }
        Some(Trial { alpha, point: y, f, grad, transported, dphi })
    }
}

struct Sample<P, T> {
    alpha: f64,
    phi: f64,
    dphi: f64,
    trial: Option<Trial<P, T>>,
}

impl<P, T> Sample<P, T> {
    fn from_eval(alpha: f64, trial: Option<Trial<P, T>>) -> Self {
        match &trial {
            Some(t) => Sample { alpha, phi: t.f, dphi: t.dphi, trial },
            None => Sample { alpha, phi: f64::INFINITY, dphi: f64::NAN, trial: None },
        }
    }
}

/// Minimizer of the cubic interpolating values and slopes at `a` and `b`,
/// if it exists and lies inside the safeguarded interval.
fn cubic_step(a: f64, fa: f64, da: f64, b: f64, fb: f64, db: f64) -> Option<f64> {
    if ![fa, da, fb, db].iter().all(|v| v.is_finite()) || a == b {
        return None;
    }
    let d1 = da + db - 3.0 * (fa - fb) / (a - b);
    let disc = d1 * d1 - da * db;
    if disc < 0.0 {
        return None;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let denom = db - da + 2.0 * d2;
    if denom == 0.0 {
        return None;
    }
    let t = b - (b - a) * (db + d2 - d1) / denom;
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let margin = 0.1 * (hi - lo);
    (t.is_finite() && t > lo + margin && t < hi - margin).then_some(t)
}

/// Search for a step satisfying the strong Wolfe conditions along `eta`.
///
/// `f0` and `dphi0 = <grad f(x), eta>` are the values at `alpha = 0`.
pub fn search<O: Objective>(
    objective: &O,
    x: &PointOf<O>,
    eta: &TangentOf<O>,
    f0: f64,
    dphi0: f64,
    alpha_init: f64,
    config: &LineSearchConfig,
) -> LineSearchResult<PointOf<O>, TangentOf<O>> {
    let mut curve = RetractionCurve::new(objective, x, eta);
    let fail = |evals, status| LineSearchResult { phi0: f0, dphi0, eval_count: evals, status, step: None };
    if !(dphi0 < 0.0) || !f0.is_finite() {
        return fail(0, LineSearchStatus::Degenerate);
    }
    let alpha_init = alpha_init.clamp(f64::MIN_POSITIVE, config.alpha_max);
    if config.armijo_only {
        return backtrack(&mut curve, f0, dphi0, alpha_init, config);
    }

    let (c1, c2, tol) = (config.c1, config.c2, config.f_tolerance);
    let armijo = |a: f64, phi: f64| phi <= f0 + c1 * a * dphi0 + tol;
    let curvature = |d: f64| d.abs() <= -c2 * dphi0;

    let mut best = None;

    let mut prev = Sample { alpha: 0.0, phi: f0, dphi: dphi0, trial: None };
    let mut alpha = alpha_init;
    let mut first = true;
    let (mut lo, mut hi) = loop {
        if curve.evals() >= config.max_evals {
            return finish_without_wolfe(curve.evals(), f0, dphi0, best);
        }
        let cur = Sample::from_eval(alpha, curve.eval(alpha));
        log::trace!("bracket a={:e} phi-f0={:e} dphi={:e} dphi0={:e}", cur.alpha, cur.phi - f0, cur.dphi, dphi0);
        keep_best(&mut best, &cur.trial, armijo);
        if !armijo(cur.alpha, cur.phi) || (!first && cur.phi > prev.phi + tol) {
            break (prev, cur);
        }
        if curvature(cur.dphi) {
            return accept(curve.evals(), f0, dphi0, cur.trial.expect("finite sample"));
        }
        if cur.dphi >= 0.0 {
            break (cur, prev);
        }
        if alpha >= config.alpha_max {
            return finish_without_wolfe(curve.evals(), f0, dphi0, best);
        }
        first = false;
        prev = cur;
        alpha = (2.0 * alpha).min(config.alpha_max);
    };

    // Zoom: `lo` satisfies Armijo and has the lowest value among bracket
    // endpoints; `dphi(lo) * (hi - lo) < 0`.
    for _ in 0..config.zoom_max {
        if curve.evals() >= config.max_evals {
            break;
        }
        let width = (hi.alpha - lo.alpha).abs();
        if width <= f64::EPSILON * lo.alpha.abs().max(hi.alpha.abs()) {
            break;
        }
        let a = cubic_step(lo.alpha, lo.phi, lo.dphi, hi.alpha, hi.phi, hi.dphi)
            .unwrap_or(0.5 * (lo.alpha + hi.alpha));
        let cur = Sample::from_eval(a, curve.eval(a));
        log::trace!(
            "zoom a={:e} phi-f0={:e} dphi={:e} lo={:e} hi={:e}",
            cur.alpha, cur.phi - f0, cur.dphi, lo.alpha, hi.alpha
        );
        keep_best(&mut best, &cur.trial, armijo);
        if !armijo(cur.alpha, cur.phi) || cur.phi > lo.phi + tol {
            hi = cur;
        } else {
            if curvature(cur.dphi) {
                return accept(curve.evals(), f0, dphi0, cur.trial.expect("finite sample"));
            }
            if cur.dphi * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    finish_without_wolfe(curve.evals(), f0, dphi0, best)
}

fn keep_best<P: Clone, T: Clone>(
    best: &mut Option<Trial<P, T>>,
    trial: &Option<Trial<P, T>>,
    armijo: impl Fn(f64, f64) -> bool,
) {
    if let Some(t) = trial {
        if armijo(t.alpha, t.f) && best.as_ref().is_none_or(|b| t.f < b.f) {
            *best = Some(t.clone());
        }
    }
}

fn accept<P, T>(evals: usize, phi0: f64, dphi0: f64, trial: Trial<P, T>) -> LineSearchResult<P, T> {
    LineSearchResult { phi0, dphi0, eval_count: evals, status: LineSearchStatus::StrongWolfe, step: Some(trial) }
}

fn finish_without_wolfe<P, T>(
    evals: usize,
    phi0: f64,
    dphi0: f64,
    best: Option<Trial<P, T>>,
) -> LineSearchResult<P, T> {
    LineSearchResult { phi0, dphi0, eval_count: evals, status: LineSearchStatus::MaxEvals, step: best }
}

fn backtrack<O: Objective>(
    curve: &mut RetractionCurve<'_, O>,
    f0: f64,
    dphi0: f64,
    alpha_init: f64,
    config: &LineSearchConfig,
) -> LineSearchResult<PointOf<O>, TangentOf<O>> {
    let mut alpha = alpha_init;
    while curve.evals() < config.max_evals {
        if let Some(t) = curve.eval(alpha) {
            if t.f <= f0 + config.c1 * alpha * dphi0 + config.f_tolerance {
                return LineSearchResult {
                    phi0: f0,
                    dphi0,
                    eval_count: curve.evals(),
                    status: LineSearchStatus::Armijo,
                    step: Some(t),
                };
            }
        }
        alpha *= 0.5;
    }
    LineSearchResult { phi0: f0, dphi0, eval_count: curve.evals(), status: LineSearchStatus::MaxEvals, step: None }
}
