use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use web_time::Instant;

use super::beta::{sigma, BetaError, BetaInputs, BetaRule, DENOMINATOR_GUARD};
use crate::geometry::{scale_transport, Manifold, TangentVector, TransportKind};
use crate::linesearch::{self, strong_wolfe_holds, ConfigError, LineSearchConfig, LineSearchStatus};
use crate::problems::Objective;

/// Additive slack used when re-checking accepted steps.
pub const WOLFE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub beta: BetaRule,
    /// Stop once `|grad f(x_k)| < tolerance`.
    pub tolerance: f64,
    pub max_iters: usize,
    pub line_search: LineSearchConfig,
    /// Replace a non-descent direction with `-grad`.
    pub restart_on_non_descent: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            beta: BetaRule::Hybrid1,
            tolerance: 1e-6,
            max_iters: 10_000,
            line_search: LineSearchConfig::default(),
            restart_on_non_descent: true,
        }
    }
}

impl SolverConfig {
    pub fn with_beta(beta: BetaRule) -> Self {
        Self { beta, ..Default::default() }
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("gradient tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("initial point is not on the {0} manifold")]
    InvalidStart(&'static str),
    #[error("objective evaluation failed at the initial point: {0}")]
    Geometry(#[from] crate::geometry::GeometryError),
}

/// One row per iterate `x_k`. Quantities that belong to the step that
/// produced `x_k` (alpha, scale, l_k) are `None` on row 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub f: f64,
    pub grad_norm: f64,
    /// `alpha_{k-1}`
    pub alpha: Option<f64>,
    /// `beta_k`, the coefficient used to build `eta_k`
    pub beta: Option<f64>,
    pub beta_dy: Option<f64>,
    /// `beta_k / beta_k^DY`
    pub r_k: Option<f64>,
    /// `<g_k, T eta_{k-1}> / <g_{k-1}, eta_{k-1}>`
    pub l_k: Option<f64>,
    /// `s^{(k-1)}` of the scaled transport
    pub scale: Option<f64>,
    /// `dphi(alpha_{k-1})` of the accepted step, through the unscaled transport
    pub dphi: Option<f64>,
    /// `dphi(0)` the line search started from.
    pub dphi0: Option<f64>,
    /// `<g_k, eta_k>^2 / |eta_k|^2`
    pub zoutendijk: f64,
    /// `<g_k, eta_k>`
    pub slope: f64,
    pub direction_norm: f64,
    /// `|eta_{k-1}|` and `|T eta_{k-1}|` after scaling
    pub prev_direction_norm: Option<f64>,
    pub transported_norm: Option<f64>,
    pub armijo_ok: Option<bool>,
    pub curvature_ok: Option<bool>,
    pub line_search: Option<LineSearchStatus>,
    pub line_search_evals: usize,
    pub transport: Option<TransportKind>,
    /// `eta_k` was reset to `-grad` at this row.
    pub restarted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    Aborted { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub beta: BetaRule,
    pub converged: bool,
    pub termination: Termination,
    pub iterations: usize,
    pub elapsed_s: f64,
    pub final_cost: f64,
    pub final_grad_norm: f64,
    pub restarts: usize,
    pub sigma: f64,
    pub c2: f64,
    pub manifold: String,
    /// Native transport of the manifold; `projection` flags the substitute.
    pub transport: TransportKind,
    pub trace: Vec<TraceRow>,
}

pub const TRACE_CSV_HEADER: &str = "k,f,grad_norm,alpha,beta,r_k,l_k,scale,zoutendijk";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

impl SolverReport {
    /// Trace as CSV; undefined entries are left empty.
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{TRACE_CSV_HEADER}")?;
        for r in &self.trace {
            writeln!(
                out,
                "{},{:e},{:e},{},{},{},{},{},{:e}",
                r.k,
                r.f,
                r.grad_norm,
                opt(r.alpha),
                opt(r.beta),
                opt(r.r_k),
                opt(r.l_k),
                opt(r.scale),
                r.zoutendijk
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Solution<P> {
    pub point: P,
    pub report: SolverReport,
}

/// Loop state between iterations.
#[derive(Debug, Clone)]
pub struct SolverState<P, T> {
    pub k: usize,
    pub x: P,
    pub f: f64,
    pub grad: T,
    pub grad_norm: f64,
    pub eta: T,
    /// `<grad_k, eta_k>`
    pub slope: f64,
    pub direction_norm: f64,
    pub prev_alpha: Option<f64>,
    pub prev_slope: Option<f64>,
    /// `eta` currently equals `-grad`.
    pub steepest: bool,
    pub restarts: usize,
}

#[derive(Debug, Clone)]
pub enum StepOutcome {
    /// Moved to a new iterate.
    Moved(TraceRow),
    /// No acceptable step; direction reset to `-grad` in place.
    Restarted,
    Abort(String),
}

/// Riemannian conjugate gradient with scaled vector transport.
#[derive(Debug, Clone)]
pub struct ConjugateGradient {
    config: SolverConfig,
    sigma: f64,
}

type PointOf<O> = <<O as Objective>::Space as Manifold>::Point;
type TangentOf<O> = <<O as Objective>::Space as Manifold>::Tangent;

impl ConjugateGradient {
    pub fn new(config: SolverConfig) -> Result<Self, SolverError> {
        config.line_search.validate()?;
        if !(config.tolerance > 0.0) {
            return Err(SolverError::Tolerance(config.tolerance));
        }
        Ok(Self { sigma: sigma(config.line_search.c2), config })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// State at `x0` with `eta_0 = -grad f(x0)`, plus its trace row.
    pub fn init<O: Objective>(
        &self,
        objective: &O,
        x0: PointOf<O>,
    ) -> Result<(SolverState<PointOf<O>, TangentOf<O>>, TraceRow), SolverError> {
        let m = objective.manifold();
        if !m.check_point(&x0) {
            return Err(SolverError::InvalidStart(m.name()));
        }
        let (f, grad) = objective.cost_and_gradient(&x0)?;
        let grad_norm = m.norm(&x0, &grad)?;
        let eta = grad.scaled(-1.0);
        let slope = -grad_norm * grad_norm;
        let row = TraceRow {
            k: 0,
            f,
            grad_norm,
            alpha: None,
            beta: None,
            beta_dy: None,
            r_k: None,
            l_k: None,
            scale: None,
            dphi: None,
            dphi0: None,
            zoutendijk: zoutendijk(slope, grad_norm),
            slope,
            direction_norm: grad_norm,
            prev_direction_norm: None,
            transported_norm: None,
            armijo_ok: None,
            curvature_ok: None,
            line_search: None,
            line_search_evals: 0,
            transport: None,
            restarted: false,
        };
        let state = SolverState {
            k: 0,
            x: x0,
            f,
            grad,
            grad_norm,
            eta,
            slope,
            direction_norm: grad_norm,
            prev_alpha: None,
            prev_slope: None,
            steepest: true,
            restarts: 0,
        };
        Ok((state, row))
    }

    fn initial_step(&self, state: &SolverState<impl Sized, impl Sized>) -> f64 {
        match (state.prev_alpha, state.prev_slope) {
            (Some(a), Some(s)) if s < 0.0 && state.slope < 0.0 => (a * s / state.slope).clamp(1e-4 * a, 10.0 * a),
            _ => self.config.line_search.alpha_init,
        }
    }

    /// One iteration: line search, move, transport, new direction.
    pub fn step<O: Objective>(
        &self,
        objective: &O,
        state: &mut SolverState<PointOf<O>, TangentOf<O>>,
    ) -> StepOutcome {
        let m = objective.manifold();
        let ls_cfg = &self.config.line_search;
        let alpha0 = self.initial_step(state);
        let ls = linesearch::search(objective, &state.x, &state.eta, state.f, state.slope, alpha0, ls_cfg);
        let Some(trial) = ls.step else {
            if state.steepest {
                return StepOutcome::Abort(format!(
                    "line search found no acceptable step along -grad ({:?}, {} evaluations)",
                    ls.status, ls.eval_count
                ));
            }
            self.reset_to_steepest(m, state);
            state.restarts += 1;
            return StepOutcome::Restarted;
        };

        let (armijo_ok, curvature_ok) = strong_wolfe_holds(
            ls.phi0,
            ls.dphi0,
            trial.alpha,
            trial.f,
            trial.dphi,
            ls_cfg.c1,
            ls_cfg.c2,
            WOLFE_SLACK,
        );
        if !(armijo_ok && curvature_ok) {
            if state.steepest {
                return StepOutcome::Abort(format!(
                    "no strong Wolfe step along -grad ({:?}, {} evaluations)",
                    ls.status, ls.eval_count
                ));
            }
            self.reset_to_steepest(m, state);
            state.restarts += 1;
            return StepOutcome::Restarted;
        }
        let step_vec = state.eta.scaled(trial.alpha);
        let y = trial.point;
        let grad_new = trial.grad;
        let transport = trial.transported.kind;

        let Ok(grad_norm_new) = m.norm(&y, &grad_new) else {
            return StepOutcome::Abort("gradient norm undefined after step".into());
        };
        let scaled = match scale_transport(m, &y, state.direction_norm, trial.transported) {
            Ok(s) => s,
            Err(e) => return StepOutcome::Abort(format!("direction transport failed: {e}")),
        };
        let inner = |u: &TangentOf<O>, v: &TangentOf<O>| m.inner(&y, u, v).unwrap_or(f64::NAN);

        let grad_sq = grad_norm_new * grad_norm_new;
        let grad_dot_dir = inner(&grad_new, &scaled.vector);
        let grad_dot_grad = if self.config.beta.needs_transported_gradient() {
            let tg = m
                .transport_to(&state.x, &step_vec, &y, &state.grad)
                .and_then(|t| scale_transport(m, &y, state.grad_norm, t));
            match tg {
                Ok(tg) => Some(inner(&grad_new, &tg.vector)),
                Err(e) => return StepOutcome::Abort(format!("gradient transport failed: {e}")),
            }
        } else {
            None
        };
        let inputs = BetaInputs {
            grad_sq,
            prev_grad_sq: state.grad_norm * state.grad_norm,
            grad_dot_transported_dir: grad_dot_dir,
            prev_slope: state.slope,
            grad_dot_transported_grad: grad_dot_grad,
        };
        let beta_dy = inputs.dy().ok();
        let beta = self.config.beta.compute(&inputs, self.sigma);
        let l_k = grad_dot_dir / state.slope;

        let mut restarted = false;
        let (eta_new, beta_used) = match beta {
            Ok(b) => {
                let mut e = grad_new.scaled(-1.0);
                e.axpy(b, &scaled.vector);
                (e, b)
            }
            Err(BetaError::DegenerateDenominator(_)) | Err(BetaError::ZeroPreviousGradient) => {
                restarted = true;
                (grad_new.scaled(-1.0), 0.0)
            }
            Err(e) => return StepOutcome::Abort(e.to_string()),
        };
        let mut eta_new = eta_new;
        let mut slope_new = inner(&grad_new, &eta_new);
        if !restarted && !(slope_new < 0.0) && self.config.restart_on_non_descent && grad_sq > 0.0 {
            restarted = true;
        }
        if restarted {
            eta_new = grad_new.scaled(-1.0);
            slope_new = -grad_sq;
        }
        let direction_norm = if restarted { grad_norm_new } else { m.norm(&y, &eta_new).unwrap_or(f64::NAN) };
        let r_k = match (restarted, beta_dy) {
            (false, Some(dy)) if dy.abs() > DENOMINATOR_GUARD => Some(beta_used / dy),
            _ => None,
        };
        let is_steepest = restarted || self.config.beta == BetaRule::Steepest;
        if restarted && self.config.beta != BetaRule::Steepest {
            state.restarts += 1;
        }

        let k = state.k + 1;
        let row = TraceRow {
            k,
            f: trial.f,
            grad_norm: grad_norm_new,
            alpha: Some(trial.alpha),
            beta: Some(if restarted { 0.0 } else { beta_used }),
            beta_dy,
            r_k,
            l_k: Some(l_k),
            scale: Some(scaled.scale),
            dphi: Some(trial.dphi),
            dphi0: Some(ls.dphi0),
            zoutendijk: zoutendijk(slope_new, direction_norm),
            slope: slope_new,
            direction_norm,
            prev_direction_norm: Some(state.direction_norm),
            transported_norm: m.norm(&y, &scaled.vector).ok(),
            armijo_ok: Some(armijo_ok),
            curvature_ok: Some(curvature_ok),
            line_search: Some(ls.status),
            line_search_evals: ls.eval_count,
            transport: Some(transport),
            restarted,
        };

        state.prev_alpha = Some(trial.alpha);
        state.prev_slope = Some(state.slope);
        state.k = k;
        state.x = y;
        state.f = trial.f;
        state.grad = grad_new;
        state.grad_norm = grad_norm_new;
        state.eta = eta_new;
        state.slope = slope_new;
        state.direction_norm = direction_norm;
        state.steepest = is_steepest;
        StepOutcome::Moved(row)
    }

    fn reset_to_steepest<M: Manifold>(&self, _m: &M, state: &mut SolverState<M::Point, M::Tangent>) {
        state.eta = state.grad.scaled(-1.0);
        state.slope = -state.grad_norm * state.grad_norm;
        state.direction_norm = state.grad_norm;
        state.prev_alpha = None;
        state.prev_slope = None;
        state.steepest = true;
    }

    /// Iterate until `|grad f| < tolerance`, the iteration cap, or an abort.
    pub fn solve<O: Objective>(&self, objective: &O, x0: PointOf<O>) -> Result<Solution<PointOf<O>>, SolverError> {
        let start = Instant::now();
        let m = objective.manifold();
        let (mut state, row0) = self.init(objective, x0)?;
        let mut trace = vec![row0];
        let termination = loop {
            if state.grad_norm < self.config.tolerance {
                break Termination::Converged;
            }
            if state.k >= self.config.max_iters {
                break Termination::MaxIterations;
            }
            match self.step(objective, &mut state) {
                StepOutcome::Moved(row) => trace.push(row),
                StepOutcome::Restarted => {
                    log::debug!("k = {}: line search failed, restarting along -grad", state.k);
                }
                StepOutcome::Abort(reason) => break Termination::Aborted { reason },
            }
        };
        let report = SolverReport {
            beta: self.config.beta,
            converged: termination == Termination::Converged,
            termination,
            iterations: state.k,
            elapsed_s: start.elapsed().as_secs_f64(),
            final_cost: state.f,
            final_grad_norm: state.grad_norm,
            restarts: state.restarts,
            sigma: self.sigma,
            c2: self.config.line_search.c2,
            manifold: m.name().to_string(),
            transport: m.transport_kind(),
            trace,
        };
        Ok(Solution { point: state.x, report })
    }
}

fn zoutendijk(slope: f64, direction_norm: f64) -> f64 {
    if direction_norm > 0.0 {
        slope * slope / (direction_norm * direction_norm)
    } else {
        0.0
    }
}

/// Convenience wrapper: build a solver from `config` and run it.
pub fn solve<O: Objective>(
    objective: &O,
    x0: PointOf<O>,
    config: SolverConfig,
) -> Result<Solution<PointOf<O>>, SolverError> {
    ConjugateGradient::new(config)?.solve(objective, x0)
}
