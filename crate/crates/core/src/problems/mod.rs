//! Benchmark objectives and their seeded instance generators.

mod generators;
mod objectives;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generators::{initial_point_rng, instance_rng, make_spd, random_graph, random_mask};
pub use objectives::{Brockett, ClosestUnitNorm, MaskedLowRank, OffDiagonal, Rayleigh, Stability};

use crate::geometry::{Manifold, Result as GeoResult};

type Point<O> = <<O as Objective>::Space as Manifold>::Point;
type Tangent<O> = <<O as Objective>::Space as Manifold>::Tangent;
type Ambient<O> = <<O as Objective>::Space as Manifold>::Ambient;

/// A smooth cost on a manifold, with its Riemannian gradient.
pub trait Objective: Send + Sync {
    type Space: Manifold;

    fn manifold(&self) -> &Self::Space;

    fn cost(&self, x: &Point<Self>) -> f64;

    /// Gradient of the cost's smooth extension to the ambient space.
    fn euclidean_gradient(&self, x: &Point<Self>) -> Ambient<Self>;

    /// Riemannian gradient: the ambient gradient projected onto `T_x M`.
    fn gradient(&self, x: &Point<Self>) -> GeoResult<Tangent<Self>> {
        self.manifold().project(x, &self.euclidean_gradient(x))
    }

    fn cost_and_gradient(&self, x: &Point<Self>) -> GeoResult<(f64, Tangent<Self>)> {
        Ok((self.cost(x), self.gradient(x)?))
    }
}

impl<O: Objective + ?Sized> Objective for &O {
    type Space = O::Space;

    fn manifold(&self) -> &Self::Space {
        (**self).manifold()
    }
    fn cost(&self, x: &Point<Self>) -> f64 {
        (**self).cost(x)
    }
    fn euclidean_gradient(&self, x: &Point<Self>) -> Ambient<Self> {
        (**self).euclidean_gradient(x)
    }
    fn gradient(&self, x: &Point<Self>) -> GeoResult<Tangent<Self>> {
        (**self).gradient(x)
    }
    fn cost_and_gradient(&self, x: &Point<Self>) -> GeoResult<(f64, Tangent<Self>)> {
        (**self).cost_and_gradient(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemId {
    Rayleigh,
    Stability,
    Brockett,
    ClosestUnitNorm,
    OffDiagonal,
    LowRankApprox,
    RobustCompletion,
}

impl ProblemId {
    pub const ALL: [ProblemId; 7] = [
        ProblemId::Rayleigh,
        ProblemId::Stability,
        ProblemId::Brockett,
        ProblemId::ClosestUnitNorm,
        ProblemId::OffDiagonal,
        ProblemId::LowRankApprox,
        ProblemId::RobustCompletion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemId::Rayleigh => "rayleigh",
            ProblemId::Stability => "stability",
            ProblemId::Brockett => "brockett",
            ProblemId::ClosestUnitNorm => "closest_unit_norm",
            ProblemId::OffDiagonal => "off_diagonal",
            ProblemId::LowRankApprox => "low_rank_approx",
            ProblemId::RobustCompletion => "robust_completion",
        }
    }

    /// Parameter names this problem accepts.
    pub fn param_keys(self) -> &'static [&'static str] {
        match self {
            ProblemId::Rayleigh => &["n"],
            ProblemId::Stability => &["n", "edge_prob"],
            ProblemId::Brockett => &["n", "p"],
            ProblemId::ClosestUnitNorm => &["m", "n"],
            ProblemId::OffDiagonal => &["num_mats", "n", "p"],
            ProblemId::LowRankApprox => &["m", "n", "k"],
            ProblemId::RobustCompletion => &["m", "n", "k", "fill_prob"],
        }
    }

    /// Benchmark sizes; `small` halves every dimension and caps them at 50.
    pub fn default_params(self, small: bool) -> Params {
        let pairs: &[(&str, f64)] = match (self, small) {
            (ProblemId::Rayleigh, false) => &[("n", 100.0)],
            (ProblemId::Rayleigh, true) => &[("n", 50.0)],
            (ProblemId::Stability, false) => &[("n", 20.0), ("edge_prob", 0.25)],
            (ProblemId::Stability, true) => &[("n", 10.0), ("edge_prob", 0.25)],
            (ProblemId::Brockett, false) => &[("n", 20.0), ("p", 5.0)],
            (ProblemId::Brockett, true) => &[("n", 10.0), ("p", 3.0)],
            (ProblemId::ClosestUnitNorm, false) => &[("m", 10.0), ("n", 1000.0)],
            (ProblemId::ClosestUnitNorm, true) => &[("m", 5.0), ("n", 50.0)],
            (ProblemId::OffDiagonal, false) => &[("num_mats", 5.0), ("n", 10.0), ("p", 5.0)],
            (ProblemId::OffDiagonal, true) => &[("num_mats", 3.0), ("n", 5.0), ("p", 3.0)],
            (ProblemId::LowRankApprox, false) => &[("m", 100.0), ("n", 80.0), ("k", 4.0)],
            (ProblemId::LowRankApprox, true) => &[("m", 50.0), ("n", 40.0), ("k", 2.0)],
            (ProblemId::RobustCompletion, false) => &[("m", 10.0), ("n", 8.0), ("k", 4.0), ("fill_prob", 0.5)],
            (ProblemId::RobustCompletion, true) => &[("m", 5.0), ("n", 4.0), ("k", 2.0), ("fill_prob", 0.5)],
        };
        pairs.iter().map(|&(k, v)| (k.to_string(), serde_json::Value::from(v))).collect()
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemId {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProblemId::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| ProblemError::UnknownProblem(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("unknown problem `{0}` (expected one of: rayleigh, stability, brockett, closest_unit_norm, off_diagonal, low_rank_approx, robust_completion)")]
    UnknownProblem(String),
    #[error("problem `{problem}` does not take parameter `{key}`")]
    UnknownParam { problem: ProblemId, key: String },
    #[error("parameter `{key}` of `{problem}`: {reason}")]
    InvalidParam { problem: ProblemId, key: String, reason: String },
}

pub type Params = BTreeMap<String, serde_json::Value>;

/// Serializable description of one benchmark instance:
/// `{"problem": "rayleigh", "params": {"n": 100}, "seed": 1}`.
/// Missing parameters take their benchmark defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub problem: ProblemId,
    #[serde(default)]
    pub params: Params,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(problem: ProblemId, params: Params, seed: u64) -> Self {
        Self { problem, params, seed }
    }

    pub fn with_defaults(problem: ProblemId, seed: u64) -> Self {
        Self::new(problem, problem.default_params(false), seed)
    }

    fn number(&self, key: &str) -> Result<f64, ProblemError> {
        let invalid = |reason: &str| ProblemError::InvalidParam {
            problem: self.problem,
            key: key.to_string(),
            reason: reason.to_string(),
        };
        match self.params.get(key) {
            None => {
                let defaults = self.problem.default_params(false);
                Ok(defaults[key].as_f64().expect("defaults are numeric"))
            }
            Some(v) => v.as_f64().ok_or_else(|| invalid("expected a number")),
        }
    }

    fn size(&self, key: &str, min: usize) -> Result<usize, ProblemError> {
        let v = self.number(key)?;
        if v.fract() != 0.0 || v < min as f64 || v > 1e7 {
            return Err(ProblemError::InvalidParam {
                problem: self.problem,
                key: key.to_string(),
                reason: format!("expected an integer >= {min}, got {v}"),
            });
        }
        Ok(v as usize)
    }

    fn probability(&self, key: &str, open: bool) -> Result<f64, ProblemError> {
        let v = self.number(key)?;
        let ok = if open { v > 0.0 && v < 1.0 } else { (0.0..=1.0).contains(&v) };
        if !ok {
            return Err(ProblemError::InvalidParam {
                problem: self.problem,
                key: key.to_string(),
                reason: format!("expected a probability, got {v}"),
            });
        }
        Ok(v)
    }

    fn invalid(&self, key: &str, reason: String) -> ProblemError {
        ProblemError::InvalidParam { problem: self.problem, key: key.to_string(), reason }
    }

    /// Generate the instance. Identical specs give bit-identical instances.
    pub fn build(&self) -> Result<Problem, ProblemError> {
        let allowed = self.problem.param_keys();
        if let Some(key) = self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(ProblemError::UnknownParam { problem: self.problem, key: key.clone() });
        }
        let rng = &mut instance_rng(self.seed);
        let problem = match self.problem {
            ProblemId::Rayleigh => Problem::Rayleigh(Rayleigh::generate(self.size("n", 2)?, rng)),
            ProblemId::Stability => {
                let n = self.size("n", 2)?;
                let p = self.probability("edge_prob", true)?;
                Problem::Stability(Stability::generate(n, p, rng))
            }
            ProblemId::Brockett => {
                let n = self.size("n", 1)?;
                let p = self.size("p", 1)?;
                if p > n {
                    return Err(self.invalid("p", format!("p = {p} exceeds n = {n}")));
                }
                Problem::Brockett(Brockett::generate(n, p, rng))
            }
            ProblemId::ClosestUnitNorm => {
                let m = self.size("m", 2)?;
                let n = self.size("n", 1)?;
                Problem::ClosestUnitNorm(ClosestUnitNorm::generate(m, n, rng))
            }
            ProblemId::OffDiagonal => {
                let count = self.size("num_mats", 1)?;
                let n = self.size("n", 2)?;
                let p = self.size("p", 1)?;
                Problem::OffDiagonal(OffDiagonal::generate(count, n, p, rng))
            }
            ProblemId::LowRankApprox | ProblemId::RobustCompletion => {
                let m = self.size("m", 1)?;
                let n = self.size("n", 1)?;
                let k = self.size("k", 1)?;
                if k > m.min(n) {
                    return Err(self.invalid("k", format!("k = {k} exceeds min(m, n) = {}", m.min(n))));
                }
                if self.problem == ProblemId::LowRankApprox {
                    Problem::LowRankApprox(MaskedLowRank::generate_approximation(m, n, k, rng))
                } else {
                    let fill = self.probability("fill_prob", false)?;
                    Problem::RobustCompletion(MaskedLowRank::generate_completion(m, n, k, fill, rng))
                }
            }
        };
        Ok(problem)
    }
}

/// A generated instance of any benchmark problem.
#[derive(Debug, Clone)]
pub enum Problem {
    Rayleigh(Rayleigh),
    Stability(Stability),
    Brockett(Brockett),
    ClosestUnitNorm(ClosestUnitNorm),
    OffDiagonal(OffDiagonal),
    LowRankApprox(MaskedLowRank),
    RobustCompletion(MaskedLowRank),
}

/// Run `$body` with `$obj` bound to the concrete objective inside a [`Problem`].
#[macro_export]
macro_rules! with_objective {
    ($problem:expr, $obj:ident => $body:expr) => {
        match $problem {
            $crate::problems::Problem::Rayleigh($obj) => $body,
            $crate::problems::Problem::Stability($obj) => $body,
            $crate::problems::Problem::Brockett($obj) => $body,
            $crate::problems::Problem::ClosestUnitNorm($obj) => $body,
            $crate::problems::Problem::OffDiagonal($obj) => $body,
            $crate::problems::Problem::LowRankApprox($obj) => $body,
            $crate::problems::Problem::RobustCompletion($obj) => $body,
        }
    };
}

impl Problem {
    pub fn id(&self) -> ProblemId {
        match self {
            Problem::Rayleigh(_) => ProblemId::Rayleigh,
            Problem::Stability(_) => ProblemId::Stability,
            Problem::Brockett(_) => ProblemId::Brockett,
            Problem::ClosestUnitNorm(_) => ProblemId::ClosestUnitNorm,
            Problem::OffDiagonal(_) => ProblemId::OffDiagonal,
            Problem::LowRankApprox(_) => ProblemId::LowRankApprox,
            Problem::RobustCompletion(_) => ProblemId::RobustCompletion,
        }
    }

    pub fn manifold_name(&self) -> &'static str {
        with_objective!(self, o => o.manifold().name())
    }
}
