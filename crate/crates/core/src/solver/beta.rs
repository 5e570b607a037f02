//! Conjugacy coefficients.
//!
//! All rules are evaluated from a handful of inner products gathered at the
//! new iterate, so the same code covers every manifold:
//!
//! - `FR  = |g_k|^2 / |g_{k-1}|^2`
//! - `DY  = |g_k|^2 / (<g_k, T eta_{k-1}> - <g_{k-1}, eta_{k-1}>)`
//! - `PRP = <g_k, g_k - T g_{k-1}> / |g_{k-1}|^2`
//! - `HS  = <g_k, g_k - T g_{k-1}> / (<g_k, T eta_{k-1}> - <g_{k-1}, eta_{k-1}>)`
//! - `Hybrid1 = max(0, min(DY, HS))`
//! - `Hybrid2 = max(-sigma DY, min(DY, HS))` with `sigma = (1 - c2) / (1 + c2)`

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative size below which a denominator counts as zero.
pub const DENOMINATOR_GUARD: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaRule {
    Fr,
    Dy,
    Prp,
    Hs,
    Hybrid1,
    Hybrid2,
    Steepest,
}

impl BetaRule {
    pub const ALL: [BetaRule; 7] = [
        BetaRule::Fr,
        BetaRule::Dy,
        BetaRule::Prp,
        BetaRule::Hs,
        BetaRule::Hybrid1,
        BetaRule::Hybrid2,
        BetaRule::Steepest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BetaRule::Fr => "fr",
            BetaRule::Dy => "dy",
            BetaRule::Prp => "prp",
            BetaRule::Hs => "hs",
            BetaRule::Hybrid1 => "hybrid1",
            BetaRule::Hybrid2 => "hybrid2",
            BetaRule::Steepest => "steepest",
        }
    }

    /// Display label used in tables and plots.
    pub fn label(self) -> &'static str {
        match self {
            BetaRule::Fr => "FR",
            BetaRule::Dy => "DY",
            BetaRule::Prp => "PRP",
            BetaRule::Hs => "HS",
            BetaRule::Hybrid1 => "Hybrid1",
            BetaRule::Hybrid2 => "Hybrid2",
            BetaRule::Steepest => "Steepest",
        }
    }

    /// Whether the rule reads `<g_k, T g_{k-1}>`.
    pub fn needs_transported_gradient(self) -> bool {
        matches!(self, BetaRule::Prp | BetaRule::Hs | BetaRule::Hybrid1 | BetaRule::Hybrid2)
    }

    pub fn is_hybrid(self) -> bool {
        matches!(self, BetaRule::Hybrid1 | BetaRule::Hybrid2)
    }

    pub fn compute(self, s: &BetaInputs, sigma: f64) -> Result<f64, BetaError> {
        match self {
            BetaRule::Fr => s.fr(),
            BetaRule::Dy => s.dy(),
            BetaRule::Prp => s.prp(),
            BetaRule::Hs => s.hs(),
            BetaRule::Hybrid1 => s.hybrid1(),
            BetaRule::Hybrid2 => s.hybrid2(sigma),
            BetaRule::Steepest => Ok(0.0),
        }
    }
}

impl fmt::Display for BetaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BetaError {
    #[error("previous gradient is zero")]
    ZeroPreviousGradient,
    #[error("degenerate denominator {0:e}")]
    DegenerateDenominator(f64),
    #[error("rule needs the transported previous gradient")]
    MissingTransportedGradient,
    #[error("unknown beta rule `{0}` (expected one of: fr, dy, prp, hs, hybrid1, hybrid2, steepest)")]
    Unknown(String),
}

impl FromStr for BetaRule {
    type Err = BetaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        BetaRule::ALL.into_iter().find(|b| b.as_str() == lower).ok_or_else(|| BetaError::Unknown(s.to_string()))
    }
}

/// `sigma = (1 - c2) / (1 + c2)`, the lower edge of the admissible window
/// for `beta / beta_DY`.
pub fn sigma(c2: f64) -> f64 {
    (1.0 - c2) / (1.0 + c2)
}

/// Inner products at iterate `k` that every rule is built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaInputs {
    /// `|g_k|^2`
    pub grad_sq: f64,
    /// `|g_{k-1}|^2`
    pub prev_grad_sq: f64,
    /// `<g_k, T eta_{k-1}>` with the scaled transport
    pub grad_dot_transported_dir: f64,
    /// `<g_{k-1}, eta_{k-1}>`
    pub prev_slope: f64,
    /// `<g_k, T g_{k-1}>`, only needed by PRP/HS and the hybrids
    pub grad_dot_transported_grad: Option<f64>,
}

impl BetaInputs {
    /// Shared DY/HS denominator.
    pub fn conjugacy_denominator(&self) -> f64 {
        self.grad_dot_transported_dir - self.prev_slope
    }

    fn checked_denominator(&self) -> Result<f64, BetaError> {
        let d = self.conjugacy_denominator();
        if !d.is_finite() || d.abs() < DENOMINATOR_GUARD * self.grad_sq {
            return Err(BetaError::DegenerateDenominator(d));
        }
        Ok(d)
    }

    fn prp_numerator(&self) -> Result<f64, BetaError> {
        let tg = self.grad_dot_transported_grad.ok_or(BetaError::MissingTransportedGradient)?;
        Ok(self.grad_sq - tg)
    }

    pub fn fr(&self) -> Result<f64, BetaError> {
        if !(self.prev_grad_sq > 0.0) {
            return Err(BetaError::ZeroPreviousGradient);
        }
        Ok(self.grad_sq / self.prev_grad_sq)
    }

    pub fn dy(&self) -> Result<f64, BetaError> {
        if self.grad_sq == 0.0 {
            return Ok(0.0);
        }
        Ok(self.grad_sq / self.checked_denominator()?)
    }

    pub fn prp(&self) -> Result<f64, BetaError> {
        if !(self.prev_grad_sq > 0.0) {
            return Err(BetaError::ZeroPreviousGradient);
        }
        Ok(self.prp_numerator()? / self.prev_grad_sq)
    }

    pub fn hs(&self) -> Result<f64, BetaError> {
        let num = self.prp_numerator()?;
        if self.grad_sq == 0.0 {
            return Ok(0.0);
        }
        Ok(num / self.checked_denominator()?)
    }

    pub fn hybrid1(&self) -> Result<f64, BetaError> {
        let (dy, hs) = (self.dy()?, self.hs()?);
        Ok(0f64.max(dy.min(hs)))
    }

    pub fn hybrid2(&self, sigma: f64) -> Result<f64, BetaError> {
        let (dy, hs) = (self.dy()?, self.hs()?);
        Ok((-sigma * dy).max(dy.min(hs)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Flat hand data: eta_{k-1} = (-1, 0), g_{k-1} = (1, 0), g_k = (0.5, 0.5),
    /// identity transport.
    fn hand() -> BetaInputs {
        BetaInputs {
            grad_sq: 0.5,
            prev_grad_sq: 1.0,
            grad_dot_transported_dir: -0.5,
            prev_slope: -1.0,
            grad_dot_transported_grad: Some(0.5),
        }
    }

    #[test]
    fn hand_values() {
        let s = hand();
        assert_eq!(s.fr().unwrap(), 0.5);
        assert_eq!(s.conjugacy_denominator(), 0.5);
        assert_eq!(s.dy().unwrap(), 1.0);
        assert_eq!(s.hs().unwrap(), 0.0);
        assert_eq!(s.prp().unwrap(), 0.0);
        assert_eq!(s.hybrid1().unwrap(), 0.0);
        assert_eq!(s.hybrid2(sigma(0.9)).unwrap(), 0.0);
    }

    #[test]
    fn zero_gradient_gives_zero() {
        let s = BetaInputs { grad_sq: 0.0, grad_dot_transported_dir: 0.0, grad_dot_transported_grad: Some(0.0), ..hand() };
        assert_eq!(s.fr().unwrap(), 0.0);
        assert_eq!(s.dy().unwrap(), 0.0);
        assert_eq!(s.hs().unwrap(), 0.0);
    }

    #[test]
    fn equal_gradients_give_unit_fr_and_zero_prp_hs() {
        let s = BetaInputs {
            grad_sq: 2.0,
            prev_grad_sq: 2.0,
            grad_dot_transported_dir: -0.3,
            prev_slope: -2.0,
            grad_dot_transported_grad: Some(2.0),
        };
        assert_eq!(s.fr().unwrap(), 1.0);
        assert_eq!(s.prp().unwrap(), 0.0);
        assert_eq!(s.hs().unwrap(), 0.0);
    }

    #[test]
    fn hybrid_clamp_arms() {
        // DY = 2, HS = 1
        let s = BetaInputs {
            grad_sq: 2.0,
            prev_grad_sq: 1.0,
            grad_dot_transported_dir: 0.0,
            prev_slope: -1.0,
            grad_dot_transported_grad: Some(1.0),
        };
        assert_eq!((s.dy().unwrap(), s.hs().unwrap()), (2.0, 1.0));
        assert_eq!(s.hybrid1().unwrap(), 1.0);
        assert_eq!(s.hybrid2(sigma(0.9)).unwrap(), 1.0);

        // DY = 2, HS = -1
        let s = BetaInputs { grad_dot_transported_grad: Some(3.0), ..s };
        assert_eq!(s.hs().unwrap(), -1.0);
        assert_eq!(s.hybrid1().unwrap(), 0.0);
        let sg = sigma(0.9);
        assert!((sg - 1.0 / 19.0).abs() < 1e-15);
        assert!((s.hybrid2(sg).unwrap() + 2.0 / 19.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_denominator_is_reported() {
        let s = BetaInputs { grad_dot_transported_dir: -1.0, ..hand() };
        assert!(matches!(s.dy(), Err(BetaError::DegenerateDenominator(_))));
        assert!(matches!(s.hybrid1(), Err(BetaError::DegenerateDenominator(_))));
    }

    #[test]
    fn parse_rules() {
        assert_eq!("Hybrid1".parse::<BetaRule>().unwrap(), BetaRule::Hybrid1);
        assert!(matches!("bogus".parse::<BetaRule>(), Err(BetaError::Unknown(_))));
    }
}
