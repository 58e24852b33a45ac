//! Limit curves for the mixing profiles.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoryCurve {
    /// `e^{-beta}`
    JointGamma0,
    /// `(1 + beta) e^{-beta}`
    JointGammainf,
    /// `psi_gamma(beta)`
    JointGeneral,
    /// `q e^{-beta}`
    MarginalGamma0,
    /// `e^{-beta}`
    MarginalGammainf,
    /// `phi(beta / gamma) e^{-beta}`
    MarginalGeneral,
    /// `phi(beta)`
    StaticPhi,
}

impl FromStr for TheoryCurve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "joint_gamma0" => Self::JointGamma0,
            "joint_gammainf" => Self::JointGammainf,
            "joint_general" => Self::JointGeneral,
            "marginal_gamma0" => Self::MarginalGamma0,
            "marginal_gammainf" => Self::MarginalGammainf,
            "marginal_general" => Self::MarginalGeneral,
            "static_phi" => Self::StaticPhi,
            other => return Err(Error::BadCurveName(other.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryValue {
    pub value: f64,
    /// Evaluated exactly at a jump; the right-hand branch was returned.
    pub at_jump: bool,
}

/// `phi(r) = 1` for `r < 1`, `q` for `r >= 1`.
fn phi(r: f64, q: f64) -> f64 {
    if r < 1.0 {
        1.0
    } else {
        q
    }
}

impl TheoryCurve {
    pub fn eval(self, beta: f64, gamma: f64, q: f64) -> Result<TheoryValue> {
        if !(beta > 0.0) {
            return Err(Error::BadValue(format!("beta must be positive, got {beta}")));
        }
        let decay = (-beta).exp();
        let (value, at_jump) = match self {
            Self::JointGamma0 => (decay, false),
            Self::JointGammainf => ((1.0 + beta) * decay, false),
            Self::JointGeneral => {
                let v = if beta < gamma { (1.0 + beta) * decay } else { decay };
                (v, beta == gamma)
            }
            Self::MarginalGamma0 => (q * decay, false),
            Self::MarginalGammainf => (decay, false),
            Self::MarginalGeneral => (phi(beta / gamma, q) * decay, beta == gamma),
            Self::StaticPhi => (phi(beta, q), beta == 1.0),
        };
        Ok(TheoryValue { value, at_jump })
    }
}

/// Evaluates a curve by name.
pub fn theory_curves(curve: &str, beta: f64, gamma: f64, q: f64) -> Result<TheoryValue> {
    curve.parse::<TheoryCurve>()?.eval(beta, gamma, q)
}

/// Static cutoff profile `1(beta < 1)`.
pub fn static_theta(beta: f64) -> f64 {
    if beta < 1.0 {
        1.0
    } else {
        0.0
    }
}
