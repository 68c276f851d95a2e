use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Neighbouring-matrix granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrivacyLevel {
    /// Neighbours differ by `u vᵀ` with unit vectors `u`, `v`.
    Priv1,
    /// Neighbours differ by any matrix of unit Frobenius norm.
    Priv2,
}

impl std::str::FromStr for PrivacyLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "priv1" => Ok(PrivacyLevel::Priv1),
            "priv2" => Ok(PrivacyLevel::Priv2),
            other => Err(Error::InvalidParameter(format!("unknown privacy level `{other}`"))),
        }
    }
}

/// Base of the leading `log(1/δ)` factor in `σ_min`. The inner `ln(1/δ)` is
/// always natural.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
        }
    }
}

/// `(ε, δ)` budget, granularity and approximation parameter `α`.
///
/// `ε = +∞` is accepted and means "no privacy": every noise scale is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub delta: f64,
    pub level: PrivacyLevel,
    pub alpha: f64,
    #[serde(default)]
    pub sigma_log_base: LogBase,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64, level: PrivacyLevel, alpha: f64) -> Result<Self> {
        let p = PrivacyParams {
            epsilon,
            delta,
            level,
            alpha,
            sigma_log_base: LogBase::Natural,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_log_base(mut self, base: LogBase) -> Self {
        self.sigma_log_base = base;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon = {} must be > 0",
                self.epsilon
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta = {} outside (0, 1)",
                self.delta
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {} outside (0, 1]",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Gaussian noise standard deviations derived from [`PrivacyParams`].
/// Fields that do not apply to the level are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseScales {
    pub level: PrivacyLevel,
    pub rho: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub sigma_min: f64,
}

impl NoiseScales {
    pub fn zero(level: PrivacyLevel) -> Self {
        NoiseScales {
            level,
            rho: 0.0,
            rho1: 0.0,
            rho2: 0.0,
            sigma_min: 0.0,
        }
    }
}

/// `ρ = √((1+α) ln(1/δ)) / ε`; also the `ρ₁` of the `Priv1` algorithm.
pub fn rho(epsilon: f64, delta: f64, alpha: f64) -> f64 {
    ((1.0 + alpha) * (1.0 / delta).ln()).sqrt() / epsilon
}

/// `ρ₂ = (1+α) √(ln(1/δ)) / ε`.
pub fn rho2(epsilon: f64, delta: f64, alpha: f64) -> f64 {
    (1.0 + alpha) * (1.0 / delta).ln().sqrt() / epsilon
}

/// `σ_min = 16 log(1/δ) √(t (1+α)(1−α)⁻¹ ln(1/δ)) / ε`.
pub fn sigma_min(epsilon: f64, delta: f64, alpha: f64, t: usize, base: LogBase) -> f64 {
    let inv = 1.0 / delta;
    16.0 * base.log(inv) * (t as f64 * (1.0 + alpha) / (1.0 - alpha) * inv.ln()).sqrt() / epsilon
}

/// Standard deviation of the Gaussian mechanism for ℓ₂-sensitivity `c`:
/// `c · √(log(1/δ)) / ε`.
pub fn gaussian_mechanism_std(sensitivity: f64, epsilon: f64, delta: f64) -> f64 {
    sensitivity * (1.0 / delta).ln().sqrt() / epsilon
}

/// Noise scales for `params`; `t` is the regression-sketch size, used by
/// `σ_min` under `Priv1`.
pub fn calibrate(params: &PrivacyParams, t: usize) -> Result<NoiseScales> {
    params.validate()?;
    let PrivacyParams {
        epsilon,
        delta,
        level,
        alpha,
        sigma_log_base,
    } = *params;
    match level {
        PrivacyLevel::Priv2 => Ok(NoiseScales {
            rho: rho(epsilon, delta, alpha),
            ..NoiseScales::zero(level)
        }),
        PrivacyLevel::Priv1 => {
            if alpha >= 1.0 {
                return Err(Error::InvalidParameter(
                    "Priv1 calibration needs alpha < 1 (σ_min has a (1 − α)⁻¹ factor)".into(),
                ));
            }
            if t == 0 {
                return Err(Error::InvalidParameter("Priv1 calibration needs t >= 1".into()));
            }
            Ok(NoiseScales {
                rho1: rho(epsilon, delta, alpha),
                rho2: rho2(epsilon, delta, alpha),
                sigma_min: sigma_min(epsilon, delta, alpha, t, sigma_log_base),
                ..NoiseScales::zero(level)
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn priv2_rho_at_unit_parameters() {
        let p = PrivacyParams::new(1.0, 1.0 / E, PrivacyLevel::Priv2, 1.0).unwrap();
        let s = calibrate(&p, 10).unwrap();
        assert!((s.rho - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!((s.rho1, s.rho2, s.sigma_min), (0.0, 0.0, 0.0));
    }

    #[test]
    fn priv1_scales_coincide_at_alpha_zero() {
        let d: f64 = 1e-3;
        let expect = (1.0 / d).ln().sqrt() / 0.7;
        assert!((rho(0.7, d, 0.0) - expect).abs() < 1e-15);
        assert!((rho2(0.7, d, 0.0) - expect).abs() < 1e-15);
    }

    #[test]
    fn priv1_sigma_min_example() {
        let p = PrivacyParams::new(1.0, 1.0 / E, PrivacyLevel::Priv1, 0.5).unwrap();
        let s = calibrate(&p, 100).unwrap();
        let expect = 16.0 * 300f64.sqrt();
        assert!((s.sigma_min - expect).abs() < 1e-12 * expect);
        assert!((s.sigma_min - 277.128).abs() < 1e-3);
    }

    #[test]
    fn log_base_switch() {
        let p = PrivacyParams::new(1.0, 0.25, PrivacyLevel::Priv1, 0.5).unwrap();
        let nat = calibrate(&p, 9).unwrap().sigma_min;
        let two = calibrate(&p.with_log_base(LogBase::Two), 9).unwrap().sigma_min;
        assert!((two / nat - 2.0 / 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn infinite_epsilon_is_zero_noise() {
        let p = PrivacyParams::new(f64::INFINITY, 0.01, PrivacyLevel::Priv1, 0.5).unwrap();
        let s = calibrate(&p, 4).unwrap();
        assert_eq!((s.rho1, s.rho2, s.sigma_min), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rejections() {
        assert!(PrivacyParams::new(0.0, 0.1, PrivacyLevel::Priv2, 0.5).is_err());
        assert!(PrivacyParams::new(1.0, 1.0, PrivacyLevel::Priv2, 0.5).is_err());
        assert!(PrivacyParams::new(1.0, 0.1, PrivacyLevel::Priv2, 0.0).is_err());
        let p = PrivacyParams::new(1.0, 0.1, PrivacyLevel::Priv1, 1.0).unwrap();
        assert!(calibrate(&p, 10).is_err());
        let p2 = PrivacyParams {
            level: PrivacyLevel::Priv2,
            ..p
        };
        assert!(calibrate(&p2, 10).is_ok());
    }
}
