use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SELU_LAMBDA: f64 = 1.0507009873554805;
pub const SELU_ALPHA: f64 = 1.6732632423543772;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Activation {
    Sigmoid,
    Tanh,
    ReLU,
    Elu { alpha: f64 },
    Selu { lambda: f64, alpha: f64 },
}

impl Activation {
    pub const fn elu() -> Self {
        Activation::Elu { alpha: 1.0 }
    }

    pub const fn selu() -> Self {
        Activation::Selu {
            lambda: SELU_LAMBDA,
            alpha: SELU_ALPHA,
        }
    }

    /// The five supported kinds with their default constants.
    pub fn all() -> [Activation; 5] {
        [
            Activation::Sigmoid,
            Activation::Tanh,
            Activation::ReLU,
            Activation::elu(),
            Activation::selu(),
        ]
    }

    pub fn validate(self) -> Result<Self> {
        match self {
            Activation::Elu { alpha } if alpha.is_nan() || alpha <= 0.0 => {
                Err(Error::Config(format!("ELU alpha must be > 0, got {alpha}")))
            }
            Activation::Selu { lambda, .. } if lambda.is_nan() || lambda <= 1.0 => Err(
                Error::Config(format!("SeLU lambda must be > 1, got {lambda}")),
            ),
            a => Ok(a),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::ReLU => "relu",
            Activation::Elu { .. } => "elu",
            Activation::Selu { .. } => "selu",
        }
    }

    #[inline]
    pub fn apply_scalar(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => sigmoid(z),
            Activation::Tanh => z.tanh(),
            Activation::ReLU => z.max(0.0),
            Activation::Elu { alpha } => {
                if z > 0.0 {
                    z
                } else {
                    alpha * z.exp_m1()
                }
            }
            Activation::Selu { lambda, alpha } => {
                if z > 0.0 {
                    lambda * z
                } else {
                    lambda * alpha * z.exp_m1()
                }
            }
        }
    }

    /// Derivative at `z`. At the kink (z = 0) the left-hand slope is used.
    #[inline]
    pub fn grad_scalar(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => {
                let s = sigmoid(z);
                s * (1.0 - s)
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::ReLU => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Elu { alpha } => {
                if z > 0.0 {
                    1.0
                } else {
                    alpha * z.exp()
                }
            }
            Activation::Selu { lambda, alpha } => {
                if z > 0.0 {
                    lambda
                } else {
                    lambda * alpha * z.exp()
                }
            }
        }
    }

    pub fn apply(self, z: &[f64]) -> Vec<f64> {
        z.iter().map(|&v| self.apply_scalar(v)).collect()
    }

    pub fn grad(self, z: &[f64]) -> Vec<f64> {
        z.iter().map(|&v| self.grad_scalar(v)).collect()
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::ReLU),
            "elu" => Ok(Activation::elu()),
            "selu" => Ok(Activation::selu()),
            other => Err(Error::Config(format!("unknown activation {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_zero_and_sign_cases() {
        assert_eq!(Activation::Sigmoid.apply_scalar(0.0), 0.5);
        assert_eq!(Activation::Tanh.apply_scalar(0.0), 0.0);
        assert_eq!(Activation::ReLU.apply_scalar(-3.0), 0.0);
        assert_eq!(Activation::elu().apply_scalar(0.0), 0.0);
        assert_eq!(Activation::selu().apply_scalar(0.0), 0.0);
    }

    #[test]
    fn closed_form_values() {
        let elu = Activation::elu().apply_scalar(-1.0);
        assert!((elu - ((-1.0f64).exp() - 1.0)).abs() < 1e-15);
        assert!((elu + 0.63212).abs() < 1e-5);
        let selu = Activation::selu().apply_scalar(1.0);
        assert!((selu - 1.05070).abs() < 1e-5);
        let tanh = Activation::Tanh.apply_scalar(0.7);
        let by_def = (0.7f64.exp() - (-0.7f64).exp()) / (0.7f64.exp() + (-0.7f64).exp());
        assert!((tanh - by_def).abs() < 1e-15);
        assert!(Activation::Sigmoid.apply_scalar(-800.0).is_finite());
    }

    #[test]
    fn slopes() {
        assert_eq!(Activation::Sigmoid.grad_scalar(0.0), 0.25);
        assert_eq!(Activation::ReLU.grad_scalar(5.0), 1.0);
        assert_eq!(Activation::ReLU.grad_scalar(-5.0), 0.0);
        assert_eq!(Activation::ReLU.grad_scalar(0.0), 0.0);
        assert_eq!(Activation::elu().grad_scalar(0.0), 1.0);
        assert!((Activation::selu().grad_scalar(0.0) - SELU_LAMBDA * SELU_ALPHA).abs() < 1e-15);
    }

    #[test]
    fn grad_matches_central_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let h = 1e-6;
        for act in Activation::all() {
            for _ in 0..200 {
                let mut z: f64 = rng.random_range(-4.0..4.0);
                if z.abs() < 1e-3 {
                    z += 0.01;
                }
                let fd = (act.apply_scalar(z + h) - act.apply_scalar(z - h)) / (2.0 * h);
                let an = act.grad_scalar(z);
                let rel = (fd - an).abs() / an.abs().max(1e-3);
                assert!(rel < 1e-6, "{act} at {z}: fd {fd} vs {an}");
            }
        }
    }

    #[test]
    fn parse_and_validate() {
        assert_eq!("ReLU".parse::<Activation>().unwrap(), Activation::ReLU);
        assert!("swish".parse::<Activation>().is_err());
        assert!(Activation::Elu { alpha: 0.0 }.validate().is_err());
        assert!(Activation::Selu {
            lambda: 1.0,
            alpha: 1.0
        }
        .validate()
        .is_err());
        assert!(Activation::selu().validate().is_ok());
    }
}
