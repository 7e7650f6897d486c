//! Numeric tolerance policy.
//!
//! Every approximate comparison in the crate goes through [`Tolerances`]:
//! `|x - y| <= atol + rtol * max(|x|, |y|)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
    /// Residual bound (relative to `1 + ||reference||`) under which `a = λb` counts as exact.
    pub objectivity_tol: f64,
    /// Smallest probability that may appear in a conditioning denominator.
    pub prob_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            atol: 1e-10,
            rtol: 1e-10,
            objectivity_tol: 1e-9,
            prob_floor: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("atol", self.atol),
            ("rtol", self.rtol),
            ("objectivity_tol", self.objectivity_tol),
            ("prob_floor", self.prob_floor),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn approx_eq(&self, x: f64, y: f64) -> bool {
        (x - y).abs() <= self.atol + self.rtol * x.abs().max(y.abs())
    }

    /// `true` when a non-negative deviation is negligible against `scale`.
    pub fn negligible(&self, deviation: f64, scale: f64) -> bool {
        deviation <= self.atol + self.rtol * scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        Tolerances::default().validate().unwrap();
    }

    #[test]
    fn rejects_non_positive() {
        let tol = Tolerances {
            atol: 0.0,
            ..Default::default()
        };
        assert!(tol.validate().is_err());
        let tol = Tolerances {
            prob_floor: f64::NAN,
            ..Default::default()
        };
        assert!(tol.validate().is_err());
    }

    #[test]
    fn relative_part_scales() {
        let tol = Tolerances::default();
        assert!(tol.approx_eq(1e6, 1e6 + 1e-5));
        assert!(!tol.approx_eq(1.0, 1.0 + 1e-8));
    }
}
