use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Filter length, damping rate and viscosity of the model together with the
/// constant `eta_c` entering the contraction rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysParams<T> {
    pub alpha: T,
    pub beta: T,
    pub nu: T,
    #[serde(default = "default_eta_c", bound(deserialize = "T: Scalar"))]
    pub eta_c: T,
}

fn default_eta_c<T: Scalar>() -> T {
    T::one()
}

impl<T: Scalar> PhysParams<T> {
    pub fn new(alpha: T, beta: T, nu: T) -> Result<Self> {
        Self::with_eta_c(alpha, beta, nu, T::one())
    }

    pub fn with_eta_c(alpha: T, beta: T, nu: T, eta_c: T) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            nu,
            eta_c,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("nu", self.nu),
            ("eta_c", self.eta_c),
        ] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Symbol of the linear part, `-(nu |k|^2 + beta)`.
    #[inline]
    pub fn linear_symbol(&self, k2: T) -> T {
        -(self.nu * k2 + self.beta)
    }

    pub fn cast<U: Scalar>(&self) -> PhysParams<U> {
        PhysParams {
            alpha: U::lit(self.alpha.as_f64()),
            beta: U::lit(self.beta.as_f64()),
            nu: U::lit(self.nu.as_f64()),
            eta_c: U::lit(self.eta_c.as_f64()),
        }
    }
}
