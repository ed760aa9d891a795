//! Attractor-level quantities: the contraction rate `eta(beta)`, the
//! dimension bound with its closed-form constants, Lyapunov sums of the
//! linearized flow and the stability/decay checks.

pub mod lyapunov;
pub mod stability;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PhysParams;
use crate::scalar::Scalar;

pub use lyapunov::*;
pub use stability::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaRegime {
    Positive,
    Zero,
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaReport<T> {
    pub eta_value: T,
    pub regime: EtaRegime,
}

/// `eta = c |f| / (alpha^{5/2} beta) - beta` with `c = params.eta_c`.
///
/// Values within a few ulps of the subtracted terms are classified as zero,
/// so the cancelling case `c = alpha = beta = |f| = 1` reads as `Zero`.
pub fn eta<T: Scalar>(params: &PhysParams<T>, f_norm: T) -> Result<EtaReport<T>> {
    params.validate()?;
    if !(f_norm.is_finite() && f_norm >= T::zero()) {
        return Err(Error::InvalidArgument(format!("f_norm must be >= 0, got {f_norm}")));
    }
    let drive = params.eta_c * f_norm / (params.alpha.powf(T::lit(2.5)) * params.beta);
    let value = drive - params.beta;
    let scale = drive.max(params.beta);
    let regime = if value.abs() <= T::lit(4.0) * T::epsilon() * scale {
        EtaRegime::Zero
    } else if value > T::zero() {
        EtaRegime::Positive
    } else {
        EtaRegime::Negative
    };
    Ok(EtaReport {
        eta_value: if regime == EtaRegime::Zero { T::zero() } else { value },
        regime,
    })
}

/// `(3 / 5^{5/3}) (16 pi^{3/2} Gamma(7/2) / Gamma(5))^{2/3}`; the Gamma ratio
/// reduces to `(5/4) pi^2`.
pub fn lieb_thirring_constant<T: Scalar>() -> T {
    let pi = T::PI();
    let inner = T::lit(1.25) * pi * pi;
    T::lit(3.0) / T::lit(5.0).powf(T::lit(5.0 / 3.0)) * inner.powf(T::lit(2.0 / 3.0))
}

/// Prefactor `2 C_LT^4 / (nu^{12/5} alpha^{6/5})` shared by the Lyapunov-sum
/// bound and the dimension constant.
pub fn transport_constant<T: Scalar>(params: &PhysParams<T>) -> T {
    let c = lieb_thirring_constant::<T>();
    T::lit(2.0) * c.powi(4) / (params.nu.powf(T::lit(2.4)) * params.alpha.powf(T::lit(1.2)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionBound<T> {
    pub c_lt: T,
    pub c_abn: T,
    pub bound: T,
}

/// `c(alpha, beta, nu) max(|f|^{14/5}, |f|^2)` with
/// `c = (1/beta) [2 C_LT^4 / (nu^{12/5} alpha^{6/5}) 2^{16/5} / alpha^{14/5} + 3 / (4 beta)]`.
pub fn dimension_bound<T: Scalar>(params: &PhysParams<T>, f_norm: T) -> Result<DimensionBound<T>> {
    params.validate()?;
    if !(f_norm.is_finite() && f_norm >= T::zero()) {
        return Err(Error::InvalidArgument(format!("f_norm must be >= 0, got {f_norm}")));
    }
    let c_lt = lieb_thirring_constant::<T>();
    let c_abn = (transport_constant(params) * T::lit(2.0).powf(T::lit(3.2))
        / params.alpha.powf(T::lit(2.8))
        + T::lit(0.75) / params.beta)
        / params.beta;
    let growth = f_norm.powf(T::lit(2.8)).max(f_norm * f_norm);
    Ok(DimensionBound {
        c_lt,
        c_abn,
        bound: c_abn * growth,
    })
}

/// Slope of the least-squares line through `(x, y)`.
pub(crate) fn ls_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
