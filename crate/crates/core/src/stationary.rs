//! Steady states of the damped model by damped Picard iteration on
//! `U = (-nu Lap + beta)^{-1} [f - P div((U (x) U)_alpha)]`.

use serde::{Deserialize, Serialize};

use crate::dynamics::nonlinear_term;
use crate::error::{Error, Result};
use crate::params::PhysParams;
use crate::scalar::Scalar;
use crate::spectral::ops::Modes;
use crate::spectral::{h1alpha_norm, norms, vector_laplacian, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryOptions {
    pub tol: f64,
    pub relaxation: f64,
    pub max_iter: usize,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            relaxation: 1.0,
            max_iter: 500,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StationaryResult<T: Scalar> {
    pub u: VectorField<T>,
    /// `|U - T(U)|_{H1_alpha}` at the returned iterate
    pub residual: T,
    pub iterations: usize,
    /// `2/beta^2 |f|^2 - (|U|^2_{H1_alpha} + nu alpha^2 |U|^2_{H2})`
    pub energy_slack: T,
    pub residual_history: Vec<T>,
    /// relaxation in effect when the iteration stopped
    pub final_relaxation: T,
}

/// Divides every mode by `nu |k|^2 + beta`.
fn resolvent<T: Scalar>(v: &VectorField<T>, params: &PhysParams<T>) -> VectorField<T> {
    let k2 = Modes::<T>::new(v.grid()).k2_table();
    let flag = v.is_div_free();
    let mut out = v.clone();
    for c in out.comps_mut().iter_mut() {
        for (x, &q) in c.coeffs_mut().iter_mut().zip(&k2) {
            *x = *x / (params.nu * q + params.beta);
        }
    }
    out.assume_div_free(flag)
}

/// `T(U) = (-nu Lap + beta)^{-1} [f - P div((U (x) U)_alpha)]`.
pub fn stationary_map<T: Scalar>(
    u: &VectorField<T>,
    force: &VectorField<T>,
    params: &PhysParams<T>,
) -> Result<VectorField<T>> {
    u.ensure_same_grid(force)?;
    let nl = nonlinear_term(u, params.alpha)?;
    Ok(resolvent(&(force - &nl), params))
}

/// Stationary energy estimate slack for a candidate `U`.
pub fn stationary_energy_slack<T: Scalar>(u: &VectorField<T>, force: &VectorField<T>, params: &PhysParams<T>) -> T {
    let a = params.alpha;
    let f2 = norms(force, a).h1alpha_sq;
    let nb = norms(u, a);
    T::lit(2.0) / (params.beta * params.beta) * f2 - (nb.h1alpha_sq + params.nu * a * a * nb.h2dot_sq)
}

/// Damped Picard iteration from `U = 0`; the relaxation is halved whenever
/// the fixed-point residual grows.
pub fn solve_stationary<T: Scalar>(
    force: &VectorField<T>,
    params: &PhysParams<T>,
    opts: &StationaryOptions,
) -> Result<StationaryResult<T>> {
    params.validate()?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be > 0, got {}", opts.tol)));
    }
    if !(opts.relaxation > 0.0 && opts.relaxation <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "relaxation must lie in (0, 1], got {}",
            opts.relaxation
        )));
    }
    if !force.is_div_free() {
        return Err(Error::InvalidArgument("force lacks the divergence-free certificate".into()));
    }
    let tol = T::lit(opts.tol);
    let mut omega = T::lit(opts.relaxation);
    let mut u = VectorField::zeros(*force.grid());
    let mut history = Vec::new();
    let mut prev = T::infinity();
    for it in 0..=opts.max_iter {
        let tu = stationary_map(&u, force, params)?;
        let r = h1alpha_norm(&(&u - &tu), params.alpha);
        if !r.is_finite() {
            break;
        }
        history.push(r);
        if r <= tol {
            return Ok(StationaryResult {
                energy_slack: stationary_energy_slack(&u, force, params),
                u,
                residual: r,
                iterations: it,
                residual_history: history,
                final_relaxation: omega,
            });
        }
        if it == opts.max_iter {
            break;
        }
        if r > prev {
            omega = omega * T::lit(0.5);
        }
        prev = r;
        // U <- (1 - omega) U + omega T(U)
        let mut next = u.scaled(T::one() - omega);
        next.axpy(omega, &tu);
        u = next;
    }
    Err(Error::NonConvergence {
        iterations: history.len().saturating_sub(1),
        last: history.last().map(|r| r.as_f64()).unwrap_or(f64::NAN),
        residual_history: history.iter().map(|r| r.as_f64()).collect(),
    })
}

/// `|-nu Lap U + P div((U (x) U)_alpha) + beta U - f|_{L2}`.
pub fn stationary_residual_pde<T: Scalar>(
    u: &VectorField<T>,
    force: &VectorField<T>,
    params: &PhysParams<T>,
) -> Result<T> {
    u.ensure_same_grid(force)?;
    let nl = nonlinear_term(u, params.alpha)?;
    let mut r = vector_laplacian(u).scaled(-params.nu);
    r.axpy(T::one(), &nl);
    r.axpy(params.beta, u);
    r.axpy(-T::one(), force);
    Ok(norms(&r, params.alpha).l2_sq.sqrt())
}

/// `max (nu |k|^2 + beta)` over retained modes.
pub fn resolvent_operator_norm<T: Scalar>(grid: &crate::GridSpec, params: &PhysParams<T>) -> T {
    let modes = Modes::<T>::new(grid);
    let mut m = T::zero();
    modes.for_each(|_, ijl| {
        if modes.retained(ijl) {
            m = m.max(params.nu * modes.k2(ijl) + params.beta);
        }
    });
    m
}
