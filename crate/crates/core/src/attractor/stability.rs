//! Two-trajectory contraction, convergence to a steady state and decay of
//! unforced solutions in `L^p`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::{absorbing_radius_sq, run, steps_for, SimState, Stepper};
use crate::error::{Error, Result};
use crate::params::PhysParams;
use crate::scalar::Scalar;
use crate::spectral::{dealias, h1alpha_norm, norms, VectorField};

use super::ls_slope;

/// Time series `g(t) = |u_a(t) - u_b(t)|^2_{H1_alpha}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GapSeries<T> {
    pub t: Vec<T>,
    pub g: Vec<T>,
}

impl<T: Scalar> GapSeries<T> {
    /// Largest `g(t) / g(0) - 1`; zero for an identically vanishing gap.
    pub fn max_growth(&self) -> T {
        let Some(&g0) = self.g.first() else {
            return T::zero();
        };
        if g0 == T::zero() {
            return if self.g.iter().all(|&g| g == T::zero()) {
                T::zero()
            } else {
                T::infinity()
            };
        }
        self.g
            .iter()
            .map(|&g| g / g0 - T::one())
            .fold(T::neg_infinity(), |a, b| a.max(b))
    }

    /// `g(t) <= g(0) (1 + rel_tol)` at every sample.
    pub fn is_orbitally_stable(&self, rel_tol: T) -> bool {
        self.max_growth() <= rel_tol
    }

    /// Least-squares slope of `ln g` over samples with `t >= t_min` and
    /// `g > floor`.
    pub fn log_rate(&self, t_min: T, floor: T) -> Option<f64> {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .t
            .iter()
            .zip(&self.g)
            .filter(|(&t, &g)| t >= t_min && g > floor)
            .map(|(t, g)| (t.as_f64(), g.as_f64().ln()))
            .unzip();
        ls_slope(&x, &y)
    }

    /// First sample time at which `sqrt(g) <= factor sqrt(g(0))`, measured
    /// from the first sample.
    pub fn first_norm_below_fraction(&self, factor: T) -> Option<T> {
        let g0 = *self.g.first()?;
        let target = factor * factor * g0;
        self.t
            .iter()
            .zip(&self.g)
            .find(|(_, &g)| g <= target)
            .map(|(&t, _)| t - self.t[0])
    }

    /// First sample time at which `sqrt(g) < level`.
    pub fn first_norm_below(&self, level: T) -> Option<T> {
        let target = level * level;
        self.t
            .iter()
            .zip(&self.g)
            .find(|(_, &g)| g < target)
            .map(|(&t, _)| t - self.t[0])
    }
}

/// Runs two solutions in lockstep with the same step and samples their
/// squared `H1_alpha` distance.
#[allow(clippy::too_many_arguments)]
pub fn trajectory_gap<T: Scalar>(
    u0_a: &VectorField<T>,
    u0_b: &VectorField<T>,
    force_a: &VectorField<T>,
    force_b: &VectorField<T>,
    params: &PhysParams<T>,
    dt: T,
    t_end: T,
    sample_every: usize,
) -> Result<GapSeries<T>> {
    u0_a.ensure_same_grid(u0_b)?;
    let mut a = SimState::new(u0_a.clone(), force_a.clone(), *params)?;
    let mut b = SimState::new(u0_b.clone(), force_b.clone(), *params)?;
    let stepper = Stepper::new(*u0_a.grid(), *params, dt)?;
    let n = steps_for(t_end.as_f64(), dt.as_f64())?;
    let every = sample_every.max(1);
    let mut out = GapSeries { t: Vec::new(), g: Vec::new() };
    let gap = |a: &SimState<T>, b: &SimState<T>| norms(&(&a.u - &b.u), params.alpha).h1alpha_sq;
    out.t.push(T::zero());
    out.g.push(gap(&a, &b));
    for k in 1..=n {
        a = stepper.step(&a)?;
        b = stepper.step(&b)?;
        if k % every == 0 || k == n {
            out.t.push(T::lit(k as f64) * dt);
            out.g.push(gap(&a, &b));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyConvergence<T> {
    pub t: Vec<T>,
    /// `|u(t) - U|_{H1_alpha}`
    pub r: Vec<T>,
    /// `max_x |u(t, x) - U(x)|`
    pub r_inf: Vec<T>,
    /// first sample inside the absorbing ball, if any
    pub ball_entry: Option<T>,
    pub monotone: bool,
    /// envelope constant `C = R_inf(t1) t1^{3/4}` at the first sample `t1 >= 1`
    pub envelope_c: Option<T>,
    /// smallest `C t^{-3/4} - R_inf(t)` for `t >= t1`
    pub envelope_min_slack: Option<T>,
    pub pass: bool,
}

/// Evolves from `u0` and compares with the steady state `steady`.
#[allow(clippy::too_many_arguments)]
pub fn steady_convergence<T: Scalar>(
    u0: &VectorField<T>,
    force: &VectorField<T>,
    params: &PhysParams<T>,
    steady: &VectorField<T>,
    dt: T,
    t_end: T,
    sample_every: usize,
) -> Result<SteadyConvergence<T>> {
    u0.ensure_same_grid(steady)?;
    let state = SimState::new(u0.clone(), force.clone(), *params)?;
    let stepper = Stepper::new(*u0.grid(), *params, dt)?;
    let n = steps_for(t_end.as_f64(), dt.as_f64())?;
    let radius_sq = absorbing_radius_sq(norms(force, params.alpha).h1alpha_sq, params.beta);
    let mut t = Vec::new();
    let mut r = Vec::new();
    let mut r_inf = Vec::new();
    let mut ball_entry = None;
    run(state, &stepper, n, sample_every, |s| {
        let d = &s.u - steady;
        t.push(s.t);
        r.push(h1alpha_norm(&d, params.alpha));
        r_inf.push(crate::dynamics::max_speed(&d));
        if ball_entry.is_none() && norms(&s.u, params.alpha).h1alpha_sq <= radius_sq {
            ball_entry = Some(s.t);
        }
        Ok(())
    })?;

    let floor = T::lit(1e-12) * r.first().copied().unwrap_or_else(T::zero).max(T::one());
    let monotone = match ball_entry {
        None => true,
        Some(te) => {
            let start = t.iter().position(|&x| x >= te).unwrap_or(t.len());
            r[start..]
                .windows(2)
                .all(|w| w[0] <= floor || w[1] < w[0])
        }
    };

    let (envelope_c, envelope_min_slack) = match t.iter().position(|&x| x >= T::one()) {
        Some(i1) => {
            let c = r_inf[i1] * t[i1].powf(T::lit(0.75));
            let slack = (i1..t.len())
                .map(|i| c * t[i].powf(T::lit(-0.75)) - r_inf[i])
                .fold(T::infinity(), |a, b| a.min(b));
            (Some(c), Some(slack))
        }
        None => (None, None),
    };
    let inf_floor = T::lit(1e-12) * r_inf.first().copied().unwrap_or_else(T::zero).max(T::one());
    let env_ok = match (envelope_c, envelope_min_slack) {
        (Some(c), Some(s)) => s >= -(T::lit(1e-12) * c + inf_floor),
        _ => true,
    };
    Ok(SteadyConvergence {
        t,
        r,
        r_inf,
        ball_entry,
        monotone,
        envelope_c,
        envelope_min_slack,
        pass: monotone && env_ok,
    })
}

/// Exponent of an `L^p` norm: a finite `p >= 1` or infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "LpRepr", into = "LpRepr")]
pub enum LpExponent {
    Finite(u32),
    Infinity,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LpRepr {
    Int(u32),
    Str(String),
}

impl TryFrom<LpRepr> for LpExponent {
    type Error = String;

    fn try_from(r: LpRepr) -> std::result::Result<Self, String> {
        match r {
            LpRepr::Int(0) => Err("p must be >= 1".into()),
            LpRepr::Int(p) => Ok(Self::Finite(p)),
            LpRepr::Str(s) if s == "inf" => Ok(Self::Infinity),
            LpRepr::Str(s) => Err(format!("unknown exponent {s:?}, expected an integer or \"inf\"")),
        }
    }
}

impl From<LpExponent> for LpRepr {
    fn from(p: LpExponent) -> Self {
        match p {
            LpExponent::Finite(p) => LpRepr::Int(p),
            LpExponent::Infinity => LpRepr::Str("inf".into()),
        }
    }
}

impl fmt::Display for LpExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Infinity => f.write_str("inf"),
        }
    }
}

impl LpExponent {
    /// Envelope rate `2 beta / p`.
    pub fn envelope_rate<T: Scalar>(&self, beta: T) -> T {
        match self {
            Self::Finite(p) => T::lit(2.0) * beta / T::lit(*p as f64),
            Self::Infinity => T::zero(),
        }
    }
}

/// `|u|_{L^p}` by uniform quadrature of `|u(x)|` on the dealiased field.
pub fn lp_norm<T: Scalar>(u: &VectorField<T>, p: LpExponent) -> T {
    let grid = *u.grid();
    let phys = dealias(u).to_physical();
    let mag = (0..grid.len()).map(|x| (phys[0][x] * phys[0][x] + phys[1][x] * phys[1][x] + phys[2][x] * phys[2][x]).sqrt());
    match p {
        LpExponent::Infinity => mag.fold(T::zero(), |a, b| a.max(b)),
        LpExponent::Finite(q) => {
            let w = T::lit(grid.spacing().powi(3));
            let s = mag.fold(T::zero(), |a, b| a + b.powi(q as i32));
            (w * s).powf(T::one() / T::lit(q as f64))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpEnvelope<T> {
    pub p: LpExponent,
    pub series: Vec<T>,
    /// `C_p = |u(t1)|_p e^{(2 beta / p) t1}` at the first sample `t1 >= 1`
    pub c_p: Option<T>,
    /// smallest `C_p e^{-(2 beta / p) t} - |u(t)|_p` over `t >= t1`
    pub min_slack: Option<T>,
    /// least-squares slope of `ln |u(t)|_p` over `t >= 1`
    pub fitted_rate: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroForceDecay<T> {
    pub t: Vec<T>,
    pub envelopes: Vec<LpEnvelope<T>>,
    pub pass: bool,
}

/// Unforced run from `u0` with `L^p` envelopes fitted at `t = 1`.
pub fn zero_force_decay<T: Scalar>(
    u0: &VectorField<T>,
    params: &PhysParams<T>,
    dt: T,
    t_end: T,
    sample_every: usize,
    p_list: &[LpExponent],
) -> Result<ZeroForceDecay<T>> {
    if p_list.is_empty() {
        return Err(Error::InvalidArgument("p_list is empty".into()));
    }
    let grid = *u0.grid();
    let state = SimState::new(u0.clone(), VectorField::zeros(grid), *params)?;
    let stepper = Stepper::new(grid, *params, dt)?;
    let n = steps_for(t_end.as_f64(), dt.as_f64())?;
    let mut t = Vec::new();
    let mut series: Vec<Vec<T>> = vec![Vec::new(); p_list.len()];
    run(state, &stepper, n, sample_every, |s| {
        t.push(s.t);
        for (p, out) in p_list.iter().zip(series.iter_mut()) {
            out.push(lp_norm(&s.u, *p));
        }
        Ok(())
    })?;

    let i1 = t.iter().position(|&x| x >= T::one());
    let envelopes: Vec<LpEnvelope<T>> = p_list
        .iter()
        .zip(series)
        .map(|(&p, s)| {
            let rate = p.envelope_rate(params.beta);
            let (c_p, min_slack) = match i1 {
                Some(i1) => {
                    let c = s[i1] * (rate * t[i1]).exp();
                    let slack = (i1..t.len())
                        .map(|i| c * (-rate * t[i]).exp() - s[i])
                        .fold(T::infinity(), |a, b| a.min(b));
                    (Some(c), Some(slack))
                }
                None => (None, None),
            };
            let (x, y): (Vec<f64>, Vec<f64>) = t
                .iter()
                .zip(&s)
                .filter(|(&ti, &v)| ti >= T::one() && v > T::zero())
                .map(|(ti, v)| (ti.as_f64(), v.as_f64().ln()))
                .unzip();
            let pass = match (c_p, min_slack) {
                (Some(c), Some(sl)) => sl >= -T::lit(1e-12) * c,
                _ => true,
            };
            LpEnvelope {
                p,
                series: s,
                c_p,
                min_slack,
                fitted_rate: ls_slope(&x, &y),
                pass,
            }
        })
        .collect();
    let pass = envelopes.iter().all(|e| e.pass);
    Ok(ZeroForceDecay { t, envelopes, pass })
}
