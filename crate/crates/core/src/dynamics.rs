//! Time integration of the damped Bardina system and the diagnostics that
//! enter its energy balance.
//!
//! The linear part `-(nu |k|^2 + beta)` is integrated exactly; forcing and
//! the Leray-projected filtered advection are treated with the two-stage
//! exponential Runge-Kutta scheme (Cox-Matthews ETD2RK):
//!
//! ```text
//! a       = e^{hL} u_n + h phi1(hL) N(u_n)
//! u_{n+1} = a + h phi2(hL) (N(a) - N(u_n))
//! ```
//!
//! with `N(u) = f - P div((u (x) u)_alpha)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::params::PhysParams;
use crate::scalar::Scalar;
use crate::spectral::ops::Modes;
use crate::spectral::{
    dealias, h1alpha_inner, norms, projected_filtered_divergence, symmetric_products, NormBundle,
    SpectralField, VectorField,
};

/// Below this `|z|` the phi-functions switch to their Taylor series.
const PHI_SERIES_THRESHOLD: f64 = 1e-4;

/// Advective stability factor: `dt <= CFL_FACTOR * dx / max|u|`.
pub const CFL_FACTOR: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct SimState<T: Scalar> {
    pub u: VectorField<T>,
    pub t: T,
    pub params: PhysParams<T>,
    pub force: VectorField<T>,
}

impl<T: Scalar> SimState<T> {
    pub fn new(u: VectorField<T>, force: VectorField<T>, params: PhysParams<T>) -> Result<Self> {
        params.validate()?;
        u.ensure_same_grid(&force)?;
        for (name, f) in [("velocity", &u), ("force", &force)] {
            if !f.is_div_free() {
                return Err(Error::InvalidArgument(format!(
                    "{name} lacks the divergence-free certificate"
                )));
            }
        }
        Ok(Self {
            u,
            t: T::zero(),
            params,
            force,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.u.grid()
    }
}

/// `P div((u (x) u)_alpha)` with dealiased products; also returns `max |u|`
/// over the physical grid.
pub(crate) fn nonlinear_with_speed<T: Scalar>(u: &VectorField<T>, alpha: T) -> Result<(VectorField<T>, T)> {
    let grid = *u.grid();
    let phys = dealias(u).to_physical();
    let mut speed = T::zero();
    for x in 0..grid.len() {
        let s = phys[0][x] * phys[0][x] + phys[1][x] * phys[1][x] + phys[2][x] * phys[2][x];
        speed = speed.max(s);
    }
    let stress = symmetric_products(grid, &phys, &phys)?;
    Ok((projected_filtered_divergence(grid, &stress, alpha), speed.sqrt()))
}

/// The projected, filtered advection term `P div((u (x) u)_alpha)`.
pub fn nonlinear_term<T: Scalar>(u: &VectorField<T>, alpha: T) -> Result<VectorField<T>> {
    nonlinear_with_speed(u, alpha).map(|(n, _)| n)
}

/// Largest stable time step for a given peak speed.
pub fn cfl_cap(grid: &GridSpec, max_speed: f64) -> f64 {
    if max_speed > 0.0 {
        CFL_FACTOR * grid.spacing() / max_speed
    } else {
        f64::INFINITY
    }
}

/// Peak physical speed `max_x |u(x)|`.
pub fn max_speed<T: Scalar>(u: &VectorField<T>) -> T {
    let phys = u.to_physical();
    (0..u.grid().len())
        .map(|x| (phys[0][x] * phys[0][x] + phys[1][x] * phys[1][x] + phys[2][x] * phys[2][x]).sqrt())
        .fold(T::zero(), |a, b| a.max(b))
}

/// `(e^z, phi1(z), phi2(z))` with `phi1 = (e^z - 1)/z`, `phi2 = (e^z - 1 - z)/z^2`.
pub fn phi_functions<T: Scalar>(z: T) -> (T, T, T) {
    let e = z.exp();
    if z.abs() < T::lit(PHI_SERIES_THRESHOLD) {
        let z2 = z * z;
        let z3 = z2 * z;
        let phi1 = T::one() + z / T::lit(2.0) + z2 / T::lit(6.0) + z3 / T::lit(24.0);
        let phi2 = T::lit(0.5) + z / T::lit(6.0) + z2 / T::lit(24.0) + z3 / T::lit(120.0);
        (e, phi1, phi2)
    } else {
        let phi1 = (e - T::one()) / z;
        let phi2 = (e - T::one() - z) / (z * z);
        (e, phi1, phi2)
    }
}

/// Precomputed per-mode exponential weights for one `(grid, params, dt)`.
#[derive(Clone, Debug)]
pub struct Stepper<T: Scalar> {
    grid: GridSpec,
    params: PhysParams<T>,
    dt: T,
    exp: Vec<T>,
    h_phi1: Vec<T>,
    h_phi2: Vec<T>,
}

impl<T: Scalar> Stepper<T> {
    pub fn new(grid: GridSpec, params: PhysParams<T>, dt: T) -> Result<Self> {
        params.validate()?;
        if !(dt.is_finite() && dt > T::zero()) {
            return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
        }
        let k2 = Modes::<T>::new(&grid).k2_table();
        let mut exp = Vec::with_capacity(k2.len());
        let mut h_phi1 = Vec::with_capacity(k2.len());
        let mut h_phi2 = Vec::with_capacity(k2.len());
        for &q in &k2 {
            let (e, p1, p2) = phi_functions(params.linear_symbol(q) * dt);
            exp.push(e);
            h_phi1.push(dt * p1);
            h_phi2.push(dt * p2);
        }
        Ok(Self {
            grid,
            params,
            dt,
            exp,
            h_phi1,
            h_phi2,
        })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn params(&self) -> &PhysParams<T> {
        &self.params
    }

    /// `f - nl`, per component.
    fn forcing_minus(&self, force: &VectorField<T>, nl: &VectorField<T>) -> VectorField<T> {
        force - nl
    }

    fn combine(&self, out: &mut VectorField<T>, w: &[T], v: &VectorField<T>) {
        let flag = out.is_div_free() && v.is_div_free();
        for (o, s) in out.comps_mut().iter_mut().zip(v.comps()) {
            for ((c, &x), &wi) in o.coeffs_mut().iter_mut().zip(s.coeffs()).zip(w) {
                *c = *c + x * wi;
            }
        }
        let taken = std::mem::replace(out, VectorField::zeros(self.grid));
        *out = taken.assume_div_free(flag);
    }

    fn scale_modes(&self, v: &VectorField<T>, w: &[T]) -> VectorField<T> {
        let comps: Vec<SpectralField<T>> = v
            .comps()
            .iter()
            .map(|c| c.map(|idx, x| x * w[idx]))
            .collect();
        let [a, b, c]: [SpectralField<T>; 3] = comps.try_into().expect("three components");
        VectorField::new([a, b, c])
            .expect("shared grid")
            .assume_div_free(v.is_div_free())
    }

    /// One ETD2RK step; errors on a CFL violation or non-finite output.
    pub fn step(&self, state: &SimState<T>) -> Result<SimState<T>> {
        if *state.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let alpha = self.params.alpha;
        let (nl0, speed) = nonlinear_with_speed(&state.u, alpha)?;
        let cap = cfl_cap(&self.grid, speed.as_f64());
        if self.dt.as_f64() > cap {
            return Err(Error::CflViolation {
                dt: self.dt.as_f64(),
                cap,
            });
        }
        let n0 = self.forcing_minus(&state.force, &nl0);
        let mut a = self.scale_modes(&state.u, &self.exp);
        self.combine(&mut a, &self.h_phi1, &n0);

        let nl1 = nonlinear_term(&a, alpha)?;
        let diff = &self.forcing_minus(&state.force, &nl1) - &n0;
        let mut next = a;
        self.combine(&mut next, &self.h_phi2, &diff);

        let t = state.t + self.dt;
        if !next.is_finite() {
            return Err(Error::BlowUp { t: t.as_f64() });
        }
        Ok(SimState {
            u: next,
            t,
            params: state.params,
            force: state.force.clone(),
        })
    }

    /// Linear part only: `u -> e^{hL} u`.
    pub fn propagate_linear(&self, v: &VectorField<T>) -> VectorField<T> {
        self.scale_modes(v, &self.exp)
    }

    /// `e^{hL} v + h phi1(hL) g`, the exponential Euler update for a
    /// prescribed right-hand side `g`.
    pub fn exponential_euler(&self, v: &VectorField<T>, g: &VectorField<T>) -> VectorField<T> {
        let mut out = self.scale_modes(v, &self.exp);
        self.combine(&mut out, &self.h_phi1, g);
        out
    }
}

/// Advances `state` by one step of size `dt`.
pub fn step<T: Scalar>(state: &SimState<T>, dt: T) -> Result<SimState<T>> {
    Stepper::new(*state.grid(), state.params, dt)?.step(state)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSample<T> {
    pub t: T,
    pub norms: NormBundle<T>,
    /// `<f, u> + alpha^2 <grad f, grad u>`
    pub force_pairing: T,
    /// `nu |u|_{H1}^2 + nu alpha^2 |u|_{H2}^2`
    pub dissipation: T,
    /// `beta |u|_{H1_alpha}^2`
    pub damping: T,
}

pub fn diagnostics<T: Scalar>(state: &SimState<T>) -> DiagnosticsSample<T> {
    let p = &state.params;
    let nb = norms(&state.u, p.alpha);
    DiagnosticsSample {
        t: state.t,
        norms: nb,
        force_pairing: h1alpha_inner(&state.force, &state.u, p.alpha),
        dissipation: p.nu * (nb.h1dot_sq + p.alpha * p.alpha * nb.h2dot_sq),
        damping: p.beta * nb.h1alpha_sq,
    }
}

/// Time-ordered diagnostics with running trapezoid integrals.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub samples: Vec<DiagnosticsSample<T>>,
    pub cum_dissipation: Vec<T>,
    pub cum_damping: Vec<T>,
    pub cum_force_pairing: Vec<T>,
    pub cum_h1dot: Vec<T>,
    pub cum_h2dot: Vec<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn new() -> Self {
        Self {
            samples: Vec::new(),
            cum_dissipation: Vec::new(),
            cum_damping: Vec::new(),
            cum_force_pairing: Vec::new(),
            cum_h1dot: Vec::new(),
            cum_h2dot: Vec::new(),
        }
    }

    pub fn push(&mut self, s: DiagnosticsSample<T>) -> Result<()> {
        match self.samples.last() {
            None => {
                for v in [
                    &mut self.cum_dissipation,
                    &mut self.cum_damping,
                    &mut self.cum_force_pairing,
                    &mut self.cum_h1dot,
                    &mut self.cum_h2dot,
                ] {
                    v.push(T::zero());
                }
            }
            Some(prev) => {
                if !(s.t > prev.t) {
                    return Err(Error::InvalidArgument(format!(
                        "sample time {} does not follow {}",
                        s.t, prev.t
                    )));
                }
                let h = (s.t - prev.t) * T::lit(0.5);
                let last = self.samples.len() - 1;
                let inc = |v: &mut Vec<T>, a: T, b: T| {
                    let c = v[last] + h * (a + b);
                    v.push(c);
                };
                inc(&mut self.cum_dissipation, prev.dissipation, s.dissipation);
                inc(&mut self.cum_damping, prev.damping, s.damping);
                inc(&mut self.cum_force_pairing, prev.force_pairing, s.force_pairing);
                inc(&mut self.cum_h1dot, prev.norms.h1dot_sq, s.norms.h1dot_sq);
                inc(&mut self.cum_h2dot, prev.norms.h2dot_sq, s.norms.h2dot_sq);
            }
        }
        self.samples.push(s);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn energies(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.norms.h1alpha_sq).collect()
    }
}

/// Runs `n_steps` steps, calling `on_sample` at step 0, every `sample_every`
/// steps and at the final step.
pub fn run<T: Scalar>(
    mut state: SimState<T>,
    stepper: &Stepper<T>,
    n_steps: usize,
    sample_every: usize,
    mut on_sample: impl FnMut(&SimState<T>) -> Result<()>,
) -> Result<SimState<T>> {
    let every = sample_every.max(1);
    let t0 = state.t;
    on_sample(&state)?;
    for k in 1..=n_steps {
        state = stepper.step(&state)?;
        state.t = t0 + T::lit(k as f64) * stepper.dt();
        if k % every == 0 || k == n_steps {
            on_sample(&state)?;
        }
    }
    Ok(state)
}

/// Number of steps of size `dt` that reach `duration`; the final time is
/// within `dt / 2` of the target.
pub fn steps_for(duration: f64, dt: f64) -> Result<usize> {
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "duration must be >= 0, got {duration}"
        )));
    }
    Ok((duration / dt).round() as usize)
}

/// Evolves to `t_end` with diagnostics every `sample_every` steps.
pub fn evolve<T: Scalar>(
    state: SimState<T>,
    dt: T,
    t_end: T,
    sample_every: usize,
) -> Result<(SimState<T>, Trajectory<T>)> {
    let stepper = Stepper::new(*state.grid(), state.params, dt)?;
    let n = steps_for((t_end - state.t).as_f64(), dt.as_f64())?;
    let mut traj = Trajectory::new();
    let end = run(state, &stepper, n, sample_every, |s| traj.push(diagnostics(s)))?;
    Ok((end, traj))
}

/// Normalized defect of the energy equality at every sample:
/// `[E(t) - E(0) + 2 int D + 2 int B - 2 int F] / max(E(0), 1)`.
pub fn energy_budget_residual<T: Scalar>(traj: &Trajectory<T>) -> Vec<T> {
    let Some(first) = traj.samples.first() else {
        return Vec::new();
    };
    let e0 = first.norms.h1alpha_sq;
    let scale = e0.max(T::one());
    let two = T::lit(2.0);
    traj.samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            (s.norms.h1alpha_sq - e0
                + two * traj.cum_dissipation[i]
                + two * traj.cum_damping[i]
                - two * traj.cum_force_pairing[i])
                / scale
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport<T> {
    /// `min_t [E(0) e^{-beta t} + 4/beta^2 |f|^2 - E(t)]`
    pub pointwise_min_slack: T,
    /// minimum over sampled windows of
    /// `2T/beta |f|^2 + E(t) - (nu int |u|_{H1}^2 + alpha^2 int |u|_{H2}^2)`
    pub window_min_slack: T,
    pub tolerance: T,
    pub pass: bool,
}

/// Checks the exponential energy envelope at every sample and the
/// dissipation-window bound over every pair of samples.
pub fn decay_envelope_check<T: Scalar>(
    traj: &Trajectory<T>,
    force_norm_sq: T,
    params: &PhysParams<T>,
) -> EnvelopeReport<T> {
    let beta = params.beta;
    let a2 = params.alpha * params.alpha;
    let e = traj.energies();
    let t = traj.times();
    let e0 = e.first().copied().unwrap_or_else(T::zero);
    let tol = T::lit(1e-12) * e0;
    let floor = T::lit(4.0) / (beta * beta) * force_norm_sq;

    let mut pointwise = T::infinity();
    for (&ti, &ei) in t.iter().zip(&e) {
        pointwise = pointwise.min(e0 * (-beta * (ti - t[0])).exp() + floor - ei);
    }

    let mut window = T::infinity();
    let two = T::lit(2.0);
    for i in 0..t.len() {
        for j in (i + 1)..t.len() {
            let span = t[j] - t[i];
            let lhs = params.nu * (traj.cum_h1dot[j] - traj.cum_h1dot[i])
                + a2 * (traj.cum_h2dot[j] - traj.cum_h2dot[i]);
            let rhs = two * span / beta * force_norm_sq + e[i];
            window = window.min(rhs - lhs);
        }
    }
    if t.len() < 2 {
        window = T::zero();
    }
    if t.is_empty() {
        pointwise = T::zero();
    }
    EnvelopeReport {
        pointwise_min_slack: pointwise,
        window_min_slack: window,
        tolerance: tol,
        pass: pointwise >= -tol && window >= -tol,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AbsorbingEntry<T> {
    AlreadyInside,
    Entered { time: T, analytic_bound: T },
    NotReached { analytic_bound: T },
    /// zero force: the ball shrinks to the origin
    Degenerate { at_origin: bool },
}

/// Squared radius `8/beta^2 |f|^2` of the absorbing ball in H1_alpha.
pub fn absorbing_radius_sq<T: Scalar>(force_norm_sq: T, beta: T) -> T {
    T::lit(8.0) / (beta * beta) * force_norm_sq
}

/// First sample inside the absorbing ball, together with the entry time
/// `ln(beta^2 E(0) / (4 |f|^2)) / beta` guaranteed by the energy envelope.
pub fn absorbing_ball_entry<T: Scalar>(traj: &Trajectory<T>, force_norm_sq: T, beta: T) -> AbsorbingEntry<T> {
    let Some(first) = traj.samples.first() else {
        return AbsorbingEntry::NotReached {
            analytic_bound: T::zero(),
        };
    };
    let e0 = first.norms.h1alpha_sq;
    if force_norm_sq == T::zero() {
        return AbsorbingEntry::Degenerate {
            at_origin: e0 == T::zero(),
        };
    }
    let r2 = absorbing_radius_sq(force_norm_sq, beta);
    if e0 <= r2 {
        return AbsorbingEntry::AlreadyInside;
    }
    let bound = (beta * beta * e0 / (T::lit(4.0) * force_norm_sq)).ln() / beta;
    match traj.samples.iter().find(|s| s.norms.h1alpha_sq <= r2) {
        Some(s) => AbsorbingEntry::Entered {
            time: s.t - first.t,
            analytic_bound: bound,
        },
        None => AbsorbingEntry::NotReached {
            analytic_bound: bound,
        },
    }
}
