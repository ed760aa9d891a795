//! Linearized flow, orthonormal frames in the `H1_alpha` product and
//! Lyapunov sums `sum_i [L w_i, w_i]_alpha`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{SimState, Stepper};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::params::PhysParams;
use crate::recipes::{generate, FieldRecipe};
use crate::scalar::Scalar;
use crate::spectral::{
    dealias, h1alpha_inner, norms, projected_filtered_divergence, symmetric_products,
    vector_laplacian, VectorField,
};

use super::transport_constant;

/// Largest tolerated deviation of a frame's Gram matrix from the identity.
pub const FRAME_TOL: f64 = 1e-8;

/// `P div(w (x) u + u (x) w)_alpha`, i.e. the filtered, projected
/// `(w . grad) u + (u . grad) w` for divergence-free `u`, `w`.
pub fn linearized_transport<T: Scalar>(w: &VectorField<T>, u: &VectorField<T>, alpha: T) -> Result<VectorField<T>> {
    w.ensure_same_grid(u)?;
    let grid = *w.grid();
    let pw = dealias(w).to_physical();
    let pu = dealias(u).to_physical();
    let stress = symmetric_products(grid, &pw, &pu)?;
    Ok(projected_filtered_divergence(grid, &stress, alpha).scaled(T::lit(2.0)))
}

/// `L w = -P((w . grad) u + (u . grad) w)_alpha + nu Lap w - beta w`.
pub fn linearized_rhs<T: Scalar>(w: &VectorField<T>, u: &VectorField<T>, params: &PhysParams<T>) -> Result<VectorField<T>> {
    let mut out = linearized_transport(w, u, params.alpha)?.scaled(-T::one());
    out.axpy(params.nu, &vector_laplacian(w));
    out.axpy(-params.beta, w);
    Ok(out)
}

/// Fields that are orthonormal in `[v, w]_alpha = (v, w) + alpha^2 (grad v, grad w)`.
#[derive(Clone, Debug)]
pub struct OrthoFrame<T: Scalar> {
    fields: Vec<VectorField<T>>,
    alpha: T,
}

impl<T: Scalar> OrthoFrame<T> {
    pub fn fields(&self) -> &[VectorField<T>] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn into_fields(self) -> Vec<VectorField<T>> {
        self.fields
    }

    /// `max_ij |[w_i, w_j]_alpha - delta_ij|`.
    pub fn gram_deviation(&self) -> T {
        gram_deviation(&self.fields, self.alpha)
    }
}

pub fn gram_deviation<T: Scalar>(fields: &[VectorField<T>], alpha: T) -> T {
    let mut dev = T::zero();
    for (i, a) in fields.iter().enumerate() {
        for (j, b) in fields.iter().enumerate().skip(i) {
            let target = if i == j { T::one() } else { T::zero() };
            dev = dev.max((h1alpha_inner(a, b, alpha) - target).abs());
        }
    }
    dev
}

/// Modified Gram-Schmidt in `[., .]_alpha`, applied twice for stability.
pub fn orthonormalize<T: Scalar>(fields: Vec<VectorField<T>>, alpha: T) -> Result<OrthoFrame<T>> {
    let rel_tol = T::lit(1e-10);
    let mut out: Vec<VectorField<T>> = Vec::with_capacity(fields.len());
    for (index, f) in fields.into_iter().enumerate() {
        if let Some(first) = out.first() {
            f.ensure_same_grid(first)?;
        }
        let start = h1alpha_inner(&f, &f, alpha).sqrt();
        let mut v = f;
        for _ in 0..2 {
            for q in &out {
                let c = h1alpha_inner(&v, q, alpha);
                v.axpy(-c, q);
            }
        }
        let nv = h1alpha_inner(&v, &v, alpha).sqrt();
        if !(nv > rel_tol * start) || nv == T::zero() {
            return Err(Error::RankDeficient { index });
        }
        out.push(v.scaled(T::one() / nv));
    }
    Ok(OrthoFrame { fields: out, alpha })
}

/// Orthonormal frame of `m` random band-limited fields.
pub fn random_frame<T: Scalar>(grid: GridSpec, m: usize, seed: u64, alpha: T) -> Result<OrthoFrame<T>> {
    let k_max = grid.cutoff().floor().min(3.0) as u32;
    let fields = (0..m)
        .map(|i| generate(&FieldRecipe::random_band(1.0, seed.wrapping_add(i as u64), 1, k_max), grid, alpha))
        .collect::<Result<Vec<_>>>()?;
    orthonormalize(fields, alpha)
}

/// `sum_i [L(u) w_i, w_i]_alpha` over an orthonormal frame.
pub fn lyapunov_sum<T: Scalar>(frame: &OrthoFrame<T>, u: &VectorField<T>, params: &PhysParams<T>) -> Result<T> {
    let dev = frame.gram_deviation();
    if !(dev <= T::lit(FRAME_TOL)) {
        return Err(Error::NotOrthonormal(dev.as_f64()));
    }
    let mut s = T::zero();
    for w in &frame.fields {
        s = s + h1alpha_inner(&linearized_rhs(w, u, params)?, w, params.alpha);
    }
    Ok(s)
}

/// Upper bound for an `m`-frame sum:
/// `-beta m + 2 C_LT^4 / (nu^{12/5} alpha^{6/5}) |u|_{H1}^{14/5} + (3/8) alpha^2 |u|_{H2}^2`.
pub fn lyapunov_sum_bound<T: Scalar>(m: usize, u: &VectorField<T>, params: &PhysParams<T>) -> T {
    let nb = norms(u, params.alpha);
    -params.beta * T::lit(m as f64)
        + transport_constant(params) * nb.h1dot_sq.sqrt().powf(T::lit(2.8))
        + T::lit(0.375) * params.alpha * params.alpha * nb.h2dot_sq
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSample<T> {
    pub t: T,
    pub sum: T,
    pub bound: T,
    /// `bound - sum`
    pub slack: T,
}

/// Advances a frame by one exponential Euler step of the tangent equation
/// along the base state, then re-orthonormalizes.
pub fn transport_frame<T: Scalar>(
    frame: &OrthoFrame<T>,
    u: &VectorField<T>,
    stepper: &Stepper<T>,
) -> Result<OrthoFrame<T>> {
    let alpha = stepper.params().alpha;
    let moved = frame
        .fields
        .iter()
        .map(|w| {
            let g = linearized_transport(w, u, alpha)?.scaled(-T::one());
            Ok(stepper.exponential_euler(w, &g))
        })
        .collect::<Result<Vec<_>>>()?;
    orthonormalize(moved, alpha)
}

/// Samples the Lyapunov sum and its bound along a trajectory while
/// transporting the frame with the linearized flow.
pub fn lyapunov_along<T: Scalar>(
    mut state: SimState<T>,
    mut frame: OrthoFrame<T>,
    stepper: &Stepper<T>,
    n_steps: usize,
    sample_every: usize,
) -> Result<Vec<LyapunovSample<T>>> {
    let every = sample_every.max(1);
    let t0 = state.t;
    let m = frame.len();
    let mut out = Vec::new();
    for k in 0..=n_steps {
        if k % every == 0 || k == n_steps {
            let sum = lyapunov_sum(&frame, &state.u, &state.params)?;
            let bound = lyapunov_sum_bound(m, &state.u, &state.params);
            out.push(LyapunovSample {
                t: state.t,
                sum,
                bound,
                slack: bound - sum,
            });
        }
        if k == n_steps {
            break;
        }
        frame = transport_frame(&frame, &state.u, stepper)?;
        state = stepper.step(&state)?;
        state.t = t0 + T::lit((k + 1) as f64) * stepper.dt();
    }
    Ok(out)
}
