//! Fourier multipliers: Helmholtz filter, Leray projector, derivatives,
//! truncation, Sobolev norms and pressure recovery.

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::GridSpec;
use crate::scalar::Scalar;
use crate::spectral::{SpectralField, VectorField};

/// Index pairs of the six independent entries of a symmetric 3x3 tensor.
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

#[inline]
pub(crate) fn sym_slot(a: usize, b: usize) -> usize {
    match (a.min(b), a.max(b)) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// Per-axis wavenumbers with the matching dealias and Nyquist flags.
pub(crate) struct Modes<T> {
    pub n: usize,
    pub k: Vec<T>,
    /// wavenumber used by first derivatives; zero on the Nyquist index
    pub kd: Vec<T>,
    pub keep: Vec<bool>,
}

impl<T: Scalar> Modes<T> {
    pub fn new(grid: &GridSpec) -> Self {
        let k = grid.wavenumbers::<T>();
        let kd = (0..grid.n)
            .map(|i| if grid.is_nyquist(grid.mode(i)) { T::zero() } else { k[i] })
            .collect();
        Self {
            n: grid.n,
            k,
            kd,
            keep: grid.retained_mask(),
        }
    }

    /// Calls `f(idx, [i, j, l])` for every mode in storage order.
    #[inline]
    pub fn for_each(&self, mut f: impl FnMut(usize, [usize; 3])) {
        let n = self.n;
        let mut idx = 0;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    f(idx, [i, j, l]);
                    idx += 1;
                }
            }
        }
    }

    #[inline]
    pub fn kvec(&self, ijl: [usize; 3]) -> [T; 3] {
        [self.k[ijl[0]], self.k[ijl[1]], self.k[ijl[2]]]
    }

    #[inline]
    pub fn k2(&self, ijl: [usize; 3]) -> T {
        let k = self.kvec(ijl);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    #[inline]
    pub fn retained(&self, ijl: [usize; 3]) -> bool {
        self.keep[ijl[0]] && self.keep[ijl[1]] && self.keep[ijl[2]]
    }

    /// `|k|^2` for every storage index.
    pub fn k2_table(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.n * self.n * self.n);
        self.for_each(|_, ijl| out.push(self.k2(ijl)));
        out
    }
}

/// Multiplies every mode of a scalar field by a real radial symbol `s(|k|^2)`.
pub fn apply_radial<T: Scalar>(f: &SpectralField<T>, symbol: impl Fn(T) -> T) -> SpectralField<T> {
    let modes = Modes::<T>::new(f.grid());
    let mut out = f.clone();
    let c = out.coeffs_mut();
    modes.for_each(|idx, ijl| c[idx] = c[idx] * symbol(modes.k2(ijl)));
    out
}

fn apply_radial_vec<T: Scalar>(v: &VectorField<T>, symbol: impl Fn(T) -> T + Sync) -> VectorField<T> {
    let [a, b, c] = v.comps();
    let (a, (b, c)) = rayon::join(
        || apply_radial(a, &symbol),
        || rayon::join(|| apply_radial(b, &symbol), || apply_radial(c, &symbol)),
    );
    VectorField::new([a, b, c])
        .expect("components share a grid")
        .assume_div_free(v.is_div_free())
}

#[inline]
pub fn filter_symbol<T: Scalar>(alpha: T, k2: T) -> T {
    T::one() / (T::one() + alpha * alpha * k2)
}

/// Bessel-potential filter `(1 - alpha^2 Laplacian)^{-1}` of a scalar field.
pub fn filter_scalar<T: Scalar>(f: &SpectralField<T>, alpha: T) -> SpectralField<T> {
    apply_radial(f, |k2| filter_symbol(alpha, k2))
}

/// Bessel-potential filter applied componentwise: `u(k) / (1 + alpha^2 |k|^2)`.
pub fn helmholtz_filter<T: Scalar>(v: &VectorField<T>, alpha: T) -> VectorField<T> {
    apply_radial_vec(v, |k2| filter_symbol(alpha, k2))
}

/// Leray projection `u - k (k.u) / |k|^2`, identity on the mean mode.
pub fn leray_project<T: Scalar>(v: &VectorField<T>) -> VectorField<T> {
    let grid = *v.grid();
    let modes = Modes::<T>::new(&grid);
    let [a, b, c] = v.comps();
    let (ca, cb, cc) = (a.coeffs(), b.coeffs(), c.coeffs());
    let mut out = [
        SpectralField::zeros(grid),
        SpectralField::zeros(grid),
        SpectralField::zeros(grid),
    ];
    {
        let [oa, ob, oc] = &mut out;
        let (oa, ob, oc) = (oa.coeffs_mut(), ob.coeffs_mut(), oc.coeffs_mut());
        modes.for_each(|idx, ijl| {
            let u = [ca[idx], cb[idx], cc[idx]];
            let k = modes.kvec(ijl);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if k2 == T::zero() {
                oa[idx] = u[0];
                ob[idx] = u[1];
                oc[idx] = u[2];
                return;
            }
            let kdotu = (u[0] * k[0] + u[1] * k[1] + u[2] * k[2]) / k2;
            oa[idx] = u[0] - kdotu * k[0];
            ob[idx] = u[1] - kdotu * k[1];
            oc[idx] = u[2] - kdotu * k[2];
        });
    }
    VectorField::new(out)
        .expect("components share a grid")
        .assume_div_free(true)
}

/// Gradient `i k f(k)`. First derivatives vanish on the Nyquist index.
pub fn gradient<T: Scalar>(f: &SpectralField<T>) -> VectorField<T> {
    let grid = *f.grid();
    let modes = Modes::<T>::new(&grid);
    let src = f.coeffs();
    let mut out = [
        SpectralField::zeros(grid),
        SpectralField::zeros(grid),
        SpectralField::zeros(grid),
    ];
    for (a, comp) in out.iter_mut().enumerate() {
        let dst = comp.coeffs_mut();
        modes.for_each(|idx, ijl| {
            dst[idx] = src[idx] * Complex::new(T::zero(), modes.kd[ijl[a]]);
        });
    }
    VectorField::new(out).expect("components share a grid")
}

/// Divergence `i k . v(k)`.
pub fn divergence<T: Scalar>(v: &VectorField<T>) -> SpectralField<T> {
    let grid = *v.grid();
    let modes = Modes::<T>::new(&grid);
    let mut out = SpectralField::zeros(grid);
    let dst = out.coeffs_mut();
    let c = [v.comp(0).coeffs(), v.comp(1).coeffs(), v.comp(2).coeffs()];
    modes.for_each(|idx, ijl| {
        let s = c[0][idx] * modes.kd[ijl[0]] + c[1][idx] * modes.kd[ijl[1]] + c[2][idx] * modes.kd[ijl[2]];
        dst[idx] = s * Complex::i();
    });
    out
}

/// Laplacian `-|k|^2 f(k)`.
pub fn laplacian<T: Scalar>(f: &SpectralField<T>) -> SpectralField<T> {
    apply_radial(f, |k2| -k2)
}

pub fn vector_laplacian<T: Scalar>(v: &VectorField<T>) -> VectorField<T> {
    apply_radial_vec(v, |k2| -k2)
}

/// Zeroes every mode with some `|m_i|` above the truncation cutoff.
pub fn dealias_scalar<T: Scalar>(f: &SpectralField<T>) -> SpectralField<T> {
    let modes = Modes::<T>::new(f.grid());
    let mut out = f.clone();
    let c = out.coeffs_mut();
    modes.for_each(|idx, ijl| {
        if !modes.retained(ijl) {
            c[idx] = Complex::zero();
        }
    });
    out
}

pub fn dealias<T: Scalar>(v: &VectorField<T>) -> VectorField<T> {
    let [a, b, c] = v.comps();
    VectorField::new([dealias_scalar(a), dealias_scalar(b), dealias_scalar(c)])
        .expect("components share a grid")
        .assume_div_free(v.is_div_free())
}

/// Squared norms of a vector field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBundle<T> {
    pub l2_sq: T,
    pub h1dot_sq: T,
    pub h2dot_sq: T,
    /// `l2_sq + alpha^2 h1dot_sq`
    pub h1alpha_sq: T,
}

impl<T: Scalar> NormBundle<T> {
    pub fn zero() -> Self {
        Self {
            l2_sq: T::zero(),
            h1dot_sq: T::zero(),
            h2dot_sq: T::zero(),
            h1alpha_sq: T::zero(),
        }
    }
}

/// Parseval sums `L^3 sum |k|^{2s} |u(k)|^2` for `s = 0, 1, 2`.
pub fn norms<T: Scalar>(v: &VectorField<T>, alpha: T) -> NormBundle<T> {
    let modes = Modes::<T>::new(v.grid());
    let (mut s0, mut s1, mut s2) = (T::zero(), T::zero(), T::zero());
    let c = [v.comp(0).coeffs(), v.comp(1).coeffs(), v.comp(2).coeffs()];
    modes.for_each(|idx, ijl| {
        let a = c[0][idx].norm_sqr() + c[1][idx].norm_sqr() + c[2][idx].norm_sqr();
        let k2 = modes.k2(ijl);
        s0 = s0 + a;
        s1 = s1 + k2 * a;
        s2 = s2 + k2 * k2 * a;
    });
    let vol = T::lit(v.grid().volume());
    let l2_sq = vol * s0;
    let h1dot_sq = vol * s1;
    NormBundle {
        l2_sq,
        h1dot_sq,
        h2dot_sq: vol * s2,
        h1alpha_sq: l2_sq + alpha * alpha * h1dot_sq,
    }
}

fn weighted_inner<T: Scalar>(v: &VectorField<T>, w: &VectorField<T>, weight: impl Fn(T) -> T) -> T {
    let modes = Modes::<T>::new(v.grid());
    let cv = [v.comp(0).coeffs(), v.comp(1).coeffs(), v.comp(2).coeffs()];
    let cw = [w.comp(0).coeffs(), w.comp(1).coeffs(), w.comp(2).coeffs()];
    let mut acc = T::zero();
    modes.for_each(|idx, ijl| {
        let mut s = T::zero();
        for a in 0..3 {
            s = s + (cv[a][idx] * cw[a][idx].conj()).re;
        }
        acc = acc + weight(modes.k2(ijl)) * s;
    });
    T::lit(v.grid().volume()) * acc
}

/// `(v, w)_{L^2}` for real fields.
pub fn l2_inner<T: Scalar>(v: &VectorField<T>, w: &VectorField<T>) -> T {
    weighted_inner(v, w, |_| T::one())
}

/// `(v, w)_{L^2} + alpha^2 (grad v, grad w)_{L^2}`.
pub fn h1alpha_inner<T: Scalar>(v: &VectorField<T>, w: &VectorField<T>, alpha: T) -> T {
    let a2 = alpha * alpha;
    weighted_inner(v, w, |k2| T::one() + a2 * k2)
}

pub fn h1alpha_norm<T: Scalar>(v: &VectorField<T>, alpha: T) -> T {
    norms(v, alpha).h1alpha_sq.sqrt()
}

/// Dealiased spectra of the symmetric products `(a_i b_j + a_j b_i) / 2`
/// computed from physical samples, ordered as [`SYM_PAIRS`].
pub fn symmetric_products<T: Scalar>(
    grid: GridSpec,
    a: &[Vec<T>; 3],
    b: &[Vec<T>; 3],
) -> Result<Vec<SpectralField<T>>> {
    let half = T::lit(0.5);
    SYM_PAIRS
        .par_iter()
        .map(|&(p, q)| {
            let prod: Vec<T> = (0..grid.len())
                .map(|x| half * (a[p][x] * b[q][x] + a[q][x] * b[p][x]))
                .collect();
            SpectralField::from_physical(grid, &prod).map(|f| dealias_scalar(&f))
        })
        .collect()
}

/// `P div(S)_alpha` for a symmetric tensor given by its six dealiased
/// spectra, re-truncated. The result carries the divergence-free certificate.
pub fn projected_filtered_divergence<T: Scalar>(
    grid: GridSpec,
    stress: &[SpectralField<T>],
    alpha: T,
) -> VectorField<T> {
    debug_assert_eq!(stress.len(), 6);
    let modes = Modes::<T>::new(&grid);
    let s: Vec<&[Complex<T>]> = stress.iter().map(|f| f.coeffs()).collect();
    let mut out = [
        SpectralField::zeros(grid),
        SpectralField::zeros(grid),
        SpectralField::zeros(grid),
    ];
    {
        let [oa, ob, oc] = &mut out;
        let dst = [oa.coeffs_mut(), ob.coeffs_mut(), oc.coeffs_mut()];
        let mut dst = dst;
        modes.for_each(|idx, ijl| {
            if !modes.retained(ijl) {
                return;
            }
            let k = modes.kvec(ijl);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let filt = filter_symbol(alpha, k2);
            let mut d = [Complex::zero(); 3];
            for (i, di) in d.iter_mut().enumerate() {
                let mut acc: Complex<T> = Complex::zero();
                for (j, &kj) in k.iter().enumerate() {
                    acc = acc + s[sym_slot(i, j)][idx] * kj;
                }
                *di = acc * Complex::<T>::i() * filt;
            }
            if k2 > T::zero() {
                let kd = (d[0] * k[0] + d[1] * k[1] + d[2] * k[2]) / k2;
                for i in 0..3 {
                    d[i] = d[i] - kd * k[i];
                }
            }
            for i in 0..3 {
                dst[i][idx] = d[i];
            }
        });
    }
    VectorField::new(out)
        .expect("components share a grid")
        .assume_div_free(true)
}

/// Pressure `p(k) = -sum_ij k_i k_j / |k|^2 (u_i u_j)(k) / (1 + alpha^2 |k|^2)`
/// from dealiased products, with zero mean.
pub fn pressure_from_velocity<T: Scalar>(u: &VectorField<T>, alpha: T) -> Result<SpectralField<T>> {
    let grid = *u.grid();
    let phys = dealias(u).to_physical();
    let stress = symmetric_products(grid, &phys, &phys)?;
    let modes = Modes::<T>::new(&grid);
    let s: Vec<&[Complex<T>]> = stress.iter().map(|f| f.coeffs()).collect();
    let mut p = SpectralField::zeros(grid);
    let dst = p.coeffs_mut();
    modes.for_each(|idx, ijl| {
        let k = modes.kvec(ijl);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == T::zero() {
            return;
        }
        let mut acc: Complex<T> = Complex::zero();
        for i in 0..3 {
            for j in 0..3 {
                acc = acc + s[sym_slot(i, j)][idx] * (k[i] * k[j]);
            }
        }
        dst[idx] = -acc / k2 * filter_symbol(alpha, k2);
    });
    Ok(p)
}
