//! Fourier representation of scalar and vector fields on the periodic box.
//!
//! Coefficients are normalized so that
//! `u(x) = sum_m c(m) exp(i k.x)` with `k = 2 pi m / L`, i.e. the forward
//! transform divides by `n^3`. With this choice Parseval reads
//! `int |u|^2 dx = L^3 sum_m |c(m)|^2`.

mod fft;
pub mod ops;

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::scalar::Scalar;

pub use ops::*;

/// Tolerance of the divergence-free certificate.
pub const DIV_FREE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField<T: Scalar> {
    grid: GridSpec,
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> SpectralField<T> {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex::zero(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex<T>>) -> Result<Self> {
        grid.validate()?;
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    /// Forward transform of real samples laid out row-major on `grid`.
    pub fn from_physical(grid: GridSpec, samples: &[T]) -> Result<Self> {
        grid.validate()?;
        if samples.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        let mut coeffs: Vec<Complex<T>> =
            samples.iter().map(|&s| Complex::new(s, T::zero())).collect();
        fft::fft3(&mut coeffs, grid.n, FftDirection::Forward);
        let scale = T::one() / T::lit(grid.len() as f64);
        coeffs.iter_mut().for_each(|c| *c = *c * scale);
        Ok(Self { grid, coeffs })
    }

    /// Real part of the inverse transform, row-major.
    pub fn to_physical(&self) -> Vec<T> {
        let mut data = self.coeffs.clone();
        fft::fft3(&mut data, self.grid.n, FftDirection::Inverse);
        data.into_iter().map(|c| c.re).collect()
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<T>> {
        self.coeffs
    }

    pub fn coeff(&self, m: [i64; 3]) -> Complex<T> {
        self.coeffs[self.grid.mode_index(m)]
    }

    pub fn set_coeff(&mut self, m: [i64; 3], value: Complex<T>) {
        let idx = self.grid.mode_index(m);
        self.coeffs[idx] = value;
    }

    pub fn max_abs(&self) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |acc, c| acc.max(c.norm()))
    }

    /// `max_m |c(-m) - conj(c(m))| / max(1, max |c|)`.
    pub fn hermitian_defect(&self) -> T {
        let mut worst = T::zero();
        for idx in 0..self.coeffs.len() {
            let cj = self.coeffs[self.grid.conjugate_index(idx)];
            worst = worst.max((cj - self.coeffs[idx].conj()).norm());
        }
        worst / self.max_abs().max(T::one())
    }

    /// Replaces every coefficient by the Hermitian average
    /// `(c(m) + conj(c(-m))) / 2`.
    pub fn symmetrize(&mut self) {
        let half = T::lit(0.5);
        let old = self.coeffs.clone();
        for (idx, c) in self.coeffs.iter_mut().enumerate() {
            let cj = old[self.grid.conjugate_index(idx)];
            *c = (old[idx] + cj.conj()) * half;
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: T, other: &Self) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = *a + *b * s;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Same-grid elementwise map.
    pub fn map(&self, mut f: impl FnMut(usize, Complex<T>) -> Complex<T>) -> Self {
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| f(i, c))
                .collect(),
        }
    }

    pub fn cast<U: Scalar>(&self) -> SpectralField<U> {
        SpectralField {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| Complex::new(U::lit(c.re.as_f64()), U::lit(c.im.as_f64())))
                .collect(),
        }
    }
}

impl<T: Scalar> Add for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn add(self, rhs: Self) -> SpectralField<T> {
        let mut out = self.clone();
        out.axpy(T::one(), rhs);
        out
    }
}

impl<T: Scalar> Sub for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn sub(self, rhs: Self) -> SpectralField<T> {
        let mut out = self.clone();
        out.axpy(-T::one(), rhs);
        out
    }
}

/// Forward transform of a cube of samples whose edge length is inferred from
/// the slice length. Rejects non-cubic and odd-sized inputs.
pub fn forward_transform<T: Scalar>(samples: &[T], box_len: f64) -> Result<SpectralField<T>> {
    let n = (samples.len() as f64).cbrt().round() as usize;
    if n * n * n != samples.len() {
        return Err(Error::InvalidGrid(format!(
            "{} samples do not form a cube",
            samples.len()
        )));
    }
    let grid = GridSpec::new(n, box_len)?;
    SpectralField::from_physical(grid, samples)
}

pub fn inverse_transform<T: Scalar>(field: &SpectralField<T>) -> Vec<T> {
    field.to_physical()
}

/// Three spectral components on a shared grid, with an optional certificate
/// that the field is divergence free.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField<T: Scalar> {
    comps: [SpectralField<T>; 3],
    div_free: bool,
}

impl<T: Scalar> VectorField<T> {
    pub fn new(comps: [SpectralField<T>; 3]) -> Result<Self> {
        let g = *comps[0].grid();
        if comps.iter().any(|c| *c.grid() != g) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            comps,
            div_free: false,
        })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            comps: [
                SpectralField::zeros(grid),
                SpectralField::zeros(grid),
                SpectralField::zeros(grid),
            ],
            div_free: true,
        }
    }

    pub fn from_physical(grid: GridSpec, samples: [&[T]; 3]) -> Result<Self> {
        let comps: Vec<SpectralField<T>> = samples
            .par_iter()
            .map(|s| SpectralField::from_physical(grid, s))
            .collect::<Result<_>>()?;
        let [a, b, c]: [SpectralField<T>; 3] = comps.try_into().expect("three components");
        Self::new([a, b, c])
    }

    pub fn to_physical(&self) -> [Vec<T>; 3] {
        let v: Vec<Vec<T>> = self.comps.par_iter().map(|c| c.to_physical()).collect();
        v.try_into().expect("three components")
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        self.comps[0].grid()
    }

    #[inline]
    pub fn comps(&self) -> &[SpectralField<T>; 3] {
        &self.comps
    }

    #[inline]
    pub fn comp(&self, a: usize) -> &SpectralField<T> {
        &self.comps[a]
    }

    /// Mutable access drops the divergence-free certificate.
    pub fn comps_mut(&mut self) -> &mut [SpectralField<T>; 3] {
        self.div_free = false;
        &mut self.comps
    }

    pub fn into_comps(self) -> [SpectralField<T>; 3] {
        self.comps
    }

    #[inline]
    pub fn is_div_free(&self) -> bool {
        self.div_free
    }

    /// Marks the field divergence free without checking. Only for operators
    /// whose output is divergence free by construction.
    pub(crate) fn assume_div_free(mut self, flag: bool) -> Self {
        self.div_free = flag;
        self
    }

    /// `max_k |k . u(k)| / max(1, |u(k)|)`.
    pub fn max_divergence(&self) -> T {
        let g = self.grid();
        let kk = g.wavenumbers::<T>();
        let n = g.n;
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let idx = g.index(i, j, l);
                    let u = [
                        self.comps[0].coeffs[idx],
                        self.comps[1].coeffs[idx],
                        self.comps[2].coeffs[idx],
                    ];
                    let div = u[0] * kk[i] + u[1] * kk[j] + u[2] * kk[l];
                    let mag = (u[0].norm_sqr() + u[1].norm_sqr() + u[2].norm_sqr()).sqrt();
                    worst = worst.max(div.norm() / mag.max(T::one()));
                }
            }
        }
        worst
    }

    /// Checks the divergence and attaches the certificate.
    pub fn certify(mut self) -> Result<Self> {
        let d = self.max_divergence();
        if d.as_f64() > DIV_FREE_TOL {
            return Err(Error::NotDivergenceFree(d.as_f64()));
        }
        self.div_free = true;
        Ok(self)
    }

    pub fn hermitian_defect(&self) -> T {
        self.comps
            .iter()
            .fold(T::zero(), |acc, c| acc.max(c.hermitian_defect()))
    }

    pub fn symmetrize(&mut self) {
        for c in &mut self.comps {
            c.symmetrize();
        }
    }

    pub fn max_abs(&self) -> T {
        self.comps.iter().fold(T::zero(), |acc, c| acc.max(c.max_abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.is_finite())
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            comps: [
                self.comps[0].scaled(s),
                self.comps[1].scaled(s),
                self.comps[2].scaled(s),
            ],
            div_free: self.div_free,
        }
    }

    /// `self += s * other`; the certificate survives only if both carry it.
    pub fn axpy(&mut self, s: T, other: &Self) {
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            a.axpy(s, b);
        }
        self.div_free &= other.div_free;
    }

    /// Largest coefficient difference to `other`, over all components.
    pub fn max_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for (a, b) in self.comps.iter().zip(&other.comps) {
            for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
                worst = worst.max((*x - *y).norm());
            }
        }
        worst
    }

    pub fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid() != other.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> VectorField<U> {
        VectorField {
            comps: [
                self.comps[0].cast(),
                self.comps[1].cast(),
                self.comps[2].cast(),
            ],
            div_free: self.div_free,
        }
    }
}

impl<T: Scalar> Add for &VectorField<T> {
    type Output = VectorField<T>;
    fn add(self, rhs: Self) -> VectorField<T> {
        let mut out = self.clone();
        out.axpy(T::one(), rhs);
        out
    }
}

impl<T: Scalar> Sub for &VectorField<T> {
    type Output = VectorField<T>;
    fn sub(self, rhs: Self) -> VectorField<T> {
        let mut out = self.clone();
        out.axpy(-T::one(), rhs);
        out
    }
}

impl<T: Scalar> Mul<T> for &VectorField<T> {
    type Output = VectorField<T>;
    fn mul(self, s: T) -> VectorField<T> {
        self.scaled(s)
    }
}

impl<T: Scalar> Neg for &VectorField<T> {
    type Output = VectorField<T>;
    fn neg(self) -> VectorField<T> {
        self.scaled(-T::one())
    }
}
