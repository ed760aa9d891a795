//! Deterministic initial data and forcing fields.

use std::f64::consts::PI;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::scalar::Scalar;
use crate::spectral::{dealias, h1alpha_norm, leray_project, SpectralField, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecipeKind {
    /// `(A sin(2 pi y / L), 0, 0)`
    Shear,
    /// `A (cos x sin y cos z, -sin x cos y cos z, 0)` in units of `2 pi / L`
    TaylorGreen,
    /// Arnold-Beltrami-Childress flow with all three coefficients equal to `A`
    Abc,
    /// Gaussian modes in a shell `k_min <= |m| <= k_max`, rescaled so that
    /// the H1_alpha norm equals the amplitude
    RandomBand,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldRecipe {
    pub kind: RecipeKind,
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_k_min")]
    pub k_min: u32,
    #[serde(default = "default_k_max")]
    pub k_max: u32,
}

fn default_k_min() -> u32 {
    1
}

fn default_k_max() -> u32 {
    2
}

impl FieldRecipe {
    pub fn shear(amplitude: f64) -> Self {
        Self::simple(RecipeKind::Shear, amplitude)
    }

    pub fn taylor_green(amplitude: f64) -> Self {
        Self::simple(RecipeKind::TaylorGreen, amplitude)
    }

    pub fn abc(amplitude: f64) -> Self {
        Self::simple(RecipeKind::Abc, amplitude)
    }

    pub fn random_band(amplitude: f64, seed: u64, k_min: u32, k_max: u32) -> Self {
        Self {
            kind: RecipeKind::RandomBand,
            amplitude,
            seed,
            k_min,
            k_max,
        }
    }

    fn simple(kind: RecipeKind, amplitude: f64) -> Self {
        Self {
            kind,
            amplitude,
            seed: 0,
            k_min: default_k_min(),
            k_max: default_k_max(),
        }
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if !self.amplitude.is_finite() {
            return Err(Error::InvalidRecipe(format!(
                "amplitude must be finite, got {}",
                self.amplitude
            )));
        }
        let cutoff = grid.cutoff();
        match self.kind {
            RecipeKind::RandomBand => {
                if self.k_min > self.k_max {
                    return Err(Error::InvalidRecipe(format!(
                        "k_min {} > k_max {}",
                        self.k_min, self.k_max
                    )));
                }
                if self.k_max as f64 >= cutoff {
                    return Err(Error::InvalidRecipe(format!(
                        "band up to {} is outside the retained modes (cutoff {cutoff:.3})",
                        self.k_max
                    )));
                }
            }
            _ => {
                if cutoff < 1.0 {
                    return Err(Error::InvalidRecipe(
                        "grid retains no |m| = 1 modes".to_string(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Builds the field described by `recipe`. The result is real, truncated and
/// carries the divergence-free certificate. `alpha` is only used by
/// `random_band` to normalize in H1_alpha.
pub fn generate<T: Scalar>(recipe: &FieldRecipe, grid: GridSpec, alpha: T) -> Result<VectorField<T>> {
    grid.validate()?;
    recipe.validate(&grid)?;
    let a = recipe.amplitude;
    let field = match recipe.kind {
        RecipeKind::Shear => {
            let mut u = SpectralField::<f64>::zeros(grid);
            u.set_coeff([0, 1, 0], Complex::new(0.0, -0.5 * a));
            u.set_coeff([0, -1, 0], Complex::new(0.0, 0.5 * a));
            VectorField::new([u, SpectralField::zeros(grid), SpectralField::zeros(grid)])?
        }
        RecipeKind::TaylorGreen => from_samples(grid, |x, y, z| {
            [
                a * x.cos() * y.sin() * z.cos(),
                -a * x.sin() * y.cos() * z.cos(),
                0.0,
            ]
        })?,
        RecipeKind::Abc => from_samples(grid, |x, y, z| {
            [
                a * (z.sin() + y.cos()),
                a * (x.sin() + z.cos()),
                a * (y.sin() + x.cos()),
            ]
        })?,
        RecipeKind::RandomBand => random_band(recipe, grid, alpha.as_f64())?,
    };
    dealias(&field).cast::<T>().certify()
}

fn from_samples(grid: GridSpec, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Result<VectorField<f64>> {
    let w = 2.0 * PI / grid.box_len;
    let mut s = [vec![0.0; grid.len()], vec![0.0; grid.len()], vec![0.0; grid.len()]];
    for i in 0..grid.n {
        for j in 0..grid.n {
            for l in 0..grid.n {
                let idx = grid.index(i, j, l);
                let v = f(w * grid.coord(i), w * grid.coord(j), w * grid.coord(l));
                for c in 0..3 {
                    s[c][idx] = v[c];
                }
            }
        }
    }
    VectorField::from_physical(grid, [&s[0], &s[1], &s[2]])
}

fn random_band(recipe: &FieldRecipe, grid: GridSpec, alpha: f64) -> Result<VectorField<f64>> {
    if recipe.amplitude == 0.0 {
        return Ok(VectorField::zeros(grid));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(recipe.seed);
    let (lo, hi) = (recipe.k_min as f64, recipe.k_max as f64);
    let mut comps = [
        SpectralField::<f64>::zeros(grid),
        SpectralField::zeros(grid),
        SpectralField::zeros(grid),
    ];
    for idx in 0..grid.len() {
        let m = grid.modes_at(idx);
        if !grid.retains(m) {
            continue;
        }
        let r = ((m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64).sqrt();
        if r < lo - 1e-12 || r > hi + 1e-12 {
            continue;
        }
        for c in comps.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            c.coeffs_mut()[idx] = Complex::new(re, im);
        }
    }
    let mut v = leray_project(&VectorField::new(comps)?);
    v.symmetrize();
    let norm = h1alpha_norm(&v, alpha);
    if norm == 0.0 {
        return Err(Error::InvalidRecipe(format!(
            "band [{}, {}] has no divergence-free content on this grid",
            recipe.k_min, recipe.k_max
        )));
    }
    Ok(leray_project(&v.scaled(recipe.amplitude / norm)))
}
