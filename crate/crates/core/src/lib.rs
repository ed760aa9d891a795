//! Pseudo-spectral solver for the damped Navier-Stokes-Bardina equations on
//! a periodic box, with numerical checks of the model's energy equality,
//! decay envelopes, stationary states, contraction estimates and the
//! explicit attractor-dimension bound.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the double-precision types used by the CLI and tests.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attractor;
pub mod checkpoint;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod params;
pub mod recipes;
pub mod scalar;
pub mod spectral;
pub mod stationary;

pub use error::{Error, Result};
pub use grid::GridSpec;
pub use params::PhysParams;
pub use recipes::{generate, FieldRecipe, RecipeKind};
pub use scalar::Scalar;

pub type SpectralField64 = spectral::SpectralField<f64>;
pub type SpectralField32 = spectral::SpectralField<f32>;
pub type VectorField64 = spectral::VectorField<f64>;
pub type VectorField32 = spectral::VectorField<f32>;
pub type PhysParams64 = params::PhysParams<f64>;
pub type SimState64 = dynamics::SimState<f64>;
pub type Trajectory64 = dynamics::Trajectory<f64>;
pub type NormBundle64 = spectral::NormBundle<f64>;
