//! Cubic periodic grid description and Fourier index bookkeeping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_DEALIAS_FRACTION: f64 = 2.0 / 3.0;

/// An `n^3` periodic grid on the box `[0, box_len)^3`.
///
/// Spectral arrays use FFT-native ordering: along each axis the storage index
/// `i` holds the mode `m = i` for `i < n/2` and `m = i - n` otherwise. Both
/// physical and spectral arrays are row-major with the last axis contiguous.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub box_len: f64,
    #[serde(default = "default_dealias")]
    pub dealias_fraction: f64,
}

fn default_dealias() -> f64 {
    DEFAULT_DEALIAS_FRACTION
}

impl GridSpec {
    pub fn new(n: usize, box_len: f64) -> Result<Self> {
        Self::with_dealias(n, box_len, DEFAULT_DEALIAS_FRACTION)
    }

    pub fn with_dealias(n: usize, box_len: f64, dealias_fraction: f64) -> Result<Self> {
        let g = Self {
            n,
            box_len,
            dealias_fraction,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 || self.n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n must be even and >= 4, got {}",
                self.n
            )));
        }
        if !(self.box_len.is_finite() && self.box_len > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box_len must be > 0, got {}",
                self.box_len
            )));
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias_fraction must lie in (0, 1], got {}",
                self.dealias_fraction
            )));
        }
        Ok(())
    }

    /// Number of grid points (and Fourier modes), `n^3`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        (i * self.n + j) * self.n + l
    }

    /// Signed mode number stored at 1-D position `i`.
    #[inline]
    pub fn mode(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Storage position of the signed mode `m` (taken modulo `n`).
    #[inline]
    pub fn slot(&self, m: i64) -> usize {
        m.rem_euclid(self.n as i64) as usize
    }

    /// Linear storage index of the wavevector index `m`.
    pub fn mode_index(&self, m: [i64; 3]) -> usize {
        self.index(self.slot(m[0]), self.slot(m[1]), self.slot(m[2]))
    }

    /// Linear index of the mode `-m` given the linear index of `m`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let n = self.n;
        let (i, j, l) = (idx / (n * n), (idx / n) % n, idx % n);
        self.index((n - i) % n, (n - j) % n, (n - l) % n)
    }

    /// Signed modes `(m1, m2, m3)` at linear index `idx`.
    pub fn modes_at(&self, idx: usize) -> [i64; 3] {
        let n = self.n;
        [
            self.mode(idx / (n * n)),
            self.mode((idx / n) % n),
            self.mode(idx % n),
        ]
    }

    /// Largest retained `|m_i|` under the truncation rule.
    pub fn cutoff(&self) -> f64 {
        self.dealias_fraction * self.n as f64 / 2.0
    }

    /// Whether a single mode index survives dealiasing. The Nyquist index
    /// `-n/2` is never retained since it has no distinct conjugate partner.
    #[inline]
    pub fn retains_mode(&self, m: i64) -> bool {
        m != -(self.n as i64 / 2) && (m.abs() as f64) <= self.cutoff() + 1e-12
    }

    pub fn retains(&self, m: [i64; 3]) -> bool {
        m.iter().all(|&mi| self.retains_mode(mi))
    }

    #[inline]
    pub fn is_nyquist(&self, m: i64) -> bool {
        m == -(self.n as i64 / 2)
    }

    /// Physical wavenumbers `2 pi m / L` along one axis, in storage order.
    pub fn wavenumbers<T: Scalar>(&self) -> Vec<T> {
        let unit = T::lit(2.0 * std::f64::consts::PI / self.box_len);
        (0..self.n)
            .map(|i| unit * T::lit(self.mode(i) as f64))
            .collect()
    }

    /// Per-axis dealias mask in storage order.
    pub fn retained_mask(&self) -> Vec<bool> {
        (0..self.n).map(|i| self.retains_mode(self.mode(i))).collect()
    }

    pub fn spacing(&self) -> f64 {
        self.box_len / self.n as f64
    }

    pub fn volume(&self) -> f64 {
        self.box_len.powi(3)
    }

    /// Physical coordinate of the `i`-th sample along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }
}
