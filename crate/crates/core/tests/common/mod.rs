//! Brute-force references shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use bardina::{GridSpec, VectorField64};
use num_complex::Complex64;

fn position(grid: &GridSpec, idx: usize) -> [usize; 3] {
    let n = grid.n;
    [idx / (n * n), (idx / n) % n, idx % n]
}

/// Storage-order Fourier coefficients by direct summation, normalized so
/// that `u(x) = sum_m c(m) e^{i k.x}`.
pub fn naive_dft(grid: &GridSpec, samples: &[f64]) -> Vec<Complex64> {
    let n = grid.n;
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (kidx, c) in out.iter_mut().enumerate() {
        let m = grid.modes_at(kidx);
        let mut acc = Complex64::new(0.0, 0.0);
        for (xidx, &v) in samples.iter().enumerate() {
            let x = position(grid, xidx);
            let phase = -2.0 * PI * (m[0] * x[0] as i64 + m[1] * x[1] as i64 + m[2] * x[2] as i64) as f64 / n as f64;
            acc += v * Complex64::from_polar(1.0, phase);
        }
        *c = acc / grid.len() as f64;
    }
    out
}

/// Real part of `sum_m c(m) e^{i k.x}` at every grid point.
pub fn naive_idft(grid: &GridSpec, coeffs: &[Complex64]) -> Vec<f64> {
    let n = grid.n;
    (0..grid.len())
        .map(|xidx| {
            let x = position(grid, xidx);
            let mut acc = Complex64::new(0.0, 0.0);
            for (kidx, &c) in coeffs.iter().enumerate() {
                let m = grid.modes_at(kidx);
                let phase = 2.0 * PI * (m[0] * x[0] as i64 + m[1] * x[1] as i64 + m[2] * x[2] as i64) as f64 / n as f64;
                acc += c * Complex64::from_polar(1.0, phase);
            }
            acc.re
        })
        .collect()
}

pub fn kvec(grid: &GridSpec, m: [i64; 3]) -> [f64; 3] {
    let s = 2.0 * PI / grid.box_len;
    [s * m[0] as f64, s * m[1] as f64, s * m[2] as f64]
}

pub fn filter(alpha: f64, k: [f64; 3]) -> f64 {
    1.0 / (1.0 + alpha * alpha * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]))
}

pub fn project(k: [f64; 3], d: [Complex64; 3]) -> [Complex64; 3] {
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if k2 == 0.0 {
        return d;
    }
    let kd = (d[0] * k[0] + d[1] * k[1] + d[2] * k[2]) / k2;
    [d[0] - kd * k[0], d[1] - kd * k[1], d[2] - kd * k[2]]
}

/// Nonzero coefficients of a vector field as `(m, [c0, c1, c2])`.
pub fn support(u: &VectorField64) -> Vec<([i64; 3], [Complex64; 3])> {
    let g = u.grid();
    (0..g.len())
        .filter_map(|idx| {
            let c = [u.comp(0).coeffs()[idx], u.comp(1).coeffs()[idx], u.comp(2).coeffs()[idx]];
            (c.iter().any(|z| z.norm() > 0.0)).then(|| (g.modes_at(idx), c))
        })
        .collect()
}

/// `div(a (x) b + b (x) a) / 2` filtered and projected, by direct
/// convolution over the supports, kept on modes with `|m_i| <= cutoff`.
pub fn convolution_transport(
    grid: &GridSpec,
    a: &VectorField64,
    b: &VectorField64,
    alpha: f64,
) -> Vec<[Complex64; 3]> {
    let sa = support(a);
    let sb = support(b);
    let mut prod = vec![[[Complex64::new(0.0, 0.0); 3]; 3]; grid.len()];
    let cut = grid.cutoff();
    for (p, ca) in &sa {
        for (q, cb) in &sb {
            let m = [p[0] + q[0], p[1] + q[1], p[2] + q[2]];
            if m.iter().any(|&x| x.unsigned_abs() as f64 > cut + 1e-12) {
                continue;
            }
            let idx = grid.mode_index(m);
            for i in 0..3 {
                for j in 0..3 {
                    prod[idx][i][j] += 0.5 * (ca[i] * cb[j] + ca[j] * cb[i]);
                }
            }
        }
    }
    (0..grid.len())
        .map(|idx| {
            let m = grid.modes_at(idx);
            let k = kvec(grid, m);
            let f = filter(alpha, k);
            let mut d = [Complex64::new(0.0, 0.0); 3];
            for (i, di) in d.iter_mut().enumerate() {
                for (j, &kj) in k.iter().enumerate() {
                    *di += Complex64::i() * kj * prod[idx][i][j];
                }
                *di *= f;
            }
            project(k, d)
        })
        .collect()
}

pub fn max_rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}
