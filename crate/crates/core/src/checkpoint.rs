//! Binary snapshots of a spectral velocity field.
//!
//! Layout (little endian): magic `BARD`, `u32` version, `u32` n, then `f64`
//! box length, alpha, beta, nu and time, followed by `3 n^3` complex
//! coefficients as `(f64 re, f64 im)` pairs, component-major, each component
//! in row-major order over modes `m = -n/2 .. n/2 - 1` per axis. Steady
//! states are written with time `-1`.

use std::io::{Read, Write};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::params::PhysParams;
use crate::scalar::Scalar;
use crate::spectral::{SpectralField, VectorField};

pub const MAGIC: &[u8; 4] = b"BARD";
pub const VERSION: u32 = 1;
/// Time stamp used for steady states.
pub const STEADY_TIME: f64 = -1.0;

#[derive(Clone, Debug)]
pub struct Checkpoint<T: Scalar> {
    pub u: VectorField<T>,
    pub params: PhysParams<T>,
    pub time: f64,
}

/// Storage slot of the `o`-th mode in ascending order `-n/2, ..., n/2 - 1`.
fn ascending_slot(grid: &GridSpec, o: usize) -> usize {
    grid.slot(o as i64 - (grid.n / 2) as i64)
}

pub fn write_checkpoint<T: Scalar, W: Write>(
    mut w: W,
    u: &VectorField<T>,
    params: &PhysParams<T>,
    time: f64,
) -> Result<()> {
    let grid = u.grid();
    let n = grid.n;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(n as u32).to_le_bytes())?;
    for v in [
        grid.box_len,
        params.alpha.as_f64(),
        params.beta.as_f64(),
        params.nu.as_f64(),
        time,
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(16 * grid.len());
    for comp in u.comps() {
        buf.clear();
        let c = comp.coeffs();
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    let idx = grid.index(
                        ascending_slot(grid, a),
                        ascending_slot(grid, b),
                        ascending_slot(grid, d),
                    );
                    buf.extend_from_slice(&c[idx].re.as_f64().to_le_bytes());
                    buf.extend_from_slice(&c[idx].im.as_f64().to_le_bytes());
                }
            }
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Reads a snapshot; the grid gets the default dealias fraction and the
/// field is re-certified divergence free.
pub fn read_checkpoint<T: Scalar, R: Read>(mut r: R) -> Result<Checkpoint<T>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!("bad magic {magic:?}")));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let n = read_u32(&mut r)? as usize;
    let box_len = read_f64(&mut r)?;
    let grid = GridSpec::new(n, box_len).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let alpha = read_f64(&mut r)?;
    let beta = read_f64(&mut r)?;
    let nu = read_f64(&mut r)?;
    let time = read_f64(&mut r)?;
    let params = PhysParams::new(T::lit(alpha), T::lit(beta), T::lit(nu))
        .map_err(|e| Error::Checkpoint(e.to_string()))?;

    let mut raw = vec![0u8; 16 * grid.len()];
    let mut comps = Vec::with_capacity(3);
    for _ in 0..3 {
        r.read_exact(&mut raw)?;
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        let mut o = 0;
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    let idx = grid.index(
                        ascending_slot(&grid, a),
                        ascending_slot(&grid, b),
                        ascending_slot(&grid, d),
                    );
                    let re = f64::from_le_bytes(raw[o..o + 8].try_into().expect("8 bytes"));
                    let im = f64::from_le_bytes(raw[o + 8..o + 16].try_into().expect("8 bytes"));
                    coeffs[idx] = Complex::new(T::lit(re), T::lit(im));
                    o += 16;
                }
            }
        }
        comps.push(SpectralField::from_coeffs(grid, coeffs)?);
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Checkpoint("trailing bytes after coefficients".into()));
    }
    let [a, b, c]: [SpectralField<T>; 3] = comps.try_into().expect("three components");
    let u = VectorField::new([a, b, c])?
        .certify()
        .map_err(|e| Error::Checkpoint(e.to_string()))?;
    Ok(Checkpoint { u, params, time })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recipes::{generate, FieldRecipe};

    #[test]
    fn round_trip_is_bitwise() {
        let g = GridSpec::new(8, 3.0).unwrap();
        let p = PhysParams::new(0.5, 2.0, 0.1).unwrap();
        let u = generate::<f64>(&FieldRecipe::random_band(1.0, 9, 1, 2), g, p.alpha).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &u, &p, STEADY_TIME).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 4 + 5 * 8 + 3 * 16 * 512);
        let c: Checkpoint<f64> = read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(c.time, -1.0);
        assert_eq!(c.params, p);
        for (a, b) in c.u.comps().iter().zip(u.comps()) {
            assert_eq!(a.coeffs(), b.coeffs());
        }
    }

    #[test]
    fn ascending_order_on_disk() {
        let g = GridSpec::new(8, 1.0).unwrap();
        let mut f = SpectralField::<f64>::zeros(g);
        f.set_coeff([-4, -4, -3], Complex::new(7.0, 0.0));
        let z = SpectralField::zeros(g);
        let u = VectorField::new([f, z.clone(), z]).unwrap();
        let p = PhysParams::new(1.0, 1.0, 1.0).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &u, &p, 0.0).unwrap();
        let first = 4 + 4 + 4 + 40;
        // second entry of component 0 is (m1, m2, m3) = (-4, -4, -3)
        let re = f64::from_le_bytes(buf[first + 16..first + 24].try_into().unwrap());
        assert_eq!(re, 7.0);
    }

    #[test]
    fn rejects_corrupt_input() {
        assert!(read_checkpoint::<f64, _>(&b"NOPE"[..]).is_err());
        let g = GridSpec::new(8, 1.0).unwrap();
        let p = PhysParams::new(1.0, 1.0, 1.0).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &VectorField::<f64>::zeros(g), &p, 0.0).unwrap();
        assert!(read_checkpoint::<f64, _>(&buf[..buf.len() - 1]).is_err());
        buf.push(0);
        assert!(read_checkpoint::<f64, _>(buf.as_slice()).is_err());
    }
}
