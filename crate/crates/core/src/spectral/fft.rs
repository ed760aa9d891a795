//! Separable 3-D complex FFT on an `n^3` row-major cube.

use num_complex::Complex;
use num_traits::Zero;
use rustfft::FftDirection;

use crate::scalar::Scalar;

/// Unnormalized in-place 3-D DFT with sign convention `exp(-i k.x)` for
/// `Forward` and `exp(+i k.x)` for `Inverse`.
pub(crate) fn fft3<T: Scalar>(data: &mut [Complex<T>], n: usize, direction: FftDirection) {
    debug_assert_eq!(data.len(), n * n * n);
    let fft = T::fft_plan(n, direction);
    let mut scratch = vec![Complex::zero(); fft.get_inplace_scratch_len()];

    // last axis is contiguous: batch over all n^2 lines
    fft.process_with_scratch(data, &mut scratch);

    let mut lines = vec![Complex::zero(); n * n];

    // middle axis, one (j, l) plane at a time
    for plane in data.chunks_exact_mut(n * n) {
        for j in 0..n {
            for l in 0..n {
                lines[l * n + j] = plane[j * n + l];
            }
        }
        fft.process_with_scratch(&mut lines, &mut scratch);
        for j in 0..n {
            for l in 0..n {
                plane[j * n + l] = lines[l * n + j];
            }
        }
    }

    // first axis, one (i, l) slab per fixed j
    for j in 0..n {
        for i in 0..n {
            for l in 0..n {
                lines[l * n + i] = data[(i * n + j) * n + l];
            }
        }
        fft.process_with_scratch(&mut lines, &mut scratch);
        for i in 0..n {
            for l in 0..n {
                data[(i * n + j) * n + l] = lines[l * n + i];
            }
        }
    }
}
