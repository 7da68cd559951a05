//! Separable n-dimensional FFT over a cubic row-major grid (axis 0 slowest).

use num_complex::Complex;
use rustfft::{FftDirection, FftPlanner};

use crate::scalar::Real;

/// In-place unnormalized transform of `data` (length `grid^dim`).
/// `Forward` uses `e^{-2πi jk/N}`, `Inverse` uses `e^{+2πi jk/N}`.
pub fn fft_nd<T: Real>(data: &mut [Complex<T>], dim: usize, grid: usize, direction: FftDirection) {
    assert_eq!(data.len(), grid.pow(dim as u32), "grid buffer has wrong length");
    if grid == 0 {
        return;
    }
    let fft = FftPlanner::<T>::new().plan_fft(grid, direction);
    let mut line = vec![Complex::new(T::zero(), T::zero()); grid];
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
    for axis in 0..dim {
        let stride = grid.pow((dim - 1 - axis) as u32);
        let outer = grid.pow(axis as u32);
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * grid * stride + inner;
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, value) in line.iter().enumerate() {
                    data[base + i * stride] = *value;
                }
            }
        }
    }
}

/// Flat grid index of the frequency `k`, wrapped modulo `grid`.
pub fn wrapped_index(k: &[i64], grid: usize) -> usize {
    let g = grid as i64;
    k.iter().fold(0usize, |acc, &c| acc * grid + c.rem_euclid(g) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_dft_in_two_dimensions() {
        let grid = 5;
        let data: Vec<Complex<f64>> =
            (0..grid * grid).map(|i| Complex::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let mut fast = data.clone();
        fft_nd(&mut fast, 2, grid, FftDirection::Forward);
        for k0 in 0..grid {
            for k1 in 0..grid {
                let mut acc = Complex::new(0.0, 0.0);
                for j0 in 0..grid {
                    for j1 in 0..grid {
                        let phase = -std::f64::consts::TAU * ((k0 * j0 + k1 * j1) as f64) / grid as f64;
                        acc += data[j0 * grid + j1] * Complex::from_polar(1.0, phase);
                    }
                }
                assert!((acc - fast[k0 * grid + k1]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn wrapped_index_is_row_major() {
        assert_eq!(wrapped_index(&[0, 0], 4), 0);
        assert_eq!(wrapped_index(&[-1, 0], 4), 12);
        assert_eq!(wrapped_index(&[1, -1], 4), 7);
    }
}
