//! Separable n-dimensional complex FFT on top of `rustfft`, plus frequency
//! bookkeeping for gridded fields.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::sync::Arc;

/// In-place n-dimensional FFT over a C-order (last axis fastest) array.
pub fn fft_nd(data: &mut [Complex64], dims: &[usize], inverse: bool) {
    let total: usize = dims.iter().product();
    assert_eq!(data.len(), total, "fft_nd: length mismatch");
    let mut planner = FftPlanner::<f64>::new();
    for axis in 0..dims.len() {
        let len = dims[axis];
        let fft = if inverse { planner.plan_fft_inverse(len) } else { planner.plan_fft_forward(len) };
        apply_axis(data, dims, axis, &fft);
    }
    if inverse {
        let scale = 1.0 / total as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

fn apply_axis(data: &mut [Complex64], dims: &[usize], axis: usize, fft: &Arc<dyn rustfft::Fft<f64>>) {
    let len = dims[axis];
    let stride: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    let mut scratch = vec![Complex64::default(); len];
    for o in 0..outer {
        let base_o = o * len * stride;
        for s in 0..stride {
            let base = base_o + s;
            for j in 0..len {
                scratch[j] = data[base + j * stride];
            }
            fft.process(&mut scratch);
            for j in 0..len {
                data[base + j * stride] = scratch[j];
            }
        }
    }
}

/// Signed integer frequency of bin `k` on an axis of length `len`
/// (`0, 1, …, len/2, -(len/2-1), …, -1` in FFT layout).
#[inline]
pub fn signed_freq(k: usize, len: usize) -> i64 {
    if k <= len / 2 {
        k as i64
    } else {
        k as i64 - len as i64
    }
}

/// Physical wavenumber of bin `k`: `2π * signed_freq / (len * spacing)`.
#[inline]
pub fn wavenumber(k: usize, len: usize, spacing: f64) -> f64 {
    2.0 * std::f64::consts::PI * signed_freq(k, len) as f64 / (len as f64 * spacing)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_3d() {
        let dims = [4usize, 6, 8];
        let total: usize = dims.iter().product();
        let orig: Vec<Complex64> = (0..total)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut data = orig.clone();
        fft_nd(&mut data, &dims, false);
        fft_nd(&mut data, &dims, true);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn plane_wave_lands_in_single_bin() {
        let dims = [8usize, 8];
        let mut data = vec![Complex64::default(); 64];
        for i in 0..8 {
            for j in 0..8 {
                let phase = 2.0 * std::f64::consts::PI * (3.0 * i as f64 + 2.0 * j as f64) / 8.0;
                data[i * 8 + j] = Complex64::new(phase.cos(), phase.sin());
            }
        }
        fft_nd(&mut data, &dims, false);
        for i in 0..8 {
            for j in 0..8 {
                let mag = data[i * 8 + j].norm();
                if i == 3 && j == 2 {
                    assert!((mag - 64.0).abs() < 1e-9);
                } else {
                    assert!(mag < 1e-9);
                }
            }
        }
    }

    #[test]
    fn signed_frequencies() {
        assert_eq!(signed_freq(0, 8), 0);
        assert_eq!(signed_freq(4, 8), 4);
        assert_eq!(signed_freq(5, 8), -3);
        assert_eq!(signed_freq(7, 8), -1);
    }
}
