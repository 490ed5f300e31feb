use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

pub(crate) fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    planner().lock().unwrap().plan_fft(n, direction)
}

/// Unnormalized transform of every contiguous length-`n` row of `buf`.
pub(crate) fn rows(buf: &mut [Complex64], n: usize, direction: FftDirection) {
    let fft = plan(n, direction);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(buf, &mut scratch);
}

pub(crate) fn transpose_square(buf: &mut [Complex64], n: usize) {
    const B: usize = 32;
    for bi in (0..n).step_by(B) {
        for bj in (bi..n).step_by(B) {
            for i in bi..(bi + B).min(n) {
                let j0 = if bi == bj { i + 1 } else { bj };
                for j in j0..(bj + B).min(n) {
                    buf.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

/// Unnormalized 2D transform of a row-major `n x n` array.
pub(crate) fn fft2(buf: &mut [Complex64], n: usize, direction: FftDirection) {
    rows(buf, n, direction);
    transpose_square(buf, n);
    rows(buf, n, direction);
    transpose_square(buf, n);
}

/// Transform of one field component, `dim` axes of length `n`.
pub(crate) fn fft_nd(buf: &mut [Complex64], dim: usize, n: usize, direction: FftDirection) {
    match dim {
        1 => rows(buf, n, direction),
        2 => fft2(buf, n, direction),
        _ => unreachable!("dimension checked at construction"),
    }
}
