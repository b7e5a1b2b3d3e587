//! Two-dimensional FFT over row-major `nx × ny` buffers.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

/// In-place 2-D transform of `data[ix * ny + iy]`. The inverse is normalized.
pub(crate) fn fft2(data: &mut [Complex64], nx: usize, ny: usize, dir: Direction) {
    assert_eq!(data.len(), nx * ny);
    let mut planner = FftPlanner::<f64>::new();
    let (row_plan, col_plan) = match dir {
        Direction::Forward => (planner.plan_fft_forward(ny), planner.plan_fft_forward(nx)),
        Direction::Inverse => (planner.plan_fft_inverse(ny), planner.plan_fft_inverse(nx)),
    };
    data.par_chunks_mut(ny).for_each_init(
        || vec![Complex64::default(); row_plan.get_inplace_scratch_len()],
        |scratch, row| row_plan.process_with_scratch(row, scratch),
    );
    let mut t = transpose(data, nx, ny);
    t.par_chunks_mut(nx).for_each_init(
        || vec![Complex64::default(); col_plan.get_inplace_scratch_len()],
        |scratch, col| col_plan.process_with_scratch(col, scratch),
    );
    let back = transpose(&t, ny, nx);
    let norm = if dir == Direction::Inverse { 1.0 / (nx * ny) as f64 } else { 1.0 };
    data.par_iter_mut().zip(back.par_iter()).for_each(|(d, b)| *d = b * norm);
}

fn transpose(data: &[Complex64], nx: usize, ny: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); nx * ny];
    out.par_chunks_mut(nx).enumerate().for_each(|(iy, col)| {
        for (ix, v) in col.iter_mut().enumerate() {
            *v = data[ix * ny + iy];
        }
    });
    out
}

/// Smallest integer `≥ n` with no prime factor above 5.
pub(crate) fn next_fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut k = m;
        for p in [2, 3, 5] {
            while k.is_multiple_of(p) {
                k /= p;
            }
        }
        if k == 1 {
            return m;
        }
        m += 1;
    }
}

/// Signed angular frequency of DFT bin `m` for `n` samples at spacing `d`.
pub(crate) fn angular_frequency(m: usize, n: usize, d: f64) -> f64 {
    let signed = if m < n.div_ceil(2) { m as f64 } else { m as f64 - n as f64 };
    2.0 * std::f64::consts::PI * signed / (n as f64 * d)
}
