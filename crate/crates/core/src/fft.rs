//! Thin wrappers over `rustfft` with a per-thread plan cache.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub fn plan_forward(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

pub fn plan_inverse(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// Unnormalized forward DFT in place.
pub fn forward(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    plan_forward(buf.len()).process(buf);
}

/// Inverse DFT in place, scaled by `1/N`.
pub fn inverse(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    plan_inverse(buf.len()).process(buf);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Frequency of unshifted DFT bin `bin` for an `n`-point transform at rate `fs`.
pub fn bin_frequency(bin: usize, n: usize, fs: f64) -> f64 {
    let k = if bin < n.div_ceil(2) { bin as isize } else { bin as isize - n as isize };
    k as f64 * fs / n as f64
}

/// Row of unshifted bin `bin` after an fft-shift of length `n`.
pub fn shifted_index(bin: usize, n: usize) -> usize {
    (bin + n / 2) % n
}

/// Unshifted bin stored at shifted row `row`.
pub fn unshifted_index(row: usize, n: usize) -> usize {
    (row + n - n / 2) % n
}

pub fn fftshift<T: Copy>(x: &[T]) -> Vec<T> {
    let n = x.len();
    (0..n).map(|row| x[unshifted_index(row, n)]).collect()
}
