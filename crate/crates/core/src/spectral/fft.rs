//! Multi-dimensional complex FFTs over row-major `n^d` buffers.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    let planner = PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()));
    let mut guard = planner.lock().expect("fft planner poisoned");
    guard.plan_fft(n, direction)
}

/// Unnormalized transform of an `n^d` buffer along every axis.
fn transform(data: &mut [Complex64], d: usize, n: usize, direction: FftDirection) {
    debug_assert_eq!(data.len(), n.pow(d as u32));
    let fft = plan(n, direction);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];

    // Last axis is contiguous: one batched call.
    fft.process_with_scratch(data, &mut scratch);

    let len = data.len();
    let mut line = vec![Complex64::default(); n];
    for axis in 0..d.saturating_sub(1) {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        for base in (0..len).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[start + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[start + i * stride] = *v;
                }
            }
        }
    }
}

/// Physical samples to Fourier coefficients, `c_k = N^{-d} Σ_x f(x) e^{-ik·x}`.
pub(crate) fn forward(data: &mut [Complex64], d: usize, n: usize) {
    transform(data, d, n, FftDirection::Forward);
    let scale = 1.0 / data.len() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Fourier coefficients to physical samples, `f(x) = Σ_k c_k e^{ik·x}`.
pub(crate) fn inverse(data: &mut [Complex64], d: usize, n: usize) {
    transform(data, d, n, FftDirection::Inverse);
}
