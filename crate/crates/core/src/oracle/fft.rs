use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse plans for one transform length.
pub(crate) struct Plans {
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
}

impl Plans {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }
}

/// Angular wavenumber of FFT bin `j` for `n` samples spaced `dy`.
pub(crate) fn wavenumber(j: usize, n: usize, dy: f64) -> f64 {
    let signed = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
    2.0 * PI * signed / (n as f64 * dy)
}

/// Transform every length-`n` row of a row-major `n × n` buffer in place.
fn rows(data: &mut [Complex64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    data.par_chunks_mut(n).for_each_init(
        || vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
        |scratch, row| fft.process_with_scratch(row, scratch),
    );
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    dst.par_chunks_mut(n).enumerate().for_each(|(j, out)| {
        for (i, o) in out.iter_mut().enumerate() {
            *o = src[i * n + j];
        }
    });
}

/// Unnormalized 2-D transform of a square row-major buffer.
pub(crate) fn fft2(data: &mut [Complex64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    rows(data, n, fft);
    let mut t = vec![Complex64::new(0.0, 0.0); data.len()];
    transpose(data, &mut t, n);
    rows(&mut t, n, fft);
    transpose(&t, data, n);
}

/// Free-flight propagation of one line: multiply the spectrum by
/// `exp(-i k² Λ L / 4)`. Normalization by `1/n` is applied.
pub(crate) fn propagate_line(values: &mut [Complex64], dy: f64, reduced_flight: f64, plans: &Plans) {
    let n = values.len();
    plans.forward.process(values);
    let scale = 1.0 / n as f64;
    for (j, v) in values.iter_mut().enumerate() {
        let k = wavenumber(j, n, dy);
        *v *= Complex64::from_polar(scale, -k * k * reduced_flight / 4.0);
    }
    plans.inverse.process(values);
}

/// `dφ/dy` by spectral differentiation.
pub(crate) fn derivative(values: &[Complex64], dy: f64) -> Vec<Complex64> {
    let n = values.len();
    let plans = Plans::new(n);
    let mut out = values.to_vec();
    plans.forward.process(&mut out);
    let scale = 1.0 / n as f64;
    for (j, v) in out.iter_mut().enumerate() {
        // The Nyquist bin has no sign; drop it so real inputs stay real.
        let k = if j == n / 2 { 0.0 } else { wavenumber(j, n, dy) };
        *v *= Complex64::new(0.0, k * scale);
    }
    plans.inverse.process(&mut out);
    out
}
