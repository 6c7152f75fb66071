use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Unitary 2D FFT on a row-major `width`x`height` grid.
#[derive(Clone)]
pub(crate) struct Fft2d {
    width: usize,
    height: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl fmt::Debug for Fft2d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fft2d({}x{})", self.width, self.height)
    }
}

impl Fft2d {
    pub fn new(width: usize, height: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2d {
            width,
            height,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
            scale: 1.0 / ((width * height) as f64).sqrt(),
        }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.apply(buf, &self.row_fwd, &self.col_fwd);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.apply(buf, &self.row_inv, &self.col_inv);
    }

    fn apply(&self, buf: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        let (w, h) = (self.width, self.height);
        debug_assert_eq!(buf.len(), w * h);
        if w > 1 {
            rows.process(buf);
        }
        if h > 1 {
            let mut t = transpose(buf, w, h);
            cols.process(&mut t);
            let back = transpose(&t, h, w);
            buf.copy_from_slice(&back);
        }
        for v in buf.iter_mut() {
            *v *= self.scale;
        }
    }
}

fn transpose(src: &[Complex64], w: usize, h: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); w * h];
    for r in 0..h {
        for c in 0..w {
            out[c * h + r] = src[r * w + c];
        }
    }
    out
}

/// Signed frequency of FFT bin `i` on an axis of length `n`.
pub(crate) fn signed_frequency(i: usize, n: usize) -> f64 {
    if i < n.div_ceil(2) {
        i as f64
    } else {
        i as f64 - n as f64
    }
}
