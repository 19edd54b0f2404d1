//! Minimal 2D FFT plumbing over rustfft.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Paired forward/inverse plans for one grid size.
///
/// Buffers are row-major, length width·height. The forward transform is
/// unnormalized; the inverse divides by width·height, so inverse(forward(x))
/// returns x up to rounding. Arbitrary sizes work (rustfft falls back to
/// Bluestein for primes).
pub(super) struct Fft2 {
    width: usize,
    height: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(width: usize, height: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            width,
            height,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
        }
    }

    fn rows(&self, plan: &Arc<dyn Fft<f64>>, buf: &mut [Complex<f64>]) {
        let mut scratch = vec![Complex::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for row in buf.chunks_exact_mut(self.width) {
            plan.process_with_scratch(row, &mut scratch);
        }
    }

    fn cols(&self, plan: &Arc<dyn Fft<f64>>, buf: &mut [Complex<f64>]) {
        let mut scratch = vec![Complex::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        let mut col = vec![Complex::new(0.0, 0.0); self.height];
        for c in 0..self.width {
            for r in 0..self.height {
                col[r] = buf[r * self.width + c];
            }
            plan.process_with_scratch(&mut col, &mut scratch);
            for r in 0..self.height {
                buf[r * self.width + c] = col[r];
            }
        }
    }

    /// In-place 2D forward transform, unnormalized.
    pub fn forward(&self, buf: &mut [Complex<f64>]) {
        debug_assert_eq!(buf.len(), self.width * self.height);
        self.rows(&self.row_fwd, buf);
        self.cols(&self.col_fwd, buf);
    }

    /// In-place 2D inverse transform, normalized by 1/(width·height).
    pub fn inverse(&self, buf: &mut [Complex<f64>]) {
        debug_assert_eq!(buf.len(), self.width * self.height);
        self.rows(&self.row_inv, buf);
        self.cols(&self.col_inv, buf);
        let scale = 1.0 / (self.width * self.height) as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_recovers_input_on_awkward_sizes() {
        // 29 and 17 are prime, exercising the Bluestein path.
        for (w, h) in [(8, 8), (29, 17), (12, 29)] {
            let n = w * h;
            let orig: Vec<Complex<f64>> = (0..n)
                .map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
                .collect();
            let mut buf = orig.clone();
            let fft = Fft2::new(w, h);
            fft.forward(&mut buf);
            fft.inverse(&mut buf);
            for (a, b) in orig.iter().zip(&buf) {
                assert!((a - b).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn forward_dc_bin_is_the_sum() {
        let (w, h) = (6, 4);
        let mut buf = vec![Complex::new(1.5, 0.0); w * h];
        Fft2::new(w, h).forward(&mut buf);
        assert!((buf[0].re - 1.5 * (w * h) as f64).abs() <= 1e-12);
        assert!(buf[0].im.abs() <= 1e-12);
    }
}
