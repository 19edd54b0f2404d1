//! Undecimated piecewise-linear B-spline framelet.
//!
//! The filter bank is the classic three-filter set derived from the hat
//! function: a low-pass refinement mask plus two high-pass framelet masks.
//! Their Fourier symbols satisfy |ĥ0|² + |ĥ1|² + |ĥ2|² = 1 at every
//! frequency, which is the whole tight-frame story: analysing with all
//! three and synthesising with their adjoints reproduces the input exactly.
//!
//! Levels follow the à trous scheme — no downsampling, the taps spread by a
//! factor of two per level — and the boundary is circular, because only the
//! periodic extension keeps the frame identity exact down to rounding.
//! Each level turns the running approximation into 8 detail bands (the
//! 3×3 separable filter pairs minus low×low) and a new approximation.

use std::f64::consts::SQRT_2;

use super::{Band, FrameCoefficients};
use crate::image::Image;

const H0: [f64; 3] = [0.25, 0.5, 0.25];
const H1: [f64; 3] = [SQRT_2 / 4.0, 0.0, -SQRT_2 / 4.0];
const H2: [f64; 3] = [-0.25, 0.5, -0.25];
const FILTERS: [[f64; 3]; 3] = [H0, H1, H2];

/// Circular 3-tap filtering along one axis with taps spread `d` apart.
/// The adjoint flips the tap offsets, which is all synthesis needs.
fn filter_axis(
    src: &[f64],
    width: usize,
    height: usize,
    taps: &[f64; 3],
    d: usize,
    along_x: bool,
    adjoint: bool,
) -> Vec<f64> {
    let mut out = vec![0.0; width * height];
    let (lo, hi) = if adjoint { (taps[2], taps[0]) } else { (taps[0], taps[2]) };
    for row in 0..height {
        for col in 0..width {
            let (prev, next) = if along_x {
                let p = (col + width - d) % width;
                let n = (col + d) % width;
                (row * width + p, row * width + n)
            } else {
                let p = (row + height - d) % height;
                let n = (row + d) % height;
                (p * width + col, n * width + col)
            };
            out[row * width + col] =
                lo * src[prev] + taps[1] * src[row * width + col] + hi * src[next];
        }
    }
    out
}

/// Separable adjoint synthesis of one band.
fn synthesize(
    data: &[f64],
    width: usize,
    height: usize,
    k1: usize,
    k2: usize,
    d: usize,
) -> Vec<f64> {
    let tmp = filter_axis(data, width, height, &FILTERS[k2], d, false, true);
    filter_axis(&tmp, width, height, &FILTERS[k1], d, true, true)
}

pub(super) fn decompose(img: &Image, levels: usize) -> Vec<Band> {
    let (w, h) = (img.width(), img.height());
    let mut approx: Vec<f64> = img.as_slice().to_vec();
    let mut bands: Vec<Band> = Vec::with_capacity(levels * 8 + 1);
    for l in 1..=levels {
        let d = 1usize << (l - 1);
        let fx: Vec<Vec<f64>> = FILTERS
            .iter()
            .map(|t| filter_axis(&approx, w, h, t, d, true, false))
            .collect();
        for (k2, f2) in FILTERS.iter().enumerate() {
            for (k1, fx1) in fx.iter().enumerate() {
                if k1 == 0 && k2 == 0 {
                    continue;
                }
                bands.push(Band {
                    // scale 1 is the coarsest detail level, so the level
                    // applied first (finest taps) gets the highest tag
                    scale: levels - l + 1,
                    orientation: k2 * 3 + k1 - 1,
                    is_coarse: false,
                    data: filter_axis(fx1, w, h, f2, d, false, false),
                });
            }
        }
        approx = filter_axis(&fx[0], w, h, &FILTERS[0], d, false, false);
    }
    bands.push(Band {
        scale: 0,
        orientation: 0,
        is_coarse: true,
        data: approx,
    });
    bands.sort_by_key(|b| (!b.is_coarse, b.scale, b.orientation));
    bands
}

/// Inverse cascade. Relies on the canonical band layout (coarse first, then
/// scales ascending with 8 orientations each), which the caller validates.
pub(super) fn reconstruct(coeffs: &FrameCoefficients, levels: usize) -> Image {
    let (w, h) = (coeffs.width(), coeffs.height());
    let bands = coeffs.bands();
    let mut approx = bands[0].data.clone();
    for s in 1..=levels {
        let l = levels - s + 1; // application order of this scale tag
        let d = 1usize << (l - 1);
        let mut acc = synthesize(&approx, w, h, 0, 0, d);
        for o in 0..8 {
            let (k1, k2) = ((o + 1) % 3, (o + 1) / 3);
            let band = &bands[1 + (s - 1) * 8 + o];
            let part = synthesize(&band.data, w, h, k1, k2, d);
            for (a, p) in acc.iter_mut().zip(&part) {
                *a += p;
            }
        }
        approx = acc;
    }
    Image::from_rows(w, h, approx).expect("geometry validated by caller")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_bank_symbols_partition_unity() {
        // |ĥ0(ω)|² + |ĥ1(ω)|² + |ĥ2(ω)|² = 1 sampled across frequencies.
        for i in 0..64 {
            let omega = i as f64 * std::f64::consts::PI / 32.0;
            let h0 = (1.0 + omega.cos()) / 2.0;
            let h1_sq = omega.sin().powi(2) / 2.0;
            let h2 = (1.0 - omega.cos()) / 2.0;
            let total = h0 * h0 + h1_sq + h2 * h2;
            assert!((total - 1.0).abs() <= 1e-12, "omega {omega}: {total}");
        }
    }

    #[test]
    fn analysis_adjoint_identity_single_level() {
        // Σ_k H_kᵀ H_k = I on a small grid, exercised directly.
        let (w, h) = (12, 10);
        let src: Vec<f64> = (0..w * h).map(|i| ((i * 7) % 13) as f64 / 13.0).collect();
        let mut acc = vec![0.0; w * h];
        for (k2, f2) in FILTERS.iter().enumerate() {
            for (k1, f1) in FILTERS.iter().enumerate() {
                let a = filter_axis(&src, w, h, f1, 1, true, false);
                let a = filter_axis(&a, w, h, f2, 1, false, false);
                let part = synthesize(&a, w, h, k1, k2, 1);
                for (x, p) in acc.iter_mut().zip(&part) {
                    *x += p;
                }
            }
        }
        for (x, s) in acc.iter().zip(&src) {
            assert!((x - s).abs() <= 1e-14);
        }
    }
}
