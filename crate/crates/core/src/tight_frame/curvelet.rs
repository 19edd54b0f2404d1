//! Curvelet-style tight frame: smooth dyadic annuli split into angular
//! wedges, realized directly on the full FFT grid.
//!
//! Every band owns a real window W over the frequency plane, built so that
//! Σ_b W_b² = 1 at each bin. Analysis multiplies the image spectrum by W and
//! inverts; synthesis multiplies each band's spectrum by the same W and
//! accumulates. The partition of unity makes that pair exactly inverse and
//! energy-preserving — no decimation, no wrapping, and odd or prime grid
//! sizes need no special casing.
//!
//! Radial windows come from telescoping low-pass profiles L(r, b) with
//! cutoffs b halving per scale: the coarse disk is L(r, b₁), ring s is
//! √(L²(r, b_{s+1}) − L²(r, b_s)), and the finest ring √(1 − L²(r, 1))
//! absorbs everything out to the grid corners. Angular windows pair
//! antipodal wedges (θ is taken mod π), which keeps every band real for
//! real input.

use std::f64::consts::{FRAC_PI_2, PI};

use rustfft::num_complex::Complex;

use super::fft::Fft2;
use super::{Band, FrameCoefficients, TransformKind};
use crate::image::Image;

/// C³ smooth step: ν(0) = 0, ν(1) = 1, three vanishing derivatives at both
/// ends, and ν(t) + ν(1−t) = 1 so paired sin/cos transitions tile exactly.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t.powi(4) * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t)
    }
}

/// Radial low-pass profile: 1 inside b/2, 0 outside b, a cosine-of-smooth-
/// step transition between. Radii are normalized so r = 1 is the Nyquist
/// edge midpoint (grid corners reach √2).
fn radial_lowpass(r: f64, b: f64) -> f64 {
    if r <= b / 2.0 {
        1.0
    } else if r >= b {
        0.0
    } else {
        (FRAC_PI_2 * smooth_step(2.0 * r / b - 1.0)).cos()
    }
}

/// Angular window for wedge `o` of `n`: unit bump over the wedge with
/// sin/cos transitions of half-width π/(2n) at both boundaries. Adjacent
/// windows share the same transition argument, so their squares sum to 1.
fn angular_window(theta: f64, o: usize, n: usize) -> f64 {
    let half = PI / (2.0 * n as f64);
    let beta = o as f64 * PI / n as f64;
    let mut d = (theta - beta).rem_euclid(PI);
    if d >= PI / 2.0 {
        d -= PI;
    }
    if !(-half..=3.0 * half).contains(&d) {
        0.0
    } else if d < half {
        (FRAC_PI_2 * smooth_step((d + half) / (2.0 * half))).sin()
    } else {
        (FRAC_PI_2 * smooth_step((d - half) / (2.0 * half))).cos()
    }
}

fn signed_freq(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

struct Window {
    scale: usize,
    orientation: usize,
    is_coarse: bool,
    data: Vec<f64>,
}

/// Forces W(−ω) = W(ω) bin-for-bin by averaging squared weights with the
/// frequency-negated partner bin.
///
/// Interior bins already satisfy this (θ mod π and r are antipodal
/// invariants), but on even grids the Nyquist row/column is its own
/// conjugate partner with a *reflected* angle, and an asymmetric window
/// there pushes energy into the imaginary part that realification would
/// drop. The quadratic mean keeps Σ_b W_b² = 1 exactly.
fn symmetrize(data: &mut [f64], width: usize, height: usize) {
    let out: Vec<f64> = (0..data.len())
        .map(|i| {
            let (ky, kx) = (i / width, i % width);
            let p = ((height - ky) % height) * width + (width - kx) % width;
            ((data[i] * data[i] + data[p] * data[p]) / 2.0).sqrt()
        })
        .collect();
    data.copy_from_slice(&out);
}

fn build_windows(width: usize, height: usize, kind: &TransformKind) -> Vec<Window> {
    let rings = kind.scales() - 1;
    // cutoffs b_j = 2^(j − rings), so the outermost transition ends at Nyquist
    let b: Vec<f64> = (1..=rings)
        .map(|j| (2.0f64).powi(j as i32 - rings as i32))
        .collect();

    let n = width * height;
    let mut radius = vec![0.0; n];
    let mut theta = vec![0.0; n];
    for ky in 0..height {
        for kx in 0..width {
            let nx = signed_freq(kx, width) / (width as f64 / 2.0);
            let ny = signed_freq(ky, height) / (height as f64 / 2.0);
            let i = ky * width + kx;
            radius[i] = (nx * nx + ny * ny).sqrt();
            let mut t = ny.atan2(nx);
            if t < 0.0 {
                t += PI;
            }
            if t >= PI {
                t -= PI;
            }
            theta[i] = t;
        }
    }

    let mut windows = Vec::new();
    windows.push(Window {
        scale: 0,
        orientation: 0,
        is_coarse: true,
        data: radius.iter().map(|&r| radial_lowpass(r, b[0])).collect(),
    });
    for s in 1..=rings {
        let phi: Vec<f64> = radius
            .iter()
            .map(|&r| {
                let lo = radial_lowpass(r, b[s - 1]);
                let hi = if s == rings { 1.0 } else { radial_lowpass(r, b[s]) };
                (hi * hi - lo * lo).max(0.0).sqrt()
            })
            .collect();
        let wedges = kind.orientations()[s - 1];
        for o in 0..wedges {
            let mut data: Vec<f64> = phi
                .iter()
                .zip(&theta)
                .map(|(&p, &t)| p * angular_window(t, o, wedges))
                .collect();
            symmetrize(&mut data, width, height);
            windows.push(Window {
                scale: s,
                orientation: o,
                is_coarse: false,
                data,
            });
        }
    }
    windows
}

pub(super) fn decompose(img: &Image, kind: &TransformKind) -> Vec<Band> {
    let (w, h) = (img.width(), img.height());
    let fft = Fft2::new(w, h);
    let mut spectrum: Vec<Complex<f64>> = img
        .as_slice()
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .collect();
    fft.forward(&mut spectrum);
    build_windows(w, h, kind)
        .into_iter()
        .map(|win| {
            let mut buf: Vec<Complex<f64>> = spectrum
                .iter()
                .zip(&win.data)
                .map(|(&c, &wv)| c * wv)
                .collect();
            fft.inverse(&mut buf);
            Band {
                scale: win.scale,
                orientation: win.orientation,
                is_coarse: win.is_coarse,
                // antipodal wedge pairing makes bands real; the imaginary
                // residue is rounding noise
                data: buf.iter().map(|c| c.re).collect(),
            }
        })
        .collect()
}

/// Synthesis with the same windows; the caller has validated that the band
/// list matches this kind's inventory in order.
pub(super) fn reconstruct(coeffs: &FrameCoefficients, kind: &TransformKind) -> Image {
    let (w, h) = (coeffs.width(), coeffs.height());
    let fft = Fft2::new(w, h);
    let mut acc = vec![Complex::new(0.0, 0.0); w * h];
    for (win, band) in build_windows(w, h, kind).iter().zip(coeffs.bands()) {
        let mut buf: Vec<Complex<f64>> = band
            .data
            .iter()
            .map(|&v| Complex::new(v, 0.0))
            .collect();
        fft.forward(&mut buf);
        for ((a, &c), &wv) in acc.iter_mut().zip(&buf).zip(&win.data) {
            *a += c * wv;
        }
    }
    fft.inverse(&mut acc);
    let data: Vec<f64> = acc.iter().map(|c| c.re).collect();
    Image::from_rows(w, h, data).expect("geometry validated by caller")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_partition_unity() {
        for (w, h) in [(32, 24), (33, 29), (64, 64)] {
            for scales in [2usize, 3] {
                let kind = TransformKind::curvelet(scales).unwrap();
                let windows = build_windows(w, h, &kind);
                for i in 0..w * h {
                    let total: f64 = windows.iter().map(|win| win.data[i] * win.data[i]).sum();
                    assert!(
                        (total - 1.0).abs() <= 1e-12,
                        "{w}×{h} scales {scales} bin {i}: {total}"
                    );
                }
            }
        }
    }

    #[test]
    fn window_count_matches_orientation_schedule() {
        let kind = TransformKind::curvelet(3).unwrap();
        let windows = build_windows(64, 64, &kind);
        assert_eq!(windows.len(), 1 + 8 + 8);
        let kind4 = TransformKind::curvelet(4).unwrap();
        let windows4 = build_windows(64, 64, &kind4);
        // rings: 8, 8, 16
        assert_eq!(windows4.len(), 1 + 8 + 8 + 16);
    }

    #[test]
    fn smooth_step_is_a_complementary_pair() {
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            assert!((smooth_step(t) + smooth_step(1.0 - t) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn windows_are_conjugate_symmetric() {
        // W(−ω) = W(ω) bit-for-bit, including the even-size Nyquist lines —
        // this is what keeps every band real.
        for (w, h) in [(32, 24), (33, 29), (16, 16)] {
            let kind = TransformKind::curvelet(3).unwrap();
            for win in build_windows(w, h, &kind) {
                for ky in 0..h {
                    for kx in 0..w {
                        let i = ky * w + kx;
                        let p = ((h - ky) % h) * w + (w - kx) % w;
                        assert_eq!(win.data[i], win.data[p], "{w}×{h} bin ({kx},{ky})");
                    }
                }
            }
        }
    }

    #[test]
    fn dc_lives_only_in_the_coarse_band() {
        let kind = TransformKind::curvelet(3).unwrap();
        let windows = build_windows(32, 32, &kind);
        assert_eq!(windows[0].data[0], 1.0);
        for win in &windows[1..] {
            assert_eq!(win.data[0], 0.0);
        }
    }
}
