//! Tight-frame transforms: the decompose / hard-threshold / reconstruct
//! triple used by the denoising step.
//!
//! Two interchangeable families are provided. The framelet is a separable
//! B-spline filter bank; the curvelet is an FFT-domain wedge partition with
//! genuine orientation selectivity. Both are normalized to a unit frame
//! bound, so for either kind
//!
//! * reconstruct(decompose(f)) = f (to rounding), and
//! * the summed squared coefficients equal the image energy.
//!
//! Both are also undecimated: every band is a full-resolution grid, which
//! costs memory but keeps the geometry trivial and the iteration code free
//! of resampling concerns. Thresholding never touches the coarse band —
//! zeroing the local mean would wreck the `[0, 1]` intensity contract the
//! segmenter relies on.

mod curvelet;
mod fft;
mod framelet;

use crate::error::{Error, Result};
use crate::image::Image;

/// Transform family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Framelet,
    Curvelet,
}

/// A transform family plus its scale schedule.
///
/// `scales` counts dyadic scale slots including the coarse one, so
/// `scales = 3` means two detail levels (framelet) or two frequency rings
/// (curvelet). Curvelet rings carry a per-ring wedge count: 8 at the
/// coarsest ring, doubling every other ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformKind {
    family: Family,
    scales: usize,
    orientations: Vec<usize>,
}

impl TransformKind {
    pub fn new(family: Family, scales: usize) -> Result<Self> {
        if scales < 2 {
            return Err(Error::Parameter(format!(
                "transform needs at least 2 scales, got {scales}"
            )));
        }
        let orientations = match family {
            Family::Curvelet => (1..scales).map(|s| 8usize << ((s - 1) / 2)).collect(),
            Family::Framelet => Vec::new(),
        };
        Ok(TransformKind {
            family,
            scales,
            orientations,
        })
    }

    pub fn framelet(scales: usize) -> Result<Self> {
        Self::new(Family::Framelet, scales)
    }

    pub fn curvelet(scales: usize) -> Result<Self> {
        Self::new(Family::Curvelet, scales)
    }

    /// Default depth for an image: 3 scales when both sides reach 64,
    /// otherwise 2.
    pub fn with_default_scales(family: Family, width: usize, height: usize) -> Self {
        let scales = if width.min(height) >= 64 { 3 } else { 2 };
        Self::new(family, scales).expect("2 and 3 are valid scale counts")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn scales(&self) -> usize {
        self.scales
    }

    /// Wedge counts per detail ring (curvelet); empty for the framelet.
    pub fn orientations(&self) -> &[usize] {
        &self.orientations
    }
}

/// One coefficient grid. Both families are undecimated, so `data` holds
/// width·height values in row-major image order.
///
/// `scale` is 0 for the coarse band, 1 for the coarsest detail scale, and
/// climbs toward finer detail. `orientation` is the wedge index (curvelet)
/// or the index of the non-lowpass filter pair (framelet).
#[derive(Debug, Clone)]
pub struct Band {
    pub scale: usize,
    pub orientation: usize,
    pub is_coarse: bool,
    pub data: Vec<f64>,
}

/// The full coefficient pyramid for one image.
#[derive(Debug, Clone)]
pub struct FrameCoefficients {
    width: usize,
    height: usize,
    bands: Vec<Band>,
}

impl FrameCoefficients {
    /// Assembles a pyramid from bands, checking sizes and that exactly one
    /// band is coarse.
    pub fn from_bands(width: usize, height: usize, bands: Vec<Band>) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::Dimension("coefficient pyramid has no bands".into()));
        }
        for (i, band) in bands.iter().enumerate() {
            if band.data.len() != width * height {
                return Err(Error::Dimension(format!(
                    "band {i} holds {} values, expected {}×{} = {}",
                    band.data.len(),
                    width,
                    height,
                    width * height
                )));
            }
        }
        let coarse = bands.iter().filter(|b| b.is_coarse).count();
        if coarse != 1 {
            return Err(Error::Dimension(format!(
                "coefficient pyramid must have exactly one coarse band, found {coarse}"
            )));
        }
        Ok(FrameCoefficients {
            width,
            height,
            bands,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    /// Total squared coefficient mass across every band; equals the image
    /// energy under the unit frame bound.
    pub fn energy(&self) -> f64 {
        self.bands
            .iter()
            .flat_map(|b| b.data.iter())
            .map(|v| v * v)
            .sum()
    }

    /// All detail coefficients (coarse excluded), concatenated in band
    /// order — the candidate pool for threshold selection.
    pub fn detail_values(&self) -> Vec<f64> {
        self.bands
            .iter()
            .filter(|b| !b.is_coarse)
            .flat_map(|b| b.data.iter().copied())
            .collect()
    }
}

/// The canonical band layout for a kind: coarse first, then each detail
/// scale in ascending order with its orientations.
fn expected_inventory(kind: &TransformKind) -> Vec<(usize, usize, bool)> {
    let mut inv = vec![(0usize, 0usize, true)];
    for s in 1..kind.scales() {
        let n = match kind.family() {
            Family::Framelet => 8,
            Family::Curvelet => kind.orientations()[s - 1],
        };
        for o in 0..n {
            inv.push((s, o, false));
        }
    }
    inv
}

fn validate_geometry(coeffs: &FrameCoefficients, kind: &TransformKind) -> Result<()> {
    let inv = expected_inventory(kind);
    if coeffs.bands.len() != inv.len() {
        return Err(Error::Dimension(format!(
            "pyramid has {} bands but a {:?} transform with {} scales produces {}",
            coeffs.bands.len(),
            kind.family(),
            kind.scales(),
            inv.len()
        )));
    }
    for (band, &(scale, orientation, is_coarse)) in coeffs.bands.iter().zip(&inv) {
        if (band.scale, band.orientation, band.is_coarse) != (scale, orientation, is_coarse) {
            return Err(Error::Dimension(format!(
                "band tagged ({}, {}, coarse={}) where ({}, {}, coarse={}) was expected",
                band.scale, band.orientation, band.is_coarse, scale, orientation, is_coarse
            )));
        }
    }
    Ok(())
}

/// Analyzes an image into its coefficient pyramid.
pub fn decompose(img: &Image, kind: &TransformKind) -> Result<FrameCoefficients> {
    let min_side = img.width().min(img.height());
    if min_side < (1usize << kind.scales()) {
        return Err(Error::Parameter(format!(
            "image {}×{} too small for {} scales (needs both sides ≥ {})",
            img.width(),
            img.height(),
            kind.scales(),
            1usize << kind.scales()
        )));
    }
    let bands = match kind.family() {
        Family::Framelet => framelet::decompose(img, kind.scales() - 1),
        Family::Curvelet => curvelet::decompose(img, kind),
    };
    FrameCoefficients::from_bands(img.width(), img.height(), bands)
}

/// Synthesizes an image back from its pyramid. Exact inverse of
/// [`decompose`] on its range.
pub fn reconstruct(coeffs: &FrameCoefficients, kind: &TransformKind) -> Result<Image> {
    validate_geometry(coeffs, kind)?;
    Ok(match kind.family() {
        Family::Framelet => framelet::reconstruct(coeffs, kind.scales() - 1),
        Family::Curvelet => curvelet::reconstruct(coeffs, kind),
    })
}

/// Hard thresholding: detail coefficients with |value| ≤ lambda become 0,
/// larger ones pass unchanged, and the coarse band is never touched.
pub fn hard_threshold(coeffs: &FrameCoefficients, lambda: f64) -> Result<FrameCoefficients> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::Parameter(format!(
            "threshold must be nonnegative, got {lambda}"
        )));
    }
    let mut out = coeffs.clone();
    for band in &mut out.bands {
        if band.is_coarse {
            continue;
        }
        for v in &mut band.data {
            if v.abs() <= lambda {
                *v = 0.0;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(w: usize, h: usize, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Image::from_fn(w, h, |_, _| rng.random::<f64>())
    }

    fn both_kinds(scales: usize) -> [TransformKind; 2] {
        [
            TransformKind::framelet(scales).unwrap(),
            TransformKind::curvelet(scales).unwrap(),
        ]
    }

    fn energy(img: &Image) -> f64 {
        img.as_slice().iter().map(|v| v * v).sum()
    }

    #[test]
    fn reconstruction_is_identity_for_both_kinds() {
        for (seed, (w, h)) in [(32, 32), (33, 29), (64, 48)].into_iter().enumerate() {
            let img = random_image(w, h, seed as u64);
            for kind in both_kinds(3) {
                let coeffs = decompose(&img, &kind).unwrap();
                let back = reconstruct(&coeffs, &kind).unwrap();
                let worst = img
                    .as_slice()
                    .iter()
                    .zip(back.as_slice())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                assert!(worst <= 1e-6, "{:?} on {w}×{h}: max err {worst}", kind.family());
            }
        }
    }

    #[test]
    fn coefficients_preserve_energy() {
        for (seed, (w, h)) in [(32, 32), (40, 56), (33, 29)].into_iter().enumerate() {
            let img = random_image(w, h, 100 + seed as u64);
            let reference = energy(&img);
            for kind in both_kinds(3) {
                let coeffs = decompose(&img, &kind).unwrap();
                let rel = (coeffs.energy() - reference).abs() / reference;
                assert!(rel <= 1e-6, "{:?} on {w}×{h}: rel energy err {rel}", kind.family());
            }
        }
    }

    #[test]
    fn zero_image_gives_zero_coefficients() {
        let img = Image::zeros(32, 32);
        for kind in both_kinds(2) {
            let coeffs = decompose(&img, &kind).unwrap();
            assert!(coeffs.energy() == 0.0);
        }
    }

    #[test]
    fn constant_image_energy_sits_in_the_coarse_band() {
        let img = Image::from_fn(32, 32, |_, _| 0.625);
        for kind in both_kinds(3) {
            let coeffs = decompose(&img, &kind).unwrap();
            let detail_peak = coeffs
                .detail_values()
                .iter()
                .map(|v| v.abs())
                .fold(0.0f64, f64::max);
            assert!(detail_peak <= 1e-8, "{:?}: {detail_peak}", kind.family());
            let coarse = &coeffs.bands()[0];
            assert!(coarse.is_coarse);
            let coarse_energy: f64 = coarse.data.iter().map(|v| v * v).sum();
            assert!((coarse_energy - energy(&img)).abs() / energy(&img) <= 1e-6);
        }
    }

    #[test]
    fn decompose_is_linear() {
        let f = random_image(24, 36, 7);
        let g = random_image(24, 36, 8);
        let combo = Image::from_fn(24, 36, |r, c| 0.7 * f.get(r, c) - 1.3 * g.get(r, c));
        for kind in both_kinds(2) {
            let cf = decompose(&f, &kind).unwrap();
            let cg = decompose(&g, &kind).unwrap();
            let cc = decompose(&combo, &kind).unwrap();
            for (band, (bf, bg)) in cc.bands().iter().zip(cf.bands().iter().zip(cg.bands())) {
                for (i, v) in band.data.iter().enumerate() {
                    let expect = 0.7 * bf.data[i] - 1.3 * bg.data[i];
                    assert!((v - expect).abs() <= 1e-8);
                }
            }
        }
    }

    /// Independent dense low-pass: 3×3 taps (spread by `d`) applied with
    /// explicit circular indexing, no separable shortcut.
    fn dense_lowpass(src: &[f64], w: usize, h: usize, d: usize) -> Vec<f64> {
        let q = [0.25, 0.5, 0.25];
        let mut out = vec![0.0; w * h];
        for r in 0..h {
            for c in 0..w {
                let mut acc = 0.0;
                for (j, qj) in q.iter().enumerate() {
                    for (i, qi) in q.iter().enumerate() {
                        // offsets (i−1)·d and (j−1)·d, wrapped circularly
                        let row = (r + h - d + j * d) % h;
                        let col = (c + w - d + i * d) % w;
                        acc += qj * qi * src[row * w + col];
                    }
                }
                out[r * w + c] = acc;
            }
        }
        out
    }

    #[test]
    fn zeroing_details_leaves_the_composed_lowpass() {
        let img = random_image(48, 40, 21);
        let kind = TransformKind::framelet(3).unwrap();
        let mut coeffs = decompose(&img, &kind).unwrap();
        for band in &mut coeffs.bands {
            if !band.is_coarse {
                band.data.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        let got = reconstruct(&coeffs, &kind).unwrap();
        // analysis low-pass at spacings 1 then 2, synthesis adjoints are the
        // same symmetric filters, so the oracle is four dense low-passes
        let mut oracle = img.as_slice().to_vec();
        for d in [1usize, 2, 2, 1] {
            oracle = dense_lowpass(&oracle, 48, 40, d);
        }
        for (a, b) in got.as_slice().iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn hard_threshold_follows_the_at_most_rule() {
        let bands = vec![
            Band {
                scale: 0,
                orientation: 0,
                is_coarse: true,
                data: vec![0.5, 0.5, 0.5],
            },
            Band {
                scale: 1,
                orientation: 0,
                is_coarse: false,
                data: vec![0.1, -0.5, 0.3],
            },
        ];
        let coeffs = FrameCoefficients::from_bands(3, 1, bands).unwrap();
        let out = hard_threshold(&coeffs, 0.3).unwrap();
        assert_eq!(out.bands()[1].data, vec![0.0, -0.5, 0.0]);
        assert_eq!(out.bands()[0].data, vec![0.5, 0.5, 0.5]);

        let unchanged = hard_threshold(&coeffs, 0.0).unwrap();
        assert_eq!(unchanged.bands()[1].data, vec![0.1, -0.5, 0.3]);

        let saturated = hard_threshold(&coeffs, 0.51).unwrap();
        assert_eq!(saturated.bands()[1].data, vec![0.0, 0.0, 0.0]);
        assert_eq!(saturated.bands()[0].data, vec![0.5, 0.5, 0.5]);
    }

    #[test]
    fn hard_threshold_rejects_negative_lambda() {
        let coeffs = decompose(&random_image(16, 16, 1), &TransformKind::framelet(2).unwrap())
            .unwrap();
        assert!(matches!(
            hard_threshold(&coeffs, -0.1),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn reconstruct_rejects_mismatched_geometry() {
        let img = random_image(32, 32, 5);
        let kind = TransformKind::framelet(2).unwrap();
        let coeffs = decompose(&img, &kind).unwrap();

        // band count mismatch: drop a detail band
        let mut bands = coeffs.bands().to_vec();
        bands.pop();
        let truncated = FrameCoefficients::from_bands(32, 32, bands).unwrap();
        assert!(matches!(
            reconstruct(&truncated, &kind),
            Err(Error::Dimension(_))
        ));

        // tag mismatch: at 4 scales the families disagree on the finest
        // scale's orientation count (8 vs 16)
        let fk4 = TransformKind::framelet(4).unwrap();
        let ck4 = TransformKind::curvelet(4).unwrap();
        let deep = decompose(&img, &fk4).unwrap();
        assert!(matches!(reconstruct(&deep, &ck4), Err(Error::Dimension(_))));
    }

    #[test]
    fn from_bands_validates_shape() {
        let short = vec![Band {
            scale: 0,
            orientation: 0,
            is_coarse: true,
            data: vec![0.0; 5],
        }];
        assert!(matches!(
            FrameCoefficients::from_bands(3, 2, short),
            Err(Error::Dimension(_))
        ));
        let no_coarse = vec![Band {
            scale: 1,
            orientation: 0,
            is_coarse: false,
            data: vec![0.0; 6],
        }];
        assert!(matches!(
            FrameCoefficients::from_bands(3, 2, no_coarse),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn decompose_rejects_undersized_images() {
        let img = random_image(7, 7, 2);
        let kind = TransformKind::framelet(3).unwrap();
        assert!(matches!(decompose(&img, &kind), Err(Error::Parameter(_))));
    }

    #[test]
    fn transform_kind_needs_two_scales() {
        assert!(matches!(TransformKind::curvelet(1), Err(Error::Parameter(_))));
        assert!(matches!(TransformKind::framelet(0), Err(Error::Parameter(_))));
    }

    #[test]
    fn band_inventory_matches_the_schedule() {
        let img = random_image(64, 64, 3);
        let fr = decompose(&img, &TransformKind::framelet(3).unwrap()).unwrap();
        assert_eq!(fr.bands().len(), 17); // coarse + 2 levels × 8
        let cu = decompose(&img, &TransformKind::curvelet(3).unwrap()).unwrap();
        assert_eq!(cu.bands().len(), 17); // coarse + rings of 8 and 8
        assert!(cu.bands()[0].is_coarse);
        assert!(cu.bands()[1..].iter().all(|b| !b.is_coarse));
        let cu2 = decompose(&img, &TransformKind::curvelet(2).unwrap()).unwrap();
        assert_eq!(cu2.bands().len(), 9);
    }

    #[test]
    fn default_scales_depend_on_size() {
        assert_eq!(
            TransformKind::with_default_scales(Family::Curvelet, 64, 64).scales(),
            3
        );
        assert_eq!(
            TransformKind::with_default_scales(Family::Curvelet, 64, 63).scales(),
            2
        );
    }

    fn transform_case() -> impl Strategy<Value = (usize, usize, usize, Family, Vec<f64>)> {
        (8usize..40, 8usize..40, 2usize..=3, prop::bool::ANY).prop_flat_map(|(w, h, s, cu)| {
            let family = if cu { Family::Curvelet } else { Family::Framelet };
            (
                Just(w),
                Just(h),
                Just(s),
                Just(family),
                prop::collection::vec(0.0f64..1.0, w * h),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn identity_and_parseval_on_random_geometry((w, h, scales, family, data) in transform_case()) {
            let img = Image::from_rows(w, h, data).unwrap();
            let kind = TransformKind::new(family, scales).unwrap();
            let coeffs = decompose(&img, &kind).unwrap();
            let back = reconstruct(&coeffs, &kind).unwrap();
            let worst = img
                .as_slice()
                .iter()
                .zip(back.as_slice())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            prop_assert!(worst <= 1e-6);
            let e = energy(&img);
            if e > 0.0 {
                prop_assert!((coeffs.energy() - e).abs() / e <= 1e-6);
            }
        }
    }
}
