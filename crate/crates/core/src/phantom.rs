//! Synthetic tube phantoms with exact ground truth.
//!
//! Phantoms stand in for clinical angiography data: bright tubular
//! structures with smooth Gaussian cross-sections on a dark background,
//! plus seeded additive Gaussian noise.  Ground truth is geometric — a
//! pixel is vessel exactly when it lies within a tube's radius of that
//! tube's centerline polyline — so segmentation quality can be scored
//! without reference data.
//!
//! The suites at the bottom cover the scenarios the segmenter is meant to
//! handle: high-contrast tubes, heavy noise, faint terminal branches,
//! dark junction connectors, and gap-prone thin vessels.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::image::{BinaryMask, Image};

/// Background intensity before noise.
pub const BACKGROUND: f64 = 0.05;

/// One tubular structure: a centerline polyline with a constant radius and
/// peak intensity.  `faint_branch` marks deliberately low-contrast terminal
/// pieces so tests can score that region separately.
#[derive(Debug, Clone)]
pub struct Tube {
    /// Centerline control points as (row, col), in image coordinates.
    pub points: Vec<(f64, f64)>,
    pub radius: f64,
    /// Centerline intensity in [0, 1].
    pub peak: f64,
    pub faint_branch: bool,
}

impl Tube {
    pub fn new(points: Vec<(f64, f64)>, radius: f64, peak: f64) -> Self {
        Tube {
            points,
            radius,
            peak,
            faint_branch: false,
        }
    }

    pub fn faint(points: Vec<(f64, f64)>, radius: f64, peak: f64) -> Self {
        Tube {
            points,
            radius,
            peak,
            faint_branch: true,
        }
    }
}

/// Full description of a phantom; rendering is deterministic in the spec
/// and the seed.
#[derive(Debug, Clone)]
pub struct PhantomSpec {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub tubes: Vec<Tube>,
    pub noise_sigma: f64,
    pub rng_seed: u64,
}

impl PhantomSpec {
    /// Same phantom, different noise realization.
    pub fn with_seed(&self, rng_seed: u64) -> PhantomSpec {
        PhantomSpec {
            rng_seed,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.width < 32 || self.height < 32 {
            return Err(Error::Parameter(format!(
                "phantom dimensions must be at least 32x32, got {}x{}",
                self.width, self.height
            )));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(Error::Parameter(format!(
                "noise sigma must be nonnegative and finite, got {}",
                self.noise_sigma
            )));
        }
        for (i, tube) in self.tubes.iter().enumerate() {
            if tube.points.is_empty() {
                return Err(Error::Parameter(format!("tube {i} has no control points")));
            }
            if !tube.radius.is_finite() || tube.radius <= 0.0 {
                return Err(Error::Parameter(format!(
                    "tube {i} radius must be positive, got {}",
                    tube.radius
                )));
            }
            if !(0.0..=1.0).contains(&tube.peak) {
                return Err(Error::Parameter(format!(
                    "tube {i} peak must lie in [0, 1], got {}",
                    tube.peak
                )));
            }
            if tube.points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
                return Err(Error::Parameter(format!(
                    "tube {i} has a non-finite control point"
                )));
            }
        }
        Ok(())
    }
}

/// Rendered phantom: noisy image, full ground truth, and the truth
/// restricted to tubes flagged `faint_branch`.
#[derive(Debug, Clone)]
pub struct Phantom {
    pub image: Image,
    pub truth: BinaryMask,
    pub faint_truth: BinaryMask,
}

fn dist_to_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dr, dc) = (b.0 - a.0, b.1 - a.1);
    let len2 = dr * dr + dc * dc;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dr + (p.1 - a.1) * dc) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (qr, qc) = (a.0 + t * dr, a.1 + t * dc);
    ((p.0 - qr).powi(2) + (p.1 - qc).powi(2)).sqrt()
}

fn dist_to_polyline(p: (f64, f64), points: &[(f64, f64)]) -> f64 {
    if points.len() == 1 {
        return dist_to_segment(p, points[0], points[0]);
    }
    points
        .windows(2)
        .map(|w| dist_to_segment(p, w[0], w[1]))
        .fold(f64::INFINITY, f64::min)
}

/// Renders the phantom.  Tube profiles are Gaussian in the distance to the
/// centerline, scaled so the intensity at the truth boundary (distance =
/// radius) is half the peak; overlapping tubes combine by maximum.  Noise
/// is sampled pixel by pixel in row-major order from a ChaCha8 stream
/// seeded with `rng_seed`, and the result is clamped to [0, 1].
pub fn render(spec: &PhantomSpec) -> Result<Phantom> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let noise = Normal::new(0.0, spec.noise_sigma)
        .map_err(|e| Error::Parameter(format!("noise distribution: {e}")))?;

    let mut image = Image::zeros(w, h);
    let mut truth = BinaryMask::new(w, h);
    let mut faint_truth = BinaryMask::new(w, h);
    for row in 0..h {
        for col in 0..w {
            let p = (row as f64, col as f64);
            let mut value = BACKGROUND;
            for tube in &spec.tubes {
                let d = dist_to_polyline(p, &tube.points);
                // Half-maximum at the truth boundary: exp(-ln2 (d/r)^2).
                let profile =
                    tube.peak * (-std::f64::consts::LN_2 * (d / tube.radius).powi(2)).exp();
                value = value.max(profile);
                if d <= tube.radius {
                    truth.set(row, col, true);
                    if tube.faint_branch {
                        faint_truth.set(row, col, true);
                    }
                }
            }
            let noisy = (value + noise.sample(&mut rng)).clamp(0.0, 1.0);
            image.set(row, col, noisy);
        }
    }
    Ok(Phantom {
        image,
        truth,
        faint_truth,
    })
}

fn spec(
    name: &str,
    size: (usize, usize),
    tubes: Vec<Tube>,
    noise_sigma: f64,
    rng_seed: u64,
) -> PhantomSpec {
    PhantomSpec {
        name: name.to_string(),
        width: size.0,
        height: size.1,
        tubes,
        noise_sigma,
        rng_seed,
    }
}

/// An S-shaped polyline spanning the frame vertically at column fraction
/// `cx`, with horizontal sway `sway` (fractions of width/height).
fn s_curve(width: usize, height: usize, cx: f64, sway: f64) -> Vec<(f64, f64)> {
    let (w, h) = (width as f64, height as f64);
    let n = 16;
    (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            let row = h * (0.08 + 0.84 * t);
            let col = w * cx + w * sway * (std::f64::consts::TAU * t).sin();
            (row, col)
        })
        .collect()
}

/// Bright, well-separated tubes; the easy baseline family.
fn high_contrast_specs() -> Vec<PhantomSpec> {
    vec![
        spec(
            "straight_vertical",
            (64, 64),
            vec![Tube::new(vec![(6.0, 30.0), (58.0, 34.0)], 4.0, 0.92)],
            0.05,
            101,
        ),
        spec(
            "diagonal",
            (64, 64),
            vec![Tube::new(vec![(8.0, 8.0), (56.0, 56.0)], 3.5, 0.9)],
            0.05,
            102,
        ),
        spec(
            "s_curve",
            (64, 64),
            vec![Tube::new(s_curve(64, 64, 0.5, 0.16), 3.5, 0.92)],
            0.05,
            103,
        ),
        spec(
            "two_parallel",
            (64, 64),
            vec![
                Tube::new(vec![(6.0, 20.0), (58.0, 22.0)], 3.5, 0.9),
                Tube::new(vec![(6.0, 42.0), (58.0, 44.0)], 3.0, 0.85),
            ],
            0.05,
            104,
        ),
        spec(
            "crossing_pair",
            (64, 64),
            vec![
                Tube::new(vec![(8.0, 10.0), (56.0, 54.0)], 3.5, 0.9),
                Tube::new(vec![(56.0, 10.0), (8.0, 54.0)], 3.0, 0.85),
            ],
            0.05,
            105,
        ),
    ]
}

/// Same geometry class under heavy noise.
fn noisy_specs() -> Vec<PhantomSpec> {
    vec![
        spec(
            "noisy_s_curve",
            (64, 64),
            vec![Tube::new(s_curve(64, 64, 0.5, 0.14), 4.0, 0.92)],
            0.15,
            106,
        ),
        spec(
            "noisy_diagonal",
            (64, 64),
            vec![Tube::new(vec![(8.0, 10.0), (56.0, 54.0)], 4.0, 0.9)],
            0.15,
            107,
        ),
    ]
}

/// Bright main vessel continued or joined by low-contrast terminal pieces
/// sharing its orientation; the region where the eigenvector clause earns
/// its keep.
fn faint_branch_specs() -> Vec<PhantomSpec> {
    vec![
        spec(
            "faint_terminal_vertical",
            (96, 96),
            vec![
                Tube::new(vec![(8.0, 46.0), (58.0, 48.0)], 3.0, 0.9),
                Tube::faint(vec![(58.0, 48.0), (90.0, 49.0)], 2.2, 0.5),
            ],
            0.04,
            108,
        ),
        spec(
            "faint_terminal_diagonal",
            (96, 96),
            vec![
                Tube::new(vec![(8.0, 8.0), (60.0, 60.0)], 3.0, 0.9),
                Tube::faint(vec![(60.0, 60.0), (88.0, 88.0)], 2.2, 0.5),
            ],
            0.04,
            109,
        ),
        spec(
            "faint_side_branch",
            (96, 96),
            vec![
                Tube::new(vec![(8.0, 40.0), (88.0, 44.0)], 3.2, 0.92),
                Tube::faint(vec![(48.0, 42.0), (86.0, 54.0)], 2.0, 0.48),
            ],
            0.04,
            110,
        ),
        spec(
            "faint_double_terminal",
            (96, 96),
            vec![
                Tube::new(vec![(10.0, 48.0), (52.0, 48.0)], 3.0, 0.9),
                Tube::faint(vec![(52.0, 48.0), (88.0, 42.0)], 2.2, 0.5),
                Tube::faint(vec![(52.0, 48.0), (88.0, 56.0)], 2.0, 0.46),
            ],
            0.04,
            111,
        ),
    ]
}

/// Junctions rendered relatively dark: bright limbs meeting through a dim
/// connector, plus thin tubes with dim bridges across gaps.
fn junction_and_gap_specs() -> Vec<PhantomSpec> {
    vec![
        spec(
            "dark_junction_y",
            (64, 64),
            vec![
                Tube::new(vec![(6.0, 32.0), (28.0, 32.0)], 3.0, 0.9),
                Tube::new(vec![(36.0, 22.0), (58.0, 12.0)], 2.8, 0.88),
                Tube::new(vec![(36.0, 42.0), (58.0, 52.0)], 2.8, 0.88),
                // Dim connector covering the junction pixels.
                Tube::new(vec![(28.0, 32.0), (34.0, 32.0)], 2.6, 0.55),
                Tube::new(vec![(34.0, 32.0), (36.0, 22.0)], 2.4, 0.55),
                Tube::new(vec![(34.0, 32.0), (36.0, 42.0)], 2.4, 0.55),
            ],
            0.05,
            112,
        ),
        spec(
            "gap_bridge_thin",
            (64, 64),
            vec![
                Tube::new(vec![(6.0, 24.0), (26.0, 28.0)], 2.0, 0.88),
                Tube::new(vec![(38.0, 32.0), (58.0, 36.0)], 2.0, 0.88),
                // Dim bridge across the gap.
                Tube::new(vec![(26.0, 28.0), (38.0, 32.0)], 1.8, 0.42),
            ],
            0.05,
            113,
        ),
        spec(
            "dark_junction_cross",
            (64, 64),
            vec![
                Tube::new(vec![(32.0, 4.0), (32.0, 24.0)], 2.6, 0.9),
                Tube::new(vec![(32.0, 40.0), (32.0, 60.0)], 2.6, 0.9),
                Tube::new(vec![(4.0, 32.0), (24.0, 32.0)], 2.6, 0.86),
                Tube::new(vec![(40.0, 32.0), (60.0, 32.0)], 2.6, 0.86),
                Tube::new(vec![(32.0, 24.0), (32.0, 40.0)], 2.2, 0.5),
                Tube::new(vec![(24.0, 32.0), (40.0, 32.0)], 2.2, 0.5),
            ],
            0.05,
            114,
        ),
    ]
}

/// The full desk-scale suite: at least 12 named specs across all scenario
/// families.  Seeds are per-spec defaults; tests re-seed with
/// [`PhantomSpec::with_seed`].
pub fn standard_suite() -> Vec<PhantomSpec> {
    let mut all = high_contrast_specs();
    all.extend(noisy_specs());
    all.extend(faint_branch_specs());
    all.extend(junction_and_gap_specs());
    all
}

/// The faint-terminal-branch family used for the mode-comparison claims.
pub fn faint_branch_suite() -> Vec<PhantomSpec> {
    faint_branch_specs()
}

/// High-contrast 128x128 phantoms with light (0.05) noise for quality
/// scoring.
pub fn quality_clean_suite() -> Vec<PhantomSpec> {
    vec![
        spec(
            "quality_s_curve",
            (128, 128),
            vec![Tube::new(s_curve(128, 128, 0.5, 0.15), 5.0, 0.92)],
            0.05,
            115,
        ),
        spec(
            "quality_branching",
            (128, 128),
            vec![
                Tube::new(vec![(10.0, 60.0), (70.0, 64.0)], 5.0, 0.92),
                Tube::new(vec![(70.0, 64.0), (118.0, 40.0)], 4.0, 0.88),
                Tube::new(vec![(70.0, 64.0), (118.0, 92.0)], 4.0, 0.88),
            ],
            0.05,
            116,
        ),
    ]
}

/// The same geometry class under heavy (0.15) noise.
pub fn quality_noisy_suite() -> Vec<PhantomSpec> {
    vec![
        spec(
            "quality_noisy_s_curve",
            (128, 128),
            vec![Tube::new(s_curve(128, 128, 0.5, 0.15), 5.0, 0.92)],
            0.15,
            117,
        ),
        spec(
            "quality_noisy_branching",
            (128, 128),
            vec![
                Tube::new(vec![(10.0, 60.0), (70.0, 64.0)], 5.0, 0.92),
                Tube::new(vec![(70.0, 64.0), (118.0, 40.0)], 4.0, 0.88),
                Tube::new(vec![(70.0, 64.0), (118.0, 92.0)], 4.0, 0.88),
            ],
            0.15,
            118,
        ),
    ]
}
