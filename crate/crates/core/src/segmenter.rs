//! Iterative two-threshold segmentation loop.
//!
//! Starting from the set of pixels with appreciable gradient magnitude, each
//! iteration estimates decision statistics over the still-undecided pixels,
//! classifies the confident ones as background (0) or vessel (1), stretches
//! the ambiguous band back to [0, 1], and denoises the surviving pixels with
//! a hard-thresholded tight-frame projection.  Classified pixels are frozen:
//! once a pixel leaves the active set its value never changes again, so the
//! active set shrinks monotonically and the loop terminates.
//!
//! Two modes are supported.  `Tfa` uses intensity evidence alone; `Tfae`
//! additionally promotes pixels whose principal Hessian eigenvector is
//! coherent with the strongest edge, which pulls elongated faint structures
//! across the threshold earlier.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::{blend_on_set, BinaryMask, Image, Pixel, PixelSet};
use crate::scale_space::{
    gradient_field, hessian_eigen, orientation_coherence, EigenField, VectorField,
};
use crate::sure::{sure_threshold, threshold_source, SureMode};
use crate::tight_frame::{decompose, hard_threshold, reconstruct, Family, TransformKind};

/// Segmentation variant: plain two-threshold (`Tfa`) or the eigenvector
/// extension (`Tfae`) that also promotes orientation-coherent pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Tfa,
    Tfae,
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    /// The active set became empty: every pixel was classified.
    EmptySet,
    /// The active set stopped shrinking for `stall_patience` consecutive
    /// iterations; the remaining pixels were binarized at the last mean.
    StallFallback,
    /// The iteration cap was reached; remaining pixels were binarized at the
    /// last mean.
    MaxIterations,
}

impl TerminationReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            TerminationReason::EmptySet => "empty_set",
            TerminationReason::StallFallback => "stall_fallback",
            TerminationReason::MaxIterations => "max_iterations",
        }
    }
}

/// Tuning knobs for [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct SegmenterConfig {
    /// Scale of the Gaussian derivative filters behind the gradient and
    /// Hessian fields.
    pub sigma: f64,
    /// Gradient-magnitude floor for seeding the active set.
    pub epsilon: f64,
    pub mode: Mode,
    /// Tight-frame family used by the denoising step; the number of scales
    /// is chosen from the image size.
    pub transform: Family,
    pub sure_mode: SureMode,
    pub max_iterations: usize,
    /// Consecutive no-shrink iterations tolerated before falling back to a
    /// direct binarization of the remaining active pixels.
    pub stall_patience: usize,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        SegmenterConfig {
            sigma: 2.0,
            epsilon: 0.02,
            mode: Mode::Tfae,
            transform: Family::Curvelet,
            sure_mode: SureMode::Coefficients,
            max_iterations: 50,
            stall_patience: 3,
        }
    }
}

impl SegmenterConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.sigma.is_finite() || self.sigma <= 0.0 {
            return Err(Error::Parameter(format!(
                "sigma must be positive and finite, got {}",
                self.sigma
            )));
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::Parameter(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Parameter(
                "max_iterations must be at least 1".into(),
            ));
        }
        if self.stall_patience == 0 {
            return Err(Error::Parameter(
                "stall_patience must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Transform geometry for an image of the given dimensions.
    pub fn transform_kind(&self, width: usize, height: usize) -> TransformKind {
        TransformKind::with_default_scales(self.transform, width, height)
    }
}

/// Per-iteration decision statistics over the active set.
///
/// `m` is the mean intensity over the active set, `m_p`/`m_n` the means of
/// the sub-populations at or above / at or below `m` (pixels equal to `m`
/// contribute to both), and `alpha`/`beta` the background/vessel thresholds
/// clamped into [0, 1].  `max_p` is the active pixel with the largest
/// gradient magnitude (`max_g`), and `mean_coherence` the average alignment
/// between its principal eigenvector and those of the active pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionParams {
    pub m: f64,
    pub m_p: f64,
    pub m_n: f64,
    pub alpha: f64,
    pub beta: f64,
    pub max_p: Pixel,
    pub max_g: f64,
    pub mean_coherence: f64,
}

/// One row of the iteration trace.  `reason` is populated only on the final
/// record.  Wall time is kept for in-process reporting but never serialized,
/// so traces are byte-identical across runs.
#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub active_count: usize,
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub mean_coherence: f64,
    pub lambda: f64,
    pub max_p_row: usize,
    pub max_p_col: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<TerminationReason>,
    #[serde(skip)]
    pub wall_seconds: f64,
}

/// Complete record of a segmentation run: one [`IterationRecord`] per
/// executed iteration (none when the initial active set is already empty),
/// the iteration count, and the termination reason.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    records: Vec<IterationRecord>,
    iterations: usize,
    reason: TerminationReason,
}

impl IterationTrace {
    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn reason(&self) -> TerminationReason {
        self.reason
    }

    pub fn total_wall_seconds(&self) -> f64 {
        self.records.iter().map(|r| r.wall_seconds).sum()
    }

    /// One JSON object per line, in iteration order.  Zero-iteration runs
    /// produce an empty string.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for record in &self.records {
            out.push_str(&serde_json::to_string(record).expect("trace records serialize"));
            out.push('\n');
        }
        out
    }
}

/// Pixels whose gradient magnitude reaches `epsilon`.
pub fn initial_active_set(grad: &VectorField, epsilon: f64) -> PixelSet {
    debug_assert!(epsilon > 0.0);
    let mags = grad.magnitudes();
    let width = grad.width();
    PixelSet::from_fn(width, grad.height(), |row, col| {
        mags[row * width + col] >= epsilon
    })
}

/// Active pixel with the largest gradient magnitude and that magnitude.
/// Ties resolve to the smallest row, then the smallest column.
///
/// Panics on an empty active set; callers terminate before reaching one.
pub fn max_gradient_pixel(grad: &VectorField, active: &PixelSet) -> (Pixel, f64) {
    assert!(
        !active.is_empty(),
        "max_gradient_pixel requires a nonempty active set"
    );
    let mags = grad.magnitudes();
    let width = grad.width();
    let mut best = Pixel::new(0, 0);
    let mut best_mag = f64::NEG_INFINITY;
    for p in active.iter() {
        let mag = mags[p.row * width + p.col];
        if mag > best_mag {
            best_mag = mag;
            best = p;
        }
    }
    (best, best_mag)
}

/// Decision statistics for one iteration (see [`DecisionParams`]).
///
/// Panics on an empty active set; callers terminate before reaching one.
pub fn decision_params(
    f_i: &Image,
    active: &PixelSet,
    eigen: &EigenField,
    grad: &VectorField,
) -> DecisionParams {
    assert!(
        !active.is_empty(),
        "decision_params requires a nonempty active set"
    );
    let (max_p, max_g) = max_gradient_pixel(grad, active);
    let n = active.cardinality() as f64;

    let mut sum = 0.0;
    for p in active.iter() {
        sum += f_i.get(p.row, p.col);
    }
    let m = sum / n;

    let (mut sum_p, mut count_p) = (0.0, 0usize);
    let (mut sum_n, mut count_n) = (0.0, 0usize);
    let mut coherence_sum = 0.0;
    for p in active.iter() {
        let v = f_i.get(p.row, p.col);
        if v >= m {
            sum_p += v;
            count_p += 1;
        }
        if v <= m {
            sum_n += v;
            count_n += 1;
        }
        coherence_sum += orientation_coherence(eigen, max_p, p);
    }
    debug_assert!(count_p > 0 && count_n > 0, "mean must be attained from both sides");
    let m_p = sum_p / count_p as f64;
    let m_n = sum_n / count_n as f64;
    debug_assert!(m_n <= m + 1e-12 && m <= m_p + 1e-12);

    DecisionParams {
        m,
        m_p,
        m_n,
        alpha: ((m + m_n) / 2.0).max(0.0),
        beta: ((m + m_p) / 2.0).min(1.0),
        max_p,
        max_g,
        mean_coherence: coherence_sum / n,
    }
}

/// Classifies the active pixels of `f_i` against `params`.
///
/// Active pixels at or below `alpha` become 0; those at or above `beta`
/// become 1.  In `Tfae` mode, pixels at or above the mean whose eigenvector
/// coherence with `max_p` reaches `mean_coherence` also become 1.  The rest
/// are stretched linearly over the intensity range that the band
/// `{alpha <= f_i <= beta}` spans inside the active set; if that range is
/// empty or flat they are binarized at the mean instead.  Pixels outside the
/// active set are copied unchanged.
///
/// Returns the updated image and the next active set: exactly the pixels
/// whose new value lies strictly inside (0, 1).
// The two 1.0 arms below are distinct rules (super-band cut vs coherence
// promotion) and their order matters; keeping them separate mirrors that.
#[allow(clippy::if_same_then_else)]
pub fn threshold_step(
    f_i: &Image,
    active: &PixelSet,
    params: &DecisionParams,
    eigen: &EigenField,
    mode: Mode,
) -> (Image, PixelSet) {
    let mut min_band = f64::INFINITY;
    let mut max_band = f64::NEG_INFINITY;
    for p in active.iter() {
        let v = f_i.get(p.row, p.col);
        if v >= params.alpha && v <= params.beta {
            min_band = min_band.min(v);
            max_band = max_band.max(v);
        }
    }
    let span = max_band - min_band;
    let degenerate = !span.is_finite() || span <= 0.0;

    let mut out = f_i.clone();
    let mut next = PixelSet::empty(f_i.width(), f_i.height());
    for p in active.iter() {
        let v = f_i.get(p.row, p.col);
        let new = if v <= params.alpha {
            0.0
        } else if v >= params.beta {
            1.0
        } else if mode == Mode::Tfae
            && v >= params.m
            && orientation_coherence(eigen, params.max_p, p) >= params.mean_coherence
        {
            1.0
        } else if degenerate {
            if v >= params.m {
                1.0
            } else {
                0.0
            }
        } else {
            (v - min_band) / span
        };
        out.set(p.row, p.col, new);
        if new > 0.0 && new < 1.0 {
            next.insert(p.row, p.col);
        }
    }
    (out, next)
}

/// Tight-frame denoising restricted to the still-active pixels.
///
/// The whole image is decomposed, hard-thresholded at the SURE-optimal
/// lambda (estimated from the source selected by `cfg.sure_mode`), and
/// reconstructed; the result replaces `f_t` on `next_active` only and is
/// clamped to [0, 1].  Returns the image and the lambda used.  An empty
/// `next_active` short-circuits: `f_t` is returned unchanged with lambda 0.
pub fn denoise_step(
    f_t: &Image,
    next_active: &PixelSet,
    cfg: &SegmenterConfig,
) -> Result<(Image, f64)> {
    if next_active.is_empty() {
        return Ok((f_t.clone(), 0.0));
    }
    let kind = cfg.transform_kind(f_t.width(), f_t.height());
    let coeffs = decompose(f_t, &kind)?;
    let source = threshold_source(&coeffs, f_t, cfg.sure_mode);
    let (lambda, _) = sure_threshold(&source)?;
    let denoised = reconstruct(&hard_threshold(&coeffs, lambda)?, &kind)?;
    let blended = blend_on_set(
        &f_t.to_colmajor(),
        &denoised.to_colmajor(),
        next_active,
    )?;
    let mut out = Image::from_colmajor(f_t.width(), f_t.height(), &blended)?;
    out.clamp_unit();
    Ok((out, lambda))
}

/// Runs the full iteration on `img` (values in [0, 1]) and returns the
/// vessel mask together with the iteration trace.
///
/// Gradient and Hessian eigen fields are computed once from the input image
/// and reused across iterations.  Pixels never admitted to the active set
/// keep their input value during the loop and are binarized at 0.5 at the
/// end; an empty initial active set therefore degenerates to plain
/// binarization of the input with zero iterations.
pub fn run(img: &Image, cfg: &SegmenterConfig) -> Result<(BinaryMask, IterationTrace)> {
    cfg.validate()?;
    let grad = gradient_field(img, cfg.sigma)?;
    let eigen = hessian_eigen(img, cfg.sigma)?;

    let initial = initial_active_set(&grad, cfg.epsilon);
    let ever_active = initial.clone();

    let mut f = img.clone();
    let mut active = initial;
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut reason = None;
    let mut stall_run = 0usize;

    // State needed by the forced-binarization fallbacks: the image each
    // iteration started from and the mean it computed.  Comparing against
    // pre-stretch values keeps the cut on the same intensity scale as m.
    let mut prev_f = f.clone();
    let mut last_m = 0.5;

    if active.is_empty() {
        reason = Some(TerminationReason::EmptySet);
    }

    while reason.is_none() {
        let iter = records.len();
        if iter >= cfg.max_iterations {
            reason = Some(TerminationReason::MaxIterations);
            break;
        }
        let started = Instant::now();
        prev_f = f.clone();

        let params = decision_params(&f, &active, &eigen, &grad);
        last_m = params.m;
        let (f_t, next) = threshold_step(&f, &active, &params, &eigen, cfg.mode);
        debug_assert!(next.is_subset_of(&active));

        let (f_next, lambda) = denoise_step(&f_t, &next, cfg)?;

        let empty = next.is_empty();
        let shrank = next.cardinality() < active.cardinality();
        stall_run = if shrank { 0 } else { stall_run + 1 };

        records.push(IterationRecord {
            iter,
            active_count: active.cardinality(),
            alpha: params.alpha,
            beta: params.beta,
            m: params.m,
            mean_coherence: params.mean_coherence,
            lambda,
            max_p_row: params.max_p.row,
            max_p_col: params.max_p.col,
            reason: None,
            wall_seconds: started.elapsed().as_secs_f64(),
        });

        f = f_next;
        active = next;

        if empty {
            reason = Some(TerminationReason::EmptySet);
        } else if stall_run >= cfg.stall_patience {
            reason = Some(TerminationReason::StallFallback);
        }
    }

    let reason = reason.expect("loop always terminates with a reason");

    // Forced stops leave active pixels undecided; cut them at the last mean
    // using their pre-stretch values.
    if !active.is_empty() {
        debug_assert_ne!(reason, TerminationReason::EmptySet);
        for p in active.iter() {
            let v = if prev_f.get(p.row, p.col) >= last_m {
                1.0
            } else {
                0.0
            };
            f.set(p.row, p.col, v);
        }
    }

    // Pixels that never entered the loop hold their input value; binarize
    // them at 0.5 so the pre-mask image is exactly two-valued.
    for row in 0..img.height() {
        for col in 0..img.width() {
            if !ever_active.contains(row, col) {
                let v = if img.get(row, col) >= 0.5 { 1.0 } else { 0.0 };
                f.set(row, col, v);
            }
        }
    }
    debug_assert!(f.as_slice().iter().all(|&v| v == 0.0 || v == 1.0));

    if let Some(last) = records.last_mut() {
        last.reason = Some(reason);
    }
    let iterations = records.len();
    let mask = BinaryMask::from_fn(img.width(), img.height(), |row, col| {
        f.get(row, col) == 1.0
    });
    Ok((
        mask,
        IterationTrace {
            records,
            iterations,
            reason,
        },
    ))
}
