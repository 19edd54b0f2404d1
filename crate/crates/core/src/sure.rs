//! Threshold selection by minimizing Stein's unbiased risk estimate.
//!
//! Candidate thresholds are the observed coefficient magnitudes themselves.
//! Sorting the squared magnitudes lets the risk of hard-thresholding at
//! every candidate be evaluated from prefix sums in O(N log N) total; the
//! minimizer's magnitude becomes λ. The arithmetic mirrors the usual
//! SureShrink bookkeeping: with `a` the ascending squared magnitudes,
//!
//! ```text
//! b[j] = a[1] + … + a[j]        c[j] = N − j
//! s[j] = b[j] + c[j]·a[j]       risk[j] = (N − 2j + s[j]) / N
//! ```
//!
//! (1-based j as written; storage is 0-based). `s[j]` is exactly
//! `Σ_r min(F_r², a[j])`, which the test oracle recomputes by brute force.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::tight_frame::FrameCoefficients;

/// Which values the threshold is selected over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SureMode {
    /// All detail-band coefficients (coarse excluded) — the objects the
    /// threshold is actually applied to.
    Coefficients,
    /// The image pixels themselves, flattened column-major.
    Image,
}

/// The full risk-minimization record for one threshold selection.
///
/// All arrays are indexed 0-based; `i_best` indexes into them.
#[derive(Debug, Clone)]
pub struct RiskCurve {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    s: Vec<f64>,
    risk: Vec<f64>,
    i_best: usize,
    lambda: f64,
}

impl RiskCurve {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Squared magnitudes, ascending.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// Prefix sums of `a`.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Counts of elements strictly above each candidate.
    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// `b[j] + c[j]·a[j] = Σ_r min(F_r², a[j])`.
    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn risk(&self) -> &[f64] {
        &self.risk
    }

    /// 0-based index of the risk minimizer (ties go to the smallest index).
    pub fn i_best(&self) -> usize {
        self.i_best
    }

    pub fn lambda_thresh(&self) -> f64 {
        self.lambda
    }
}

/// Selects the hard threshold minimizing the estimated risk over `values`.
///
/// Returns the threshold together with the full curve. The input must be
/// nonempty and finite; order does not matter.
pub fn sure_threshold(values: &[f64]) -> Result<(f64, RiskCurve)> {
    if values.is_empty() {
        return Err(Error::Parameter(
            "threshold selection needs at least one value".into(),
        ));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Data(format!(
            "non-finite value {bad} in threshold selection input"
        )));
    }
    let n = values.len();
    let nf = n as f64;
    let mut a: Vec<f64> = values.iter().map(|v| v * v).collect();
    a.sort_unstable_by(f64::total_cmp);

    let mut b = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &v in &a {
        acc += v;
        b.push(acc);
    }
    let c: Vec<f64> = (0..n).map(|t| (n - t - 1) as f64).collect();
    let s: Vec<f64> = (0..n).map(|t| b[t] + c[t] * a[t]).collect();
    let risk: Vec<f64> = (0..n)
        .map(|t| (nf - 2.0 * (t + 1) as f64 + s[t]) / nf)
        .collect();

    debug_assert!(b.windows(2).all(|w| w[0] <= w[1]), "b must be non-decreasing");
    debug_assert!(c.windows(2).all(|w| w[0] > w[1]), "c must be strictly decreasing");

    let mut i_best = 0;
    for t in 1..n {
        if risk[t] < risk[i_best] {
            i_best = t;
        }
    }
    let lambda = a[i_best].sqrt();
    Ok((
        lambda,
        RiskCurve {
            a,
            b,
            c,
            s,
            risk,
            i_best,
            lambda,
        },
    ))
}

/// Flattens the values the threshold should be selected over.
pub fn threshold_source(coeffs: &FrameCoefficients, img: &Image, mode: SureMode) -> Vec<f64> {
    match mode {
        SureMode::Coefficients => coeffs.detail_values(),
        SureMode::Image => img.to_colmajor(),
    }
}
