//! Overlap scores between predicted and ground-truth masks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::BinaryMask;

/// Dice/Jaccard overlap between a predicted mask and ground truth, with the
/// raw confusion counts.  Both scores are defined as 1 when prediction and
/// truth are empty; `jaccard = dice / (2 - dice)` always holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    pub dice: f64,
    pub jaccard: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Scores `pred` against `truth`.  The masks must share dimensions.
pub fn score(pred: &BinaryMask, truth: &BinaryMask) -> Result<MetricReport> {
    if pred.width() != truth.width() || pred.height() != truth.height() {
        return Err(Error::Dimension(format!(
            "mask dimensions differ: {}x{} vs {}x{}",
            pred.width(),
            pred.height(),
            truth.width(),
            truth.height()
        )));
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for row in 0..pred.height() {
        for col in 0..pred.width() {
            match (pred.get(row, col), truth.get(row, col)) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
    }
    let denom = 2 * tp + fp + fn_;
    let dice = if denom == 0 {
        1.0
    } else {
        2.0 * tp as f64 / denom as f64
    };
    let union = tp + fp + fn_;
    let jaccard = if union == 0 {
        1.0
    } else {
        tp as f64 / union as f64
    };
    Ok(MetricReport {
        dice,
        jaccard,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mask_from(width: usize, height: usize, members: &[(usize, usize)]) -> BinaryMask {
        BinaryMask::from_fn(width, height, |row, col| members.contains(&(row, col)))
    }

    #[test]
    fn identical_masks_score_one() {
        let m = mask_from(4, 4, &[(0, 0), (1, 2), (3, 3)]);
        let report = score(&m, &m).unwrap();
        assert_eq!(report.dice, 1.0);
        assert_eq!(report.jaccard, 1.0);
        assert_eq!(report.true_positives, 3);
        assert_eq!(report.false_positives, 0);
        assert_eq!(report.false_negatives, 0);
    }

    #[test]
    fn disjoint_nonempty_masks_score_zero() {
        let a = mask_from(4, 4, &[(0, 0), (0, 1)]);
        let b = mask_from(4, 4, &[(2, 2), (2, 3)]);
        let report = score(&a, &b).unwrap();
        assert_eq!(report.dice, 0.0);
        assert_eq!(report.jaccard, 0.0);
        assert_eq!(report.true_positives, 0);
        assert_eq!(report.false_positives, 2);
        assert_eq!(report.false_negatives, 2);
    }

    #[test]
    fn both_empty_masks_score_one() {
        let a = BinaryMask::new(5, 5);
        let report = score(&a, &a.clone()).unwrap();
        assert_eq!(report.dice, 1.0);
        assert_eq!(report.jaccard, 1.0);
    }

    #[test]
    fn half_overlap_matches_hand_arithmetic() {
        // |A| = 100, |B| = 100, |A ∩ B| = 50: dice = 0.5, jaccard = 1/3.
        let a = BinaryMask::from_fn(20, 10, |_, col| col < 10);
        assert_eq!(a.count(), 100);
        let b = BinaryMask::from_fn(20, 10, |row, _| row < 5);
        assert_eq!(b.count(), 100);
        let report = score(&a, &b).unwrap();
        assert_eq!(report.true_positives, 50);
        assert_eq!(report.false_positives, 50);
        assert_eq!(report.false_negatives, 50);
        assert!((report.dice - 0.5).abs() < 1e-15);
        assert!((report.jaccard - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn jaccard_follows_dice_on_random_masks() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..50 {
            let a = BinaryMask::from_fn(16, 16, |_, _| rng.random_bool(0.3));
            let b = BinaryMask::from_fn(16, 16, |_, _| rng.random_bool(0.3));
            let report = score(&a, &b).unwrap();
            assert!((report.jaccard - report.dice / (2.0 - report.dice)).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&report.dice));
        }
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let a = BinaryMask::new(4, 4);
        let b = BinaryMask::new(4, 5);
        assert!(matches!(score(&a, &b), Err(Error::Dimension(_))));
    }
}
