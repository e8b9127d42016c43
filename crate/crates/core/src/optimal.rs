//! Segmentations that maximize expected Accuracy or Dice under a soft label.

use crate::error::{Error, Result};
use crate::grid::{MarginalGrid, SegmentationGrid};
use crate::metrics::dice;

/// Largest grid accepted by [`brute_force_dice_optimal`].
pub const BRUTE_FORCE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct DiceOptimum {
    pub segmentation: SegmentationGrid,
    /// Half the best attainable Dice; voxels with `m >= threshold` are foreground.
    pub threshold: f64,
    pub best_dice: f64,
}

/// Thresholds `m` at one half, ties going to the foreground.
pub fn accuracy_optimal(m: &MarginalGrid) -> SegmentationGrid {
    threshold(m, 0.5)
}

fn threshold(m: &MarginalGrid, t: f64) -> SegmentationGrid {
    SegmentationGrid::from_mask(m.shape().to_vec(), m.data().iter().map(|&v| v >= t))
        .expect("shape already validated")
}

/// Dice-optimal segmentation of `m`.
///
/// Sorting the voxels by decreasing `m`, the best segmentation with `k`
/// voxels takes the top `k` and scores `2 * cumsum_k / (sum(m) + k)`. The
/// best score over all `k` is `D`, and the optimum is `m >= D / 2`.
pub fn dice_optimal(m: &MarginalGrid) -> Result<DiceOptimum> {
    let total: f64 = m.data().iter().sum();
    if total <= 0.0 {
        return Err(Error::EmptyMarginal);
    }
    let mut sorted = m.data().to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));

    let mut cumsum = 0.0;
    let mut best_dice = f64::NEG_INFINITY;
    for (k, v) in sorted.iter().enumerate() {
        cumsum += v;
        let d = 2.0 * cumsum / (total + (k + 1) as f64);
        if d > best_dice {
            best_dice = d;
        }
    }
    let threshold_value = best_dice / 2.0;
    Ok(DiceOptimum { segmentation: threshold(m, threshold_value), threshold: threshold_value, best_dice })
}

/// Exhaustive maximization of expected Dice over all binary grids.
/// Returns the first maximizer in mask order.
pub fn brute_force_dice_optimal(m: &MarginalGrid) -> Result<(SegmentationGrid, f64)> {
    let n = m.data().len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge(n, BRUTE_FORCE_LIMIT));
    }
    if m.data().iter().all(|&v| v == 0.0) {
        return Err(Error::EmptyMarginal);
    }
    let mut best: Option<(SegmentationGrid, f64)> = None;
    for mask in 0u32..(1 << n) {
        let s = SegmentationGrid::from_mask(m.shape().to_vec(), (0..n).map(|i| mask >> i & 1 == 1))?;
        let score = match dice(m, &s) {
            Ok(v) => v.value,
            Err(Error::DegenerateDenominator) => continue,
            Err(e) => return Err(e),
        };
        if best.as_ref().is_none_or(|(_, b)| score > *b) {
            best = Some((s, score));
        }
    }
    best.ok_or(Error::EmptyMarginal)
}

/// Soft-Dice optimum recovered from a cross-entropy optimum.
///
/// The cross-entropy minimizer is the marginal itself, so thresholding it at
/// half its best Dice gives a minimizer of soft-Dice.
pub fn recover_soft_dice_optimum(ce_optimum: &MarginalGrid) -> Result<DiceOptimum> {
    dice_optimal(ce_optimum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn m(data: &[f64]) -> MarginalGrid {
        MarginalGrid::validate(Grid::new(vec![data.len()], data.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy_optimal(&m(&[0.7, 0.4])).data(), &[1.0, 0.0]);
        assert_eq!(accuracy_optimal(&m(&[1.0, 0.0, 1.0])).data(), &[1.0, 0.0, 1.0]);
        assert_eq!(accuracy_optimal(&m(&[0.5, 0.5, 0.5])).data(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn hand_traced_dice_optimum() {
        let opt = dice_optimal(&m(&[0.9, 0.6, 0.2])).unwrap();
        assert!((opt.best_dice - 3.0 / 3.7).abs() < 1e-15);
        assert!((opt.threshold - 1.5 / 3.7).abs() < 1e-15);
        assert!((opt.threshold - 0.405405).abs() < 1e-6);
        assert_eq!(opt.threshold, opt.best_dice / 2.0);
        assert_eq!(opt.segmentation.data(), &[1.0, 1.0, 0.0]);
    }

    #[test]
    fn binary_marginal_is_its_own_optimum() {
        let opt = dice_optimal(&m(&[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert_eq!(opt.best_dice, 1.0);
        assert_eq!(opt.threshold, 0.5);
        assert_eq!(opt.segmentation.data(), &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn constant_marginal_takes_everything() {
        let opt = dice_optimal(&m(&[0.3; 4])).unwrap();
        // d_k = 0.6k / (1.2 + k): 0.2727, 0.375, 0.4286, 0.4615
        assert!((opt.best_dice - 2.4 / 5.2).abs() < 1e-15);
        assert!((opt.threshold - 0.230769).abs() < 1e-6);
        assert_eq!(opt.segmentation.data(), &[1.0; 4]);
    }

    #[test]
    fn empty_marginal_rejected() {
        assert!(matches!(dice_optimal(&m(&[0.0, 0.0])), Err(Error::EmptyMarginal)));
    }

    #[test]
    fn brute_force_examples() {
        let (s, v) = brute_force_dice_optimal(&m(&[0.9, 0.6, 0.2])).unwrap();
        assert_eq!(s.data(), &[1.0, 1.0, 0.0]);
        assert!((v - 3.0 / 3.7).abs() < 1e-15);

        let (s, v) = brute_force_dice_optimal(&m(&[1.0])).unwrap();
        assert_eq!((s.data(), v), (&[1.0][..], 1.0));

        let (s, v) = brute_force_dice_optimal(&m(&[0.5, 0.5])).unwrap();
        assert_eq!(s.data(), &[1.0, 1.0]);
        assert!((v - 2.0 / 3.0).abs() < 1e-15);

        assert!(matches!(brute_force_dice_optimal(&m(&[0.1; 21])), Err(Error::TooLarge(21, 20))));
    }

    #[test]
    fn recovery_on_binary_input() {
        let opt = recover_soft_dice_optimum(&m(&[1.0, 0.0, 1.0])).unwrap();
        assert_eq!(opt.segmentation.data(), &[1.0, 0.0, 1.0]);
        let sd = crate::metrics::soft_dice(&m(&[1.0, 0.0, 1.0]), &opt.segmentation.to_marginal()).unwrap();
        assert_eq!(sd.value, 0.0);
    }
}
