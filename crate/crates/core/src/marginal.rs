//! Closed-form foreground probability of a noisy segmentation and its
//! expected volume.

use crate::error::{Error, Result};
use crate::gauss::{filter_separable, Boundary};
use crate::grid::{MarginalGrid, SegmentationGrid};

/// Clamping beyond this magnitude means the filter produced garbage.
const CLAMP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeReport {
    /// Mean of the clean segmentation.
    pub volume_clean: f64,
    /// Expected mean of a noisy sample.
    pub volume_expected: f64,
    /// Mass moved outside the domain on average.
    pub xi: f64,
}

/// Per-voxel probability that a noisy sample is foreground: `l` blurred
/// with a zero-padded Gaussian of width `a * shape[axis]` voxels.
pub fn compute_marginal(l: &SegmentationGrid, a: f64) -> Result<MarginalGrid> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::NegativeAmplitude(a));
    }
    let sigmas: Vec<f64> = l.shape().iter().map(|&s| a * s as f64).collect();
    let blurred = filter_separable(l.grid(), &sigmas, Boundary::ZeroPad)?;
    let clamped = blurred.map(|v| {
        debug_assert!(
            (-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&v),
            "marginal value {v} outside [0, 1]"
        );
        v.clamp(0.0, 1.0)
    })?;
    MarginalGrid::validate(clamped)
}

pub fn expected_volume(l: &SegmentationGrid, a: f64) -> Result<VolumeReport> {
    let marginal = compute_marginal(l, a)?;
    let volume_clean = l.grid().mean();
    let volume_expected = marginal.mean();
    Ok(VolumeReport { volume_clean, volume_expected, xi: volume_clean - volume_expected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::{build_kernel, TRUNCATE};
    use crate::grid::Grid;

    fn seg(shape: Vec<usize>, data: &[f64]) -> SegmentationGrid {
        SegmentationGrid::validate(Grid::new(shape, data.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn zero_amplitude_is_identity() {
        let l = seg(vec![2, 3], &[0.0, 1.0, 1.0, 0.0, 0.0, 1.0]);
        assert_eq!(compute_marginal(&l, 0.0).unwrap().grid(), l.grid());
        let report = expected_volume(&l, 0.0).unwrap();
        assert_eq!(report.xi, 0.0);
        assert_eq!(report.volume_expected, report.volume_clean);
    }

    #[test]
    fn impulse_gives_kernel_row() {
        let l = seg(vec![5], &[0.0, 0.0, 1.0, 0.0, 0.0]);
        let m = compute_marginal(&l, 0.2).unwrap();
        // dense convolution oracle: exp(-k^2/2) over k in -4..=4, normalized
        let z: f64 = (-4i32..=4).map(|k| (-(k * k) as f64 / 2.0).exp()).sum();
        for (i, v) in m.data().iter().enumerate() {
            let k = i as i32 - 2;
            assert!((v - (-(k * k) as f64 / 2.0).exp() / z).abs() < 1e-15);
        }
    }

    #[test]
    fn boundary_leakage_matches_explicit_bins() {
        let l = seg(vec![4], &[1.0, 0.0, 0.0, 0.0]);
        let report = expected_volume(&l, 0.25).unwrap();
        // dense convolution onto explicit bins -4..8; bins outside 0..4 are leakage
        let kernel = build_kernel(1.0, TRUNCATE).unwrap();
        let outside: f64 = (-4i32..=4).zip(kernel.weights()).filter(|(j, _)| !(0..4).contains(j)).map(|(_, w)| w).sum();
        assert!((report.xi - outside / 4.0).abs() < 1e-15, "{} vs {}", report.xi, outside / 4.0);
        assert!((report.volume_expected + report.xi - report.volume_clean).abs() < 1e-15);
    }

    #[test]
    fn interior_support_leaks_nothing() {
        let l = SegmentationGrid::from_mask(vec![64, 64], (0..64 * 64).map(|f| {
            let (r, c) = (f / 64, f % 64);
            (24..40).contains(&r) && (24..40).contains(&c)
        }))
        .unwrap();
        // sigma = 0.02 * 64 = 1.28 voxels, radius 6, support 24 voxels from every edge
        let report = expected_volume(&l, 0.02).unwrap();
        assert!(report.xi.abs() <= 1e-6 * report.volume_clean);
    }

    #[test]
    fn negative_amplitude_rejected() {
        let l = seg(vec![1], &[1.0]);
        assert!(matches!(compute_marginal(&l, -0.01), Err(Error::NegativeAmplitude(_))));
    }
}
