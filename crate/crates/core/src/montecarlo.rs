//! Monte Carlo checks of the closed-form noise statistics.
//!
//! Sample `i` of a run is drawn with seed `split(params.seed, i)`. Samples
//! are generated in parallel and accumulated in index order (or with exact
//! integer counts), so results do not depend on thread scheduling.

use std::fmt;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gauss::{build_kernel, TRUNCATE};
use crate::grid::{Grid, SegmentationGrid};
use crate::io::{format_float, write_csv};
use crate::marginal::{compute_marginal, expected_volume};
use crate::noise::{sample_displacement_field, sample_noisy_segmentation, NoiseParams};
use crate::rng::split;

/// Relative tolerance on the displacement variance.
pub const VARIANCE_TOLERANCE: f64 = 0.10;
/// Volume checks pass within this many standard errors.
pub const VOLUME_STANDARD_ERRORS: f64 = 3.0;
/// Boundary exclusion for variance checks, in units of `b * shape[axis]` voxels.
pub const INTERIOR_MARGIN: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McTarget {
    Marginal,
    Variance,
    Volume,
    Correlation,
}

impl fmt::Display for McTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            McTarget::Marginal => "marginal",
            McTarget::Variance => "variance",
            McTarget::Volume => "volume",
            McTarget::Correlation => "correlation",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub target: McTarget,
    pub n_samples: usize,
    /// Marginal and correlation: absolute error. Variance: relative error.
    /// Volume: absolute error of the mean volume.
    pub max_abs_error: f64,
    pub mean_abs_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Standard error of the mean sample volume.
    pub standard_error: Option<f64>,
    /// Sample variance of the sample volumes.
    pub volume_variance: Option<f64>,
    /// Per-voxel absolute error of the marginal.
    pub error_grid: Option<Grid>,
}

impl McReport {
    pub const CSV_HEADER: [&'static str; 8] = [
        "target",
        "n_samples",
        "max_abs_error",
        "mean_abs_error",
        "tolerance",
        "standard_error",
        "volume_variance",
        "pass",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        vec![
            self.target.to_string(),
            self.n_samples.to_string(),
            format_float(self.max_abs_error),
            format_float(self.mean_abs_error),
            format_float(self.tolerance),
            opt(self.standard_error),
            opt(self.volume_variance),
            self.pass.to_string(),
        ]
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_csv(w, &Self::CSV_HEADER, &[self.csv_row()])
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

fn check_samples(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    Ok(())
}

fn sample_params(params: &NoiseParams, i: usize) -> NoiseParams {
    params.with_seed(split(params.seed, i as u64))
}

/// Per-voxel foreground counts over `n` noisy samples.
pub fn foreground_counts(l: &SegmentationGrid, params: &NoiseParams, n: usize) -> Result<Vec<u32>> {
    let len = l.data().len();
    (0..n)
        .into_par_iter()
        .map(|i| sample_noisy_segmentation(l, &sample_params(params, i)))
        .try_fold(
            || vec![0u32; len],
            |mut acc, sample| {
                let sample = sample?;
                for (a, &v) in acc.iter_mut().zip(sample.data()) {
                    *a += v as u32;
                }
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(
            || vec![0u32; len],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )
}

/// Compares the per-voxel sample mean of noisy segmentations to the
/// closed-form marginal.
pub fn verify_marginal(l: &SegmentationGrid, params: &NoiseParams, n_samples: usize, tolerance: f64) -> Result<McReport> {
    check_samples(n_samples)?;
    params.validate()?;
    let marginal = compute_marginal(l, params.a)?;
    let counts = foreground_counts(l, params, n_samples)?;
    let errors: Vec<f64> = counts
        .iter()
        .zip(marginal.data())
        .map(|(&c, &m)| (c as f64 / n_samples as f64 - m).abs())
        .collect();
    let max_abs_error = errors.iter().copied().fold(0.0, f64::max);
    let mean_abs_error = errors.iter().sum::<f64>() / errors.len() as f64;
    Ok(McReport {
        target: McTarget::Marginal,
        n_samples,
        max_abs_error,
        mean_abs_error,
        tolerance,
        pass: max_abs_error <= tolerance,
        standard_error: None,
        volume_variance: None,
        error_grid: Some(Grid::new(l.shape().to_vec(), errors)?),
    })
}

/// Flat indices at least `INTERIOR_MARGIN * b * shape[axis]` voxels from
/// every edge voxel.
pub fn interior_voxels(shape: &[usize], params: &NoiseParams) -> Result<Vec<usize>> {
    let margin: Vec<f64> = shape.iter().map(|&s| INTERIOR_MARGIN * params.b * s as f64).collect();
    let probe = Grid::zeros(shape.to_vec())?;
    let interior: Vec<usize> = (0..probe.len())
        .filter(|&f| {
            probe.unravel(f).iter().zip(shape).zip(&margin).all(|((&i, &s), &m)| {
                i as f64 >= m && (s - 1 - i) as f64 >= m
            })
        })
        .collect();
    if interior.is_empty() {
        return Err(Error::InteriorEmpty { shape: shape.to_vec(), margin });
    }
    Ok(interior)
}

/// Checks the pointwise displacement variance `(a * shape[axis])^2` away
/// from the boundary.
pub fn verify_variance(shape: &[usize], params: &NoiseParams, n_samples: usize) -> Result<McReport> {
    check_samples(n_samples)?;
    params.validate()?;
    let interior = interior_voxels(shape, params)?;
    let rank = shape.len();

    // samples[i][axis][k] is channel `axis` at interior voxel k
    let samples: Vec<Vec<Vec<f64>>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let field = sample_displacement_field(shape, &sample_params(params, i))?;
            Ok(field.channels().iter().map(|c| interior.iter().map(|&f| c.data()[f]).collect()).collect())
        })
        .collect::<Result<_>>()?;

    let n = n_samples as f64;
    let mut max_abs_error: f64 = 0.0;
    let mut total_error = 0.0;
    for axis in 0..rank {
        let target = (params.a * shape[axis] as f64).powi(2);
        let relative = |var: f64| if target > 0.0 { (var / target - 1.0).abs() } else { var.abs() };
        let mut pooled = 0.0;
        for k in 0..interior.len() {
            let mean = samples.iter().map(|s| s[axis][k]).sum::<f64>() / n;
            let var = samples.iter().map(|s| (s[axis][k] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            pooled += var;
            total_error += relative(var);
        }
        pooled /= interior.len() as f64;
        max_abs_error = max_abs_error.max(relative(pooled));
    }
    Ok(McReport {
        target: McTarget::Variance,
        n_samples,
        max_abs_error,
        mean_abs_error: total_error / (rank * interior.len()) as f64,
        tolerance: VARIANCE_TOLERANCE,
        pass: max_abs_error <= VARIANCE_TOLERANCE,
        standard_error: None,
        volume_variance: None,
        error_grid: None,
    })
}

/// Checks the correlation of a 1D displacement channel against
/// `exp(-d^2 / (2 (b * len)^2))` for offsets `1..=2 b len`, using voxel pairs
/// whose filter support stays inside the grid.
pub fn verify_correlation(len: usize, params: &NoiseParams, n_samples: usize, tolerance: f64) -> Result<McReport> {
    check_samples(n_samples)?;
    params.validate()?;
    if params.a == 0.0 {
        return Err(Error::InvalidArgument("correlation is undefined for zero amplitude".into()));
    }
    let scale = params.b * len as f64;
    let max_offset = (2.0 * scale).floor() as usize;
    let radius = build_kernel(params.filter_sigmas(&[len])[0], TRUNCATE)?.radius();
    let first = radius;
    let last = len.checked_sub(radius + 1).filter(|&l| l >= first + max_offset).ok_or_else(|| {
        Error::InteriorEmpty { shape: vec![len], margin: vec![(radius + max_offset) as f64] }
    })?;

    let samples: Vec<Vec<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let field = sample_displacement_field(&[len], &sample_params(params, i))?;
            Ok(field.channel(0).data().to_vec())
        })
        .collect::<Result<_>>()?;

    let errors: Vec<f64> = (1..=max_offset)
        .map(|offset| {
            let (mut cross, mut left, mut right) = (0.0, 0.0, 0.0);
            for s in &samples {
                for i in first..=last - offset {
                    cross += s[i] * s[i + offset];
                    left += s[i] * s[i];
                    right += s[i + offset] * s[i + offset];
                }
            }
            let estimate = cross / (left * right).sqrt();
            let expected = (-(offset as f64).powi(2) / (2.0 * scale * scale)).exp();
            (estimate - expected).abs()
        })
        .collect();
    let max_abs_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(McReport {
        target: McTarget::Correlation,
        n_samples,
        max_abs_error,
        mean_abs_error: errors.iter().sum::<f64>() / errors.len().max(1) as f64,
        tolerance,
        pass: max_abs_error <= tolerance,
        standard_error: None,
        volume_variance: None,
        error_grid: None,
    })
}

/// Compares the mean sample volume to the expected volume, passing within
/// three standard errors.
pub fn verify_volume(l: &SegmentationGrid, params: &NoiseParams, n_samples: usize) -> Result<McReport> {
    check_samples(n_samples)?;
    params.validate()?;
    let expected = expected_volume(l, params.a)?;
    let voxels = l.data().len() as f64;
    let counts: Vec<usize> = (0..n_samples)
        .into_par_iter()
        .map(|i| sample_noisy_segmentation(l, &sample_params(params, i)).map(|s| s.count()))
        .collect::<Result<_>>()?;

    let n = n_samples as f64;
    let total: usize = counts.iter().sum();
    let mean_count = total as f64 / n;
    let count_variance = counts.iter().map(|&c| (c as f64 - mean_count).powi(2)).sum::<f64>() / (n - 1.0);
    let volume_variance = count_variance / (voxels * voxels);
    let standard_error = (volume_variance / n).sqrt();
    let error = (mean_count / voxels - expected.volume_expected).abs();
    let tolerance = VOLUME_STANDARD_ERRORS * standard_error;
    Ok(McReport {
        target: McTarget::Volume,
        n_samples,
        max_abs_error: error,
        mean_abs_error: error,
        tolerance,
        pass: error <= tolerance,
        standard_error: Some(standard_error),
        volume_variance: Some(volume_variance),
        error_grid: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::DEFAULT_LENGTH_SCALE;
    use crate::phantom::{generate, PhantomSpec};

    fn params(a: f64) -> NoiseParams {
        NoiseParams::new(a, DEFAULT_LENGTH_SCALE, 2024).unwrap()
    }

    #[test]
    fn zero_noise_is_exact() {
        let l = generate(&PhantomSpec::disk(vec![24, 24], 0.3)).unwrap();
        let m = verify_marginal(&l, &params(0.0), 3, 0.0).unwrap();
        assert_eq!(m.max_abs_error, 0.0);
        assert!(m.pass);
        let v = verify_volume(&l, &params(0.0), 4).unwrap();
        assert_eq!(v.max_abs_error, 0.0);
        assert!(v.pass);
        let var = verify_variance(&[64], &params(0.0), 3).unwrap();
        assert_eq!(var.max_abs_error, 0.0);
        assert!(var.pass);
    }

    #[test]
    fn two_samples_cannot_meet_tight_tolerance() {
        let l = generate(&PhantomSpec::disk(vec![32, 32], 0.25)).unwrap();
        let report = verify_marginal(&l, &params(0.03), 2, 1e-6).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn too_few_samples() {
        let l = generate(&PhantomSpec::disk(vec![8], 0.2)).unwrap();
        assert!(matches!(verify_marginal(&l, &params(0.01), 1, 0.1), Err(Error::TooFewSamples(1))));
    }

    #[test]
    fn small_grid_has_no_interior() {
        assert!(matches!(verify_variance(&[8], &params(0.02), 10), Err(Error::InteriorEmpty { .. })));
    }

    #[test]
    fn reports_are_reproducible() {
        let l = generate(&PhantomSpec::disk(vec![20, 20], 0.3)).unwrap();
        let a = verify_volume(&l, &params(0.02), 20).unwrap();
        let b = verify_volume(&l, &params(0.02), 20).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_layout() {
        let l = generate(&PhantomSpec::disk(vec![16, 16], 0.3)).unwrap();
        let report = verify_volume(&l, &params(0.0), 2).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "target,n_samples,max_abs_error,mean_abs_error,tolerance,standard_error,volume_variance,pass"
        );
        assert_eq!(lines.next().unwrap(), "volume,2,0,0,0,0,0,true");
    }
}
