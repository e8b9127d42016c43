//! Random deformations driven by Gaussian fields.
//!
//! A displacement channel is white noise filtered with a Gaussian of width
//! `b * shape[axis] / sqrt(2)` voxels and rescaled so that, away from the
//! boundary, its pointwise variance is `(a * shape[channel])^2` voxels^2 and
//! its correlation at offset `d` is `exp(-|d|^2 / (2 b^2))` in unit-cube
//! coordinates.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::gauss::{filter_separable, Boundary};
use crate::grid::{DisplacementField, Grid, SegmentationGrid};
use crate::rng::{split, NormalStream};

/// `0.15 / sqrt(2)`, the length scale used for all reported experiments.
pub const DEFAULT_LENGTH_SCALE: f64 = 0.106_066_017_177_982_13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    /// Displacement amplitude in unit-cube units.
    pub a: f64,
    /// Correlation length in unit-cube units.
    pub b: f64,
    pub seed: u64,
}

impl NoiseParams {
    pub fn new(a: f64, b: f64, seed: u64) -> Result<Self> {
        let params = Self { a, b, seed };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(Error::NegativeAmplitude(self.a));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::NonPositiveLengthScale(self.b));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    /// Per-axis filter width in voxels.
    pub fn filter_sigmas(&self, shape: &[usize]) -> Vec<f64> {
        shape.iter().map(|&s| self.b * s as f64 / SQRT_2).collect()
    }

    /// Factor mapping unit-variance filtered noise to displacement channel `channel`.
    pub fn channel_weight(&self, shape: &[usize], channel: usize) -> f64 {
        let scaled_a = self.a * shape[channel] as f64;
        shape.iter().fold(scaled_a, |w, &s| {
            let scaled_b = self.b * s as f64;
            w * (2.0 * PI * scaled_b * scaled_b).powf(0.25)
        })
    }
}

/// Draws one displacement field. Channel `i` uses the stream `split(seed, i)`.
pub fn sample_displacement_field(shape: &[usize], params: &NoiseParams) -> Result<DisplacementField> {
    params.validate()?;
    let len = Grid::zeros(shape.to_vec())?.len();
    let sigmas = params.filter_sigmas(shape);
    let channels = (0..shape.len())
        .map(|channel| {
            if params.a == 0.0 {
                return Grid::zeros(shape.to_vec());
            }
            let mut white = vec![0.0; len];
            NormalStream::new(split(params.seed, channel as u64)).fill_normal(&mut white);
            let white = Grid::new(shape.to_vec(), white)?;
            let weight = params.channel_weight(shape, channel);
            filter_separable(&white, &sigmas, Boundary::ZeroPad)?.map(|v| weight * v)
        })
        .collect::<Result<Vec<_>>>()?;
    DisplacementField::new(channels)
}

/// What a displaced voxel reads when it lands outside the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutsideDomain {
    /// Background. Positions beyond the outer voxel faces (`< -0.5` or
    /// `> size - 0.5` on any axis) read 0, so mass can leave the domain.
    #[default]
    Zero,
    /// Positions clamp to the nearest edge voxel, as `mode='nearest'` does.
    Replicate,
}

/// Samples `l` at `index + d(index)` and rounds, `v >= 0.5` mapping to 1.
///
/// Inside the domain, coordinates clamp to the outermost voxel centers and
/// are interpolated multilinearly. Outside the domain the sample is 0.
pub fn apply_deformation(l: &SegmentationGrid, d: &DisplacementField) -> Result<SegmentationGrid> {
    apply_deformation_with(l, d, OutsideDomain::Zero)
}

pub fn apply_deformation_with(l: &SegmentationGrid, d: &DisplacementField, outside: OutsideDomain) -> Result<SegmentationGrid> {
    let grid = l.grid();
    if grid.shape() != d.shape() {
        return Err(Error::ShapeMismatch(grid.shape().to_vec(), d.shape().to_vec()));
    }
    let shape = grid.shape();
    let rank = shape.len();
    let strides = grid.strides();
    let values = grid.data();

    let mut base = [0usize; 3];
    let mut frac = [0.0f64; 3];
    let mut step = [0usize; 3];
    let out = (0..grid.len()).map(|flat| {
        let index = grid.unravel(flat);
        for axis in 0..rank {
            let size = shape[axis];
            let pos = index[axis] as f64 + d.channel(axis).data()[flat];
            if outside == OutsideDomain::Zero && !(-0.5..=size as f64 - 0.5).contains(&pos) {
                return false;
            }
            let pos = pos.clamp(0.0, (size - 1) as f64);
            if size == 1 {
                base[axis] = 0;
                frac[axis] = 0.0;
                step[axis] = 0;
            } else {
                let lower = (pos.floor() as usize).min(size - 2);
                base[axis] = lower;
                frac[axis] = pos - lower as f64;
                step[axis] = strides[axis];
            }
        }
        let mut v = 0.0;
        for corner in 0..(1usize << rank) {
            let mut weight = 1.0;
            let mut offset = 0;
            for axis in 0..rank {
                let upper = corner >> axis & 1 == 1;
                weight *= if upper { frac[axis] } else { 1.0 - frac[axis] };
                offset += base[axis] * strides[axis] + if upper { step[axis] } else { 0 };
            }
            if weight != 0.0 {
                v += weight * values[offset];
            }
        }
        v >= 0.5
    });
    SegmentationGrid::from_mask(shape.to_vec(), out.collect::<Vec<_>>())
}

/// One noisy realization of `l`.
pub fn sample_noisy_segmentation(l: &SegmentationGrid, params: &NoiseParams) -> Result<SegmentationGrid> {
    let field = sample_displacement_field(l.shape(), params)?;
    apply_deformation(l, &field)
}
