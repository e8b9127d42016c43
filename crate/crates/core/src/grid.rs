//! Dense grids over the discretized unit cube.
//!
//! Data is stored row-major with the last axis fastest. Voxel `i` along an
//! axis of size `S` is centered at unit-cube coordinate `(i + 0.5) / S`, and
//! each voxel carries measure `1 / product(shape)` so the whole domain has
//! measure one.

use crate::error::{Error, Result};

pub const MAX_RANK: usize = 3;

fn check_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(Error::EmptyShape);
    }
    if shape.len() > MAX_RANK {
        return Err(Error::UnsupportedRank(shape.len()));
    }
    Ok(())
}

/// Measure of a single voxel, `1 / product(shape)`.
pub fn voxel_measure(shape: &[usize]) -> Result<f64> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(Error::EmptyShape);
    }
    let count: f64 = shape.iter().map(|&s| s as f64).product();
    Ok(1.0 / count)
}

/// Row-major strides for `shape`.
pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut out = vec![1; shape.len()];
    for axis in (0..shape.len().saturating_sub(1)).rev() {
        out[axis] = out[axis + 1] * shape[axis + 1];
    }
    out
}

/// Unit-cube coordinate of the center of voxel `index` on an axis of `size`.
pub fn voxel_center(index: usize, size: usize) -> f64 {
    (index as f64 + 0.5) / size as f64
}

/// Dense scalar field with 1 to 3 axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Grid {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        check_shape(&shape)?;
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::LengthMismatch { shape, len: data.len() });
        }
        if let Some((index, &value)) = data.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { shape, data })
    }

    pub fn filled(shape: Vec<usize>, value: f64) -> Result<Self> {
        check_shape(&shape)?;
        let len = shape.iter().product();
        Self::new(shape, vec![value; len])
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        Self::filled(shape, 0.0)
    }

    /// Builds a grid by evaluating `f` at every multi-index.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        check_shape(&shape)?;
        let len: usize = shape.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut index = vec![0usize; shape.len()];
        for _ in 0..len {
            data.push(f(&index));
            for axis in (0..shape.len()).rev() {
                index[axis] += 1;
                if index[axis] < shape[axis] {
                    break;
                }
                index[axis] = 0;
            }
        }
        Self::new(shape, data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.shape)
    }

    /// Flat offset of a multi-index. Panics when out of range.
    pub fn offset(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.rank(), "index rank mismatch");
        let mut flat = 0;
        for (axis, (&i, &s)) in index.iter().zip(&self.shape).enumerate() {
            assert!(i < s, "index {i} out of range on axis {axis}");
            flat = flat * s + i;
        }
        flat
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.offset(index)]
    }

    /// Multi-index of a flat offset.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.rank()];
        for axis in (0..self.rank()).rev() {
            index[axis] = flat % self.shape[axis];
            flat /= self.shape[axis];
        }
        index
    }

    /// Voxel mean, i.e. the integral over the unit cube.
    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Applies `f` elementwise. The result is revalidated for finiteness.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.shape.clone(), self.data.iter().map(|&v| f(v)).collect())
    }

    pub(crate) fn ensure_same_shape(&self, other: &Grid) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(self.shape.clone(), other.shape.clone()));
        }
        Ok(())
    }

    /// Construct without validation. Callers guarantee the invariants.
    pub(crate) fn from_parts_unchecked(shape: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { shape, data }
    }
}

/// Binary-valued grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationGrid(Grid);

impl SegmentationGrid {
    /// Accepts `g` iff every entry is exactly 0 or 1.
    pub fn validate(g: Grid) -> Result<Self> {
        if let Some((i, &v)) = g.data.iter().enumerate().find(|(_, &v)| v != 0.0 && v != 1.0) {
            return Err(Error::NonBinaryValue(i, v));
        }
        Ok(Self(g))
    }

    pub fn from_mask(shape: Vec<usize>, mask: impl IntoIterator<Item = bool>) -> Result<Self> {
        let data = mask.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect();
        Ok(Self(Grid::new(shape, data)?))
    }

    pub fn grid(&self) -> &Grid {
        &self.0
    }

    pub fn into_grid(self) -> Grid {
        self.0
    }

    pub fn shape(&self) -> &[usize] {
        self.0.shape()
    }

    pub fn data(&self) -> &[f64] {
        self.0.data()
    }

    pub fn is_set(&self, flat: usize) -> bool {
        self.0.data[flat] == 1.0
    }

    /// Number of foreground voxels.
    pub fn count(&self) -> usize {
        self.0.data.iter().filter(|&&v| v == 1.0).count()
    }

    pub fn complement(&self) -> Self {
        Self(Grid::from_parts_unchecked(
            self.0.shape.clone(),
            self.0.data.iter().map(|&v| 1.0 - v).collect(),
        ))
    }

    /// Number of voxels where `self` and `other` differ.
    pub fn symmetric_difference(&self, other: &SegmentationGrid) -> Result<usize> {
        self.0.ensure_same_shape(&other.0)?;
        Ok(self.0.data.iter().zip(&other.0.data).filter(|(a, b)| a != b).count())
    }

    /// A binary grid is also a valid marginal.
    pub fn to_marginal(&self) -> MarginalGrid {
        MarginalGrid(self.0.clone())
    }
}

/// Grid with every entry in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalGrid(Grid);

impl MarginalGrid {
    pub fn validate(g: Grid) -> Result<Self> {
        if let Some((i, &v)) = g.data.iter().enumerate().find(|(_, &v)| !(0.0..=1.0).contains(&v)) {
            return Err(Error::OutOfRange(i, v));
        }
        Ok(Self(g))
    }

    pub fn grid(&self) -> &Grid {
        &self.0
    }

    pub fn into_grid(self) -> Grid {
        self.0
    }

    pub fn shape(&self) -> &[usize] {
        self.0.shape()
    }

    pub fn data(&self) -> &[f64] {
        self.0.data()
    }

    pub fn mean(&self) -> f64 {
        self.0.mean()
    }
}

/// Per-voxel displacement vectors, one channel per axis, in voxel units.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    channels: Vec<Grid>,
}

impl DisplacementField {
    pub fn new(channels: Vec<Grid>) -> Result<Self> {
        let first = channels.first().ok_or(Error::EmptyShape)?;
        if channels.len() != first.rank() {
            return Err(Error::InvalidArgument(format!(
                "displacement field needs {} channels, got {}",
                first.rank(),
                channels.len()
            )));
        }
        for c in &channels[1..] {
            first.ensure_same_shape(c)?;
        }
        Ok(Self { channels })
    }

    pub fn shape(&self) -> &[usize] {
        self.channels[0].shape()
    }

    pub fn channels(&self) -> &[Grid] {
        &self.channels
    }

    pub fn channel(&self, axis: usize) -> &Grid {
        &self.channels[axis]
    }
}
