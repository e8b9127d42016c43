//! Separable truncated Gaussian filtering.

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Kernel support in standard deviations.
pub const TRUNCATE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Samples outside the grid read as zero.
    ZeroPad,
    /// Out-of-range indices clamp to the nearest edge voxel.
    ReplicateNearest,
}

/// Sampled 1D Gaussian, renormalized to unit sum after truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKernel1D {
    sigma: f64,
    radius: usize,
    weights: Vec<f64>,
}

impl GaussianKernel1D {
    pub fn new(sigma: f64, truncate: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::NonPositiveSigma(sigma));
        }
        if !(truncate > 0.0 && truncate.is_finite()) {
            return Err(Error::NonPositiveTruncate(truncate));
        }
        let radius = (truncate * sigma).ceil() as usize;
        let r = radius as f64;
        let mut weights: Vec<f64> = (0..=2 * radius)
            .map(|k| {
                let x = k as f64 - r;
                (-x * x / (2.0 * sigma * sigma)).exp()
            })
            .collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Ok(Self { sigma, radius, weights })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Convolves one line into `out`.
    fn apply_line(&self, line: &[f64], out: &mut [f64], boundary: Boundary) {
        let n = line.len() as isize;
        let r = self.radius as isize;
        for (i, o) in out.iter_mut().enumerate() {
            let i = i as isize;
            let mut acc = 0.0;
            for (k, &w) in self.weights.iter().enumerate() {
                let j = i + k as isize - r;
                let v = if (0..n).contains(&j) {
                    line[j as usize]
                } else {
                    match boundary {
                        Boundary::ZeroPad => continue,
                        Boundary::ReplicateNearest => line[j.clamp(0, n - 1) as usize],
                    }
                };
                acc += w * v;
            }
            *o = acc;
        }
    }
}

/// Builds a kernel of radius `ceil(truncate * sigma)`.
pub fn build_kernel(sigma: f64, truncate: f64) -> Result<GaussianKernel1D> {
    GaussianKernel1D::new(sigma, truncate)
}

/// Filters `g` along each axis in turn. A zero sigma leaves that axis untouched.
pub fn filter_separable(g: &Grid, sigmas: &[f64], boundary: Boundary) -> Result<Grid> {
    if sigmas.len() != g.rank() {
        return Err(Error::ShapeMismatch(g.shape().to_vec(), vec![sigmas.len()]));
    }
    let mut data = g.data().to_vec();
    for (axis, &sigma) in sigmas.iter().enumerate() {
        if sigma == 0.0 {
            continue;
        }
        let kernel = build_kernel(sigma, TRUNCATE)?;
        filter_axis(&mut data, g.shape(), axis, &kernel, boundary);
    }
    Grid::new(g.shape().to_vec(), data)
}

fn filter_axis(data: &mut [f64], shape: &[usize], axis: usize, kernel: &GaussianKernel1D, boundary: Boundary) {
    let len = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut line = vec![0.0; len];
    let mut filtered = vec![0.0; len];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * len * inner + i;
            for (k, v) in line.iter_mut().enumerate() {
                *v = data[base + k * inner];
            }
            kernel.apply_line(&line, &mut filtered, boundary);
            for (k, &v) in filtered.iter().enumerate() {
                data[base + k * inner] = v;
            }
        }
    }
}
