//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use segnoise::gauss::{build_kernel, TRUNCATE};
use segnoise::rng::NormalStream;
use segnoise::{Grid, MarginalGrid, SegmentationGrid};

/// All binary grids of `shape`, in mask order.
pub fn all_segmentations(shape: &[usize]) -> Vec<SegmentationGrid> {
    let n: usize = shape.iter().product();
    assert!(n <= 20);
    (0u32..1 << n)
        .map(|mask| SegmentationGrid::from_mask(shape.to_vec(), (0..n).map(|i| mask >> i & 1 == 1)).unwrap())
        .collect()
}

/// Expected Dice evaluated with raw sums.
pub fn dice_by_sums(m: &[f64], s: &[f64]) -> Option<f64> {
    let overlap: f64 = m.iter().zip(s).map(|(a, b)| a * b).sum();
    let denom: f64 = m.iter().sum::<f64>() + s.iter().sum::<f64>();
    (denom > 0.0).then(|| 2.0 * overlap / denom)
}

pub fn accuracy_by_sums(m: &[f64], s: &[f64]) -> f64 {
    m.iter().zip(s).map(|(m, s)| s * m + (1.0 - s) * (1.0 - m)).sum::<f64>() / m.len() as f64
}

/// Best Dice over all binary grids.
pub fn exhaustive_dice(m: &MarginalGrid) -> f64 {
    all_segmentations(m.shape())
        .iter()
        .filter_map(|s| dice_by_sums(m.data(), s.data()))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Best Accuracy over all binary grids.
pub fn exhaustive_accuracy(m: &MarginalGrid) -> f64 {
    all_segmentations(m.shape())
        .iter()
        .map(|s| accuracy_by_sums(m.data(), s.data()))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Shape with at most `max_voxels` voxels and 1 to 3 axes.
pub fn random_small_shape(rng: &mut NormalStream, max_voxels: usize) -> Vec<usize> {
    loop {
        let rank = 1 + (rng.uniform() * 3.0) as usize;
        let shape: Vec<usize> = (0..rank).map(|_| 1 + (rng.uniform() * max_voxels as f64) as usize).collect();
        if shape.iter().product::<usize>() <= max_voxels {
            return shape;
        }
    }
}

/// Random marginal, mixing continuous values with exact 0, 1/2 and 1 entries.
pub fn random_marginal(rng: &mut NormalStream, shape: &[usize]) -> MarginalGrid {
    let n: usize = shape.iter().product();
    loop {
        let data: Vec<f64> = (0..n)
            .map(|_| match (rng.uniform() * 10.0) as usize {
                0 => 0.0,
                1 => 1.0,
                2 => 0.5,
                _ => rng.uniform(),
            })
            .collect();
        if data.iter().any(|&v| v > 0.0) {
            return MarginalGrid::validate(Grid::new(shape.to_vec(), data).unwrap()).unwrap();
        }
    }
}

/// Expected leaked mass computed separably: a foreground voxel at index `j`
/// keeps the product over axes of the 1D kernel mass landing inside the grid.
pub fn leakage_oracle(l: &SegmentationGrid, a: f64) -> f64 {
    let shape = l.shape();
    if a == 0.0 {
        return 0.0;
    }
    let inside: Vec<Vec<f64>> = shape
        .iter()
        .map(|&size| {
            let kernel = build_kernel(a * size as f64, TRUNCATE).unwrap();
            let r = kernel.radius() as i64;
            (0..size as i64)
                .map(|j| {
                    kernel
                        .weights()
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| (0..size as i64).contains(&(j + *k as i64 - r)))
                        .map(|(_, w)| w)
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut leaked = 0.0;
    for flat in 0..l.data().len() {
        if l.is_set(flat) {
            let index = l.grid().unravel(flat);
            let kept: f64 = index.iter().enumerate().map(|(axis, &j)| inside[axis][j]).product();
            leaked += 1.0 - kept;
        }
    }
    leaked / l.data().len() as f64
}
