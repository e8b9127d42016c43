//! Gaussian-field label noise for binary segmentation.
//!
//! A clean segmentation `l` on the unit cube is perturbed by a random warp
//! whose components are smooth Gaussian fields. This crate computes the
//! resulting per-voxel foreground probability in closed form, draws noisy
//! samples, evaluates soft-label losses and scores, and finds the
//! segmentations that maximize expected Accuracy and Dice.

pub mod cli;
pub mod error;
pub mod gauss;
pub mod grid;
pub mod io;
pub mod marginal;
pub mod metrics;
pub mod montecarlo;
pub mod noise;
pub mod optimal;
pub mod phantom;
pub mod rng;

pub use error::{Error, Result};
pub use gauss::{build_kernel, filter_separable, Boundary, GaussianKernel1D};
pub use grid::{voxel_measure, DisplacementField, Grid, MarginalGrid, SegmentationGrid};
pub use marginal::{compute_marginal, expected_volume, VolumeReport};
pub use metrics::{accuracy, cross_entropy, dice, soft_dice, MetricKind, MetricValue};
pub use montecarlo::{verify_correlation, verify_marginal, verify_variance, verify_volume, McReport, McTarget};
pub use noise::{apply_deformation, apply_deformation_with, sample_displacement_field, sample_noisy_segmentation, NoiseParams, OutsideDomain};
pub use optimal::{accuracy_optimal, brute_force_dice_optimal, dice_optimal, recover_soft_dice_optimum, DiceOptimum};
pub use phantom::{generate, FigureShape, PhantomKind, PhantomSpec};
