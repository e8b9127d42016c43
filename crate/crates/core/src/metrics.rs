//! Losses and scores against a soft label `m`. Integrals are voxel means.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{Grid, MarginalGrid, SegmentationGrid};

/// Clamp applied to predictions inside the cross-entropy logarithms.
pub const CE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    CrossEntropy,
    SoftDice,
    Accuracy,
    Dice,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::CrossEntropy => "cross_entropy",
            MetricKind::SoftDice => "soft_dice",
            MetricKind::Accuracy => "accuracy",
            MetricKind::Dice => "dice",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricValue {
    pub value: f64,
    pub kind: MetricKind,
}

fn mean_of(a: &Grid, b: &Grid, f: impl Fn(f64, f64) -> f64) -> Result<f64> {
    a.ensure_same_shape(b)?;
    let total: f64 = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).sum();
    Ok(total / a.len() as f64)
}

/// Binary cross-entropy of prediction `c` against soft label `m`.
pub fn cross_entropy(m: &MarginalGrid, c: &MarginalGrid) -> Result<MetricValue> {
    let value = -mean_of(m.grid(), c.grid(), |m, c| {
        let c = c.clamp(CE_EPSILON, 1.0 - CE_EPSILON);
        m * c.ln() + (1.0 - m) * (1.0 - c).ln()
    })?;
    Ok(MetricValue { value, kind: MetricKind::CrossEntropy })
}

/// `1 - 2 <c, m> / (|c| + |m|)`.
pub fn soft_dice(m: &MarginalGrid, c: &MarginalGrid) -> Result<MetricValue> {
    let value = 1.0 - dice_ratio(m.grid(), c.grid())?;
    Ok(MetricValue { value, kind: MetricKind::SoftDice })
}

pub fn accuracy(m: &MarginalGrid, s: &SegmentationGrid) -> Result<MetricValue> {
    let value = mean_of(m.grid(), s.grid(), |m, s| s * m + (1.0 - s) * (1.0 - m))?;
    Ok(MetricValue { value, kind: MetricKind::Accuracy })
}

/// Expected Dice of segmentation `s` under soft label `m`.
pub fn dice(m: &MarginalGrid, s: &SegmentationGrid) -> Result<MetricValue> {
    let value = dice_ratio(m.grid(), s.grid())?;
    Ok(MetricValue { value, kind: MetricKind::Dice })
}

fn dice_ratio(m: &Grid, c: &Grid) -> Result<f64> {
    let overlap = mean_of(m, c, |m, c| m * c)?;
    let denom = m.mean() + c.mean();
    if denom == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    Ok(2.0 * overlap / denom)
}
