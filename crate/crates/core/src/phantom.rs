//! Analytic binary test shapes.
//!
//! A voxel is foreground iff its center lies inside the shape. All geometry
//! is given in unit-cube coordinates, ordered like the grid axes.

use crate::error::{Error, Result};
use crate::grid::{voxel_center, Grid, SegmentationGrid};

#[derive(Debug, Clone, PartialEq)]
pub enum PhantomKind {
    /// Open ball `|p - center| < radius`.
    Disk { center: Vec<f64>, radius: f64 },
    /// Shell `inner <= |p - center| < outer`.
    Annulus { center: Vec<f64>, inner: f64, outer: f64 },
    /// Closed axis-aligned box.
    Bar { lower: Vec<f64>, upper: Vec<f64> },
    /// 2D composite, see [`FigureShape`].
    FigureShape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub kind: PhantomKind,
    pub shape: Vec<usize>,
}

impl PhantomSpec {
    pub fn new(kind: PhantomKind, shape: Vec<usize>) -> Self {
        Self { kind, shape }
    }

    pub fn disk(shape: Vec<usize>, radius: f64) -> Self {
        let center = vec![0.5; shape.len()];
        Self::new(PhantomKind::Disk { center, radius }, shape)
    }

    pub fn figure(shape: Vec<usize>) -> Self {
        Self::new(PhantomKind::FigureShape, shape)
    }

    pub fn validate(&self) -> Result<()> {
        let rank = self.shape.len();
        let oob = |msg: String| Err(Error::GeometryOutOfBounds(msg));
        let check_point = |name: &str, p: &[f64]| -> Result<()> {
            if p.len() != rank {
                return oob(format!("{name} has {} coordinates, grid has {rank} axes", p.len()));
            }
            if p.iter().any(|c| !(0.0..=1.0).contains(c)) {
                return oob(format!("{name} {p:?} outside the unit cube"));
            }
            Ok(())
        };
        let check_ball = |center: &[f64], radius: f64| -> Result<()> {
            check_point("center", center)?;
            if !(radius >= 0.0) {
                return oob(format!("radius {radius} is negative"));
            }
            if center.iter().any(|c| c - radius < 0.0 || c + radius > 1.0) {
                return oob(format!("ball of radius {radius} at {center:?} leaves the unit cube"));
            }
            Ok(())
        };
        match &self.kind {
            PhantomKind::Disk { center, radius } => check_ball(center, *radius),
            PhantomKind::Annulus { center, inner, outer } => {
                if !(*inner >= 0.0 && inner <= outer) {
                    return oob(format!("annulus radii {inner}, {outer} not ordered"));
                }
                check_ball(center, *outer)
            }
            PhantomKind::Bar { lower, upper } => {
                check_point("lower corner", lower)?;
                check_point("upper corner", upper)?;
                if lower.iter().zip(upper).any(|(l, u)| l > u) {
                    return oob(format!("bar corners {lower:?} > {upper:?}"));
                }
                Ok(())
            }
            PhantomKind::FigureShape if rank != 2 => {
                oob(format!("figure shape is two dimensional, grid has {rank} axes"))
            }
            PhantomKind::FigureShape => Ok(()),
        }
    }

    fn contains(&self, p: &[f64]) -> bool {
        let dist = |c: &[f64]| p.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        match &self.kind {
            PhantomKind::Disk { center, radius } => dist(center) < *radius,
            PhantomKind::Annulus { center, inner, outer } => {
                let d = dist(center);
                *inner <= d && d < *outer
            }
            PhantomKind::Bar { lower, upper } => {
                p.iter().zip(lower.iter().zip(upper)).all(|(x, (l, u))| l <= x && x <= u)
            }
            PhantomKind::FigureShape => FigureShape.contains([p[0], p[1]]),
        }
    }
}

pub fn generate(spec: &PhantomSpec) -> Result<SegmentationGrid> {
    spec.validate()?;
    let shape = spec.shape.clone();
    let mut point = vec![0.0; shape.len()];
    let grid = Grid::from_fn(shape.clone(), |index| {
        for (axis, (&i, &s)) in index.iter().zip(&shape).enumerate() {
            point[axis] = voxel_center(i, s);
        }
        if spec.contains(&point) { 1.0 } else { 0.0 }
    })?;
    SegmentationGrid::validate(grid)
}

/// Square body with a round lobe on one corner, a small interior hole and a
/// thin bar sticking out of one side. Points are `[row, column]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FigureShape;

impl FigureShape {
    pub const BODY_LOWER: [f64; 2] = [0.2, 0.2];
    pub const BODY_UPPER: [f64; 2] = [0.6, 0.6];
    pub const LOBE_CENTER: [f64; 2] = [0.6, 0.6];
    pub const LOBE_RADIUS: f64 = 0.18;
    pub const HOLE_CENTER: [f64; 2] = [0.38, 0.38];
    pub const HOLE_RADIUS: f64 = 0.035;
    pub const PROTRUSION_ROW: f64 = 0.3;
    /// Two voxels at 128 rows.
    pub const PROTRUSION_WIDTH: f64 = 2.0 / 128.0;
    pub const PROTRUSION_COLUMNS: [f64; 2] = [0.6, 0.9];

    fn body_contains(p: [f64; 2]) -> bool {
        let in_square = (0..2).all(|i| Self::BODY_LOWER[i] <= p[i] && p[i] <= Self::BODY_UPPER[i]);
        in_square || dist(p, Self::LOBE_CENTER) < Self::LOBE_RADIUS
    }

    pub fn hole_contains(p: [f64; 2]) -> bool {
        dist(p, Self::HOLE_CENTER) < Self::HOLE_RADIUS
    }

    pub fn protrusion_contains(p: [f64; 2]) -> bool {
        (p[0] - Self::PROTRUSION_ROW).abs() <= Self::PROTRUSION_WIDTH / 2.0
            && Self::PROTRUSION_COLUMNS[0] <= p[1]
            && p[1] <= Self::PROTRUSION_COLUMNS[1]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (Self::body_contains(p) && !Self::hole_contains(p)) || Self::protrusion_contains(p)
    }

    /// Flat indices of hole voxels on a 2D grid.
    pub fn hole_voxels(shape: &[usize]) -> Vec<usize> {
        Self::voxels(shape, Self::hole_contains)
    }

    /// Flat indices of protrusion voxels outside the body.
    pub fn protrusion_voxels(shape: &[usize]) -> Vec<usize> {
        Self::voxels(shape, |p| Self::protrusion_contains(p) && !Self::body_contains(p))
    }

    fn voxels(shape: &[usize], pred: impl Fn([f64; 2]) -> bool) -> Vec<usize> {
        let [rows, cols] = shape else { return Vec::new() };
        (0..rows * cols)
            .filter(|&f| pred([voxel_center(f / cols, *rows), voxel_center(f % cols, *cols)]))
            .collect()
    }
}

fn dist(p: [f64; 2], c: [f64; 2]) -> f64 {
    ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_disk() {
        let l = generate(&PhantomSpec::disk(vec![16, 16], 0.0)).unwrap();
        assert_eq!(l.count(), 0);
    }

    #[test]
    fn disk_area() {
        let l = generate(&PhantomSpec::disk(vec![64, 64], 0.25)).unwrap();
        // pixel-counting oracle: half-integer offsets (x, y) with x^2 + y^2 < 16^2
        let oracle = (0..64)
            .flat_map(|r| (0..64).map(move |c| (r as f64 - 31.5, c as f64 - 31.5)))
            .filter(|(y, x)| x * x + y * y < 256.0)
            .count();
        assert_eq!(l.count(), oracle);
        assert_eq!(oracle, 812);
        // lattice count vs analytic area, bounded by a one-voxel ring
        let area = std::f64::consts::PI * 0.25 * 0.25;
        let ring = 2.0 * std::f64::consts::PI * 0.25 / 64.0;
        assert!((l.grid().mean() - area).abs() < ring, "{}", l.grid().mean());
    }

    #[test]
    fn annulus_area() {
        let spec = PhantomSpec::new(
            PhantomKind::Annulus { center: vec![0.5, 0.5], inner: 0.15, outer: 0.3 },
            vec![64, 64],
        );
        let l = generate(&spec).unwrap();
        let area = std::f64::consts::PI * (0.09 - 0.0225);
        // one voxel-wide ring on each circle bounds the discretization error
        let ring = 2.0 * std::f64::consts::PI * (0.3 + 0.15) / 64.0;
        assert!((l.grid().mean() - area).abs() < ring, "{}", l.grid().mean());
    }

    #[test]
    fn bar_and_ball_in_3d() {
        let bar = PhantomSpec::new(PhantomKind::Bar { lower: vec![0.0, 0.25, 0.0], upper: vec![1.0, 0.5, 0.5] }, vec![8, 8, 8]);
        assert_eq!(generate(&bar).unwrap().count(), 8 * 2 * 4);
        let ball = PhantomSpec::disk(vec![10, 10, 10], 0.3);
        assert!(generate(&ball).unwrap().count() > 0);
    }

    #[test]
    fn out_of_bounds_geometry() {
        let off = PhantomSpec::new(PhantomKind::Disk { center: vec![0.9, 0.5], radius: 0.2 }, vec![8, 8]);
        assert!(matches!(generate(&off), Err(Error::GeometryOutOfBounds(_))));
        let wrong_rank = PhantomSpec::new(PhantomKind::Disk { center: vec![0.5], radius: 0.2 }, vec![8, 8]);
        assert!(matches!(generate(&wrong_rank), Err(Error::GeometryOutOfBounds(_))));
        let flipped = PhantomSpec::new(PhantomKind::Bar { lower: vec![0.6], upper: vec![0.4] }, vec![8]);
        assert!(matches!(generate(&flipped), Err(Error::GeometryOutOfBounds(_))));
        assert!(matches!(generate(&PhantomSpec::figure(vec![8, 8, 8])), Err(Error::GeometryOutOfBounds(_))));
    }

    #[test]
    fn figure_features_at_128() {
        let shape = vec![128, 128];
        let l = generate(&PhantomSpec::figure(shape.clone())).unwrap();
        let hole = FigureShape::hole_voxels(&shape);
        let bar = FigureShape::protrusion_voxels(&shape);
        assert!(hole.len() > 20);
        assert!(hole.iter().all(|&f| !l.is_set(f)));
        assert!(!bar.is_empty() && bar.iter().all(|&f| l.is_set(f)));
        let rows: std::collections::BTreeSet<usize> = bar.iter().map(|f| f / 128).collect();
        assert!(rows.len() <= 2, "protrusion spans rows {rows:?}");
    }

    #[test]
    fn centered_disk_has_dihedral_symmetry() {
        let n = 32;
        let l = generate(&PhantomSpec::disk(vec![n, n], 0.3)).unwrap();
        let at = |r: usize, c: usize| l.grid().get(&[r, c]);
        for r in 0..n {
            for c in 0..n {
                let v = at(r, c);
                for (rr, cc) in [(c, r), (n - 1 - r, c), (r, n - 1 - c), (n - 1 - c, n - 1 - r)] {
                    assert_eq!(v, at(rr, cc));
                }
            }
        }
    }
}
