use serde::Serialize;

use crate::error::{Error, Result};
use crate::Region;

/// Uniform grid with x = 0 as a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub dx: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::Invalid(format!(
                "grid bounds [{x_min}, {x_max}] are not increasing"
            )));
        }
        if n_points < 3 {
            return Err(Error::Invalid("grid needs at least three points".into()));
        }
        let dx = (x_max - x_min) / (n_points - 1) as f64;
        let origin = -x_min / dx;
        if x_min > 0.0 || x_max < 0.0 || (origin - origin.round()).abs() > 1e-9 {
            return Err(Error::Invalid(format!(
                "x = 0 is not a node of the grid [{x_min}, {x_max}] with {n_points} points"
            )));
        }
        Ok(Grid1D {
            x_min,
            x_max,
            n_points,
            dx,
        })
    }

    /// [-half_width, half_width] with spacing dx.
    pub fn symmetric(half_width: f64, dx: f64) -> Result<Self> {
        let half = (half_width / dx).round() as usize;
        let w = half as f64 * dx;
        Grid1D::new(-w, w, 2 * half + 1)
    }

    /// The closed half-line of `region` out to distance `length`.
    pub fn half_line(region: Region, length: f64, dx: f64) -> Result<Self> {
        let cells = (length / dx).round() as usize;
        let w = cells as f64 * dx;
        match region {
            Region::Positive => Grid1D::new(0.0, w, cells + 1),
            Region::Negative => Grid1D::new(-w, 0.0, cells + 1),
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        // Exact zero at the origin node.
        let k = i as i64 - self.origin_index() as i64;
        k as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    pub fn origin_index(&self) -> usize {
        (-self.x_min / self.dx).round() as usize
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    /// Same span with dx halved.
    pub fn refined(&self) -> Grid1D {
        Grid1D {
            n_points: 2 * self.n_points - 1,
            dx: self.dx / 2.0,
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_exact_node() {
        let g = Grid1D::symmetric(20.0, 0.01).unwrap();
        assert_eq!(g.n_points, 4001);
        assert_eq!(g.x(g.origin_index()), 0.0);
        assert_eq!(g.points()[2000], 0.0);
        assert!((g.x(0) + 20.0).abs() < 1e-12);
        let h = Grid1D::half_line(Region::Negative, 5.0, 0.005).unwrap();
        assert_eq!(h.origin_index(), h.n_points - 1);
        assert_eq!(g.refined().x(g.refined().origin_index()), 0.0);
    }

    #[test]
    fn rejects_grids_without_origin() {
        assert!(Grid1D::new(1.0, 2.0, 11).is_err());
        assert!(Grid1D::new(-1.0, 2.05, 11).is_err());
        assert!(Grid1D::new(-1.0, 1.0, 2).is_err());
    }
}
