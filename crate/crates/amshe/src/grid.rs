//! Periodic grid geometry.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How the periodic box is interpreted. `Torus` is the compact space itself;
/// `TruncatedLine` stands in for full space, with the box taken large enough
/// that wrap-around is negligible for the run at hand. The only behavioral
/// difference is the weight used by weighted norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    Torus,
    TruncatedLine,
}

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("domain.dimension must be 1, 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("domain.points_per_axis must be even and >= 8, got {0}")]
    BadPoints(usize),
    #[error("domain.side_length must be > 0, got {0}")]
    BadLength(f64),
    #[error("grid of {cells} cells exceeds the memory budget of {budget} cells")]
    TooLarge { cells: usize, budget: usize },
}

/// Periodic grid: `n` points per axis, spacing `dx = l / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub geometry: Geometry,
    pub dimension: usize,
    pub side_length: f64,
    pub points_per_axis: usize,
}

/// Hard cap on cell count; a field is 8 bytes/cell and runs hold a handful
/// of fields plus spectra.
pub const CELL_BUDGET: usize = 1 << 26;

impl DomainSpec {
    pub fn new(
        geometry: Geometry,
        dimension: usize,
        side_length: f64,
        points_per_axis: usize,
    ) -> Result<Self, DomainError> {
        if !(1..=3).contains(&dimension) {
            return Err(DomainError::BadDimension(dimension));
        }
        if points_per_axis < 8 || points_per_axis % 2 != 0 {
            return Err(DomainError::BadPoints(points_per_axis));
        }
        if !(side_length > 0.0) || !side_length.is_finite() {
            return Err(DomainError::BadLength(side_length));
        }
        let cells = points_per_axis.pow(dimension as u32);
        if cells > CELL_BUDGET {
            return Err(DomainError::TooLarge {
                cells,
                budget: CELL_BUDGET,
            });
        }
        Ok(DomainSpec {
            geometry,
            dimension,
            side_length,
            points_per_axis,
        })
    }

    pub fn unit_torus(dimension: usize, points_per_axis: usize) -> Result<Self, DomainError> {
        Self::new(Geometry::Torus, dimension, 1.0, points_per_axis)
    }

    /// Grid spacing, always derived as `l / n`.
    pub fn dx(&self) -> f64 {
        self.side_length / self.points_per_axis as f64
    }

    /// Cell volume `dx^d`.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dimension as i32)
    }

    pub fn cells(&self) -> usize {
        self.points_per_axis.pow(self.dimension as u32)
    }

    /// Flat index from per-axis integer coordinates (wrapped).
    pub fn index_of(&self, coords: &[usize]) -> usize {
        let n = self.points_per_axis;
        coords[..self.dimension]
            .iter()
            .fold(0usize, |acc, &c| acc * n + (c % n))
    }

    /// Per-axis integer coordinates of a flat index.
    pub fn coords_of(&self, mut idx: usize) -> [usize; 3] {
        let n = self.points_per_axis;
        let mut out = [0usize; 3];
        for ax in (0..self.dimension).rev() {
            out[ax] = idx % n;
            idx /= n;
        }
        out
    }

    /// Nearest grid cell to a physical location (coordinates wrapped into
    /// `[0, l)`).
    pub fn snap(&self, location: &[f64]) -> usize {
        let n = self.points_per_axis as f64;
        let l = self.side_length;
        let coords: Vec<usize> = (0..self.dimension)
            .map(|ax| {
                let x = location[ax].rem_euclid(l);
                (x / l * n).round() as usize % self.points_per_axis
            })
            .collect();
        self.index_of(&coords)
    }

    /// Minimal-image distance from grid point `idx` to the origin.
    pub fn torus_distance_to_origin(&self, idx: usize) -> f64 {
        let c = self.coords_of(idx);
        let n = self.points_per_axis;
        let dx = self.dx();
        (0..self.dimension)
            .map(|ax| {
                let m = c[ax].min(n - c[ax]);
                let r = m as f64 * dx;
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Distance from grid point `idx` to the box center, unwrapped. Used by
    /// the truncated-line weight.
    pub fn distance_to_center(&self, idx: usize) -> f64 {
        let c = self.coords_of(idx);
        let dx = self.dx();
        let center = self.side_length / 2.0;
        (0..self.dimension)
            .map(|ax| {
                let r = c[ax] as f64 * dx - center;
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Translate a flat index by integer cell offsets (wrapped).
    pub fn shift_index(&self, idx: usize, offset: &[isize]) -> usize {
        let n = self.points_per_axis as isize;
        let c = self.coords_of(idx);
        let coords: Vec<usize> = (0..self.dimension)
            .map(|ax| ((c[ax] as isize + offset[ax]).rem_euclid(n)) as usize)
            .collect();
        self.index_of(&coords)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dx_is_derived_exactly() {
        let d = DomainSpec::unit_torus(1, 10).unwrap();
        assert_eq!(d.dx() * d.points_per_axis as f64, d.side_length);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(DomainSpec::unit_torus(4, 16).is_err());
        assert!(DomainSpec::unit_torus(1, 7).is_err());
        assert!(DomainSpec::unit_torus(1, 9).is_err());
        assert!(DomainSpec::new(Geometry::Torus, 1, -1.0, 16).is_err());
        assert!(DomainSpec::new(Geometry::Torus, 3, 1.0, 1024).is_err());
    }

    #[test]
    fn snap_and_wrap() {
        let d = DomainSpec::unit_torus(2, 16).unwrap();
        assert_eq!(d.snap(&[0.0, 0.0]), 0);
        assert_eq!(d.snap(&[1.0, 1.0]), 0); // wraps
        let idx = d.snap(&[0.5, 0.25]);
        assert_eq!(d.coords_of(idx)[..2], [8, 4]);
    }

    #[test]
    fn torus_distance_symmetry() {
        let d = DomainSpec::unit_torus(1, 16).unwrap();
        for j in 1..16 {
            let a = d.torus_distance_to_origin(j);
            let b = d.torus_distance_to_origin(16 - j);
            assert!((a - b).abs() < 1e-15);
        }
    }
}
