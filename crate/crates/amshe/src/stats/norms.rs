//! Weighted Lp norms of grid fields.

use crate::grid::{DomainSpec, Geometry};
use crate::stats::summary::pairwise_sum;

/// Weight at grid cell `idx`: 1 on the torus, `exp(-xi |x|)` on the
/// truncated line with `|x|` measured from the box center.
pub fn weight_at(idx: usize, xi: f64, domain: &DomainSpec) -> f64 {
    match domain.geometry {
        Geometry::Torus => 1.0,
        Geometry::TruncatedLine => (-xi * domain.distance_to_center(idx)).exp(),
    }
}

/// `(sum |z|^p w^p dx^d)^(1/p)`.
pub fn weighted_lp_norm(values: &[f64], p: f64, xi: f64, domain: &DomainSpec) -> f64 {
    assert!(p >= 1.0, "p must be >= 1");
    assert!(xi > 0.0, "xi must be > 0");
    let dv = domain.cell_volume();
    let terms: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(i, v)| (v.abs() * weight_at(i, xi, domain)).powf(p) * dv)
        .collect();
    pairwise_sum(&terms).powf(1.0 / p)
}
