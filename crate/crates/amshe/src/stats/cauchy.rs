//! The Cauchy family used as the target law throughout.

use serde::{Deserialize, Serialize};

/// `Cauchy(c)`: `c` times a standard Cauchy variable. `c = 0` is the point
/// mass at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyLaw {
    pub scale: f64,
}

impl CauchyLaw {
    pub fn new(scale: f64) -> Self {
        assert!(scale >= 0.0, "Cauchy scale must be >= 0");
        CauchyLaw { scale }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        cauchy_cdf(x, self)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        assert!((0.0..=1.0).contains(&p));
        if self.scale == 0.0 {
            return 0.0;
        }
        self.scale * (std::f64::consts::PI * (p - 0.5)).tan()
    }

    /// Population interquartile range `2c` (quartiles at +-c).
    pub fn iqr(&self) -> f64 {
        2.0 * self.scale
    }
}

pub fn cauchy_cdf(x: f64, law: &CauchyLaw) -> f64 {
    if law.scale == 0.0 {
        return if x < 0.0 { 0.0 } else { 1.0 };
    }
    0.5 + (x / law.scale).atan() / std::f64::consts::PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_fixed_points() {
        let c1 = CauchyLaw::new(1.0);
        assert!((cauchy_cdf(0.0, &c1) - 0.5).abs() < 1e-15);
        assert!((cauchy_cdf(1.0, &c1) - 0.75).abs() < 1e-15);
        let c2 = CauchyLaw::new(2.0);
        assert!((cauchy_cdf(2.0, &c2) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn cdf_scale_invariance_and_monotonicity() {
        let c = CauchyLaw::new(3.0);
        let unit = CauchyLaw::new(1.0);
        let mut prev = 0.0;
        for i in -50..=50 {
            let x = i as f64 * 0.37;
            let v = cauchy_cdf(x, &c);
            assert!((v - cauchy_cdf(x / 3.0, &unit)).abs() < 1e-14);
            if i > -50 {
                assert!(v >= prev);
            }
            prev = v;
        }
        assert!(cauchy_cdf(-1e12, &c) < 1e-9);
        assert!(cauchy_cdf(1e12, &c) > 1.0 - 1e-9);
    }

    #[test]
    fn degenerate_scale_is_step() {
        let c0 = CauchyLaw::new(0.0);
        assert_eq!(cauchy_cdf(-1e-9, &c0), 0.0);
        assert_eq!(cauchy_cdf(0.0, &c0), 1.0);
        assert_eq!(c0.quantile(0.9), 0.0);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let c = CauchyLaw::new(0.7);
        for &p in &[0.05, 0.25, 0.5, 0.75, 0.95] {
            let x = c.quantile(p);
            assert!((c.cdf(x) - p).abs() < 1e-12);
        }
        assert!((c.iqr() - 1.4).abs() < 1e-15);
    }
}
