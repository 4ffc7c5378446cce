//! Heavy-tail-safe summaries: quantile-based statistics, fractional
//! moments, the subcritical lognormal check, and tail-slope fits.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SummaryError {
    #[error("need at least {need} samples, got {got}")]
    EmptySample { need: usize, got: usize },
    #[error("fractional moments require nonnegative samples (found {0})")]
    NegativeSample(f64),
    #[error("theta must lie in (0, 1], got {0}")]
    BadTheta(f64),
    #[error("the lognormal limit needs beta < sqrt(2 pi), got {0}")]
    SupercriticalBeta(f64),
}

/// Deterministic pairwise summation; order-insensitive merging reduces to
/// summing a fixed-order slice, so results do not depend on worker count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Type-7 quantile (linear interpolation on order statistics), the fixed
/// convention that makes the examples bit-stable.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0);
    if n == 1 {
        return sorted[0];
    }
    let h = (n as f64 - 1.0) * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RobustSummary {
    pub median: f64,
    pub iqr: f64,
}

pub fn robust_summary(samples: &[f64]) -> Result<RobustSummary, SummaryError> {
    if samples.len() < 4 {
        return Err(SummaryError::EmptySample { need: 4, got: samples.len() });
    }
    let mut xs = samples.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    let median = quantile_type7(&xs, 0.5);
    let iqr = quantile_type7(&xs, 0.75) - quantile_type7(&xs, 0.25);
    Ok(RobustSummary { median, iqr })
}

/// Sample mean of `M^theta` for `theta` in `(0, 1]`, with its standard
/// error.
pub fn fractional_moment(samples: &[f64], theta: f64) -> Result<(f64, f64), SummaryError> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(SummaryError::BadTheta(theta));
    }
    if samples.len() < 2 {
        return Err(SummaryError::EmptySample { need: 2, got: samples.len() });
    }
    if let Some(&bad) = samples.iter().find(|v| **v < 0.0) {
        return Err(SummaryError::NegativeSample(bad));
    }
    let pows: Vec<f64> = samples.iter().map(|m| m.powf(theta)).collect();
    let n = pows.len() as f64;
    let mean = pairwise_sum(&pows) / n;
    let devs: Vec<f64> = pows.iter().map(|p| (p - mean) * (p - mean)).collect();
    let var = pairwise_sum(&devs) / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Report of the two-dimensional subcritical limit check against the
/// lognormal law `exp(Z - Var Z / 2)`, `Z ~ N(0, log(1/(1 - beta^2/2pi)))`.
#[derive(Debug, Clone, Serialize)]
pub struct LognormalReport {
    pub beta: f64,
    pub sigma_sq_target: f64,
    pub second_moment_target: f64,
    /// Second moment with the top 0.1% of samples trimmed.
    pub second_moment_trimmed: f64,
    /// Same with a 0.2% trim; the spread between the two is the trim
    /// sensitivity.
    pub second_moment_trimmed_2x: f64,
    pub log_mean: f64,
    pub log_var: f64,
    pub nonpositive_dropped: usize,
}

pub fn lognormal_subcritical_check(
    samples: &[f64],
    beta: f64,
) -> Result<LognormalReport, SummaryError> {
    let two_pi = 2.0 * std::f64::consts::PI;
    if beta * beta >= two_pi {
        return Err(SummaryError::SupercriticalBeta(beta));
    }
    if samples.len() < 100 {
        return Err(SummaryError::EmptySample { need: 100, got: samples.len() });
    }
    let sigma_sq = (1.0 / (1.0 - beta * beta / two_pi)).ln();
    let mut xs = samples.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    let trimmed_m2 = |frac: f64| {
        let keep = xs.len() - ((xs.len() as f64 * frac).ceil() as usize).min(xs.len() - 1);
        let sq: Vec<f64> = xs[..keep].iter().map(|v| v * v).collect();
        pairwise_sum(&sq) / keep as f64
    };
    let logs: Vec<f64> = xs.iter().filter(|v| **v > 0.0).map(|v| v.ln()).collect();
    let dropped = xs.len() - logs.len();
    let nl = logs.len() as f64;
    let log_mean = pairwise_sum(&logs) / nl;
    let devs: Vec<f64> = logs.iter().map(|l| (l - log_mean) * (l - log_mean)).collect();
    let log_var = pairwise_sum(&devs) / (nl - 1.0);
    Ok(LognormalReport {
        beta,
        sigma_sq_target: sigma_sq,
        second_moment_target: 1.0 / (1.0 - beta * beta / two_pi),
        second_moment_trimmed: trimmed_m2(0.001),
        second_moment_trimmed_2x: trimmed_m2(0.002),
        log_mean,
        log_var,
        nonpositive_dropped: dropped,
    })
}

/// Least-squares slope of `log P(|X| > t)` against `log t` over the top
/// decade of the sample, a crude but moment-free tail index probe. The
/// decade is anchored at the 99.8th percentile of `|X|` rather than the
/// maximum, which for heavy tails is a single noisy point. Returns `None`
/// when the decade holds fewer than 10 points.
pub fn tail_log_slope(samples: &[f64]) -> Option<f64> {
    let mut abs: Vec<f64> = samples.iter().map(|v| v.abs()).filter(|v| *v > 0.0).collect();
    if abs.len() < 20 {
        return None;
    }
    abs.sort_unstable_by(f64::total_cmp);
    let n = abs.len();
    let t_hi = quantile_type7(&abs, 0.998);
    let t_lo = t_hi / 10.0;
    let first = abs.partition_point(|v| *v < t_lo);
    let last = abs.partition_point(|v| *v <= t_hi).min(n - 1);
    if last.saturating_sub(first) < 10 {
        return None;
    }
    // survival points at the order statistics in the decade
    let pts: Vec<(f64, f64)> = (first..last)
        .map(|i| {
            let t = abs[i];
            let surv = (n - i) as f64 / n as f64;
            (t.ln(), surv.max(1e-12).ln())
        })
        .collect();
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = m * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    Some((m * sxy - sx * sy) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Cauchy, Distribution, StandardNormal};

    #[test]
    fn type7_examples() {
        let s = robust_summary(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.median, 2.5);
        assert_eq!(s.iqr, 1.5);
    }

    #[test]
    fn shift_equivariance() {
        let xs = vec![0.3, -1.2, 4.0, 2.2, 0.9, -0.4];
        let a = 13.7;
        let shifted: Vec<f64> = xs.iter().map(|x| x + a).collect();
        let s0 = robust_summary(&xs).unwrap();
        let s1 = robust_summary(&shifted).unwrap();
        assert!((s1.median - s0.median - a).abs() < 1e-12);
        assert!((s1.iqr - s0.iqr).abs() < 1e-12);
    }

    #[test]
    fn cauchy_population_iqr() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let c = 1.5;
        let dist = Cauchy::new(0.0, c).unwrap();
        let xs: Vec<f64> = (0..200_000).map(|_| dist.sample(&mut rng)).collect();
        let s = robust_summary(&xs).unwrap();
        assert!(s.median.abs() < 0.02, "median {}", s.median);
        assert!((s.iqr - 2.0 * c).abs() < 0.05 * 2.0 * c, "iqr {}", s.iqr);
    }

    #[test]
    fn fractional_moment_basics() {
        let (m, _) = fractional_moment(&vec![1.0; 50], 0.5).unwrap();
        assert_eq!(m, 1.0);
        assert!(matches!(
            fractional_moment(&[1.0, -0.5], 0.5),
            Err(SummaryError::NegativeSample(_))
        ));
        // theta -> 1 recovers the sample mean
        let xs = vec![0.5, 1.5, 2.0, 0.1];
        let (m1, _) = fractional_moment(&xs, 1.0).unwrap();
        let mean = xs.iter().sum::<f64>() / 4.0;
        assert!((m1 - mean).abs() < 1e-12);
    }

    #[test]
    fn fractional_moment_scaling_law() {
        // scaling samples by k multiplies the estimate by k^theta exactly
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<f64> = (0..500).map(|_| rng.gen::<f64>() + 0.1).collect();
        let k = 3.7;
        let scaled: Vec<f64> = xs.iter().map(|x| x * k).collect();
        for &theta in &[0.3, 0.5, 0.9] {
            let (m0, _) = fractional_moment(&xs, theta).unwrap();
            let (m1, _) = fractional_moment(&scaled, theta).unwrap();
            assert!((m1 - k.powf(theta) * m0).abs() < 1e-12 * m1.abs());
        }
    }

    #[test]
    fn lognormal_check_closed_forms() {
        // beta = 1: second moment 1/(1 - 1/(2 pi)) ~ 1.1893
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let beta: f64 = 1.0;
        let sigma_sq = (1.0 / (1.0 - beta * beta / (2.0 * std::f64::consts::PI))).ln();
        let sigma = sigma_sq.sqrt();
        let xs: Vec<f64> = (0..200_000)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                (sigma * z - sigma_sq / 2.0).exp()
            })
            .collect();
        let rep = lognormal_subcritical_check(&xs, beta).unwrap();
        assert!((rep.second_moment_target - 1.1893).abs() < 1e-3);
        assert!(
            (rep.second_moment_trimmed - rep.second_moment_target).abs()
                < 0.05 * rep.second_moment_target,
            "trimmed {} target {}",
            rep.second_moment_trimmed,
            rep.second_moment_target
        );
        assert!((rep.log_mean + sigma_sq / 2.0).abs() < 0.01);
        assert!((rep.log_var - sigma_sq).abs() < 0.01);
        // beta = 2 closed form, cross-checked by sampling below
        let sigma2_b2 = (1.0f64 / (1.0 - 4.0 / (2.0 * std::f64::consts::PI))).ln();
        assert!((sigma2_b2 - 1.0123).abs() < 1e-3);
        let s2 = sigma2_b2.sqrt();
        let ys: Vec<f64> = (0..200_000)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                (s2 * z - sigma2_b2 / 2.0).exp()
            })
            .collect();
        let rep2 = lognormal_subcritical_check(&ys, 2.0).unwrap();
        assert!((rep2.log_var - sigma2_b2).abs() < 0.02, "{}", rep2.log_var);
    }

    #[test]
    fn lognormal_check_rejects_supercritical() {
        assert!(matches!(
            lognormal_subcritical_check(&vec![1.0; 200], 3.0),
            Err(SummaryError::SupercriticalBeta(_))
        ));
    }

    #[test]
    fn tail_slope_separates_cauchy_from_gaussian() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let dist = Cauchy::new(0.0, 1.0).unwrap();
        let heavy: Vec<f64> = (0..20_000).map(|_| dist.sample(&mut rng)).collect();
        let light: Vec<f64> = (0..20_000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let s_heavy = tail_log_slope(&heavy).unwrap();
        let s_light = tail_log_slope(&light).unwrap();
        assert!(s_heavy > -1.5 && s_heavy < -0.5, "heavy slope {s_heavy}");
        assert!(s_light < -1.2, "light slope {s_light}");
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small_inputs() {
        let xs: Vec<f64> = (0..17).map(|i| i as f64 * 0.1).collect();
        let a = pairwise_sum(&xs);
        let b: f64 = xs.iter().sum();
        assert!((a - b).abs() < 1e-12);
    }
}
