//! Kolmogorov-Smirnov distances with simulated (not tabulated) null
//! thresholds, safe for heavy-tailed samples.

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KsError {
    #[error("need at least 2 samples, got {0}")]
    EmptySample(usize),
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

/// Sup distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64, KsError> {
    if samples.len() < 2 {
        return Err(KsError::EmptySample(samples.len()));
    }
    let xs = sorted(samples);
    let n = xs.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max((f - i as f64 / n).abs());
        sup = sup.max((f - (i as f64 + 1.0) / n).abs());
    }
    Ok(sup)
}

/// Two-sample sup distance between empirical CDFs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64, KsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(KsError::EmptySample(a.len().min(b.len())));
    }
    let xa = sorted(a);
    let xb = sorted(b);
    let (na, nb) = (xa.len(), xb.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup = 0.0f64;
    while i < na && j < nb {
        let (va, vb) = (xa[i], xb[j]);
        if va <= vb {
            i += 1;
        }
        if vb <= va {
            j += 1;
        }
        let diff = (i as f64 / na as f64 - j as f64 / nb as f64).abs();
        sup = sup.max(diff);
    }
    Ok(sup)
}

/// Simulated null quantile of the one-sample KS statistic at sample size
/// `n`: the distance is distribution-free, so uniforms suffice.
pub fn ks_null_quantile<R: Rng>(n: usize, level: f64, reps: usize, rng: &mut R) -> f64 {
    let mut stats: Vec<f64> = (0..reps)
        .map(|_| {
            let u: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            ks_distance(&u, |x| x.clamp(0.0, 1.0)).expect("n >= 2")
        })
        .collect();
    stats.sort_unstable_by(f64::total_cmp);
    let idx = ((reps as f64 * level).ceil() as usize).clamp(1, reps) - 1;
    stats[idx]
}

/// Permutation null quantile for the two-sample KS statistic: pool the two
/// samples, re-split at random, and read the requested quantile of the
/// resampled distances.
pub fn ks_two_sample_null_quantile<R: Rng>(
    a: &[f64],
    b: &[f64],
    level: f64,
    reps: usize,
    rng: &mut R,
) -> Result<f64, KsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(KsError::EmptySample(a.len().min(b.len())));
    }
    let mut pool: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    let na = a.len();
    let mut stats = Vec::with_capacity(reps);
    for _ in 0..reps {
        // Fisher-Yates over the prefix we need
        for i in 0..na {
            let j = rng.gen_range(i..pool.len());
            pool.swap(i, j);
        }
        stats.push(ks_two_sample(&pool[..na], &pool[na..])?);
    }
    stats.sort_unstable_by(f64::total_cmp);
    let idx = ((reps as f64 * level).ceil() as usize).clamp(1, reps) - 1;
    Ok(stats[idx])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::cauchy::CauchyLaw;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Cauchy, Distribution};

    #[test]
    fn quantile_ranks_give_half_over_n() {
        // samples exactly at ranks (i - 1/2)/n of the target law
        let law = CauchyLaw::new(1.0);
        let n = 40;
        let samples: Vec<f64> = (0..n)
            .map(|i| law.quantile((i as f64 + 0.5) / n as f64))
            .collect();
        let d = ks_distance(&samples, |x| law.cdf(x)).unwrap();
        assert!((d - 0.5 / n as f64).abs() < 1e-12, "{d}");
    }

    #[test]
    fn constant_samples_vs_continuous_law() {
        let law = CauchyLaw::new(1.0);
        let samples = vec![0.0; 100];
        let d = ks_distance(&samples, |x| law.cdf(x)).unwrap();
        assert!(d >= 0.5);
    }

    #[test]
    fn rejects_tiny_samples() {
        assert!(matches!(ks_distance(&[1.0], |_| 0.5), Err(KsError::EmptySample(1))));
    }

    #[test]
    fn big_cauchy_sample_near_null_level() {
        // 1e5 iid standard Cauchy draws vs Cauchy(1): the asymptotic 99th
        // percentile of the null is ~1.63/sqrt(n)
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let dist = Cauchy::new(0.0, 1.0).unwrap();
        let samples: Vec<f64> = (0..100_000).map(|_| dist.sample(&mut rng)).collect();
        let law = CauchyLaw::new(1.0);
        let d = ks_distance(&samples, |x| law.cdf(x)).unwrap();
        assert!(d < 0.0061, "ks {d}");
    }

    #[test]
    fn invariant_under_increasing_reparameterization() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples: Vec<f64> = (0..500).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
        let law = CauchyLaw::new(1.0);
        let d1 = ks_distance(&samples, |x| law.cdf(x)).unwrap();
        // apply x -> x^3 (strictly increasing) to both samples and cdf
        let mapped: Vec<f64> = samples.iter().map(|x| x.powi(3)).collect();
        let d2 = ks_distance(&mapped, |y| law.cdf(y.cbrt())).unwrap();
        assert!((d1 - d2).abs() < 1e-12);
    }

    #[test]
    fn simulated_null_quantile_matches_asymptotic() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let q = ks_null_quantile(1000, 0.99, 400, &mut rng);
        let asym = 1.628 / (1000f64).sqrt();
        assert!((q - asym).abs() < 0.2 * asym, "{q} vs {asym}");
    }

    #[test]
    fn two_sample_detects_shift_and_accepts_null() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<f64> = (0..2000).map(|_| rng.gen::<f64>()).collect();
        let b: Vec<f64> = (0..2000).map(|_| rng.gen::<f64>()).collect();
        let c: Vec<f64> = (0..2000).map(|_| rng.gen::<f64>() + 0.2).collect();
        let d_null = ks_two_sample(&a, &b).unwrap();
        let d_alt = ks_two_sample(&a, &c).unwrap();
        let thresh = ks_two_sample_null_quantile(&a, &b, 0.99, 200, &mut rng).unwrap();
        assert!(d_null < thresh, "{d_null} vs {thresh}");
        assert!(d_alt > thresh, "{d_alt} vs {thresh}");
    }
}
