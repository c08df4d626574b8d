//! Tail index estimation, Kolmogorov-Smirnov distances, Q-Q points and a
//! totally skewed stable sampler.

use std::cmp::Ordering;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::{check_alpha, LimitsError};
use crate::special::{normal_cdf, normal_quantile};
use crate::Real;

fn sorted<T: Real>(xs: &[T]) -> Vec<T> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    v
}

/// `floor(n^0.6)`.
pub fn default_hill_k(sample_size: usize) -> usize {
    (sample_size as f64).powf(0.6).floor() as usize
}

/// Hill estimate `k / sum_{i<=k} ln(X_(i) / X_(k+1))` of the tail index from
/// the `k` largest positive samples.
pub fn hill_estimator<T: Real>(samples: &[T], k_order: usize) -> Result<T, LimitsError> {
    let mut positive: Vec<T> = samples.iter().copied().filter(|&x| x > T::zero()).collect();
    if k_order < 2 || positive.len() < k_order + 1 {
        return Err(LimitsError::InsufficientSamples { needed: k_order.max(2) + 1, got: positive.len() });
    }
    positive.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    let threshold = positive[k_order].ln();
    let logs: Vec<f64> = positive[..k_order].iter().map(|&x| (x.ln() - threshold).as_f64()).collect();
    let total = crate::special::pairwise_sum(&logs);
    if total <= 0.0 {
        return Err(LimitsError::DegenerateSample);
    }
    Ok(T::of(k_order as f64 / total))
}

/// `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_two_sample<T: Real>(a: &[T], b: &[T]) -> Result<T, LimitsError> {
    if a.is_empty() || b.is_empty() {
        return Err(LimitsError::EmptySample);
    }
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        // step past every copy of the smaller value in both samples
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(T::of(d))
}

/// Distance between the empirical CDF and the standard normal CDF.
pub fn ks_one_sample_normal<T: Real>(samples: &[T]) -> Result<T, LimitsError> {
    if samples.is_empty() {
        return Err(LimitsError::EmptySample);
    }
    let xs = sorted(samples);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = normal_cdf(x.as_f64());
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(T::of(d))
}

/// Empirical quantile by linear interpolation between order statistics.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `(Phi^{-1}((i - 0.5)/n), x_(i))` for every sample.
pub fn qq_points_normal<T: Real>(samples: &[T]) -> Vec<(T, T)> {
    let xs = sorted(samples);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| (T::of(normal_quantile((i as f64 + 0.5) / n)), x))
        .collect()
}

/// Matched quantiles of `reference` and `samples` at `points` equally spaced levels.
pub fn qq_points_two_sample<T: Real>(samples: &[T], reference: &[T], points: usize) -> Vec<(T, T)> {
    if samples.is_empty() || reference.is_empty() || points == 0 {
        return Vec::new();
    }
    let s: Vec<f64> = sorted(samples).iter().map(|x| x.as_f64()).collect();
    let r: Vec<f64> = sorted(reference).iter().map(|x| x.as_f64()).collect();
    (1..=points)
        .map(|i| {
            let p = i as f64 / (points + 1) as f64;
            (T::of(quantile(&r, p)), T::of(quantile(&s, p)))
        })
        .collect()
}

/// Draws from the stable law with index `alpha`, skewness `+1` and the given
/// scale by the Chambers-Mallows-Stuck transform.
pub fn sample_positive_stable<T: Real, R: Rng + ?Sized>(
    alpha: T,
    scale: T,
    count: usize,
    rng: &mut R,
) -> Result<Vec<T>, LimitsError> {
    let a = alpha.as_f64();
    check_alpha(a)?;
    let pi = std::f64::consts::PI;
    let t = (pi * a / 2.0).tan();
    let shift = t.atan() / a;
    let factor = (1.0 + t * t).powf(1.0 / (2.0 * a));
    let scale = scale.as_f64();
    Ok((0..count)
        .map(|_| {
            let v = pi * (rng.random::<f64>() - 0.5);
            let w: f64 = Exp1.sample(rng);
            let x = factor * (a * (v + shift)).sin() / v.cos().powf(1.0 / a)
                * ((v - a * (v + shift)).cos() / w).powf((1.0 - a) / a);
            T::of(scale * x)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailDiagnostics<T> {
    pub hill_estimate: T,
    pub k_order: usize,
    pub ks_distance: T,
    pub qq_points: Vec<(T, T)>,
}

/// Hill estimate of `samples` and its two-sample comparison with `reference`.
pub fn tail_diagnostics<T: Real>(
    samples: &[T],
    reference: &[T],
    k_order: Option<usize>,
) -> Result<TailDiagnostics<T>, LimitsError> {
    let k = k_order.unwrap_or_else(|| default_hill_k(samples.len()));
    Ok(TailDiagnostics {
        hill_estimate: hill_estimator(samples, k)?,
        k_order: k,
        ks_distance: ks_two_sample(samples, reference)?,
        qq_points: qq_points_two_sample(samples, reference, 99),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    #[test]
    fn hill_on_pareto_quantile_grid() {
        let n = 100_000;
        // Pareto(1) quantiles 1/(1-u)
        let xs: Vec<f64> = (1..=n).map(|i| 1.0 / (1.0 - (i as f64 - 0.5) / n as f64)).collect();
        let est = hill_estimator(&xs, default_hill_k(n)).unwrap();
        assert!((est - 1.0).abs() < 0.05, "{est}");
    }

    #[test]
    fn hill_errors() {
        assert!(matches!(hill_estimator(&[2.0f64; 50], 10), Err(LimitsError::DegenerateSample)));
        assert!(matches!(hill_estimator(&[1.0f64, 2.0, 3.0], 3), Err(LimitsError::InsufficientSamples { .. })));
        assert!(matches!(hill_estimator(&[1.0f64, 2.0, 3.0], 1), Err(LimitsError::InsufficientSamples { .. })));
    }

    #[test]
    fn zipf_tail_index() {
        // at x_min = 1 the 1% threshold sits near x = 5 and the lattice biases
        // the estimate to about 1.9, so the pmf is taken at scale 10
        let law = crate::layer_model::XLaw::zipf(2.4, 10);
        let mut rng = crate::Rng::seed_from_u64(8);
        let xs: Vec<f64> = (0..1_000_000).map(|_| law.sample(&mut rng) as f64).collect();
        let est = hill_estimator(&xs, 10_000).unwrap();
        assert!((2.16..=2.64).contains(&est), "{est}");
    }

    #[test]
    fn ks_two_sample_examples() {
        let a = [1.0f64, 2.0, 3.0];
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[0.0f64; 3], &[1.0; 3]).unwrap(), 1.0);
        assert!(matches!(ks_two_sample::<f64>(&[], &a), Err(LimitsError::EmptySample)));
    }

    #[test]
    fn ks_two_sample_matches_direct_maximization() {
        let n = 500;
        let a: Vec<f64> = (1..=n).map(|i| normal_quantile((i as f64 - 0.5) / n as f64)).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 3.0).collect();
        let mut grid: Vec<f64> = a.iter().chain(&b).copied().collect();
        grid.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let ecdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
        let direct = grid.iter().map(|&x| (ecdf(&a, x) - ecdf(&b, x)).abs()).fold(0.0, f64::max);
        let fast = ks_two_sample(&a, &b).unwrap();
        assert_relative_eq!(fast, direct, max_relative = 1e-12);
        assert!((fast - 0.87).abs() < 0.01, "{fast}");
    }

    #[test]
    fn ks_one_sample_examples() {
        let n = 1000;
        let grid: Vec<f64> = (1..=n).map(|i| normal_quantile((i as f64 - 0.5) / n as f64)).collect();
        assert!(ks_one_sample_normal(&grid).unwrap() <= 0.001);
        assert_relative_eq!(ks_one_sample_normal(&[0.0f64]).unwrap(), 0.5, max_relative = 1e-15);
        assert!((ks_one_sample_normal(&[10.0f64; 5]).unwrap() - 1.0).abs() < 1e-9);
        assert!(ks_one_sample_normal::<f64>(&[]).is_err());
        let single32 = ks_one_sample_normal(&[0.0f32]).unwrap();
        assert!((single32 - 0.5).abs() < 1e-7);
    }

    #[test]
    fn stable_sampler() {
        let mut rng = crate::Rng::seed_from_u64(4);
        let xs = sample_positive_stable(0.5f64, 1.0, 10_000, &mut rng).unwrap();
        assert!(xs.iter().all(|&x| x > 0.0));
        assert_eq!(sample_positive_stable(1.0f64, 1.0, 1, &mut rng), Err(LimitsError::AlphaOneUnsupported));
        assert_eq!(sample_positive_stable(2.5f64, 1.0, 1, &mut rng), Err(LimitsError::AlphaOutOfRange(2.5)));
    }

    #[test]
    fn stable_sampler_tail_index() {
        let mut rng = crate::Rng::seed_from_u64(12);
        for alpha in [0.8f64, 1.5] {
            let xs = sample_positive_stable(alpha, 1.0, 1_000_000, &mut rng).unwrap();
            let est = hill_estimator(&xs, 10_000).unwrap();
            assert!((est - alpha).abs() <= 0.1 * alpha, "alpha {alpha}: {est}");
        }
    }

    #[test]
    fn qq_points_shapes() {
        let grid: Vec<f64> = (1..=9).map(|i| normal_quantile(i as f64 / 10.0)).collect();
        let qq = qq_points_normal(&grid);
        assert_eq!(qq.len(), 9);
        assert_relative_eq!(qq[4].0, 0.0, epsilon = 1e-12);
        let same = qq_points_two_sample(&grid, &grid, 5);
        assert!(same.iter().all(|(a, b)| (a - b).abs() < 1e-12));
    }
}
