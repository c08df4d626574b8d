//! Special functions and exact small-integer combinatorics.

/// Even-index Bernoulli numbers `B_2, B_4, ..., B_20`.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Hurwitz zeta `sum_{k>=0} (q+k)^{-s}` by Euler-Maclaurin summation.
///
/// Valid for `q > 0` and `s != 1`; for `s < 1` the value is the analytic
/// continuation, so differences `zeta(s,a) - zeta(s,b)` still equal the finite
/// power sum over `[a, b)`.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    assert!(q > 0.0, "hurwitz_zeta requires q > 0");
    assert!((s - 1.0).abs() > 1e-12, "hurwitz_zeta has a pole at s = 1");
    let shift = (30.0 + s.abs() - q).ceil().max(0.0) as u64;
    let mut sum = 0.0;
    for k in 0..shift {
        sum += (q + k as f64).powf(-s);
    }
    let a = q + shift as f64;
    sum += a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // rising factorial s(s+1)...(s+2j-2) times a^{-s-2j+1} / (2j)!
    let mut rising = s;
    let mut fact = 2.0;
    let mut a_pow = a.powf(-s - 1.0);
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / fact * rising * a_pow;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        let two_j = 2.0 * (j as f64 + 1.0);
        rising *= (s + two_j - 1.0) * (s + two_j);
        fact *= (two_j + 1.0) * (two_j + 2.0);
        a_pow /= a * a;
    }
    sum
}

/// `sum_{k=from}^{to} k^{-s}` for `1 <= from`, inclusive bounds.
pub fn power_sum(s: f64, from: u64, to: u64) -> f64 {
    if to < from {
        return 0.0;
    }
    if to - from < 1_000_000 || (s - 1.0).abs() < 1e-9 {
        return pairwise_sum_iter((from..=to).map(|k| (k as f64).powf(-s)));
    }
    hurwitz_zeta(s, from as f64) - hurwitz_zeta(s, to as f64 + 1.0)
}

/// Falling factorial `(x)_k = x (x-1) ... (x-k+1)` in floating point.
pub fn falling_factorial(x: u64, k: u64) -> f64 {
    if k > x {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (x - i) as f64)
}

/// Binomial coefficient `C(x, k)` in floating point.
pub fn binomial(x: u64, k: u64) -> f64 {
    if k > x {
        return 0.0;
    }
    let k = k.min(x - k);
    (0..k).fold(1.0, |acc, i| acc * (x - i) as f64 / (i + 1) as f64)
}

/// Exact binomial coefficient, `None` on overflow.
pub fn binomial_exact(x: u64, k: u64) -> Option<u64> {
    if k > x {
        return Some(0);
    }
    let k = k.min(x - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (x - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

pub fn factorial(k: u64) -> u64 {
    (1..=k).product()
}

/// `C(k, 2)`.
pub fn pairs(k: u64) -> u64 {
    k * k.saturating_sub(1) / 2
}

/// `x^y` with the convention `0^0 = 1`.
pub fn pow0(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        1.0
    } else {
        x.powf(y)
    }
}

/// Pairwise (cascade) summation; the result depends only on input order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn pairwise_sum_iter(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    pairwise_sum(&v)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    // erfc_inv(2p) = -x / sqrt(2)
    -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p)
}

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}
