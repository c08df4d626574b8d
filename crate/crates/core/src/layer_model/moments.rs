//! Mixed moments `E[X^s Q^t]` and truncated factorial moments.
//!
//! Power-law tails are resolved symbolically: every integrand handled here is
//! an exact power `c * x^e` beyond some cutoff, so the tail is either a
//! Hurwitz zeta value or divergent by comparing `e` with `gamma`. Only the
//! part below the cutoff is summed term by term.

use serde::{Deserialize, Serialize};

use super::{coupled_q, LawError, LawKind, LayerTypeLaw, QLaw, XLaw, ZipfLaw, SERIES_BUDGET};
use crate::special::{falling_factorial, hurwitz_zeta, pow0};

/// Exponents of a mixed moment `E[min(X, n)^s Q^t]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSpec {
    pub s: f64,
    pub t: f64,
    #[serde(default)]
    pub truncation: Option<u64>,
}

impl MomentSpec {
    pub fn new(s: f64, t: f64) -> Self {
        MomentSpec { s, t, truncation: None }
    }

    pub fn truncated(s: f64, t: f64, n: u64) -> Self {
        MomentSpec { s, t, truncation: Some(n) }
    }

    fn validate(&self) -> Result<(), LawError> {
        if !(self.s >= 0.0 && self.s.is_finite() && self.t >= 0.0 && self.t.is_finite()) {
            return Err(LawError::InvalidMoment(format!(
                "exponents (s={}, t={}) must be finite and nonnegative",
                self.s, self.t
            )));
        }
        Ok(())
    }
}

/// An integrand `h(x)` that equals `coef * x^exponent` for every `x >= from`.
struct PowerTail<'a> {
    head: &'a dyn Fn(u64) -> f64,
    from: u64,
    coef: f64,
    exponent: f64,
}

impl ZipfLaw {
    /// `E[h(X)]` for an integrand with an exact power tail.
    fn expect(&self, h: PowerTail<'_>) -> Result<f64, LawError> {
        let from = h.from.max(self.x_min);
        if from - self.x_min > SERIES_BUDGET {
            return Err(LawError::NonConvergent(SERIES_BUDGET));
        }
        let head: f64 = (self.x_min..from).map(|x| self.pmf(x) * (h.head)(x)).sum();
        if h.coef == 0.0 {
            return Ok(head);
        }
        if h.exponent >= self.gamma {
            return Ok(f64::INFINITY);
        }
        let tail = hurwitz_zeta(self.gamma + 1.0 - h.exponent, from as f64) / self.normalizer();
        Ok(head + h.coef * tail)
    }
}

impl XLaw {
    fn expect(&self, h: PowerTail<'_>) -> Result<f64, LawError> {
        match self {
            XLaw::Zipf(z) => z.expect(h),
            _ => {
                let support = self.finite_support().ok_or(LawError::NonConvergent(SERIES_BUDGET))?;
                Ok(support
                    .iter()
                    .map(|&(x, p)| {
                        let v = if x >= h.from {
                            h.coef * pow0(x as f64, h.exponent)
                        } else {
                            (h.head)(x)
                        };
                        p * v
                    })
                    .sum())
            }
        }
    }
}

impl QLaw {
    /// `E[Q^t]`.
    pub fn moment(&self, t: f64) -> f64 {
        match self {
            QLaw::Constant { q } => pow0(*q, t),
            QLaw::Beta { a, b } => {
                if t == 0.0 {
                    return 1.0;
                }
                use statrs::function::gamma::ln_gamma;
                (ln_gamma(a + t) + ln_gamma(a + b) - ln_gamma(*a) - ln_gamma(a + b + t)).exp()
            }
            QLaw::Table { entries } => {
                let total: f64 = entries.iter().map(|e| e.1).sum();
                entries.iter().map(|&(q, w)| w * pow0(q, t)).sum::<f64>() / total
            }
        }
    }
}

/// Smallest `x >= 1` with `b * x^(-beta) <= 1` (for `beta > 0`).
fn coupling_knee(b: f64, beta: f64) -> u64 {
    if b <= 1.0 {
        return 1;
    }
    let guess = b.powf(1.0 / beta).ceil();
    if guess >= 9.0e18 {
        return u64::MAX / 2;
    }
    let mut x = (guess as u64).max(1);
    while x > 1 && b * ((x - 1) as f64).powf(-beta) <= 1.0 {
        x -= 1;
    }
    while b * (x as f64).powf(-beta) > 1.0 {
        x += 1;
    }
    x
}

impl LayerTypeLaw {
    /// `E[min(X, n)^s Q^t]`, or `+inf` when the series diverges.
    pub fn mixed_moment(&self, spec: MomentSpec) -> Result<f64, LawError> {
        spec.validate()?;
        let MomentSpec { s, t, truncation } = spec;
        let xt = |x: u64| truncation.map_or(x, |n| x.min(n)) as f64;
        self.expect_joint(
            &|x, q| pow0(xt(x), s) * pow0(q, t),
            truncation,
            |n| pow0(n as f64, s),
            s,
            t,
        )
    }

    /// `E[(min(X, n))_v Q^b]`, the truncated falling-factorial moment.
    pub fn truncated_falling_moment(&self, n: u64, v: u64, b: f64) -> Result<f64, LawError> {
        if !(b >= 0.0 && b.is_finite()) {
            return Err(LawError::InvalidMoment(format!("edge exponent {b} must be >= 0")));
        }
        let ff = move |x: u64| falling_factorial(x.min(n), v);
        self.expect_joint(&|x, q| ff(x) * pow0(q, b), Some(n), |n| falling_factorial(n, v), 0.0, b)
    }

    /// `E[(X)_v Q^b]` without truncation (`+inf` when divergent).
    pub fn falling_moment(&self, v: u64, b: f64) -> Result<f64, LawError> {
        if let Some(support) = self.finite_support() {
            return Ok(support
                .iter()
                .map(|&(x, q, p)| p * falling_factorial(x, v) * pow0(q, b))
                .sum());
        }
        // (x)_v = sum_k s(v, k) x^k with signed Stirling numbers of the first kind
        let mut total = 0.0;
        for (k, &c) in stirling_first(v).iter().enumerate() {
            if c == 0 {
                continue;
            }
            let m = self.mixed_moment(MomentSpec::new(k as f64, b))?;
            if m.is_infinite() {
                return Ok(f64::INFINITY);
            }
            total += c as f64 * m;
        }
        Ok(total)
    }

    /// Shared evaluator for `E[g(X, Q)]`.
    ///
    /// `g` must behave like `x^s q^t` for large untruncated `x`; with
    /// truncation at `n` it must equal `trunc_coef(n) * q^t` for `x >= n`.
    fn expect_joint(
        &self,
        g: &dyn Fn(u64, f64) -> f64,
        truncation: Option<u64>,
        trunc_coef: impl Fn(u64) -> f64,
        s: f64,
        t: f64,
    ) -> Result<f64, LawError> {
        match &self.kind {
            LawKind::Deterministic { x, q } => Ok(g(*x, *q)),
            LawKind::EmpiricalTable { .. } => Ok(self
                .finite_support()
                .expect("table support")
                .iter()
                .map(|&(x, q, p)| p * g(x, q))
                .sum()),
            LawKind::IndependentProduct { x_law, q_law } => {
                let qm = q_law.moment(t);
                if qm == 0.0 {
                    return Ok(0.0);
                }
                let head = |x: u64| g(x, 1.0);
                let tail = match truncation {
                    None => PowerTail { head: &head, from: 0, coef: 1.0, exponent: s },
                    Some(n) => PowerTail { head: &head, from: n, coef: trunc_coef(n), exponent: 0.0 },
                };
                Ok(x_law.expect(tail)? * qm)
            }
            LawKind::PowerLawCoupled { x_law, b_coupling, beta } => {
                let (b, beta) = (*b_coupling, *beta);
                let head = |x: u64| g(x, coupled_q(x, b, beta));
                let tail = if beta == 0.0 {
                    let qt = pow0(b.min(1.0), t);
                    match truncation {
                        None => PowerTail { head: &head, from: 0, coef: qt, exponent: s },
                        Some(n) => PowerTail { head: &head, from: n, coef: trunc_coef(n) * qt, exponent: 0.0 },
                    }
                } else {
                    let knee = coupling_knee(b, beta);
                    let bt = pow0(b, t);
                    match truncation {
                        None => PowerTail { head: &head, from: knee, coef: bt, exponent: s - beta * t },
                        Some(n) => PowerTail {
                            head: &head,
                            from: knee.max(n),
                            coef: trunc_coef(n) * bt,
                            exponent: -beta * t,
                        },
                    }
                };
                x_law.expect(tail)
            }
        }
    }
}

/// Signed Stirling numbers of the first kind `s(v, k)`, `k = 0..=v`.
fn stirling_first(v: u64) -> Vec<i128> {
    let mut row = vec![1i128];
    for j in 0..v {
        let mut next = vec![0i128; row.len() + 1];
        for (k, &c) in row.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= j as i128 * c;
        }
        row = next;
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layer_model::TableEntry;
    use proptest::prelude::*;

    fn zipf_indep(gamma: f64, q: f64) -> LayerTypeLaw {
        LayerTypeLaw::independent(XLaw::zipf(gamma, 1), QLaw::Constant { q }).unwrap()
    }

    #[test]
    fn point_mass_moment() {
        let law = LayerTypeLaw::deterministic(5, 0.3).unwrap();
        let m = law.mixed_moment(MomentSpec::new(2.0, 1.0)).unwrap();
        assert!((m - 7.5).abs() < 1e-12);
    }

    #[test]
    fn finite_table_moment() {
        let law = LayerTypeLaw::independent(
            XLaw::Table { entries: vec![(2, 0.5), (4, 0.5)] },
            QLaw::Constant { q: 1.0 },
        )
        .unwrap();
        assert_eq!(law.mixed_moment(MomentSpec::new(1.0, 0.0)).unwrap(), 3.0);
    }

    #[test]
    fn divergent_power_moment_is_infinite() {
        let law = zipf_indep(2.4, 1.0);
        assert_eq!(law.mixed_moment(MomentSpec::new(3.0, 0.0)).unwrap(), f64::INFINITY);
        assert_eq!(law.mixed_moment(MomentSpec::new(2.4, 0.0)).unwrap(), f64::INFINITY);
        assert!(law.mixed_moment(MomentSpec::new(2.3, 0.0)).unwrap().is_finite());
    }

    #[test]
    fn zipf_moment_matches_partial_sum() {
        let law = zipf_indep(2.4, 0.5);
        let z = ZipfLaw::new(2.4, 1);
        for &(s, t) in &[(0.5, 1.0), (1.0, 0.0), (1.3, 2.0)] {
            let cutoff = 10_000_000u64;
            let partial: f64 = (1..=cutoff).map(|x| z.pmf(x) * (x as f64).powf(s)).sum::<f64>() * 0.5f64.powf(t);
            let exact = law.mixed_moment(MomentSpec::new(s, t)).unwrap();
            // remaining tail of the partial sum is below this bound
            let tail = (cutoff as f64).powf(s - 2.4) / (2.4 - s) / z.normalizer() * 0.5f64.powf(t);
            assert!(((exact - partial) / exact).abs() < 1e-6 + tail / exact, "s={s} t={t}");
        }
    }

    #[test]
    fn coupled_moment_matches_partial_sum() {
        let law = LayerTypeLaw::coupled(XLaw::zipf(3.0, 1), 5.0, 0.5).unwrap();
        let z = ZipfLaw::new(3.0, 1);
        let (s, t) = (2.0, 1.5);
        let partial: f64 = (1..=10_000_000u64)
            .map(|x| z.pmf(x) * (x as f64).powf(s) * coupled_q(x, 5.0, 0.5).powf(t))
            .sum();
        let exact = law.mixed_moment(MomentSpec::new(s, t)).unwrap();
        assert!(((exact - partial) / exact).abs() < 1e-6);
        // effective exponent s - beta t = 3.5 - 0.75 ... diverges once >= gamma
        assert_eq!(law.mixed_moment(MomentSpec::new(3.5, 1.0)).unwrap(), f64::INFINITY);
        assert!(law.mixed_moment(MomentSpec::new(3.4, 1.0)).unwrap().is_finite());
    }

    #[test]
    fn truncated_moments_are_finite_and_exact() {
        let law = zipf_indep(1.2, 0.7);
        let z = ZipfLaw::new(1.2, 1);
        let n = 50;
        let m = law.mixed_moment(MomentSpec::truncated(4.0, 2.0, n)).unwrap();
        let direct: f64 = (1..n).map(|x| z.pmf(x) * (x as f64).powi(4)).sum::<f64>()
            + (n as f64).powi(4) * z.survival(n);
        assert!(((m - direct * 0.49) / m).abs() < 1e-10);
    }

    #[test]
    fn truncated_falling_moment_table() {
        let law = LayerTypeLaw::table(vec![
            TableEntry { x: 3, q: 0.5, weight: 1.0 },
            TableEntry { x: 10, q: 0.2, weight: 3.0 },
        ])
        .unwrap();
        // (min(10,6))_3 = 120, (3)_3 = 6
        let m = law.truncated_falling_moment(6, 3, 2.0).unwrap();
        assert!((m - (0.25 * 6.0 * 0.25 + 0.75 * 120.0 * 0.04)).abs() < 1e-12);
    }

    #[test]
    fn falling_moment_via_stirling() {
        let law = zipf_indep(4.5, 0.5);
        let z = ZipfLaw::new(4.5, 1);
        let direct: f64 = (1..2_000_000u64).map(|x| z.pmf(x) * falling_factorial(x, 3)).sum::<f64>() * 0.125;
        let m = law.falling_moment(3, 3.0).unwrap();
        assert!(((m - direct) / direct).abs() < 1e-8);
        assert_eq!(zipf_indep(2.4, 0.5).falling_moment(3, 3.0).unwrap(), f64::INFINITY);
        assert_eq!(stirling_first(3), vec![0, 2, -3, 1]);
    }

    #[test]
    fn beta_q_moment() {
        // E[Q] for Beta(2, 3) = 2/5; E[Q^2] = a(a+1)/((a+b)(a+b+1)) = 6/30
        let q = QLaw::Beta { a: 2.0, b: 3.0 };
        assert!((q.moment(1.0) - 0.4).abs() < 1e-12);
        assert!((q.moment(2.0) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn negative_exponents_are_rejected() {
        let law = zipf_indep(2.0, 0.5);
        assert!(matches!(law.mixed_moment(MomentSpec::new(-1.0, 0.0)), Err(LawError::InvalidMoment(_))));
    }

    proptest! {
        #[test]
        fn moment_nonincreasing_in_t(s in 0.0f64..2.0, t1 in 0.0f64..4.0, dt in 0.0f64..3.0, kind in 0usize..3) {
            let law = match kind {
                0 => zipf_indep(2.5, 0.6),
                1 => LayerTypeLaw::coupled(XLaw::zipf(2.5, 2), 2.0, 0.7).unwrap(),
                _ => LayerTypeLaw::independent(XLaw::Uniform { lo: 0, hi: 20 }, QLaw::Beta { a: 1.5, b: 2.0 }).unwrap(),
            };
            let a = law.mixed_moment(MomentSpec::new(s, t1)).unwrap();
            let b = law.mixed_moment(MomentSpec::new(s, t1 + dt)).unwrap();
            prop_assert!(b <= a * (1.0 + 1e-12));
        }

        #[test]
        fn truncated_moment_always_finite(s in 0.0f64..12.0, t in 0.0f64..6.0, n in 1u64..2000) {
            for law in [zipf_indep(1.1, 0.9), LayerTypeLaw::coupled(XLaw::zipf(1.5, 1), 3.0, 0.2).unwrap()] {
                let m = law.mixed_moment(MomentSpec::truncated(s, t, n)).unwrap();
                prop_assert!(m.is_finite());
                prop_assert!(m <= (n as f64).powf(s) * (1.0 + 1e-9));
            }
        }
    }
}
