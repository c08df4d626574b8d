//! `sigma_F^2 = Var N_F` for a single layer.

use std::collections::HashSet;

use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{n_f_star, LimitsError};
use crate::graph_core::generate_layer;
use crate::layer_model::{LayerTypeLaw, MomentSpec};
use crate::motif::{count_in_graph, Motif};
use crate::special::{binomial, derive_seed, pairwise_sum};

/// Largest layer size handled by the exact method.
pub const EXACT_MAX_X: u64 = 30;
/// Largest motif handled by the exact method.
pub const EXACT_MAX_V: usize = 7;

const MC_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VarianceMethod {
    ExactSmall,
    MonteCarlo { draws: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub value: f64,
    /// Jackknife standard error; zero for the exact method.
    pub std_error: f64,
    /// `value == 0`: the limit theorem's positivity requirement fails.
    pub degenerate: bool,
    /// `Var N_F*` (exact method only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub between: Option<f64>,
    /// `E Var(N_F | X, Q)` (exact method only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub within: Option<f64>,
}

/// Counts of copies `F'` of the motif meeting a fixed copy `F_0` in `t`
/// vertices and `s` edges, for one fixed placement of the new vertices:
/// `profile[t][s]`.
pub fn overlap_profile(motif: &Motif) -> Vec<Vec<u64>> {
    let v = motif.vertex_count();
    let e = motif.edge_count();
    let mut profile = vec![vec![0u64; e + 1]; v + 1];
    let base: HashSet<(usize, usize)> = motif.edges().iter().copied().collect();
    for mask in 0u32..1 << v {
        let t = mask.count_ones() as usize;
        if t < 2 {
            continue;
        }
        // shared vertices, then fresh labels v, v+1, ...
        let mut target: Vec<usize> = (0..v).filter(|&a| mask >> a & 1 == 1).collect();
        target.extend(v..v + (v - t));
        let mut seen = HashSet::new();
        let mut perm: Vec<usize> = (0..v).collect();
        permutations(&mut perm, 0, &mut |p| {
            let mut es: Vec<(usize, usize)> = motif
                .edges()
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (target[p[a]], target[p[b]]);
                    (x.min(y), x.max(y))
                })
                .collect();
            es.sort_unstable();
            if seen.insert(es.clone()) {
                let shared = es.iter().filter(|ed| base.contains(ed)).count();
                profile[t][shared] += 1;
            }
        });
    }
    profile
}

fn permutations(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, f);
        p.swap(k, i);
    }
}

/// `Var(N_F | x, q)` from the overlap profile.
fn conditional_variance(motif: &Motif, profile: &[Vec<u64>], x: u64, q: f64) -> f64 {
    let v = motif.vertex_count() as u64;
    let e = motif.edge_count() as i32;
    if x < v {
        return 0.0;
    }
    let mut per_copy = 0.0;
    for (t, row) in profile.iter().enumerate().skip(2) {
        let placements = binomial(x - v, v - t as u64);
        if placements == 0.0 {
            continue;
        }
        let inner: f64 = row
            .iter()
            .enumerate()
            .skip(1)
            .map(|(s, &c)| c as f64 * (q.powi(2 * e - s as i32) - q.powi(2 * e)))
            .sum();
        per_copy += placements * inner;
    }
    motif.copies_in_complete() as f64 * binomial(x, v) * per_copy
}

/// `Var N_F` for layers of untruncated size.
pub fn sigma_f_squared(motif: &Motif, law: &LayerTypeLaw, method: VarianceMethod) -> Result<VarianceEstimate, LimitsError> {
    sigma_f_squared_impl(motif, law, None, method)
}

/// `Var N_F` for layers on `min(X, n)` vertices.
pub fn sigma_f_squared_truncated(
    motif: &Motif,
    law: &LayerTypeLaw,
    n: u64,
    method: VarianceMethod,
) -> Result<VarianceEstimate, LimitsError> {
    sigma_f_squared_impl(motif, law, Some(n), method)
}

fn sigma_f_squared_impl(
    motif: &Motif,
    law: &LayerTypeLaw,
    n: Option<u64>,
    method: VarianceMethod,
) -> Result<VarianceEstimate, LimitsError> {
    let clip = |x: u64| n.map_or(x, |n| x.min(n));
    match method {
        VarianceMethod::ExactSmall => {
            let support = law
                .finite_support()
                .ok_or_else(|| LimitsError::MethodBudgetExceeded("exact method needs a finite-support law".into()))?;
            if let Some(&(x, _, _)) = support.iter().find(|&&(x, _, _)| clip(x) > EXACT_MAX_X) {
                return Err(LimitsError::MethodBudgetExceeded(format!("layer size {x} above {EXACT_MAX_X}")));
            }
            if motif.vertex_count() > EXACT_MAX_V {
                return Err(LimitsError::MethodBudgetExceeded(format!(
                    "motif with {} vertices above {EXACT_MAX_V}",
                    motif.vertex_count()
                )));
            }
            let profile = overlap_profile(motif);
            let (mut m1, mut m2, mut within) = (0.0, 0.0, 0.0);
            for &(x, q, p) in &support {
                let x = clip(x);
                let star: f64 = n_f_star(motif, x, q);
                m1 += p * star;
                m2 += p * star * star;
                within += p * conditional_variance(motif, &profile, x, q);
            }
            let between = (m2 - m1 * m1).max(0.0);
            let value = between + within;
            Ok(VarianceEstimate {
                value,
                std_error: 0.0,
                degenerate: value <= 1e-12 * m2.max(f64::MIN_POSITIVE),
                between: Some(between),
                within: Some(within),
            })
        }
        VarianceMethod::MonteCarlo { draws, seed } => {
            if draws < 3 {
                return Err(LimitsError::MethodBudgetExceeded("monte carlo needs at least 3 draws".into()));
            }
            if n.is_none() && law.finite_support().is_none() {
                let v = motif.vertex_count() as f64;
                let e = motif.edge_count() as f64;
                if law.mixed_moment(MomentSpec::new(2.0 * v, 2.0 * e))?.is_infinite() {
                    return Err(LimitsError::InfiniteVariance);
                }
            }
            let chunks = draws.div_ceil(MC_CHUNK);
            let counts: Vec<f64> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = crate::Rng::seed_from_u64(derive_seed(seed, c as u64));
                    let len = MC_CHUNK.min(draws - c * MC_CHUNK);
                    (0..len)
                        .map(|_| {
                            let (x, q) = law.sample(&mut rng);
                            let x = clip(x);
                            let layer = generate_layer(x as usize, 0, x, q, &mut rng);
                            count_in_graph(motif, &layer.local_graph()).map(|c| c as f64)
                        })
                        .collect::<Result<Vec<f64>, _>>()
                })
                .collect::<Result<Vec<Vec<f64>>, _>>()?
                .concat();
            let (value, std_error) = jackknife_variance(&counts);
            Ok(VarianceEstimate { value, std_error, degenerate: value == 0.0, between: None, within: None })
        }
    }
}

/// Sample variance and its jackknife standard error.
pub(crate) fn jackknife_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    let ss = pairwise_sum(&dev);
    let var = ss / (n - 1.0);
    // leave-one-out: SS_(i) = SS - n/(n-1) (x_i - mean)^2
    let loo: Vec<f64> = dev.iter().map(|d| (ss - n / (n - 1.0) * d) / (n - 2.0)).collect();
    let loo_mean = pairwise_sum(&loo) / n;
    let spread: Vec<f64> = loo.iter().map(|l| (l - loo_mean).powi(2)).collect();
    (var, ((n - 1.0) / n * pairwise_sum(&spread)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::SimpleGraph;
    use crate::layer_model::{QLaw, TableEntry, XLaw};
    use approx::assert_relative_eq;

    #[test]
    fn point_mass_complete_layer_is_degenerate() {
        let law = LayerTypeLaw::deterministic(3, 1.0).unwrap();
        let est = sigma_f_squared(&Motif::clique(3), &law, VarianceMethod::ExactSmall).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.degenerate);
    }

    /// Variance of the triangle count over all 64 graphs on 4 vertices with p = 1/2.
    fn exhaustive_k4_triangle_variance() -> f64 {
        let pairs: Vec<(u32, u32)> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
        let counts: Vec<f64> = (0u32..64)
            .map(|mask| {
                let g = SimpleGraph::from_edges(4, pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p));
                crate::motif::count_cliques(&g, 3) as f64
            })
            .collect();
        let mean = counts.iter().sum::<f64>() / 64.0;
        counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / 64.0
    }

    #[test]
    fn overlap_enumeration_matches_exhaustive_oracle() {
        let law = LayerTypeLaw::deterministic(4, 0.5).unwrap();
        let est = sigma_f_squared(&Motif::clique(3), &law, VarianceMethod::ExactSmall).unwrap();
        assert_eq!(est.between, Some(0.0));
        assert_relative_eq!(est.value, exhaustive_k4_triangle_variance(), max_relative = 1e-12);
    }

    #[test]
    fn overlap_profile_totals() {
        // every copy of F on a v-set touching F_0 in >= 2 vertices appears exactly once
        for m in [Motif::clique(3), Motif::cycle(4), Motif::cycle(5)] {
            let v = m.vertex_count() as u64;
            let profile = overlap_profile(&m);
            for (t, row) in profile.iter().enumerate().skip(2) {
                let total: u64 = row.iter().sum();
                assert_eq!(total, binomial(v, t as u64) as u64 * m.copies_in_complete());
            }
            // the copy itself is the only one sharing all edges
            assert_eq!(profile[v as usize][m.edge_count()], 1);
        }
    }

    #[test]
    fn complete_layers_have_no_conditional_variance() {
        let law = LayerTypeLaw::table(vec![
            TableEntry { x: 4, q: 1.0, weight: 0.5 },
            TableEntry { x: 7, q: 1.0, weight: 0.5 },
        ])
        .unwrap();
        let est = sigma_f_squared(&Motif::cycle(4), &law, VarianceMethod::ExactSmall).unwrap();
        assert_eq!(est.within, Some(0.0));
        // N* is 3 or 105 with equal weight
        assert_relative_eq!(est.value, 51.0f64.powi(2), max_relative = 1e-12);
    }

    #[test]
    fn exact_and_monte_carlo_agree() {
        let law = LayerTypeLaw::independent(XLaw::Table { entries: vec![(3, 0.5), (6, 0.5)] }, QLaw::Constant { q: 0.5 })
            .unwrap();
        let k3 = Motif::clique(3);
        let exact = sigma_f_squared(&k3, &law, VarianceMethod::ExactSmall).unwrap();
        let mc = sigma_f_squared(&k3, &law, VarianceMethod::MonteCarlo { draws: 200_000, seed: 5 }).unwrap();
        assert!(exact.between.unwrap() >= 0.0 && exact.within.unwrap() >= 0.0);
        assert!((exact.value - mc.value).abs() <= 3.0 * mc.std_error, "exact {} mc {} se {}", exact.value, mc.value, mc.std_error);
    }

    #[test]
    fn budgets_and_infinite_variance() {
        let big = LayerTypeLaw::deterministic(31, 0.5).unwrap();
        let k3 = Motif::clique(3);
        assert!(matches!(sigma_f_squared(&k3, &big, VarianceMethod::ExactSmall), Err(LimitsError::MethodBudgetExceeded(_))));
        assert!(sigma_f_squared_truncated(&k3, &big, 30, VarianceMethod::ExactSmall).is_ok());
        let heavy = LayerTypeLaw::independent(XLaw::zipf(2.4, 1), QLaw::Constant { q: 0.5 }).unwrap();
        let mc = VarianceMethod::MonteCarlo { draws: 100, seed: 1 };
        assert_eq!(sigma_f_squared(&k3, &heavy, mc), Err(LimitsError::InfiniteVariance));
        assert!(matches!(sigma_f_squared(&k3, &heavy, VarianceMethod::ExactSmall), Err(LimitsError::MethodBudgetExceeded(_))));
    }

    #[test]
    fn jackknife_of_known_sample() {
        let (var, se) = jackknife_variance(&[1.0, 2.0, 3.0, 4.0]);
        assert_relative_eq!(var, 5.0 / 3.0, max_relative = 1e-14);
        // leave-one-out variances: 7/3, 1, 1, 7/3
        let loo = [7.0 / 3.0, 1.0, 1.0, 7.0 / 3.0];
        let mean = loo.iter().sum::<f64>() / 4.0;
        let expected = (0.75 * loo.iter().map(|l| (l - mean).powi(2)).sum::<f64>()).sqrt();
        assert_relative_eq!(se, expected, max_relative = 1e-12);
    }
}
