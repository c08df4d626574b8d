//! Flat, per-layer, monochromatic and polychromatic copy counts.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{count_in_graph_with_budget, for_each_copy, CountBudget, Motif, MotifError};
use crate::graph_core::ColoredMultigraph;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountReport {
    /// Copies in the flat graph.
    pub n_f: u64,
    /// Copies inside each layer.
    pub per_layer: Vec<u64>,
    /// Sum of `per_layer`.
    pub s_tilde: u64,
    /// Flat copies inside one layer with every edge single-colored.
    pub mono: u64,
    /// `n_f - mono`.
    pub poly: u64,
    /// Colorings of flat copies that are not a single layer's copy.
    pub poly_star: u64,
}

impl CountReport {
    /// `n_f = mono + poly` and `mono <= s_tilde <= mono + poly_star`.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.n_f != self.mono + self.poly {
            return Err(format!("n_f {} != mono {} + poly {}", self.n_f, self.mono, self.poly));
        }
        if self.s_tilde != self.per_layer.iter().sum::<u64>() {
            return Err("s_tilde differs from the per-layer sum".into());
        }
        if self.mono > self.s_tilde || self.s_tilde > self.mono + self.poly_star {
            return Err(format!(
                "expected mono {} <= s_tilde {} <= mono + poly_star {}",
                self.mono,
                self.s_tilde,
                self.mono + self.poly_star
            ));
        }
        Ok(())
    }
}

pub fn count_report(motif: &Motif, g: &ColoredMultigraph) -> Result<CountReport, MotifError> {
    count_report_with_budget(motif, g, CountBudget::default())
}

pub fn count_report_with_budget(
    motif: &Motif,
    g: &ColoredMultigraph,
    budget: CountBudget,
) -> Result<CountReport, MotifError> {
    if !motif.is_two_connected() {
        return Err(MotifError::NotTwoConnected);
    }
    let v = motif.vertex_count();
    let per_layer = g
        .layers()
        .par_iter()
        .with_min_len(32)
        .map(|layer| {
            if layer.vertices.len() < v || layer.edges.len() < motif.edge_count() {
                Ok(0)
            } else {
                count_in_graph_with_budget(motif, &layer.local_graph(), budget)
            }
        })
        .collect::<Result<Vec<u64>, _>>()?;
    let s_tilde = per_layer.iter().sum();

    let (mut n_f, mut mono, mut poly_star) = (0u64, 0u64, 0u64);
    let mut common: Vec<u32> = Vec::new();
    for_each_copy(motif, g.flat(), budget, |edges| {
        n_f += 1;
        let mut product = 1u64;
        common.clear();
        common.extend_from_slice(g.colors(edges[0].0, edges[0].1));
        for &(a, b) in edges {
            let cs = g.colors(a, b);
            product = product.saturating_mul(cs.len() as u64);
            common.retain(|c| cs.binary_search(c).is_ok());
        }
        if product == 1 && common.len() == 1 {
            mono += 1;
        }
        poly_star += product - common.len() as u64;
    })?;

    Ok(CountReport { n_f, per_layer, s_tilde, mono, poly: n_f - mono, poly_star })
}

/// Counts by exhaustive search over vertex tuples and explicit colorings.
///
/// Only usable for tiny hosts; serves as a reference for the fast path.
pub fn count_report_reference(motif: &Motif, g: &ColoredMultigraph) -> CountReport {
    let v = motif.vertex_count();
    let n = g.n() as u32;
    let copies_in = |has: &dyn Fn(u32, u32) -> bool| {
        let mut seen = BTreeSet::new();
        let mut phi = vec![0u32; v];
        tuples(0, n, &mut phi, &mut |phi| {
            if motif.edges().iter().all(|&(a, b)| has(phi[a], phi[b])) {
                let mut es: Vec<(u32, u32)> =
                    motif.edges().iter().map(|&(a, b)| (phi[a].min(phi[b]), phi[a].max(phi[b]))).collect();
                es.sort_unstable();
                seen.insert(es);
            }
        });
        seen
    };
    let flat = copies_in(&|a, b| !g.colors(a, b).is_empty());
    let per_layer: Vec<u64> = g
        .layers()
        .iter()
        .map(|layer| {
            let key = |a: u32, b: u32| (a.min(b), a.max(b));
            copies_in(&|a, b| layer.edges.binary_search(&key(a, b)).is_ok()).len() as u64
        })
        .collect();

    let (mut mono, mut poly_star) = (0u64, 0u64);
    for copy in &flat {
        let sets: Vec<&[u32]> = copy.iter().map(|&(a, b)| g.colors(a, b)).collect();
        let single_layer = sets.iter().all(|s| s.len() == 1) && sets.iter().all(|s| s[0] == sets[0][0]);
        if single_layer {
            mono += 1;
        }
        // every choice of one color per edge; only uniform choices are layer copies
        let mut choice = vec![0usize; sets.len()];
        loop {
            let first = sets[0][choice[0]];
            if !sets.iter().zip(&choice).all(|(s, &c)| s[c] == first) {
                poly_star += 1;
            }
            let mut i = 0;
            while i < sets.len() {
                choice[i] += 1;
                if choice[i] < sets[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == sets.len() {
                break;
            }
        }
    }
    let n_f = flat.len() as u64;
    CountReport { n_f, s_tilde: per_layer.iter().sum(), per_layer, mono, poly: n_f - mono, poly_star }
}

fn tuples(i: usize, n: u32, phi: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
    if i == phi.len() {
        f(phi);
        return;
    }
    for c in 0..n {
        if !phi[..i].contains(&c) {
            phi[i] = c;
            tuples(i + 1, n, phi, f);
        }
    }
}
