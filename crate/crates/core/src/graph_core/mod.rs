//! Sampling the superposition graph and its colored multigraph.
//!
//! Vertices are `0..n` internally; every serialized form is 1-indexed.

mod dump;

use std::collections::HashMap;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::layer_model::LayerTypeLaw;

pub use dump::{read_dump, write_dump, DumpError};

/// Below this edge probability layers are generated by geometric skipping.
const SPARSE_Q: f64 = 0.25;

/// Simple undirected graph with sorted neighbor lists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SimpleGraph {
    adj: Vec<Vec<u32>>,
}

impl SimpleGraph {
    pub fn empty(n: usize) -> Self {
        SimpleGraph { adj: vec![Vec::new(); n] }
    }

    /// Builds a graph on `0..n`; duplicate pairs are merged.
    ///
    /// Panics on self-loops or out-of-range endpoints.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            assert!(u != v, "self-loop at {u}");
            assert!((u as usize) < n && (v as usize) < n, "edge ({u}, {v}) out of range");
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        SimpleGraph { adj }
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u as u32).map(move |&v| (u as u32, v)))
    }
}

/// One layer: a Bernoulli graph placed on a random vertex subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRealization {
    pub color: u32,
    /// Sorted, of size `min(x_drawn, n)`.
    pub vertices: Vec<u32>,
    /// Pairs `(u, v)` with `u < v`, lexicographically sorted.
    pub edges: Vec<(u32, u32)>,
    pub x_drawn: u64,
    pub q_drawn: f64,
}

impl LayerRealization {
    /// The layer as a graph on its own vertices, relabelled `0..vertices.len()`.
    pub fn local_graph(&self) -> SimpleGraph {
        let local = |v: u32| self.vertices.binary_search(&v).expect("edge endpoint in layer") as u32;
        SimpleGraph::from_edges(self.vertices.len(), self.edges.iter().map(|&(u, v)| (local(u), local(v))))
    }
}

/// Union of colored layers on `[n]`, keeping the color set of every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct ColoredMultigraph {
    n: usize,
    layers: Vec<LayerRealization>,
    flat: SimpleGraph,
    edge_colors: HashMap<(u32, u32), Vec<u32>>,
}

impl ColoredMultigraph {
    /// Assembles the flat graph and edge color sets from the layers.
    pub fn from_layers(n: usize, layers: Vec<LayerRealization>) -> Self {
        let mut edge_colors: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
        for layer in &layers {
            for &(u, v) in &layer.edges {
                edge_colors.entry((u, v)).or_default().push(layer.color);
            }
        }
        let flat = SimpleGraph::from_edges(n, edge_colors.keys().copied());
        ColoredMultigraph { n, layers, flat, edge_colors }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[LayerRealization] {
        &self.layers
    }

    pub fn flat(&self) -> &SimpleGraph {
        &self.flat
    }

    /// Colors of the parallel edges between `u` and `v` (empty if none).
    pub fn colors(&self, u: u32, v: u32) -> &[u32] {
        let key = if u < v { (u, v) } else { (v, u) };
        self.edge_colors.get(&key).map_or(&[], Vec::as_slice)
    }

    /// Total number of colored (parallel) edges.
    pub fn colored_edge_count(&self) -> usize {
        self.edge_colors.values().map(Vec::len).sum()
    }
}

/// Uniform `k`-subset of `0..n` by sparse partial Fisher-Yates, sorted.
fn uniform_subset<R: RngCore + ?Sized>(n: u32, k: u32, rng: &mut R) -> Vec<u32> {
    let mut swapped: HashMap<u32, u32> = HashMap::with_capacity(k as usize);
    let mut chosen = Vec::with_capacity(k as usize);
    for i in 0..k {
        let j = rng.random_range(i..n);
        let at_j = *swapped.get(&j).unwrap_or(&j);
        let at_i = *swapped.get(&i).unwrap_or(&i);
        swapped.insert(j, at_i);
        chosen.push(at_j);
    }
    chosen.sort_unstable();
    chosen
}

/// Draws one layer `G(min(x, n), q)` on a uniform random vertex subset of `[n]`.
pub fn generate_layer<R: RngCore + ?Sized>(n: usize, color: u32, x: u64, q: f64, rng: &mut R) -> LayerRealization {
    assert!(n >= 1 && n <= u32::MAX as usize, "vertex count {n} out of range");
    assert!((0.0..=1.0).contains(&q), "edge probability {q} outside [0, 1]");
    let k = x.min(n as u64) as u32;
    let vertices = if k as usize == n { (0..n as u32).collect() } else { uniform_subset(n as u32, k, rng) };
    let edges = bernoulli_pairs(&vertices, q, rng);
    LayerRealization { color, vertices, edges, x_drawn: x, q_drawn: q }
}

fn bernoulli_pairs<R: RngCore + ?Sized>(vertices: &[u32], q: f64, rng: &mut R) -> Vec<(u32, u32)> {
    let k = vertices.len();
    let mut edges = Vec::new();
    if k < 2 || q == 0.0 {
        return edges;
    }
    if q >= SPARSE_Q {
        for i in 0..k {
            for j in i + 1..k {
                if rng.random::<f64>() < q {
                    edges.push((vertices[i], vertices[j]));
                }
            }
        }
        return edges;
    }
    // geometric skipping over the lexicographic pair index
    let total = (k as u64) * (k as u64 - 1) / 2;
    let log_miss = (1.0 - q).ln();
    let (mut row, mut row_start) = (0usize, 0u64);
    let mut idx: u64 = 0;
    let mut first = true;
    loop {
        let u: f64 = rng.random();
        let skip = ((1.0 - u).ln() / log_miss).floor();
        if !skip.is_finite() || skip >= total as f64 {
            break;
        }
        idx = if first { skip as u64 } else { idx + 1 + skip as u64 };
        first = false;
        if idx >= total {
            break;
        }
        while idx >= row_start + (k - 1 - row) as u64 {
            row_start += (k - 1 - row) as u64;
            row += 1;
        }
        let col = row + 1 + (idx - row_start) as usize;
        edges.push((vertices[row], vertices[col]));
    }
    edges
}

/// Draws `m` independent layers and superposes them.
pub fn generate_supergraph<R: RngCore + ?Sized>(
    n: usize,
    m: usize,
    law: &LayerTypeLaw,
    rng: &mut R,
) -> ColoredMultigraph {
    assert!(n >= 1 && m >= 1, "need n >= 1 and m >= 1");
    let layers = (0..m)
        .map(|color| {
            let (x, q) = law.sample(rng);
            generate_layer(n, color as u32, x, q, rng)
        })
        .collect();
    ColoredMultigraph::from_layers(n, layers)
}

/// Number of layers whose drawn size exceeded `n`.
pub fn max_layer_overflow(g: &ColoredMultigraph) -> usize {
    g.layers.iter().filter(|l| l.x_drawn > g.n as u64).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layer_model::{QLaw, XLaw};
    use rand::SeedableRng;

    fn rng(seed: u64) -> crate::Rng {
        crate::Rng::seed_from_u64(seed)
    }

    #[test]
    fn empty_layer_for_zero_size() {
        let l = generate_layer(10, 0, 0, 0.5, &mut rng(1));
        assert!(l.vertices.is_empty() && l.edges.is_empty());
        let l = generate_layer(10, 0, 1, 1.0, &mut rng(1));
        assert_eq!(l.vertices.len(), 1);
        assert!(l.edges.is_empty());
    }

    #[test]
    fn truncated_complete_layer() {
        let l = generate_layer(5, 0, 8, 1.0, &mut rng(2));
        assert_eq!(l.vertices, vec![0, 1, 2, 3, 4]);
        assert_eq!(l.edges.len(), 10);
        assert_eq!(l.x_drawn, 8);
    }

    #[test]
    fn layer_invariants_hold() {
        let mut r = rng(3);
        for &q in &[0.05, 0.2, 0.5, 0.9] {
            for x in [2u64, 7, 30, 100] {
                let l = generate_layer(40, 3, x, q, &mut r);
                assert_eq!(l.vertices.len() as u64, x.min(40));
                assert!(l.vertices.windows(2).all(|w| w[0] < w[1]));
                assert!(l.edges.windows(2).all(|w| w[0] < w[1]));
                for &(u, v) in &l.edges {
                    assert!(u < v);
                    assert!(l.vertices.binary_search(&u).is_ok() && l.vertices.binary_search(&v).is_ok());
                }
            }
        }
    }

    #[test]
    fn edge_count_mean_is_binomial() {
        // dense and sparse generation paths
        for &(q, seed) in &[(0.4, 5u64), (0.1, 6)] {
            let mut r = rng(seed);
            let draws = 100_000;
            let pairs = 45.0;
            let total: usize = (0..draws).map(|_| generate_layer(30, 0, 10, q, &mut r).edges.len()).sum();
            let mean = total as f64 / draws as f64;
            let se = (pairs * q * (1.0 - q) / draws as f64).sqrt();
            assert!((mean - pairs * q).abs() < 3.0 * se, "q={q} mean={mean}");
        }
    }

    #[test]
    fn sparse_path_pair_frequencies_are_uniform() {
        let mut r = rng(8);
        let mut hits = vec![0usize; 10];
        let draws = 200_000;
        for _ in 0..draws {
            let l = generate_layer(5, 0, 5, 0.1, &mut r);
            for (u, v) in l.edges {
                let idx = match (u, v) {
                    (0, v) => v as usize - 1,
                    (1, v) => 2 + v as usize,
                    (2, v) => 4 + v as usize,
                    (3, 4) => 9,
                    _ => unreachable!(),
                };
                hits[idx] += 1;
            }
        }
        let se = (0.1 * 0.9 / draws as f64).sqrt();
        for h in hits {
            assert!((h as f64 / draws as f64 - 0.1).abs() < 4.0 * se);
        }
    }

    #[test]
    fn subset_uniformity_chi_square() {
        // all C(6,3) = 20 subsets, 1e5 draws, chi-square with 19 dof at 0.001 is 43.82
        let mut r = rng(9);
        let mut counts: HashMap<Vec<u32>, usize> = HashMap::new();
        let draws = 100_000;
        for _ in 0..draws {
            *counts.entry(uniform_subset(6, 3, &mut r)).or_default() += 1;
        }
        assert_eq!(counts.len(), 20);
        let expected = draws as f64 / 20.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 43.82, "chi2 = {chi2}");
    }

    #[test]
    fn single_layer_supergraph_is_monochromatic() {
        let law = LayerTypeLaw::deterministic(6, 0.5).unwrap();
        let g = generate_supergraph(10, 1, &law, &mut rng(4));
        assert_eq!(g.flat().edge_count(), g.layers()[0].edges.len());
        for (u, v) in g.flat().edges() {
            assert_eq!(g.colors(u, v), &[0]);
        }
    }

    #[test]
    fn full_layers_give_complete_graph() {
        let law = LayerTypeLaw::deterministic(7, 1.0).unwrap();
        let g = generate_supergraph(7, 3, &law, &mut rng(4));
        assert_eq!(g.flat().edge_count(), 21);
        assert_eq!(g.colored_edge_count(), 63);
        assert_eq!(g.colors(6, 0), &[0, 1, 2]);
    }

    #[test]
    fn multigraph_invariants_and_flattening_fixed_point() {
        let law = LayerTypeLaw::independent(XLaw::Uniform { lo: 0, hi: 8 }, QLaw::Beta { a: 2.0, b: 2.0 }).unwrap();
        let mut r = rng(12);
        for _ in 0..200 {
            let g = generate_supergraph(12, 4, &law, &mut r);
            let layer_edges: usize = g.layers().iter().map(|l| l.edges.len()).sum();
            assert_eq!(g.colored_edge_count(), layer_edges);
            for (u, v) in g.flat().edges() {
                assert!(!g.colors(u, v).is_empty());
            }
            for l in g.layers() {
                for &(u, v) in &l.edges {
                    assert!(g.flat().has_edge(u, v));
                }
            }
            let rebuilt = ColoredMultigraph::from_layers(g.n(), g.layers().to_vec());
            assert_eq!(rebuilt, g);
        }
    }

    #[test]
    fn flat_edge_probability_matches_exact_pair_oracle() {
        // n=8, m=4, X=4, Q=0.7: a fixed pair is covered by one layer's vertex set
        // with probability found by enumerating the 70 subsets, then open w.p. 0.7
        let (n, m, q) = (8usize, 4usize, 0.7);
        let p_cover: f64 = {
            // exhaustive over all C(8,4) = 70 vertex subsets
            let mut hit = 0;
            let mut total = 0;
            for mask in 0u32..256 {
                if mask.count_ones() == 4 {
                    total += 1;
                    if mask & 0b11 == 0b11 {
                        hit += 1;
                    }
                }
            }
            hit as f64 / total as f64
        };
        let p_edge = 1.0 - (1.0 - q * p_cover).powi(m as i32);
        let expected = 28.0 * p_edge;
        let law = LayerTypeLaw::deterministic(4, q).unwrap();
        let mut r = rng(13);
        let draws = 100_000;
        let samples: Vec<f64> =
            (0..draws).map(|_| generate_supergraph(n, m, &law, &mut r).flat().edge_count() as f64).collect();
        let mean = samples.iter().sum::<f64>() / draws as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        let se = (var / draws as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * se, "mean {mean} expected {expected}");
    }

    #[test]
    fn layers_are_independent() {
        // correlation between "pair {0,1} present in layer 0" and "... in layer 1"
        let law = LayerTypeLaw::deterministic(4, 0.6).unwrap();
        let mut r = rng(14);
        let draws = 100_000;
        let (mut a, mut b, mut ab) = (0.0, 0.0, 0.0);
        for _ in 0..draws {
            let g = generate_supergraph(6, 2, &law, &mut r);
            let x = g.layers()[0].edges.contains(&(0, 1)) as u8 as f64;
            let y = g.layers()[1].edges.contains(&(0, 1)) as u8 as f64;
            a += x;
            b += y;
            ab += x * y;
        }
        let (pa, pb) = (a / draws as f64, b / draws as f64);
        let cov = ab / draws as f64 - pa * pb;
        let corr = cov / (pa * (1.0 - pa) * pb * (1.0 - pb)).sqrt();
        assert!(corr.abs() < 4.0 / (draws as f64).sqrt(), "corr {corr}");
    }

    #[test]
    fn overflow_counts_layers_beyond_n() {
        let layers = [3u64, 9, 6]
            .iter()
            .enumerate()
            .map(|(c, &x)| LayerRealization {
                color: c as u32,
                vertices: (0..x.min(5) as u32).collect(),
                edges: vec![],
                x_drawn: x,
                q_drawn: 0.0,
            })
            .collect();
        let g = ColoredMultigraph::from_layers(5, layers);
        assert_eq!(max_layer_overflow(&g), 2);
        let law = LayerTypeLaw::deterministic(5, 0.5).unwrap();
        assert_eq!(max_layer_overflow(&generate_supergraph(5, 10, &law, &mut rng(1))), 0);
    }

    #[test]
    fn overflow_frequency_matches_tail_sum() {
        let z = crate::layer_model::ZipfLaw::new(2.4, 1);
        let law = LayerTypeLaw::independent(XLaw::Zipf(z.clone()), QLaw::Constant { q: 0.0 }).unwrap();
        let (n, m) = (200usize, 200usize);
        let p_over = z.survival(n as u64 + 1);
        let mut r = rng(15);
        let reps = 5000;
        let total: usize = (0..reps).map(|_| max_layer_overflow(&generate_supergraph(n, m, &law, &mut r))).sum();
        let mean = total as f64 / reps as f64;
        let expected = m as f64 * p_over;
        let se = (expected * (1.0 - p_over) / reps as f64).sqrt();
        assert!((mean - expected).abs() < 4.0 * se, "mean {mean} expected {expected}");
    }

    #[test]
    fn generation_is_deterministic() {
        let law = LayerTypeLaw::independent(XLaw::zipf(2.4, 1), QLaw::Constant { q: 0.3 }).unwrap();
        let a = generate_supergraph(50, 20, &law, &mut rng(99));
        let b = generate_supergraph(50, 20, &law, &mut rng(99));
        assert_eq!(a, b);
    }
}
