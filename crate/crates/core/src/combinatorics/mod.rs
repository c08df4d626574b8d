//! Extremal edge counts, edge-set partitions of a motif, and the exact
//! overlap quantity `h_F`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layer_model::{LawError, LayerTypeLaw};
use crate::motif::Motif;
use crate::special::{falling_factorial, pairs};

/// Largest motif edge count whose partitions are enumerated.
pub const MAX_PARTITION_EDGES: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CombinatoricsError {
    #[error("motif has {0} edges; partition enumeration supports at most {MAX_PARTITION_EDGES}")]
    TooManyEdges(usize),
    #[error("clique order {0} outside the exhaustive range 3..=5")]
    KOutOfBudget(usize),
    #[error(transparent)]
    Law(#[from] LawError),
}

/// The fewest vertices a graph with `b` edges can have, with an extremal graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BStar {
    pub b: u64,
    /// Largest `k` with `C(k, 2) <= b`.
    pub k_b: u64,
    /// `b - C(k_b, 2)`.
    pub delta_b: u64,
    pub b_star: u64,
    /// `K_{k_b}` plus a vertex joined to `delta_b` clique vertices.
    pub h_b: Vec<(u64, u64)>,
}

pub fn b_star(b: u64) -> BStar {
    assert!(b >= 1, "b must be positive");
    let mut k = ((1.0 + (1.0 + 8.0 * b as f64).sqrt()) / 2.0) as u64;
    while pairs(k) > b {
        k -= 1;
    }
    while pairs(k + 1) <= b {
        k += 1;
    }
    let delta = b - pairs(k);
    let mut h_b: Vec<(u64, u64)> = (0..k).flat_map(|a| (a + 1..k).map(move |c| (a, c))).collect();
    h_b.extend((0..delta).map(|a| (a, k)));
    BStar { b, k_b: k, delta_b: delta, b_star: if delta == 0 { k } else { k + 1 }, h_b }
}

/// Minimum number of non-isolated vertices over all graphs with `b` edges,
/// found by scanning every edge subset of `K_6`. Valid for `b <= 15`.
pub fn brute_force_min_vertices(b: u64) -> u64 {
    assert!((1..=15).contains(&b), "brute force covers 1 <= b <= 15");
    let edges: Vec<(u32, u32)> = (0..6).flat_map(|a| (a + 1..6).map(move |c| (a, c))).collect();
    (0u32..1 << edges.len())
        .filter(|mask| mask.count_ones() as u64 == b)
        .map(|mask| {
            let touched = edges
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .fold(0u32, |acc, (_, &(a, c))| acc | 1 << a | 1 << c);
            touched.count_ones() as u64
        })
        .min()
        .unwrap()
}

/// Values of `b <= b_max` (at most 15) where `b_star` disagrees with brute force.
pub fn verify_b_star_minimality(b_max: u64) -> Vec<u64> {
    (1..=b_max.min(15)).filter(|&b| b_star(b).b_star != brute_force_min_vertices(b)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperadditivityCounterexample {
    pub s: u64,
    pub t: u64,
    pub lhs: u64,
    pub rhs: u64,
}

/// Checks `s* + t* >= (s + t - 1)* + 2` for `1 <= t <= s <= s_max`.
pub fn verify_superadditivity(s_max: u64) -> Vec<SuperadditivityCounterexample> {
    verify_superadditivity_with(s_max, |b| b_star(b).b_star)
}

/// Same as [`verify_superadditivity`] with a substitute for `b*`.
pub fn verify_superadditivity_with(s_max: u64, star: impl Fn(u64) -> u64) -> Vec<SuperadditivityCounterexample> {
    let mut bad = Vec::new();
    for s in 1..=s_max {
        for t in 1..=s {
            let lhs = star(s) + star(t);
            let rhs = star(s + t - 1) + 2;
            if lhs < rhs {
                bad.push(SuperadditivityCounterexample { s, t, lhs, rhs });
            }
        }
    }
    bad
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStats {
    /// Edges in the block.
    pub b: u64,
    /// Vertices incident to the block.
    pub v: u64,
    /// Connected components of the block's graph.
    pub rho: u64,
    /// Bit `i` set when motif edge `i` is in the block.
    pub edge_mask: u16,
}

/// An edge partition with at least two blocks, without colors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSkeleton {
    /// Block index of each motif edge (restricted growth string).
    pub assignment: Vec<u8>,
    pub blocks: Vec<BlockStats>,
}

impl PartitionSkeleton {
    pub fn r(&self) -> usize {
        self.blocks.len()
    }
}

/// Set partitions of the motif's edges with `2 <= r <= r_max` blocks.
pub struct PartitionIter<'a> {
    motif: &'a Motif,
    rgs: Vec<u8>,
    maxes: Vec<u8>,
    r_max: usize,
    done: bool,
}

pub fn enumerate_partitions(motif: &Motif, r_max: Option<usize>) -> Result<PartitionIter<'_>, CombinatoricsError> {
    let e = motif.edge_count();
    if e > MAX_PARTITION_EDGES {
        return Err(CombinatoricsError::TooManyEdges(e));
    }
    Ok(PartitionIter {
        motif,
        rgs: vec![0; e],
        maxes: vec![0; e],
        r_max: r_max.unwrap_or(e),
        done: e < 2,
    })
}

impl PartitionIter<'_> {
    /// Advances to the next restricted growth string; false when exhausted.
    fn advance(&mut self) -> bool {
        let e = self.rgs.len();
        let mut i = e;
        while i > 1 {
            i -= 1;
            let limit = self.maxes[i - 1] + 1;
            if self.rgs[i] < limit && (self.rgs[i] as usize) + 1 < self.r_max {
                self.rgs[i] += 1;
                self.maxes[i] = self.maxes[i - 1].max(self.rgs[i]);
                for j in i + 1..e {
                    self.rgs[j] = 0;
                    self.maxes[j] = self.maxes[i];
                }
                return true;
            }
        }
        false
    }

    fn skeleton(&self) -> PartitionSkeleton {
        let r = *self.maxes.last().unwrap() as usize + 1;
        let edges = self.motif.edges();
        let blocks = (0..r)
            .map(|blk| {
                let mut parent: Vec<usize> = (0..self.motif.vertex_count()).collect();
                fn find(p: &mut [usize], x: usize) -> usize {
                    let mut x = x;
                    while p[x] != x {
                        p[x] = p[p[x]];
                        x = p[x];
                    }
                    x
                }
                let (mut b, mut touched, mut mask, mut merges) = (0u64, 0u16, 0u16, 0u64);
                for (i, &(u, w)) in edges.iter().enumerate() {
                    if self.rgs[i] as usize != blk {
                        continue;
                    }
                    b += 1;
                    mask |= 1 << i;
                    touched |= 1 << u | 1 << w;
                    let (ru, rw) = (find(&mut parent, u), find(&mut parent, w));
                    if ru != rw {
                        parent[ru] = rw;
                        merges += 1;
                    }
                }
                let v = touched.count_ones() as u64;
                BlockStats { b, v, rho: v - merges, edge_mask: mask }
            })
            .collect();
        PartitionSkeleton { assignment: self.rgs.clone(), blocks }
    }
}

impl Iterator for PartitionIter<'_> {
    type Item = PartitionSkeleton;

    fn next(&mut self) -> Option<PartitionSkeleton> {
        // the all-zero string is the single-block partition and is skipped
        if self.done || !self.advance() {
            self.done = true;
            return None;
        }
        Some(self.skeleton())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionCounterexample {
    pub assignment: Vec<u8>,
    pub reason: String,
}

/// Checks `sum v_j >= v_F + sum rho_j` and `b_j >= v_j - rho_j` for every partition.
pub fn verify_partition_inequalities(motif: &Motif) -> Result<Vec<PartitionCounterexample>, CombinatoricsError> {
    let mut bad = Vec::new();
    let v_f = motif.vertex_count() as u64;
    for p in enumerate_partitions(motif, None)? {
        let sum_v: u64 = p.blocks.iter().map(|s| s.v).sum();
        let sum_rho: u64 = p.blocks.iter().map(|s| s.rho).sum();
        if sum_v < v_f + sum_rho {
            bad.push(PartitionCounterexample {
                assignment: p.assignment.clone(),
                reason: format!("sum v_j = {sum_v} < v_F + sum rho_j = {}", v_f + sum_rho),
            });
        }
        for s in &p.blocks {
            if s.b + s.rho < s.v {
                bad.push(PartitionCounterexample {
                    assignment: p.assignment.clone(),
                    reason: format!("block with b = {}, v = {}, rho = {}", s.b, s.v, s.rho),
                });
            }
        }
    }
    Ok(bad)
}

/// Checks `sum b_j* >= (C(k,2) - (r-1))* + 2(r-1) >= k + r` over edge partitions of `K_k`.
pub fn verify_clique_partition_bound(k: usize) -> Result<Vec<PartitionCounterexample>, CombinatoricsError> {
    verify_clique_partition_bound_with(k, |b| b_star(b).b_star)
}

pub fn verify_clique_partition_bound_with(
    k: usize,
    star: impl Fn(u64) -> u64,
) -> Result<Vec<PartitionCounterexample>, CombinatoricsError> {
    if !(3..=5).contains(&k) {
        return Err(CombinatoricsError::KOutOfBudget(k));
    }
    let clique = Motif::clique(k);
    let kappa = pairs(k as u64);
    let mut bad = Vec::new();
    for p in enumerate_partitions(&clique, None)? {
        let r = p.r() as u64;
        let lhs: u64 = p.blocks.iter().map(|s| star(s.b)).sum();
        let mid = star(kappa - (r - 1)) + 2 * (r - 1);
        let rhs = k as u64 + r;
        if lhs < mid || mid < rhs {
            bad.push(PartitionCounterexample {
                assignment: p.assignment,
                reason: format!("sum b_j* = {lhs}, middle = {mid}, k + r = {rhs}"),
            });
        }
    }
    Ok(bad)
}

/// Expected number of polychromatic colored copies sitting on one fixed flat
/// copy: the sum over partitions of `(m)_r prod_j E[(X~)_{v_j} Q^{b_j}] / (n)_{v_j}`.
pub fn h_f_exact(motif: &Motif, n: u64, m: u64, law: &LayerTypeLaw) -> Result<f64, CombinatoricsError> {
    let mut moments: HashMap<(u64, u64), f64> = HashMap::new();
    let mut total = 0.0;
    for p in enumerate_partitions(motif, None)? {
        let r = p.r() as u64;
        if r > m {
            continue;
        }
        let mut term = falling_factorial(m, r);
        for s in &p.blocks {
            let factor = match moments.get(&(s.v, s.b)) {
                Some(&f) => f,
                None => {
                    let f = law.truncated_falling_moment(n, s.v, s.b as f64)? / falling_factorial(n, s.v);
                    moments.insert((s.v, s.b), f);
                    f
                }
            };
            term *= factor;
        }
        total += term;
    }
    Ok(total)
}
