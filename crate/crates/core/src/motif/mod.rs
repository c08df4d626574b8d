//! Pattern graphs `F`: structural analysis, copy counting and the
//! monochromatic/polychromatic split in the colored multigraph.

mod count;
mod density;
mod report;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::factorial;

pub use count::{
    count_cycles, count_cliques, count_general, count_in_graph, count_in_graph_with_budget, for_each_copy,
    CountBudget,
};
pub use density::{clustering_coefficient, density_functionals, ClusteringCoefficient, DensityFunctionals};
pub use report::{count_report, count_report_reference, count_report_with_budget, CountReport};

/// Largest supported motif.
pub const MAX_MOTIF_VERTICES: usize = 10;

/// Automorphism lists longer than this are not materialized.
const MAX_STORED_AUTOMORPHISMS: u64 = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MotifError {
    #[error("malformed motif: {0}")]
    Malformed(String),
    #[error("motif is not 2-connected")]
    NotTwoConnected,
    #[error("host has {vertices} vertices, above the general-pattern budget of {budget}")]
    HostTooLarge { vertices: usize, budget: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotifShape {
    Clique,
    Cycle,
    General,
}

/// An analyzed pattern graph on vertices `0..v`.
#[derive(Debug, Clone)]
pub struct Motif {
    v: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<u16>,
    shape: MotifShape,
    aut_order: u64,
    automorphisms: Option<Vec<Vec<u8>>>,
    /// Distinct `(v_H, e_H)` over induced subgraphs with at least one edge.
    subgraph_classes: Vec<(usize, usize)>,
    max_density: (usize, usize),
    two_connected: bool,
    balanced: bool,
    max_degree: usize,
}

impl PartialEq for Motif {
    fn eq(&self, other: &Self) -> bool {
        self.v == other.v && self.edges == other.edges
    }
}

/// Motif description as accepted in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MotifSpec {
    /// `K3`..`K10`, `C3`..`C10`, or the text format `v` followed by `u v` lines.
    Text(String),
    /// 1-indexed edge list.
    Explicit { vertices: usize, edges: Vec<[usize; 2]> },
}

impl MotifSpec {
    pub fn build(&self) -> Result<Motif, MotifError> {
        match self {
            MotifSpec::Text(s) => Motif::parse(s),
            MotifSpec::Explicit { vertices, edges } => {
                let zero = edges
                    .iter()
                    .map(|&[u, v]| {
                        if u == 0 || v == 0 {
                            Err(MotifError::Malformed("edge endpoints are 1-indexed".into()))
                        } else {
                            Ok((u - 1, v - 1))
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Motif::new(*vertices, &zero)
            }
        }
    }
}

impl Motif {
    /// Analyzes the simple graph on `0..vertices` with the given edges.
    pub fn new(vertices: usize, edges: &[(usize, usize)]) -> Result<Self, MotifError> {
        if vertices < 2 {
            return Err(MotifError::Malformed(format!("need at least 2 vertices, got {vertices}")));
        }
        if vertices > MAX_MOTIF_VERTICES {
            return Err(MotifError::Malformed(format!(
                "at most {MAX_MOTIF_VERTICES} vertices supported, got {vertices}"
            )));
        }
        let mut adj = vec![0u16; vertices];
        let mut list = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= vertices || b >= vertices {
                return Err(MotifError::Malformed(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(MotifError::Malformed(format!("self-loop at {a}")));
            }
            if adj[a] >> b & 1 == 1 {
                return Err(MotifError::Malformed(format!("duplicate edge ({a}, {b})")));
            }
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        let e = list.len();
        let max_degree = adj.iter().map(|m| m.count_ones() as usize).max().unwrap_or(0);
        let full = (1u16 << vertices) - 1;
        let connected = is_connected(&adj, full);
        let shape = if e == vertices * (vertices - 1) / 2 {
            MotifShape::Clique
        } else if vertices >= 3 && e == vertices && connected && adj.iter().all(|m| m.count_ones() == 2) {
            MotifShape::Cycle
        } else {
            MotifShape::General
        };
        let two_connected =
            vertices >= 3 && connected && (0..vertices).all(|x| is_connected(&adj, full & !(1 << x)));

        let mut classes = BTreeSet::new();
        for mask in 1u16..=full {
            let vs = mask.count_ones() as usize;
            let es = induced_edges(&adj, mask);
            if es >= 1 {
                classes.insert((vs, es));
            }
        }
        let subgraph_classes: Vec<_> = classes.into_iter().collect();
        let max_density = *subgraph_classes
            .iter()
            .max_by(|a, b| (a.1 * b.0).cmp(&(b.1 * a.0)))
            .unwrap_or(&(vertices, 0));
        let balanced = e >= 1 && e * max_density.0 == max_density.1 * vertices;

        let (aut_order, automorphisms) = automorphisms(&adj);

        Ok(Motif {
            v: vertices,
            edges: list,
            adj,
            shape,
            aut_order,
            automorphisms,
            subgraph_classes,
            max_density,
            two_connected,
            balanced,
            max_degree,
        })
    }

    pub fn clique(k: usize) -> Self {
        let edges: Vec<_> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect();
        Motif::new(k, &edges).expect("valid clique")
    }

    pub fn cycle(k: usize) -> Self {
        let edges: Vec<_> = (0..k).map(|a| (a, (a + 1) % k)).collect();
        Motif::new(k, &edges).expect("valid cycle")
    }

    /// Built-in name (`K3`, `C5`, ...) or the text format.
    pub fn parse(text: &str) -> Result<Self, MotifError> {
        let t = text.trim();
        if let Some(m) = Self::builtin(t) {
            return Ok(m);
        }
        Self::parse_text(t)
    }

    /// `K2..K10` and `C3..C10`.
    pub fn builtin(name: &str) -> Option<Self> {
        let (kind, rest) = name.split_at(name.char_indices().nth(1).map_or(name.len(), |(i, _)| i));
        let k: usize = rest.parse().ok()?;
        match kind {
            "K" | "k" if (2..=MAX_MOTIF_VERTICES).contains(&k) => Some(Self::clique(k)),
            "C" | "c" if (3..=MAX_MOTIF_VERTICES).contains(&k) => Some(Self::cycle(k)),
            _ => None,
        }
    }

    /// `v_F` on the first line, then one 1-indexed edge `u v` per line.
    pub fn parse_text(text: &str) -> Result<Self, MotifError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let bad = |msg: String| MotifError::Malformed(msg);
        let v: usize = lines
            .next()
            .ok_or_else(|| bad("empty motif description".into()))?
            .parse()
            .map_err(|_| bad(format!("unknown motif `{text}`")))?;
        let mut edges = Vec::new();
        for line in lines {
            let nums: Vec<usize> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| bad(format!("bad edge line `{line}`")))?;
            match nums[..] {
                [a, b] if a >= 1 && b >= 1 => edges.push((a - 1, b - 1)),
                _ => return Err(bad(format!("bad edge line `{line}`"))),
            }
        }
        Motif::new(v, &edges)
    }

    /// `v_F`.
    pub fn vertex_count(&self) -> usize {
        self.v
    }

    /// `e_F`.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a] >> b & 1 == 1
    }

    pub fn degree(&self, a: usize) -> usize {
        self.adj[a].count_ones() as usize
    }

    pub fn shape(&self) -> MotifShape {
        self.shape
    }

    /// `Some(k)` when the motif is the clique `K_k`.
    pub fn clique_order(&self) -> Option<usize> {
        (self.shape == MotifShape::Clique).then_some(self.v)
    }

    pub fn automorphism_count(&self) -> u64 {
        self.aut_order
    }

    pub(crate) fn automorphism_list(&self) -> Option<&[Vec<u8>]> {
        self.automorphisms.as_deref()
    }

    /// `a_F = v_F! / |Aut(F)|`, the number of copies of `F` in `K_{v_F}`.
    pub fn copies_in_complete(&self) -> u64 {
        factorial(self.v as u64) / self.aut_order
    }

    /// `m_F` as the fraction `(e_H, v_H)` attaining the maximum density.
    pub fn max_density_fraction(&self) -> (usize, usize) {
        (self.max_density.1, self.max_density.0)
    }

    /// `m_F = max e_H / v_H` over subgraphs with at least one edge.
    pub fn max_density(&self) -> f64 {
        self.max_density.1 as f64 / self.max_density.0 as f64
    }

    pub fn subgraph_classes(&self) -> &[(usize, usize)] {
        &self.subgraph_classes
    }

    pub fn is_two_connected(&self) -> bool {
        self.two_connected
    }

    pub fn is_balanced(&self) -> bool {
        self.balanced
    }

    /// `Delta_F`.
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Short summary used by `motif-info`.
    pub fn summary(&self) -> MotifSummary {
        MotifSummary {
            vertices: self.v,
            edges: self.edges.iter().map(|&(a, b)| [a + 1, b + 1]).collect(),
            edge_count: self.edges.len(),
            shape: self.shape,
            automorphisms: self.aut_order,
            copies_in_complete: self.copies_in_complete(),
            max_density: self.max_density(),
            two_connected: self.two_connected,
            balanced: self.balanced,
            max_degree: self.max_degree,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotifSummary {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
    pub edge_count: usize,
    pub shape: MotifShape,
    pub automorphisms: u64,
    pub copies_in_complete: u64,
    pub max_density: f64,
    pub two_connected: bool,
    pub balanced: bool,
    pub max_degree: usize,
}

fn induced_edges(adj: &[u16], mask: u16) -> usize {
    (0..adj.len())
        .filter(|&a| mask >> a & 1 == 1)
        .map(|a| (adj[a] & mask).count_ones() as usize)
        .sum::<usize>()
        / 2
}

/// Whether the subgraph induced by `mask` is connected (empty counts as not).
fn is_connected(adj: &[u16], mask: u16) -> bool {
    if mask == 0 {
        return false;
    }
    let start = mask.trailing_zeros() as usize;
    let mut seen = 1u16 << start;
    let mut frontier = seen;
    while frontier != 0 {
        let a = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let fresh = adj[a] & mask & !seen;
        seen |= fresh;
        frontier |= fresh;
    }
    seen == mask
}

/// Order of the automorphism group by backtracking, with the list of
/// automorphisms when it is small enough to keep.
fn automorphisms(adj: &[u16]) -> (u64, Option<Vec<Vec<u8>>>) {
    let v = adj.len();
    let deg: Vec<u32> = adj.iter().map(|m| m.count_ones()).collect();
    let mut image = vec![0u8; v];
    let mut list = Vec::new();
    let mut keep = true;
    let mut count = 0u64;

    fn extend(
        i: usize,
        adj: &[u16],
        deg: &[u32],
        image: &mut [u8],
        used: u16,
        count: &mut u64,
        list: &mut Vec<Vec<u8>>,
        keep: &mut bool,
    ) {
        let v = adj.len();
        if i == v {
            *count += 1;
            if *keep {
                if *count > MAX_STORED_AUTOMORPHISMS {
                    *keep = false;
                    list.clear();
                } else {
                    list.push(image.to_vec());
                }
            }
            return;
        }
        for c in 0..v {
            if used >> c & 1 == 1 || deg[c] != deg[i] {
                continue;
            }
            let consistent = (0..i).all(|j| {
                let a = adj[i] >> j & 1;
                let b = adj[c] >> image[j] & 1;
                a == b
            });
            if consistent {
                image[i] = c as u8;
                extend(i + 1, adj, deg, image, used | 1 << c, count, list, keep);
            }
        }
    }

    extend(0, adj, &deg, &mut image, 0, &mut count, &mut list, &mut keep);
    (count, keep.then_some(list))
}
