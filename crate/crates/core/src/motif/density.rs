//! Density functionals of a motif and the clustering coefficient of a host.

use serde::{Deserialize, Serialize};

use super::{count_cliques, Motif};
use crate::graph_core::SimpleGraph;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityFunctionals<T> {
    /// `n^{v_F} p^{e_F}`.
    pub psi: T,
    /// Minimum of `n^{v_H} p^{e_H}` over subgraphs `H` with an edge.
    pub phi: T,
    /// Maximum subgraph density `e_H / v_H`.
    pub m_f: T,
}

/// Evaluates `psi`, `phi` and `m_F` for edge density `p` on `n` vertices.
pub fn density_functionals<T: Real>(motif: &Motif, n: T, p: T) -> DensityFunctionals<T> {
    let at = |v: usize, e: usize| n.powi(v as i32) * p.powi(e as i32);
    let psi = at(motif.vertex_count(), motif.edge_count());
    let phi = motif
        .subgraph_classes()
        .iter()
        .map(|&(v, e)| at(v, e))
        .fold(T::infinity(), |acc, x| if x < acc { x } else { acc });
    let (e, v) = motif.max_density_fraction();
    DensityFunctionals { psi, phi, m_f: T::of(e as f64) / T::of(v as f64) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringCoefficient {
    pub triangles: u64,
    /// Paths of length two, `sum_v C(deg v, 2)`.
    pub wedges: u64,
    /// `3 * triangles / wedges`; `NaN` when there are no wedges.
    pub value: f64,
    pub defined: bool,
}

pub fn clustering_coefficient(host: &SimpleGraph) -> ClusteringCoefficient {
    let triangles = count_cliques(host, 3);
    let wedges: u64 = (0..host.vertex_count() as u32)
        .map(|v| {
            let d = host.degree(v) as u64;
            d * d.saturating_sub(1) / 2
        })
        .sum();
    let defined = wedges > 0;
    let value = if defined { 3.0 * triangles as f64 / wedges as f64 } else { f64::NAN };
    ClusteringCoefficient { triangles, wedges, value, defined }
}
