//! Copy counting kernels: cliques, cycles and a general backtracking search.

use rayon::prelude::*;

use super::{Motif, MotifError, MotifShape};
use crate::graph_core::SimpleGraph;

/// Hosts at least this large are counted in parallel over root vertices.
const PARALLEL_ROOTS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountBudget {
    /// Largest host accepted by the general kernel when `v_F >= 5`.
    pub max_host_vertices: usize,
}

impl Default for CountBudget {
    fn default() -> Self {
        CountBudget { max_host_vertices: 10_000 }
    }
}

/// Number of copies of `motif` in `host` (distinct edge sets).
pub fn count_in_graph(motif: &Motif, host: &SimpleGraph) -> Result<u64, MotifError> {
    count_in_graph_with_budget(motif, host, CountBudget::default())
}

pub fn count_in_graph_with_budget(motif: &Motif, host: &SimpleGraph, budget: CountBudget) -> Result<u64, MotifError> {
    if motif.shape() == MotifShape::General {
        check_budget(motif, host, budget)?;
    }
    if host.vertex_count() < motif.vertex_count() || host.edge_count() < motif.edge_count() {
        return Ok(0);
    }
    Ok(match motif.shape() {
        MotifShape::Clique => count_cliques(host, motif.vertex_count()),
        MotifShape::Cycle => count_cycles(host, motif.vertex_count()),
        MotifShape::General => count_general(motif, host),
    })
}

fn check_budget(motif: &Motif, host: &SimpleGraph, budget: CountBudget) -> Result<(), MotifError> {
    if motif.vertex_count() >= 5 && host.vertex_count() > budget.max_host_vertices {
        return Err(MotifError::HostTooLarge { vertices: host.vertex_count(), budget: budget.max_host_vertices });
    }
    Ok(())
}

fn sum_over_roots(n: usize, f: impl Fn(u32) -> u64 + Sync + Send) -> u64 {
    if n >= PARALLEL_ROOTS {
        (0..n as u32).into_par_iter().map(f).sum()
    } else {
        (0..n as u32).map(f).sum()
    }
}

/// Degeneracy-style orientation: each vertex keeps the neighbors of higher
/// `(degree, id)` rank, sorted by id.
fn oriented(host: &SimpleGraph) -> Vec<Vec<u32>> {
    let key = |v: u32| (host.degree(v), v);
    (0..host.vertex_count() as u32)
        .map(|v| host.neighbors(v).iter().copied().filter(|&u| key(u) > key(v)).collect())
        .collect()
}

fn intersect(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

/// Visits every `k`-clique once as its vertex list in increasing rank.
fn cliques_from(out: &[Vec<u32>], root: u32, k: usize, f: &mut impl FnMut(&[u32])) {
    fn grow(out: &[Vec<u32>], cand: &[u32], stack: &mut Vec<u32>, k: usize, f: &mut impl FnMut(&[u32])) {
        if stack.len() == k {
            f(stack);
            return;
        }
        let need = k - stack.len();
        if cand.len() < need {
            return;
        }
        let mut next = Vec::new();
        for &u in cand {
            intersect(cand, &out[u as usize], &mut next);
            if next.len() + 1 < need {
                continue;
            }
            stack.push(u);
            grow(out, &next, stack, k, f);
            stack.pop();
        }
    }
    let mut stack = vec![root];
    grow(out, &out[root as usize], &mut stack, k, f);
}

fn count_cliques_from(out: &[Vec<u32>], root: u32, k: usize) -> u64 {
    // the last level only needs a size
    fn grow(out: &[Vec<u32>], cand: &[u32], depth: usize, k: usize) -> u64 {
        if depth + 1 == k {
            return cand.len() as u64;
        }
        let mut total = 0;
        let mut next = Vec::new();
        for &u in cand {
            intersect(cand, &out[u as usize], &mut next);
            if next.len() + depth + 1 >= k {
                total += grow(out, &next, depth + 1, k);
            }
        }
        total
    }
    if k == 1 {
        return 1;
    }
    grow(out, &out[root as usize], 1, k)
}

/// Number of `K_k` in `host`.
pub fn count_cliques(host: &SimpleGraph, k: usize) -> u64 {
    match k {
        0 => 1,
        1 => host.vertex_count() as u64,
        2 => host.edge_count() as u64,
        _ => {
            let out = oriented(host);
            sum_over_roots(host.vertex_count(), |r| count_cliques_from(&out, r, k))
        }
    }
}

/// Visits each `k`-cycle once as `[s, p1, .., p_{k-1}]` with `s` the smallest
/// vertex and `p1 < p_{k-1}`.
fn cycles_from(host: &SimpleGraph, s: u32, k: usize, f: &mut impl FnMut(&[u32])) {
    fn walk(host: &SimpleGraph, path: &mut Vec<u32>, k: usize, f: &mut impl FnMut(&[u32])) {
        let s = path[0];
        let last = *path.last().unwrap();
        if path.len() == k {
            if path[1] < last && host.has_edge(last, s) {
                f(path);
            }
            return;
        }
        for &u in host.neighbors(last) {
            if u <= s || path.contains(&u) {
                continue;
            }
            // closing vertex must exceed p1
            if path.len() == k - 1 && u <= path[1] {
                continue;
            }
            path.push(u);
            walk(host, path, k, f);
            path.pop();
        }
    }
    let mut path = Vec::with_capacity(k);
    path.push(s);
    walk(host, &mut path, k, f);
}

/// Number of `C_k` (`k >= 3`) in `host`.
pub fn count_cycles(host: &SimpleGraph, k: usize) -> u64 {
    assert!(k >= 3, "cycles need at least 3 vertices");
    sum_over_roots(host.vertex_count(), |s| {
        let mut c = 0;
        cycles_from(host, s, k, &mut |_| c += 1);
        c
    })
}

/// Search order for the general kernel: each vertex after the first has an
/// earlier neighbor when the motif is connected.
fn search_order(motif: &Motif) -> Vec<usize> {
    let v = motif.vertex_count();
    let mut order = Vec::with_capacity(v);
    let mut placed = vec![false; v];
    while order.len() < v {
        let next = (0..v)
            .filter(|&a| !placed[a])
            .max_by_key(|&a| {
                let back = order.iter().filter(|&&b| motif.has_edge(a, b)).count();
                (back, motif.degree(a), std::cmp::Reverse(a))
            })
            .unwrap();
        placed[next] = true;
        order.push(next);
    }
    order
}

/// Enumerates injective homomorphisms `phi` (indexed by motif vertex) with
/// `phi(order[0]) = root`.
fn embeddings_from(motif: &Motif, order: &[usize], host: &SimpleGraph, root: u32, f: &mut impl FnMut(&[u32])) {
    let v = motif.vertex_count();
    if host.degree(root) < motif.degree(order[0]) {
        return;
    }
    // for each position, the earlier positions adjacent to it
    let back: Vec<Vec<usize>> =
        (0..v).map(|i| (0..i).filter(|&j| motif.has_edge(order[i], order[j])).collect()).collect();
    let mut phi = vec![u32::MAX; v];
    phi[order[0]] = root;

    fn extend(
        i: usize,
        motif: &Motif,
        order: &[usize],
        back: &[Vec<usize>],
        host: &SimpleGraph,
        phi: &mut Vec<u32>,
        f: &mut impl FnMut(&[u32]),
    ) {
        if i == order.len() {
            f(phi);
            return;
        }
        let a = order[i];
        let fits = |c: u32, phi: &[u32]| {
            host.degree(c) >= motif.degree(a)
                && !order[..i].iter().any(|&b| phi[b] == c)
                && back[i].iter().all(|&j| host.has_edge(c, phi[order[j]]))
        };
        if let Some(&j) = back[i].first() {
            for &c in host.neighbors(phi[order[j]]) {
                if fits(c, phi) {
                    phi[a] = c;
                    extend(i + 1, motif, order, back, host, phi, f);
                }
            }
        } else {
            for c in 0..host.vertex_count() as u32 {
                if fits(c, phi) {
                    phi[a] = c;
                    extend(i + 1, motif, order, back, host, phi, f);
                }
            }
        }
        phi[a] = u32::MAX;
    }
    extend(1, motif, order, &back, host, &mut phi, f);
}

/// Embedding count divided by `|Aut(F)|`; no budget check.
pub fn count_general(motif: &Motif, host: &SimpleGraph) -> u64 {
    let order = search_order(motif);
    let embeddings = sum_over_roots(host.vertex_count(), |r| {
        let mut c = 0u64;
        embeddings_from(motif, &order, host, r, &mut |_| c += 1);
        c
    });
    embeddings / motif.automorphism_count()
}

/// Calls `f` once per copy of `motif` in `host` with the copy's edges.
pub fn for_each_copy(
    motif: &Motif,
    host: &SimpleGraph,
    budget: CountBudget,
    mut f: impl FnMut(&[(u32, u32)]),
) -> Result<(), MotifError> {
    if host.vertex_count() < motif.vertex_count() {
        return Ok(());
    }
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(motif.edge_count());
    let ordered = |a: u32, b: u32| if a < b { (a, b) } else { (b, a) };
    match motif.shape() {
        MotifShape::Clique => {
            let k = motif.vertex_count();
            let out = oriented(host);
            for r in 0..host.vertex_count() as u32 {
                cliques_from(&out, r, k, &mut |c| {
                    edges.clear();
                    for i in 0..k {
                        for j in i + 1..k {
                            edges.push(ordered(c[i], c[j]));
                        }
                    }
                    f(&edges);
                });
            }
        }
        MotifShape::Cycle => {
            let k = motif.vertex_count();
            for s in 0..host.vertex_count() as u32 {
                cycles_from(host, s, k, &mut |c| {
                    edges.clear();
                    for i in 0..k {
                        edges.push(ordered(c[i], c[(i + 1) % k]));
                    }
                    f(&edges);
                });
            }
        }
        MotifShape::General => {
            check_budget(motif, host, budget)?;
            let order = search_order(motif);
            let auts = motif.automorphism_list();
            let mut seen = std::collections::HashSet::new();
            for r in 0..host.vertex_count() as u32 {
                embeddings_from(motif, &order, host, r, &mut |phi| {
                    let canonical = match auts {
                        Some(list) => list.iter().all(|sigma| {
                            let twisted = sigma.iter().map(|&s| phi[s as usize]);
                            phi.iter().copied().le(twisted)
                        }),
                        None => {
                            let mut key: Vec<(u32, u32)> =
                                motif.edges().iter().map(|&(a, b)| ordered(phi[a], phi[b])).collect();
                            key.sort_unstable();
                            seen.insert(key)
                        }
                    };
                    if canonical {
                        edges.clear();
                        edges.extend(motif.edges().iter().map(|&(a, b)| ordered(phi[a], phi[b])));
                        f(&edges);
                    }
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::binomial_exact;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn complete(n: u32) -> SimpleGraph {
        SimpleGraph::from_edges(n as usize, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))))
    }

    /// Distinct edge sets of injective homomorphisms over all vertex tuples.
    fn brute_force(motif: &Motif, host: &SimpleGraph) -> u64 {
        let v = motif.vertex_count();
        let n = host.vertex_count() as u32;
        let mut seen = BTreeSet::new();
        let mut phi = vec![0u32; v];
        fn rec(i: usize, n: u32, phi: &mut Vec<u32>, motif: &Motif, host: &SimpleGraph, seen: &mut BTreeSet<Vec<(u32, u32)>>) {
            if i == phi.len() {
                if motif.edges().iter().all(|&(a, b)| host.has_edge(phi[a], phi[b])) {
                    let mut es: Vec<_> =
                        motif.edges().iter().map(|&(a, b)| (phi[a].min(phi[b]), phi[a].max(phi[b]))).collect();
                    es.sort_unstable();
                    seen.insert(es);
                }
                return;
            }
            for c in 0..n {
                if !phi[..i].contains(&c) {
                    phi[i] = c;
                    rec(i + 1, n, phi, motif, host, seen);
                }
            }
        }
        rec(0, n, &mut phi, motif, host, &mut seen);
        seen.len() as u64
    }

    fn copies_via_visitor(motif: &Motif, host: &SimpleGraph) -> (u64, usize) {
        let mut count = 0;
        let mut distinct = BTreeSet::new();
        for_each_copy(motif, host, CountBudget::default(), |es| {
            count += 1;
            let mut es = es.to_vec();
            es.sort_unstable();
            distinct.insert(es);
        })
        .unwrap();
        (count, distinct.len())
    }

    fn test_motifs() -> Vec<Motif> {
        vec![
            Motif::clique(3),
            Motif::clique(4),
            Motif::cycle(4),
            Motif::cycle(5),
            Motif::new(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap(),
            Motif::new(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)]).unwrap(),
        ]
    }

    #[test]
    fn complete_host_counts() {
        let k7 = complete(7);
        for m in test_motifs() {
            let expected = binomial_exact(7, m.vertex_count() as u64).unwrap() * m.copies_in_complete();
            assert_eq!(count_in_graph(&m, &k7).unwrap(), expected);
        }
    }

    #[test]
    fn small_hosts() {
        assert_eq!(count_cliques(&SimpleGraph::empty(5), 3), 0);
        let tri = complete(3);
        assert_eq!(count_in_graph(&Motif::clique(4), &tri).unwrap(), 0);
        assert_eq!(count_in_graph(&Motif::clique(3), &tri).unwrap(), 1);
        assert_eq!(count_cliques(&tri, 2), 3);
    }

    #[test]
    fn general_kernel_agrees_with_specialized() {
        let mut rng = <crate::Rng as rand::SeedableRng>::seed_from_u64(3);
        for _ in 0..20 {
            let layer = crate::graph_core::generate_layer(12, 0, 12, 0.5, &mut rng);
            let g = layer.local_graph();
            for k in 3..=5 {
                assert_eq!(count_cliques(&g, k), count_general(&Motif::clique(k), &g));
            }
            for k in 4..=6 {
                assert_eq!(count_cycles(&g, k), count_general(&Motif::cycle(k), &g));
            }
        }
    }

    #[test]
    fn parallel_roots_match_sequential() {
        let mut rng = <crate::Rng as rand::SeedableRng>::seed_from_u64(9);
        let layer = crate::graph_core::generate_layer(5000, 0, 5000, 0.002, &mut rng);
        let g = layer.local_graph();
        let mut seq = 0;
        for_each_copy(&Motif::clique(3), &g, CountBudget::default(), |_| seq += 1).unwrap();
        assert_eq!(count_cliques(&g, 3), seq);
        let mut seq = 0;
        for_each_copy(&Motif::cycle(4), &g, CountBudget::default(), |_| seq += 1).unwrap();
        assert_eq!(count_cycles(&g, 4), seq);
    }

    #[test]
    fn host_budget_for_general_patterns() {
        let m = Motif::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap();
        let host = SimpleGraph::empty(20);
        let tight = CountBudget { max_host_vertices: 10 };
        assert!(matches!(count_in_graph_with_budget(&m, &host, tight), Err(MotifError::HostTooLarge { .. })));
        // cliques have a dedicated kernel and no budget
        assert!(count_in_graph_with_budget(&Motif::clique(5), &host, tight).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn kernels_match_brute_force(seed in 0u64..10_000, p in 0.2f64..0.9, which in 0usize..6) {
            let mut rng = <crate::Rng as rand::SeedableRng>::seed_from_u64(seed);
            let g = crate::graph_core::generate_layer(7, 0, 7, p, &mut rng).local_graph();
            let m = &test_motifs()[which];
            let expected = brute_force(m, &g);
            prop_assert_eq!(count_in_graph(m, &g).unwrap(), expected);
            let (visits, distinct) = copies_via_visitor(m, &g);
            prop_assert_eq!(visits, expected);
            prop_assert_eq!(distinct as u64, expected);
        }
    }
}
