//! The verification battery behind `supergraph verify`.

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{
    b_star, brute_force_min_vertices, enumerate_partitions, verify_clique_partition_bound_with,
    verify_partition_inequalities, verify_superadditivity_with,
};
use crate::graph_core::generate_supergraph;
use crate::layer_model::{LayerTypeLaw, QLaw, XLaw};
use crate::motif::{count_report, count_report_reference, Motif};

const BELL: [usize; 13] = [1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975, 678570, 4213597];
const RANDOM_INSTANCES: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn verify_all() -> VerificationReport {
    verify_all_with(|b| b_star(b).b_star)
}

/// Runs the battery with `star` standing in for `b -> b*`.
pub fn verify_all_with(star: impl Fn(u64) -> u64 + Copy) -> VerificationReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, failures: Vec<String>, total: usize| {
        checks.push(CheckResult {
            name: name.into(),
            passed: failures.is_empty(),
            detail: if failures.is_empty() {
                format!("{total} cases, no counterexample")
            } else {
                format!("{} of {total} failed; first: {}", failures.len(), failures[0])
            },
        });
    };

    let minimality: Vec<String> = (1..=15u64)
        .filter_map(|b| {
            let (fast, brute) = (star(b), brute_force_min_vertices(b));
            (fast != brute).then(|| format!("b = {b}: b* = {fast}, brute force {brute}"))
        })
        .collect();
    push("b_star_minimality", minimality, 15);

    let superadditivity: Vec<String> =
        verify_superadditivity_with(40, star).iter().map(|c| format!("{c:?}")).collect();
    push("superadditivity", superadditivity, 40 * 41 / 2);

    let mut clique = Vec::new();
    let mut clique_total = 0;
    for k in 3..=5 {
        clique_total += BELL[k * (k - 1) / 2] - 1;
        match verify_clique_partition_bound_with(k, star) {
            Ok(bad) => clique.extend(bad.iter().map(|c| format!("K{k} {:?}: {}", c.assignment, c.reason))),
            Err(e) => clique.push(e.to_string()),
        }
    }
    push("clique_partition_bound", clique, clique_total);

    let motifs = [
        Motif::clique(3),
        Motif::clique(4),
        Motif::cycle(4),
        Motif::cycle(5),
        Motif::new(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).expect("diamond"),
    ];
    let mut inequalities = Vec::new();
    let mut counts = Vec::new();
    for m in &motifs {
        match verify_partition_inequalities(m) {
            Ok(bad) => inequalities.extend(bad.iter().map(|c| format!("{:?}: {}", c.assignment, c.reason))),
            Err(e) => inequalities.push(e.to_string()),
        }
        let n = enumerate_partitions(m, None).map(|it| it.count()).unwrap_or(0);
        if n != BELL[m.edge_count()] - 1 {
            counts.push(format!("{} edges: {n} partitions", m.edge_count()));
        }
    }
    push("partition_inequalities", inequalities, motifs.len());
    push("partition_counts", counts, motifs.len());

    push("count_report_oracle", random_count_reports(), RANDOM_INSTANCES);
    VerificationReport { checks }
}

/// Fast counts against the exhaustive reference on small random supergraphs.
fn random_count_reports() -> Vec<String> {
    let motifs = [Motif::clique(3), Motif::cycle(4), Motif::clique(4)];
    let mut rng = crate::Rng::seed_from_u64(0x5eed);
    let mut failures = Vec::new();
    for i in 0..RANDOM_INSTANCES {
        let n = rng.random_range(4..=10u64);
        let m = rng.random_range(1..=4usize);
        let law = match i % 3 {
            0 => LayerTypeLaw::deterministic(rng.random_range(2..=n), rng.random_range(0.3..1.0)),
            1 => LayerTypeLaw::independent(XLaw::Uniform { lo: 2, hi: n + 2 }, QLaw::Beta { a: 2.0, b: 1.0 }),
            _ => LayerTypeLaw::coupled(XLaw::zipf(1.5, 2), 1.5, 0.3),
        }
        .expect("valid law");
        let g = generate_supergraph(n as usize, m, &law, &mut rng);
        let motif = &motifs[i % motifs.len()];
        let reference = count_report_reference(motif, &g);
        match count_report(motif, &g) {
            Ok(fast) if fast == reference => {
                if let Err(e) = fast.check_invariants() {
                    failures.push(format!("instance {i}: {e}"));
                }
            }
            Ok(fast) => failures.push(format!("instance {i}: fast {fast:?} reference {reference:?}")),
            Err(e) => failures.push(format!("instance {i}: {e}")),
        }
    }
    failures
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_battery_passes() {
        let report = verify_all();
        for c in &report.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert_eq!(report.checks.len(), 6);
    }

    #[test]
    fn injected_fault_is_caught() {
        let broken = |b: u64| {
            let s = b_star(b).b_star;
            if b == 7 {
                s - 1
            } else {
                s
            }
        };
        let report = verify_all_with(broken);
        assert!(!report.passed());
        assert!(!report.checks.iter().find(|c| c.name == "b_star_minimality").unwrap().passed);
    }
}
