//! Randomized invariants for the front computation, cross-checked against
//! the slow oracles in `common`.

mod common;

use std::cmp::Ordering;

use proptest::prelude::*;

use common::{
    assert_front_equals_exhaustive, mesh_bottlenecks, mesh_for_seed, mesh_shortest_distances,
};
use mosto::pareto::{
    cmp_length, compute_front, compute_front_observed, pareto_baseline, pareto_optimized,
    Algorithm, ParetoFront,
};
use mosto::topology::DistanceMatrix;

/// Structural soundness of one front against its mesh: staircase ordering,
/// no dominated entries, consistent criteria, and correct endpoints.
fn check_front_structure(d: &DistanceMatrix, front: &ParetoFront) {
    let n = d.n();
    let bottlenecks = mesh_bottlenecks(d);
    for (src, bottleneck_row) in bottlenecks.iter().enumerate() {
        let dist = mesh_shortest_distances(d, src);
        for dst in 0..n {
            if src == dst {
                assert!(front.entries(src, dst).is_empty());
                continue;
            }
            let entries = front.entries(src, dst);
            assert!(!entries.is_empty(), "({src},{dst}) must be reachable");

            for e in entries {
                assert_eq!(e.source(), src);
                assert_eq!(e.target(), dst);
                // Criteria must be recomputable from the hop sequence.
                let rebuilt = mosto::pareto::ParetoPath::from_hops(d, e.hops.clone());
                assert_eq!(e, &rebuilt, "entry criteria drifted from its hops");
                // Simple path: no repeated node.
                let mut seen = e.hops.clone();
                seen.sort_unstable();
                seen.dedup();
                assert_eq!(seen.len(), e.hops.len(), "path revisits a node");
            }

            for w in entries.windows(2) {
                assert!(
                    w[0].max_link < w[1].max_link,
                    "bottlenecks must strictly increase: {} vs {}",
                    w[0].max_link,
                    w[1].max_link
                );
                assert_eq!(
                    cmp_length(w[0].length, w[1].length),
                    Ordering::Greater,
                    "lengths must strictly decrease: {} vs {}",
                    w[0].length,
                    w[1].length
                );
            }

            let shortest = front.shortest(src, dst);
            assert!(
                (shortest.length - dist[dst]).abs() <= 1e-6,
                "({src},{dst}): front length {} != shortest distance {}",
                shortest.length,
                dist[dst]
            );
            let minimax = front.minimax(src, dst);
            assert!(
                (minimax.max_link - bottleneck_row[dst]).abs() <= 1e-9,
                "({src},{dst}): front bottleneck {} != closure bottleneck {}",
                minimax.max_link,
                bottleneck_row[dst]
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, ..ProptestConfig::default() })]

    /// Small meshes of every family match the brute-force front entry for
    /// entry, including representative hop sequences.
    #[test]
    fn fronts_match_the_exhaustive_oracle(seed in 0u64..1 << 40) {
        let d = mesh_for_seed(seed, 7);
        let base = pareto_baseline(&d);
        let opt = pareto_optimized(&d);
        assert_front_equals_exhaustive(&d, &base, &format!("baseline, seed {seed}"));
        prop_assert!(base == opt, "algorithms disagree on seed {seed}");
    }

    /// On larger meshes the pruned algorithm must reproduce the baseline
    /// bit for bit while doing no more pair relaxations.
    #[test]
    fn pruning_changes_work_but_not_output(seed in 0u64..1 << 40) {
        let d = mesh_for_seed(seed.wrapping_mul(0x9E3779B9).wrapping_add(17), 24);
        let (base, base_stats) = compute_front(&d, Algorithm::Baseline);
        let (opt, opt_stats) = compute_front(&d, Algorithm::Optimized);
        prop_assert!(base == opt, "fronts differ on seed {seed}");
        prop_assert_eq!(base.export(), opt.export());
        prop_assert!(
            opt_stats.pair_checks <= base_stats.pair_checks,
            "pruning did more work: {} > {}",
            opt_stats.pair_checks,
            base_stats.pair_checks
        );
    }

    /// Structural invariants hold for every front.
    #[test]
    fn fronts_are_well_formed(seed in 0u64..1 << 40) {
        let d = mesh_for_seed(seed.wrapping_mul(31).wrapping_add(5), 16);
        let front = pareto_optimized(&d);
        check_front_structure(&d, &front);
    }

    /// The per-link candidate sets are always disjoint and never contain
    /// the link endpoints.
    #[test]
    fn candidate_sets_are_disjoint(seed in 0u64..1 << 40) {
        let d = mesh_for_seed(seed.wrapping_mul(101).wrapping_add(3), 12);
        let mut links_seen = 0usize;
        compute_front_observed(&d, Algorithm::Optimized, |snap| {
            links_seen += 1;
            assert!(snap.h >= links_seen);
            for p in snap.a_set {
                assert!(!snap.b_set.contains(p), "sets overlap at {p}");
            }
            for p in snap.a_set.iter().chain(snap.b_set) {
                assert!(*p != snap.link.a && *p != snap.link.b);
            }
        });
    }

    /// Round-tripping a front through its text export preserves it.
    #[test]
    fn export_parse_round_trips(seed in 0u64..1 << 40) {
        let d = mesh_for_seed(seed.wrapping_mul(7).wrapping_add(1), 10);
        let front = pareto_optimized(&d);
        let parsed = ParetoFront::parse(&front.export()).unwrap();
        prop_assert!(front == parsed);
    }
}
