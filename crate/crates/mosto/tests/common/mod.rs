//! Shared test support: independent oracles and deterministic mesh
//! generators. Everything here is deliberately written the slow, obvious
//! way so it can serve as a cross-check for the optimized library code.

#![allow(dead_code)]

use std::cmp::Ordering;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mosto::pareto::{cmp_length, ParetoFront, ParetoPath};
use mosto::topology::{build_full_mesh, DistanceMatrix, ProxyGraph};

/// One enumerated route with its criteria, as collected by the brute-force
/// walk. Lengths are accumulated left to right, matching the library.
#[derive(Debug, Clone)]
pub struct EnumeratedPath {
    pub hops: Vec<usize>,
    pub length: f64,
    pub max_link: f64,
}

/// Enumerates every simple path between every ordered pair of a mesh.
/// Exponential in `n`; callers keep `n` small.
pub fn enumerate_simple_paths(d: &DistanceMatrix) -> Vec<Vec<EnumeratedPath>> {
    let n = d.n();
    assert!(n <= 9, "exhaustive enumeration is for small meshes only");
    let mut per_pair: Vec<Vec<EnumeratedPath>> = vec![Vec::new(); n * n];
    let mut hops = Vec::with_capacity(n);
    for src in 0..n {
        hops.push(src);
        walk(d, src, 1 << src, &mut hops, 0.0, 0.0, &mut per_pair);
        hops.pop();
    }
    per_pair
}

fn walk(
    d: &DistanceMatrix,
    cur: usize,
    visited: u32,
    hops: &mut Vec<usize>,
    length: f64,
    max_link: f64,
    out: &mut Vec<Vec<EnumeratedPath>>,
) {
    let n = d.n();
    for next in 0..n {
        if visited & (1 << next) != 0 {
            continue;
        }
        let leg = d.get(cur, next);
        let length = length + leg;
        let max_link = max_link.max(leg);
        hops.push(next);
        out[hops[0] * n + next].push(EnumeratedPath {
            hops: hops.clone(),
            length,
            max_link,
        });
        walk(d, next, visited | (1 << next), hops, length, max_link, out);
        hops.pop();
    }
}

/// Brute-force Pareto front for one ordered pair: filter the enumerated
/// paths down to the undominated staircase, picking, per surviving
/// bottleneck value, the representative with the fewest hops and then the
/// lexicographically smallest hop sequence — the same tie rules the
/// library uses.
pub fn exhaustive_pair_front(d: &DistanceMatrix, paths: &[EnumeratedPath]) -> Vec<ParetoPath> {
    let mut sorted: Vec<&EnumeratedPath> = paths.iter().collect();
    sorted.sort_by(|a, b| a.max_link.total_cmp(&b.max_link));

    let mut front = Vec::new();
    let mut best_len = f64::INFINITY;
    let mut k = 0;
    while k < sorted.len() {
        // One group of paths sharing a bottleneck value exactly.
        let m = sorted[k].max_link;
        let mut end = k;
        while end < sorted.len() && sorted[end].max_link.to_bits() == m.to_bits() {
            end += 1;
        }
        let group = &sorted[k..end];
        k = end;

        let group_min = group.iter().map(|p| p.length).fold(f64::INFINITY, f64::min);
        if cmp_length(group_min, best_len) == Ordering::Less {
            let representative = group
                .iter()
                .filter(|p| cmp_length(p.length, group_min) == Ordering::Equal)
                .min_by(|a, b| {
                    a.hops
                        .len()
                        .cmp(&b.hops.len())
                        .then_with(|| a.hops.cmp(&b.hops))
                })
                .expect("group is non-empty");
            front.push(ParetoPath::from_hops(d, representative.hops.clone()));
        }
        best_len = best_len.min(group_min);
    }
    front
}

/// Compares a computed front against the exhaustive oracle, panicking with
/// the full disagreement context.
pub fn assert_front_equals_exhaustive(d: &DistanceMatrix, front: &ParetoFront, context: &str) {
    let n = d.n();
    assert_eq!(front.n(), n, "{context}: node count mismatch");
    let enumerated = enumerate_simple_paths(d);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                assert!(
                    front.entries(i, j).is_empty(),
                    "{context}: ({i},{i}) not empty"
                );
                continue;
            }
            let expect = exhaustive_pair_front(d, &enumerated[i * n + j]);
            let got = front.entries(i, j);
            assert_eq!(
                got,
                expect.as_slice(),
                "{context}: front mismatch for pair ({i},{j})\nmatrix:\n{}",
                d.to_csv()
            );
        }
    }
}

/// Independent shortest-path distances over the mesh's complete graph
/// (plain O(n^2) Dijkstra; no heap, no reconstruction).
pub fn mesh_shortest_distances(d: &DistanceMatrix, src: usize) -> Vec<f64> {
    let n = d.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[src] = 0.0;
    for _ in 0..n {
        let mut u = usize::MAX;
        let mut best = f64::INFINITY;
        for v in 0..n {
            if !done[v] && dist[v] < best {
                best = dist[v];
                u = v;
            }
        }
        if u == usize::MAX {
            break;
        }
        done[u] = true;
        for v in 0..n {
            if v != u && !done[v] {
                let cand = dist[u] + d.get(u, v);
                if cand < dist[v] {
                    dist[v] = cand;
                }
            }
        }
    }
    dist
}

/// Independent minimax bottleneck values for every pair, by the cubic
/// min-of-max closure.
pub fn mesh_bottlenecks(d: &DistanceMatrix) -> Vec<Vec<f64>> {
    let n = d.n();
    let mut b: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 0.0 } else { d.get(i, j) })
                .collect()
        })
        .collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = b[i][k].max(b[k][j]);
                if via < b[i][j] {
                    b[i][j] = via;
                }
            }
        }
    }
    b
}

/// How link weights are drawn.
#[derive(Debug, Clone, Copy)]
pub enum WeightKind {
    /// Uniform floats in [1, 100): ties essentially never happen.
    Uniform,
    /// Multiples of 1/8 ms in [1, 100]: sums are exact, ties are common,
    /// exercising every tie-break rule.
    Dyadic,
}

fn draw_weight(rng: &mut ChaCha8Rng, kind: WeightKind) -> f64 {
    match kind {
        WeightKind::Uniform => rng.gen_range(1.0..100.0),
        WeightKind::Dyadic => rng.gen_range(8..=800) as f64 / 8.0,
    }
}

/// A random connected graph: a random attachment tree plus extra links.
pub fn random_connected_edges(
    n: usize,
    extra_link_probability: f64,
    kind: WeightKind,
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, usize, f64)> {
    assert!(n >= 2);
    let mut edges = Vec::new();
    let mut in_tree = vec![false; n * n];
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((u, v, draw_weight(rng, kind)));
        in_tree[u * n + v] = true;
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if !in_tree[u * n + v] && rng.gen_bool(extra_link_probability) {
                edges.push((u, v, draw_weight(rng, kind)));
            }
        }
    }
    edges
}

/// A full mesh obtained by closing a random connected graph over its
/// shortest routes; always satisfies the triangle inequality.
pub fn closure_mesh(n: usize, kind: WeightKind, rng: &mut ChaCha8Rng) -> DistanceMatrix {
    let edges = random_connected_edges(n, 0.35, kind, rng);
    let graph = ProxyGraph::new(n, Vec::new(), edges).expect("generated graph is valid");
    build_full_mesh(&graph)
}

/// A raw symmetric positive matrix; deliberately *not* metric, so relay
/// routes beat direct links often.
pub fn raw_mesh(n: usize, kind: WeightKind, rng: &mut ChaCha8Rng) -> DistanceMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    // Each draw writes the (i, j) and (j, i) cells, so index loops it is.
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        for j in (i + 1)..n {
            let w = draw_weight(rng, kind);
            rows[i][j] = w;
            rows[j][i] = w;
        }
    }
    DistanceMatrix::from_rows(rows).expect("generated matrix is valid")
}

/// Distances between random points in a square: metric, with many
/// near-equal sums.
pub fn euclidean_mesh(n: usize, rng: &mut ChaCha8Rng) -> DistanceMatrix {
    loop {
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0)))
            .collect();
        let mut rows = vec![vec![0.0; n]; n];
        let mut ok = true;
        for i in 0..n {
            for j in (i + 1)..n {
                let w = (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1);
                if w <= 0.0 {
                    ok = false;
                }
                rows[i][j] = w;
                rows[j][i] = w;
            }
        }
        if ok {
            return DistanceMatrix::from_rows(rows).expect("generated matrix is valid");
        }
    }
}

/// The mesh family a seed maps to, cycling through every generator so one
/// seed range covers metric, non-metric, tie-free and tie-heavy inputs.
pub fn mesh_for_seed(seed: u64, max_n: usize) -> DistanceMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_n);
    match seed % 4 {
        0 => closure_mesh(n, WeightKind::Uniform, &mut rng),
        1 => closure_mesh(n, WeightKind::Dyadic, &mut rng),
        2 => raw_mesh(n, WeightKind::Dyadic, &mut rng),
        _ => euclidean_mesh(n, &mut rng),
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
