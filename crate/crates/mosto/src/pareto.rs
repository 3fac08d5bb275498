//! Bi-criteria path fronts over the RTT mesh.
//!
//! For every ordered node pair `(i, j)` we keep the Pareto front of simple
//! paths under two criteria:
//!
//! * `length`  — sum of the mesh RTTs along the path (drives one-shot cost),
//! * `max_link` — largest single mesh RTT on the path (drives per-round cost).
//!
//! A path dominates another when it is no worse in both criteria and strictly
//! better in at least one. The surviving front is a staircase: sorted by
//! strictly increasing `max_link` and strictly decreasing `length`. Its first
//! entry is the minimax-bottleneck route, its last entry the plain shortest
//! route.
//!
//! Both algorithms process mesh links in nondecreasing RTT order and maintain,
//! per ordered pair, the shortest route restricted to the links seen so far.
//! Whenever adding a link shortens a pair's route, that new route's bottleneck
//! is exactly the new link's RTT, so it is appended to the pair's front.
//!
//! * [`pareto_baseline`] relaxes every node pair against every link.
//! * [`pareto_optimized`] first computes, in linear time per link, the set of
//!   nodes whose best route to one endpoint would cross the link, and only
//!   relaxes pairs drawn from those sets. Pairs outside them provably cannot
//!   improve, so both algorithms return identical fronts.
//!
//! Ties are resolved deterministically everywhere: links sort by
//! `(rtt, min endpoint, max endpoint)`; equal-length routes prefer fewer
//! hops, then the lexicographically smallest hop sequence. A front entry
//! applies that preference among routes sharing its exact bottleneck, while
//! the per-pair representative that longer routes are composed from applies
//! it across all equal-length routes regardless of bottleneck — an equally
//! short route with a larger bottleneck never enters the front, but with
//! fewer hops it is the better building block. Summed lengths are compared
//! with a small absolute tolerance so float association noise cannot flip a
//! dominance decision.

use std::cmp::Ordering;
use std::fmt::Write as _;

use thiserror::Error;

use crate::topology::DistanceMatrix;

/// Absolute tolerance in milliseconds when comparing summed path lengths.
pub const LENGTH_TOLERANCE_MS: f64 = 1e-9;

/// Compares two path lengths under [`LENGTH_TOLERANCE_MS`].
pub fn cmp_length(a: f64, b: f64) -> Ordering {
    if a < b - LENGTH_TOLERANCE_MS {
        Ordering::Less
    } else if a > b + LENGTH_TOLERANCE_MS {
        Ordering::Greater
    } else {
        Ordering::Equal
    }
}

/// One undirected mesh link; `a < b` by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub a: usize,
    pub b: usize,
    pub rtt: f64,
}

/// All `n(n-1)/2` mesh links sorted by `(rtt, a, b)`.
#[derive(Debug, Clone)]
pub struct SortedLinkList {
    links: Vec<Link>,
}

impl SortedLinkList {
    pub fn from_matrix(d: &DistanceMatrix) -> Self {
        let n = d.n();
        let mut links = Vec::with_capacity(n * (n - 1) / 2);
        for a in 0..n {
            for b in (a + 1)..n {
                links.push(Link {
                    a,
                    b,
                    rtt: d.get(a, b),
                });
            }
        }
        links.sort_by(|x, y| {
            x.rtt
                .partial_cmp(&y.rtt)
                .expect("matrix entries are finite")
                .then(x.a.cmp(&y.a))
                .then(x.b.cmp(&y.b))
        });
        SortedLinkList { links }
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }
}

/// A simple path through the mesh with its two criteria values.
///
/// `length` and `max_link` are always recomputed from `hops` against the
/// matrix the path was built from, summing left to right, so equal hop
/// sequences produce bitwise-equal values.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoPath {
    /// Node sequence, endpoints included.
    pub hops: Vec<usize>,
    /// Sum of mesh RTTs along the path, in ms.
    pub length: f64,
    /// Largest single mesh RTT on the path, in ms.
    pub max_link: f64,
}

impl ParetoPath {
    /// Builds a path from a hop sequence, computing both criteria canonically.
    pub fn from_hops(d: &DistanceMatrix, hops: Vec<usize>) -> ParetoPath {
        assert!(hops.len() >= 2, "a path needs at least two hops");
        let mut length = 0.0;
        let mut max_link = 0.0f64;
        for w in hops.windows(2) {
            let leg = d.get(w[0], w[1]);
            length += leg;
            max_link = max_link.max(leg);
        }
        ParetoPath {
            hops,
            length,
            max_link,
        }
    }

    /// Number of nodes on the path (endpoints included).
    pub fn hop_count(&self) -> usize {
        self.hops.len()
    }

    pub fn source(&self) -> usize {
        self.hops[0]
    }

    pub fn target(&self) -> usize {
        *self.hops.last().unwrap()
    }
}

/// Per-ordered-pair Pareto fronts for a whole mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoFront {
    n: usize,
    lists: Vec<Vec<ParetoPath>>,
}

impl ParetoFront {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Front entries for `(i, j)`, sorted by increasing `max_link` and
    /// decreasing `length`. Empty only when `i == j`.
    pub fn entries(&self, i: usize, j: usize) -> &[ParetoPath] {
        &self.lists[i * self.n + j]
    }

    /// The minimax-bottleneck route: first front entry. Among routes with the
    /// optimal bottleneck it has minimal length, then minimal hop count.
    pub fn minimax(&self, i: usize, j: usize) -> &ParetoPath {
        self.entries(i, j).first().expect("front is empty")
    }

    /// The minimum-length route: last front entry.
    pub fn shortest(&self, i: usize, j: usize) -> &ParetoPath {
        self.entries(i, j).last().expect("front is empty")
    }

    /// Iterates ordered pairs `(i, j, entries)`, `i != j`, in `(i, j)` order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, &[ParetoPath])> {
        let n = self.n;
        (0..n).flat_map(move |i| {
            (0..n)
                .filter(move |&j| j != i)
                .map(move |j| (i, j, self.entries(i, j)))
        })
    }

    /// Line-oriented export, sorted by `(i, j, max_link)`:
    /// `pair <i> <j> maxlink <ms> length <ms> hops <k> path <p1,...,pk>`.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for (i, j, entries) in self.pairs() {
            for e in entries {
                let path: Vec<String> = e.hops.iter().map(|h| h.to_string()).collect();
                writeln!(
                    out,
                    "pair {} {} maxlink {} length {} hops {} path {}",
                    i,
                    j,
                    e.max_link,
                    e.length,
                    e.hop_count(),
                    path.join(",")
                )
                .unwrap();
            }
        }
        out
    }

    /// Parses the [`ParetoFront::export`] format.
    pub fn parse(text: &str) -> Result<ParetoFront, FrontParseError> {
        let mut max_node = 0usize;
        let mut rows: Vec<(usize, usize, ParetoPath)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = trimmed.split_whitespace().collect();
            if f.len() != 11
                || f[0] != "pair"
                || f[3] != "maxlink"
                || f[5] != "length"
                || f[7] != "hops"
                || f[9] != "path"
            {
                return Err(FrontParseError::Malformed { line });
            }
            let i: usize = f[1]
                .parse()
                .map_err(|_| FrontParseError::Malformed { line })?;
            let j: usize = f[2]
                .parse()
                .map_err(|_| FrontParseError::Malformed { line })?;
            let max_link: f64 = f[4]
                .parse()
                .map_err(|_| FrontParseError::Malformed { line })?;
            let length: f64 = f[6]
                .parse()
                .map_err(|_| FrontParseError::Malformed { line })?;
            let hop_count: usize = f[8]
                .parse()
                .map_err(|_| FrontParseError::Malformed { line })?;
            let hops: Result<Vec<usize>, _> = f[10].split(',').map(|s| s.parse()).collect();
            let hops = hops.map_err(|_| FrontParseError::Malformed { line })?;
            if hops.len() != hop_count || hops.first() != Some(&i) || hops.last() != Some(&j) {
                return Err(FrontParseError::Inconsistent { line });
            }
            max_node = max_node
                .max(i)
                .max(j)
                .max(hops.iter().copied().max().unwrap_or(0));
            rows.push((
                i,
                j,
                ParetoPath {
                    hops,
                    length,
                    max_link,
                },
            ));
        }
        if rows.is_empty() {
            return Err(FrontParseError::EmptyInput);
        }
        let n = max_node + 1;
        let mut lists = vec![Vec::new(); n * n];
        for (i, j, path) in rows {
            lists[i * n + j].push(path);
        }
        Ok(ParetoFront { n, lists })
    }
}

#[derive(Debug, Error)]
pub enum FrontParseError {
    #[error("line {line}: malformed front entry")]
    Malformed { line: usize },
    #[error("line {line}: entry fields disagree with the hop sequence")]
    Inconsistent { line: usize },
    #[error("no front entries found")]
    EmptyInput,
}

/// Which front computation to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Relax every node pair against every link.
    Baseline,
    /// Relax only pairs drawn from the per-link candidate sets.
    Optimized,
}

/// Work counters for one front computation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParetoStats {
    /// Links processed (always `n(n-1)/2`).
    pub links: u64,
    /// Links skipped outright because an equal-or-shorter route between their
    /// endpoints already existed.
    pub skipped_links: u64,
    /// Directed pair relaxations attempted beyond the link endpoints.
    pub pair_checks: u64,
    /// Route adoptions (strict improvements plus tie refinements).
    pub adoptions: u64,
}

/// Per-link view passed to an observer: the link being added and the literal
/// candidate sets computed for it. `a_set` holds nodes (excluding the
/// endpoints) whose current best route to `link.a` crosses the link, `b_set`
/// the same for `link.b`. The two sets are always disjoint.
#[derive(Debug)]
pub struct IterationSnapshot<'a> {
    /// 1-based index of the link in sorted order.
    pub h: usize,
    pub link: Link,
    pub a_set: &'a [usize],
    pub b_set: &'a [usize],
}

/// Computes all fronts with the baseline relaxation.
pub fn pareto_baseline(d: &DistanceMatrix) -> ParetoFront {
    compute_front(d, Algorithm::Baseline).0
}

/// Computes all fronts with the candidate-set pruned relaxation. Returns
/// exactly the same fronts as [`pareto_baseline`].
pub fn pareto_optimized(d: &DistanceMatrix) -> ParetoFront {
    compute_front(d, Algorithm::Optimized).0
}

/// Computes all fronts, returning work counters alongside.
pub fn compute_front(d: &DistanceMatrix, algo: Algorithm) -> (ParetoFront, ParetoStats) {
    compute_front_observed(d, algo, |_| {})
}

/// Like [`compute_front`], invoking `observer` once per processed link with
/// that link's candidate sets. Skipped links are not reported.
pub fn compute_front_observed(
    d: &DistanceMatrix,
    algo: Algorithm,
    mut observer: impl FnMut(&IterationSnapshot<'_>),
) -> (ParetoFront, ParetoStats) {
    Engine::new(d).run(algo, &mut observer)
}

/// Rolling state for one ordered pair. `len` is the shortest route length
/// over the links processed so far; `path` is the preferred representative
/// among routes of that length (fewest hops, then lexicographically
/// smallest) and is what longer routes are composed from; `max` is the
/// bottleneck of the pair's last front entry. `path` empty means unreached
/// (`len` is infinite). `path`'s own bottleneck may exceed `max`: an
/// equal-length route with a larger bottleneck stays off the front but can
/// still offer fewer hops.
#[derive(Debug, Clone)]
struct PairCell {
    len: f64,
    max: f64,
    path: Vec<usize>,
}

struct Engine<'a> {
    d: &'a DistanceMatrix,
    n: usize,
    cells: Vec<PairCell>,
    fronts: Vec<Vec<ParetoPath>>,
    stats: ParetoStats,
}

/// A phase-1 adoption decided against the pre-link state, committed later.
/// `refresh_front` is false for adoptions that only improve the remembered
/// representative without touching the pair's front.
struct PendingAdoption {
    idx: usize,
    len: f64,
    path: Vec<usize>,
    refresh_front: bool,
}

impl<'a> Engine<'a> {
    fn new(d: &'a DistanceMatrix) -> Self {
        let n = d.n();
        Engine {
            d,
            n,
            cells: vec![
                PairCell {
                    len: f64::INFINITY,
                    max: 0.0,
                    path: Vec::new(),
                };
                n * n
            ],
            fronts: vec![Vec::new(); n * n],
            stats: ParetoStats::default(),
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    fn run(
        mut self,
        algo: Algorithm,
        observer: &mut dyn FnMut(&IterationSnapshot<'_>),
    ) -> (ParetoFront, ParetoStats) {
        let links = SortedLinkList::from_matrix(self.d);
        let n = self.n;
        // Reused per-link scratch.
        let mut snap_to_a = vec![0.0f64; n];
        let mut snap_to_b = vec![0.0f64; n];
        let mut snap_from_a = vec![0.0f64; n];
        let mut snap_from_b = vec![0.0f64; n];
        let mut weak_a = vec![false; n];
        let mut weak_b = vec![false; n];

        for (h0, &link) in links.links().iter().enumerate() {
            let h = h0 + 1;
            let Link { a, b, rtt } = link;
            self.stats.links += 1;

            // A link that cannot beat the existing route between its own
            // endpoints can never appear on any shortest route, so the whole
            // iteration is a no-op. Ties are kept: the link may still win a
            // hop-count refinement.
            if cmp_length(self.cells[self.idx(a, b)].len, rtt) == Ordering::Less {
                self.stats.skipped_links += 1;
                continue;
            }

            for p in 0..n {
                snap_to_a[p] = self.cells[self.idx(p, a)].len;
                snap_to_b[p] = self.cells[self.idx(p, b)].len;
                snap_from_a[p] = self.cells[self.idx(a, p)].len;
                snap_from_b[p] = self.cells[self.idx(b, p)].len;
            }

            // Phase 1: pairs touching the link endpoints, decided against the
            // pre-link snapshot so ordering cannot matter, then committed.
            let mut pending: Vec<PendingAdoption> = Vec::new();
            {
                let one_a = [a];
                let one_b = [b];
                let decide_into = |engine: &Engine<'_>,
                                   pending: &mut Vec<PendingAdoption>,
                                   idx: usize,
                                   len: f64,
                                   pre: &[usize],
                                   suf: &[usize]| {
                    if let Some(adoption) = engine.decide(idx, len, rtt, pre, suf) {
                        pending.push(adoption);
                    }
                };
                decide_into(&self, &mut pending, self.idx(a, b), rtt, &one_a, &one_b);
                decide_into(&self, &mut pending, self.idx(b, a), rtt, &one_b, &one_a);
                for p in 0..n {
                    if p == a || p == b {
                        continue;
                    }
                    // (p -> a) via (p -> b) plus the link, and mirrored forms.
                    let path_pb = &self.cells[self.idx(p, b)].path;
                    decide_into(
                        &self,
                        &mut pending,
                        self.idx(p, a),
                        snap_to_b[p] + rtt,
                        path_pb,
                        &one_a,
                    );
                    let path_bp = &self.cells[self.idx(b, p)].path;
                    decide_into(
                        &self,
                        &mut pending,
                        self.idx(a, p),
                        rtt + snap_from_b[p],
                        &one_a,
                        path_bp,
                    );
                    let path_pa = &self.cells[self.idx(p, a)].path;
                    decide_into(
                        &self,
                        &mut pending,
                        self.idx(p, b),
                        snap_to_a[p] + rtt,
                        path_pa,
                        &one_b,
                    );
                    let path_ap = &self.cells[self.idx(a, p)].path;
                    decide_into(
                        &self,
                        &mut pending,
                        self.idx(b, p),
                        rtt + snap_from_a[p],
                        &one_b,
                        path_ap,
                    );
                }
            }
            for adoption in pending {
                self.commit(
                    adoption.idx,
                    adoption.len,
                    rtt,
                    adoption.path,
                    adoption.refresh_front,
                );
            }

            // Candidate sets over the snapshot, inclusive of ties: a node
            // belongs when routing through the link reaches the endpoint at
            // least as fast as the best known route.
            for p in 0..n {
                weak_a[p] =
                    p != a && p != b && snap_to_b[p] + rtt <= snap_to_a[p] + LENGTH_TOLERANCE_MS;
                weak_b[p] =
                    p != a && p != b && snap_to_a[p] + rtt <= snap_to_b[p] + LENGTH_TOLERANCE_MS;
            }

            let (a_lit, b_lit) = self.literal_sets(a, b);
            debug_assert!(
                a_lit.iter().all(|p| !b_lit.contains(p)),
                "candidate sets must be disjoint"
            );
            observer(&IterationSnapshot {
                h,
                link,
                a_set: &a_lit,
                b_set: &b_lit,
            });

            // Phase 2: pairs away from the endpoints. Reads touch only
            // endpoint cells (fixed after phase 1), writes only the pair
            // itself, so iteration order is immaterial.
            match algo {
                Algorithm::Baseline => {
                    for i in 0..n {
                        if i == a || i == b {
                            continue;
                        }
                        for j in 0..n {
                            if j == i || j == a || j == b {
                                continue;
                            }
                            self.relax_crossing(i, j, a, b, rtt);
                            self.relax_crossing(i, j, b, a, rtt);
                        }
                    }
                }
                Algorithm::Optimized => {
                    let union: Vec<usize> = (0..n).filter(|&p| weak_a[p] || weak_b[p]).collect();
                    for &i in &union {
                        for &j in &union {
                            if i == j {
                                continue;
                            }
                            if weak_b[i] && weak_a[j] {
                                self.relax_crossing(i, j, a, b, rtt);
                            }
                            if weak_a[i] && weak_b[j] {
                                self.relax_crossing(i, j, b, a, rtt);
                            }
                        }
                    }
                }
            }
        }

        let front = ParetoFront {
            n,
            lists: self.fronts,
        };
        (front, self.stats)
    }

    /// Relaxes ordered pair `(i, j)` through the link crossed from `entry`
    /// to `exit`: prefix `(i, entry)`, the link itself, suffix `(exit, j)`.
    fn relax_crossing(&mut self, i: usize, j: usize, entry: usize, exit: usize, rtt: f64) {
        let idx = self.idx(i, j);
        self.stats.pair_checks += 1;
        let pre_idx = self.idx(i, entry);
        let suf_idx = self.idx(exit, j);
        let len = self.cells[pre_idx].len + rtt + self.cells[suf_idx].len;
        if let Some(adoption) = self.decide_indexed(idx, len, rtt, pre_idx, suf_idx) {
            self.commit(
                adoption.idx,
                adoption.len,
                rtt,
                adoption.path,
                adoption.refresh_front,
            );
        }
    }

    fn decide_indexed(
        &self,
        idx: usize,
        cand_len: f64,
        rtt: f64,
        pre_idx: usize,
        suf_idx: usize,
    ) -> Option<PendingAdoption> {
        let pre = &self.cells[pre_idx].path;
        let suf = &self.cells[suf_idx].path;
        self.decide(idx, cand_len, rtt, pre, suf)
    }

    /// Compares a candidate route (concatenation `pre ++ suf`, crossing the
    /// current link, so its bottleneck is `rtt`) against the pair's incumbent.
    /// Returns the adoption to perform, if any. Pure: mutates nothing.
    ///
    /// Concatenations that revisit a node are rejected outright: the shorter
    /// route hiding inside such a walk is always discovered by another
    /// relaxation, so dropping them loses nothing and keeps every stored
    /// route simple.
    fn decide(
        &self,
        idx: usize,
        cand_len: f64,
        rtt: f64,
        pre: &[usize],
        suf: &[usize],
    ) -> Option<PendingAdoption> {
        if !cand_len.is_finite() || pre.is_empty() || suf.is_empty() {
            return None;
        }
        let cur = &self.cells[idx];
        match cmp_length(cand_len, cur.len) {
            Ordering::Greater => None,
            Ordering::Less => {
                if !disjoint(pre, suf) {
                    return None;
                }
                Some(PendingAdoption {
                    idx,
                    len: cand_len,
                    path: concat_path(pre, suf),
                    refresh_front: true,
                })
            }
            Ordering::Equal => {
                // Same length: the candidate competes for the remembered
                // representative on hop count, then lexicographic hop order.
                // It may rewrite the front entry only while its bottleneck
                // still matches the entry's; with a larger bottleneck it is
                // dominated as an entry yet remains better building material.
                debug_assert!(rtt >= cur.max);
                let cand_hops = pre.len() + suf.len();
                let better = match cand_hops.cmp(&cur.path.len()) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => {
                        pre.iter().chain(suf.iter()).cmp(cur.path.iter()) == Ordering::Less
                    }
                };
                if !better || !disjoint(pre, suf) {
                    return None;
                }
                Some(PendingAdoption {
                    idx,
                    len: cand_len,
                    path: concat_path(pre, suf),
                    refresh_front: rtt.to_bits() == cur.max.to_bits(),
                })
            }
        }
    }

    /// Installs an adopted route. The rolling cell always takes the new
    /// representative; the pair's front is rewritten only for adoptions in
    /// the current bottleneck group (replacing the last entry when its
    /// bottleneck value repeats, appending otherwise). Front entries are
    /// recomputed canonically from their hop sequence.
    fn commit(&mut self, idx: usize, len: f64, rtt: f64, path: Vec<usize>, refresh_front: bool) {
        debug_assert!(is_simple(&path), "adopted routes are always simple");
        self.stats.adoptions += 1;
        if refresh_front {
            let entry = ParetoPath::from_hops(self.d, path.clone());
            let front = &mut self.fronts[idx];
            match front.last_mut() {
                Some(last) if last.max_link.to_bits() == rtt.to_bits() => *last = entry,
                _ => front.push(entry),
            }
            self.cells[idx].max = rtt;
        }
        let cell = &mut self.cells[idx];
        cell.len = cell.len.min(len);
        cell.path = path;
    }

    /// Literal candidate sets for observer and debug checks: nodes whose
    /// current best route to an endpoint ends by crossing the link.
    fn literal_sets(&self, a: usize, b: usize) -> (Vec<usize>, Vec<usize>) {
        let mut a_set = Vec::new();
        let mut b_set = Vec::new();
        for p in 0..self.n {
            if p == a || p == b {
                continue;
            }
            if ends_with_crossing(&self.cells[self.idx(p, a)].path, b, a) {
                a_set.push(p);
            }
            if ends_with_crossing(&self.cells[self.idx(p, b)].path, a, b) {
                b_set.push(p);
            }
        }
        (a_set, b_set)
    }
}

fn concat_path(pre: &[usize], suf: &[usize]) -> Vec<usize> {
    let mut path = Vec::with_capacity(pre.len() + suf.len());
    path.extend_from_slice(pre);
    path.extend_from_slice(suf);
    path
}

/// True when the two hop sequences share no node, i.e. their concatenation
/// is itself a simple path.
fn disjoint(pre: &[usize], suf: &[usize]) -> bool {
    pre.iter().all(|p| !suf.contains(p))
}

fn is_simple(path: &[usize]) -> bool {
    let mut seen = path.to_vec();
    seen.sort_unstable();
    seen.windows(2).all(|w| w[0] != w[1])
}

/// A simple route to an endpoint can cross the link only as its final hop.
fn ends_with_crossing(path: &[usize], from: usize, to: usize) -> bool {
    path.len() >= 2 && path[path.len() - 2] == from && path[path.len() - 1] == to
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> DistanceMatrix {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        DistanceMatrix::from_rows(rows).unwrap()
    }

    /// Closure of the triangle graph 0-1:10, 1-2:10, 0-2:50.
    fn triangle_mesh() -> DistanceMatrix {
        matrix(&[&[0.0, 10.0, 20.0], &[10.0, 0.0, 10.0], &[20.0, 10.0, 0.0]])
    }

    /// Four nodes with a genuine three-step staircase for (0, 3).
    fn staircase_mesh() -> DistanceMatrix {
        matrix(&[
            &[0.0, 40.0, 70.0, 95.0],
            &[40.0, 0.0, 40.0, 70.0],
            &[70.0, 40.0, 0.0, 40.0],
            &[95.0, 70.0, 40.0, 0.0],
        ])
    }

    #[test]
    fn links_sort_by_rtt_then_endpoints() {
        let links = SortedLinkList::from_matrix(&triangle_mesh());
        let got: Vec<(usize, usize, f64)> =
            links.links().iter().map(|l| (l.a, l.b, l.rtt)).collect();
        assert_eq!(got, vec![(0, 1, 10.0), (1, 2, 10.0), (0, 2, 20.0)]);
    }

    #[test]
    fn triangle_front_keeps_only_the_relay_route() {
        let d = triangle_mesh();
        let front = pareto_baseline(&d);
        let entries = front.entries(0, 2);
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].hops, vec![0, 1, 2]);
        assert_eq!(entries[0].max_link, 10.0);
        assert_eq!(entries[0].length, 20.0);
    }

    #[test]
    fn staircase_front_orders_tradeoffs() {
        let d = staircase_mesh();
        let front = pareto_baseline(&d);
        let entries = front.entries(0, 3);
        let got: Vec<(f64, f64, &[usize])> = entries
            .iter()
            .map(|e| (e.max_link, e.length, e.hops.as_slice()))
            .collect();
        assert_eq!(
            got,
            vec![
                (40.0, 120.0, &[0, 1, 2, 3][..]),
                (70.0, 110.0, &[0, 1, 3][..]),
                (95.0, 95.0, &[0, 3][..]),
            ]
        );
        assert_eq!(front.minimax(0, 3).max_link, 40.0);
        assert_eq!(front.shortest(0, 3).length, 95.0);
        // The mirrored pair gets the mirrored routes.
        let back: Vec<&[usize]> = front
            .entries(3, 0)
            .iter()
            .map(|e| e.hops.as_slice())
            .collect();
        assert_eq!(back, vec![&[3, 2, 1, 0][..], &[3, 1, 0][..], &[3, 0][..]]);
    }

    #[test]
    fn closure_ties_keep_hop_minimal_representatives() {
        // In a shortest-route closure, synthesized direct entries equal
        // their relay sums exactly: here d[0][3] = d[0][1] + d[1][3] and
        // d[2][3] = d[2][1] + d[1][3] to the last bit. The (2,3) front must
        // pick the three-node route over the equal-length four-node one even
        // though the (0,3) front rightly keeps only its bottleneck-optimal
        // relay entry.
        let d = matrix(&[
            &[0.0, 33.73302881784516, 46.39669137395511, 45.92209974260607],
            &[
                33.73302881784516,
                0.0,
                70.29893524982194,
                12.189070924760912,
            ],
            &[46.39669137395511, 70.29893524982194, 0.0, 82.48800617458285],
            &[
                45.92209974260607,
                12.189070924760912,
                82.48800617458285,
                0.0,
            ],
        ]);
        for front in [pareto_baseline(&d), pareto_optimized(&d)] {
            let hops: Vec<&[usize]> = front
                .entries(2, 3)
                .iter()
                .map(|e| e.hops.as_slice())
                .collect();
            assert_eq!(hops, vec![&[2, 0, 3][..], &[2, 1, 3][..]]);
            assert_eq!(front.entries(0, 3).len(), 1);
            assert_eq!(front.entries(0, 3)[0].hops, vec![0, 1, 3]);
        }
    }

    #[test]
    fn equal_length_routes_prefer_lexicographic_hops() {
        // Both 0-1-3 and 0-2-3 cost 110 with bottleneck 70; the front must
        // settle on the lexicographically smaller hop sequence.
        let d = staircase_mesh();
        let front = pareto_baseline(&d);
        assert_eq!(front.entries(0, 3)[1].hops, vec![0, 1, 3]);
    }

    #[test]
    fn baseline_and_optimized_agree_exactly() {
        for d in [triangle_mesh(), staircase_mesh()] {
            let (base, base_stats) = compute_front(&d, Algorithm::Baseline);
            let (opt, opt_stats) = compute_front(&d, Algorithm::Optimized);
            assert_eq!(base, opt);
            assert_eq!(base.export(), opt.export());
            assert!(opt_stats.pair_checks <= base_stats.pair_checks);
            assert_eq!(base_stats.adoptions, opt_stats.adoptions);
        }
    }

    #[test]
    fn dominated_direct_entries_are_skipped_entirely() {
        // The 0-2 entry is longer than the relay route, so its link is
        // processed as a no-op and never reaches any front.
        let d = matrix(&[&[0.0, 10.0, 30.0], &[10.0, 0.0, 10.0], &[30.0, 10.0, 0.0]]);
        let (front, stats) = compute_front(&d, Algorithm::Baseline);
        assert_eq!(stats.skipped_links, 1);
        let entries = front.entries(0, 2);
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].hops, vec![0, 1, 2]);
    }

    #[test]
    fn two_node_candidate_sets_are_empty() {
        let d = matrix(&[&[0.0, 5.0], &[5.0, 0.0]]);
        let mut seen = Vec::new();
        let (front, _) = compute_front_observed(&d, Algorithm::Optimized, |snap| {
            seen.push((snap.h, snap.a_set.to_vec(), snap.b_set.to_vec()));
        });
        assert_eq!(seen, vec![(1, vec![], vec![])]);
        assert_eq!(front.entries(0, 1).len(), 1);
        assert_eq!(front.entries(0, 1)[0].hops, vec![0, 1]);
    }

    #[test]
    fn candidate_sets_spot_routes_crossing_the_link() {
        let d = triangle_mesh();
        let mut seen = Vec::new();
        compute_front_observed(&d, Algorithm::Baseline, |snap| {
            seen.push((
                (snap.link.a, snap.link.b),
                snap.a_set.to_vec(),
                snap.b_set.to_vec(),
            ));
        });
        // Node 0's best route to 2 crosses the 1-2 link; nothing else does.
        assert_eq!(
            seen,
            vec![
                ((0, 1), vec![], vec![]),
                ((1, 2), vec![], vec![0]),
                ((0, 2), vec![], vec![]),
            ]
        );
    }

    #[test]
    fn export_parse_round_trips() {
        let d = staircase_mesh();
        let front = pareto_baseline(&d);
        let text = front.export();
        let parsed = ParetoFront::parse(&text).unwrap();
        assert_eq!(front, parsed);
        assert_eq!(parsed.export(), text);
    }

    #[test]
    fn parse_rejects_inconsistent_rows() {
        let bad = "pair 0 1 maxlink 5 length 5 hops 3 path 0,1\n";
        assert!(matches!(
            ParetoFront::parse(bad),
            Err(FrontParseError::Inconsistent { line: 1 })
        ));
        assert!(matches!(
            ParetoFront::parse(""),
            Err(FrontParseError::EmptyInput)
        ));
        assert!(matches!(
            ParetoFront::parse("pair 0 1 nonsense\n"),
            Err(FrontParseError::Malformed { line: 1 })
        ));
    }

    #[test]
    fn from_hops_recomputes_both_criteria() {
        let d = staircase_mesh();
        let p = ParetoPath::from_hops(&d, vec![0, 2, 3]);
        assert_eq!(p.length, 110.0);
        assert_eq!(p.max_link, 70.0);
        assert_eq!(p.hop_count(), 3);
        assert_eq!(p.source(), 0);
        assert_eq!(p.target(), 3);
    }

    #[test]
    fn length_comparison_tolerates_association_noise() {
        assert_eq!(cmp_length(1.0, 1.0 + 1e-12), Ordering::Equal);
        assert_eq!(cmp_length(1.0, 1.0 + 1e-6), Ordering::Less);
        assert_eq!(cmp_length(1.0 + 1e-6, 1.0), Ordering::Greater);
    }
}
