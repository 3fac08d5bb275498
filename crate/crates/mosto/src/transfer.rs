//! Slow-start transfer model and size-aware chain selection.
//!
//! A transfer that fits in `r` congestion-window rounds over a relay chain
//! completes in `0.5·length + (r−1)·max_link` milliseconds: the first bytes
//! cascade down the chain in half the summed RTT, and every further round
//! costs one RTT of the slowest link because relays overlap their rounds.
//! Sizes map to round counts by doubling slow-start capacity:
//! `icw·(2^r − 1)·mss` bytes fit in `r` rounds.
//!
//! For one-round transfers the formula degenerates to half the path length,
//! so the plain shortest route wins; as `r` grows the slowest link dominates
//! and the minimax route wins. Everything in between is exactly what the
//! Pareto front preserves, which is why minimizing over the front is lossless.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::pareto::{cmp_length, ParetoFront, ParetoPath};

/// Slow-start parameters used to bucket transfer sizes into round counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransferModel {
    /// Initial congestion window, in segments.
    pub init_window_segments: u64,
    /// Segment payload size, in bytes.
    pub mss_bytes: u64,
    /// Largest modeled round count; bigger transfers use this many rounds.
    pub max_rounds: u32,
}

impl Default for TransferModel {
    fn default() -> Self {
        TransferModel {
            init_window_segments: 10,
            mss_bytes: 1460,
            max_rounds: 16,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransferError {
    #[error("{name} must be at least 1")]
    InvalidParameter { name: &'static str },
    #[error("transfer size must be at least 1 byte")]
    NonPositiveSize,
}

impl TransferModel {
    pub fn new(
        init_window_segments: u64,
        mss_bytes: u64,
        max_rounds: u32,
    ) -> Result<TransferModel, TransferError> {
        if init_window_segments < 1 {
            return Err(TransferError::InvalidParameter {
                name: "init_window_segments",
            });
        }
        if mss_bytes < 1 {
            return Err(TransferError::InvalidParameter { name: "mss_bytes" });
        }
        if max_rounds < 1 {
            return Err(TransferError::InvalidParameter { name: "max_rounds" });
        }
        Ok(TransferModel {
            init_window_segments,
            mss_bytes,
            max_rounds,
        })
    }

    /// Bytes deliverable within `rounds` doubling rounds: `icw·(2^r − 1)·mss`,
    /// saturating instead of overflowing.
    pub fn bytes_in_rounds(&self, rounds: u32) -> u64 {
        let windows = match 1u64.checked_shl(rounds) {
            Some(v) => v - 1,
            None => u64::MAX,
        };
        self.init_window_segments
            .saturating_mul(windows)
            .saturating_mul(self.mss_bytes)
    }

    /// Smallest round count whose capacity covers `size_bytes`, clamped to
    /// `max_rounds`. Zero-byte transfers are rejected.
    pub fn rounds_for_size(&self, size_bytes: u64) -> Result<u32, TransferError> {
        if size_bytes == 0 {
            return Err(TransferError::NonPositiveSize);
        }
        for r in 1..=self.max_rounds {
            if self.bytes_in_rounds(r) >= size_bytes {
                return Ok(r);
            }
        }
        Ok(self.max_rounds)
    }
}

/// Modeled completion time of an `r`-round transfer over `path`, in ms.
pub fn chain_time_ms(path: &ParetoPath, rounds: u32) -> f64 {
    assert!(rounds >= 1, "transfers take at least one round");
    0.5 * path.length + (rounds - 1) as f64 * path.max_link
}

/// Picks the front entry minimizing [`chain_time_ms`] for `rounds`. Ties
/// fall to fewer hops, then the lexicographically smaller hop sequence —
/// the same order the front itself uses, so tables are deterministic.
pub fn select_chain(entries: &[ParetoPath], rounds: u32) -> &ParetoPath {
    assert!(!entries.is_empty(), "cannot select from an empty front");
    let mut best = &entries[0];
    let mut best_time = chain_time_ms(best, rounds);
    for entry in &entries[1..] {
        let time = chain_time_ms(entry, rounds);
        let better = match cmp_length(time, best_time) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => match entry.hop_count().cmp(&best.hop_count()) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => entry.hops < best.hops,
            },
        };
        if better {
            best = entry;
            best_time = time;
        }
    }
    best
}

/// One pre-selected chain: the hop sequence and its modeled time.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainEntry {
    pub hops: Vec<usize>,
    pub modeled_ms: f64,
}

/// Immutable chain table: for every ordered pair and every round count up to
/// the model cap, the chain that minimizes modeled transfer time. Lookups
/// never compute anything; the controller swaps whole tables to update.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainLookupTable {
    n: usize,
    generation: u64,
    model: TransferModel,
    /// Indexed `i*n + j`; each inner list holds `max_rounds` entries, for
    /// rounds `1..=max_rounds`. Diagonal lists stay empty.
    chains: Vec<Vec<ChainEntry>>,
}

impl ChainLookupTable {
    /// Tabulates [`select_chain`] for all pairs and round counts.
    pub fn build(front: &ParetoFront, model: TransferModel, generation: u64) -> ChainLookupTable {
        let n = front.n();
        let mut chains = vec![Vec::new(); n * n];
        for (i, j, entries) in front.pairs() {
            let list = &mut chains[i * n + j];
            list.reserve(model.max_rounds as usize);
            for r in 1..=model.max_rounds {
                let chosen = select_chain(entries, r);
                list.push(ChainEntry {
                    hops: chosen.hops.clone(),
                    modeled_ms: chain_time_ms(chosen, r),
                });
            }
        }
        ChainLookupTable {
            n,
            generation,
            model,
            chains,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn model(&self) -> TransferModel {
        self.model
    }

    /// Chain for `rounds`-round transfers from `from` to `to`. Round counts
    /// above the model cap clamp to the cap. Returns `None` for out-of-range
    /// nodes, `from == to`, or `rounds == 0`.
    pub fn lookup(&self, from: usize, to: usize, rounds: u32) -> Option<&ChainEntry> {
        if from >= self.n || to >= self.n || from == to || rounds == 0 {
            return None;
        }
        let r = rounds.min(self.model.max_rounds);
        self.chains[from * self.n + to].get((r - 1) as usize)
    }

    /// Chain for a transfer of `size_bytes`, along with the round count the
    /// size maps to.
    pub fn lookup_size(
        &self,
        from: usize,
        to: usize,
        size_bytes: u64,
    ) -> Result<Option<(&ChainEntry, u32)>, TransferError> {
        let rounds = self.model.rounds_for_size(size_bytes)?;
        Ok(self.lookup(from, to, rounds).map(|e| (e, rounds)))
    }

    /// Line-oriented export: a commented header with the generation and model
    /// parameters, then `chain <i> <j> <r> <p1,...,pk> <modeled_ms>` rows.
    pub fn export(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# generation {}", self.generation).unwrap();
        writeln!(
            out,
            "# model icw={} mss={} max_rounds={}",
            self.model.init_window_segments, self.model.mss_bytes, self.model.max_rounds
        )
        .unwrap();
        writeln!(out, "# nodes {}", self.n).unwrap();
        for i in 0..self.n {
            for j in 0..self.n {
                for (r0, entry) in self.chains[i * self.n + j].iter().enumerate() {
                    let path: Vec<String> = entry.hops.iter().map(|h| h.to_string()).collect();
                    writeln!(
                        out,
                        "chain {} {} {} {} {}",
                        i,
                        j,
                        r0 + 1,
                        path.join(","),
                        entry.modeled_ms
                    )
                    .unwrap();
                }
            }
        }
        out
    }

    /// Parses the [`ChainLookupTable::export`] format, checking the table is
    /// complete: every off-diagonal pair needs every round count.
    pub fn parse(text: &str) -> Result<ChainLookupTable, TableParseError> {
        let mut generation = None;
        let mut model = None;
        let mut nodes = None;
        let mut rows: HashMap<(usize, usize, u32), ChainEntry> = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                let f: Vec<&str> = rest.split_whitespace().collect();
                match f.as_slice() {
                    ["generation", g] => {
                        generation =
                            Some(g.parse().map_err(|_| TableParseError::Malformed { line })?);
                    }
                    ["model", icw, mss, mr] => {
                        let icw = icw
                            .strip_prefix("icw=")
                            .and_then(|v| v.parse().ok())
                            .ok_or(TableParseError::Malformed { line })?;
                        let mss = mss
                            .strip_prefix("mss=")
                            .and_then(|v| v.parse().ok())
                            .ok_or(TableParseError::Malformed { line })?;
                        let mr = mr
                            .strip_prefix("max_rounds=")
                            .and_then(|v| v.parse().ok())
                            .ok_or(TableParseError::Malformed { line })?;
                        model = Some(
                            TransferModel::new(icw, mss, mr)
                                .map_err(|_| TableParseError::Malformed { line })?,
                        );
                    }
                    ["nodes", n] => {
                        nodes = Some(n.parse().map_err(|_| TableParseError::Malformed { line })?);
                    }
                    _ => {} // Unknown comments are ignored.
                }
                continue;
            }
            let f: Vec<&str> = trimmed.split_whitespace().collect();
            if f.len() != 6 || f[0] != "chain" {
                return Err(TableParseError::Malformed { line });
            }
            let i: usize = f[1]
                .parse()
                .map_err(|_| TableParseError::Malformed { line })?;
            let j: usize = f[2]
                .parse()
                .map_err(|_| TableParseError::Malformed { line })?;
            let r: u32 = f[3]
                .parse()
                .map_err(|_| TableParseError::Malformed { line })?;
            let hops: Result<Vec<usize>, _> = f[4].split(',').map(|s| s.parse()).collect();
            let hops = hops.map_err(|_| TableParseError::Malformed { line })?;
            let modeled_ms: f64 = f[5]
                .parse()
                .map_err(|_| TableParseError::Malformed { line })?;
            if r == 0 || hops.first() != Some(&i) || hops.last() != Some(&j) || i == j {
                return Err(TableParseError::Inconsistent { line });
            }
            if rows
                .insert((i, j, r), ChainEntry { hops, modeled_ms })
                .is_some()
            {
                return Err(TableParseError::DuplicateRow { line });
            }
        }
        let generation = generation.ok_or(TableParseError::MissingHeader("generation"))?;
        let model: TransferModel = model.ok_or(TableParseError::MissingHeader("model"))?;
        let n: usize = nodes.ok_or(TableParseError::MissingHeader("nodes"))?;
        if n < 2 {
            return Err(TableParseError::TooFewNodes { nodes: n });
        }
        let mut chains = vec![Vec::new(); n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let list = &mut chains[i * n + j];
                for r in 1..=model.max_rounds {
                    let entry = rows.remove(&(i, j, r)).ok_or(TableParseError::Incomplete {
                        from: i,
                        to: j,
                        rounds: r,
                    })?;
                    list.push(entry);
                }
            }
        }
        if let Some((&(i, j, _), _)) = rows.iter().next() {
            return Err(TableParseError::UnknownPair { from: i, to: j });
        }
        Ok(ChainLookupTable {
            n,
            generation,
            model,
            chains,
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableParseError {
    #[error("line {line}: malformed table row")]
    Malformed { line: usize },
    #[error("line {line}: row fields disagree with the hop sequence")]
    Inconsistent { line: usize },
    #[error("line {line}: duplicate (pair, rounds) row")]
    DuplicateRow { line: usize },
    #[error("missing `# {0}` header")]
    MissingHeader(&'static str),
    #[error("a table needs at least 2 nodes, found {nodes}")]
    TooFewNodes { nodes: usize },
    #[error("no row for pair ({from}, {to}) at {rounds} rounds")]
    Incomplete { from: usize, to: usize, rounds: u32 },
    #[error("row for pair ({from}, {to}) is outside the declared node range")]
    UnknownPair { from: usize, to: usize },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pareto::pareto_baseline;
    use crate::topology::DistanceMatrix;

    fn path(hops: &[usize], length: f64, max_link: f64) -> ParetoPath {
        ParetoPath {
            hops: hops.to_vec(),
            length,
            max_link,
        }
    }

    #[test]
    fn size_buckets_match_window_increments() {
        let m = TransferModel::default();
        assert_eq!(m.rounds_for_size(1), Ok(1));
        assert_eq!(m.rounds_for_size(14600), Ok(1));
        assert_eq!(m.rounds_for_size(14601), Ok(2));
        assert_eq!(m.rounds_for_size(450_000), Ok(5));
        // Four rounds carry only 10·15·1460 = 219000 bytes.
        assert_eq!(m.bytes_in_rounds(4), 219_000);
        assert_eq!(m.bytes_in_rounds(5), 452_600);
        assert_eq!(m.rounds_for_size(14_935_000), Ok(10));
        assert_eq!(m.bytes_in_rounds(10), 14_935_800);
        assert_eq!(m.rounds_for_size(u64::MAX), Ok(16));
        assert_eq!(m.rounds_for_size(0), Err(TransferError::NonPositiveSize));
    }

    #[test]
    fn model_parameters_are_validated() {
        assert!(TransferModel::new(10, 1460, 16).is_ok());
        assert_eq!(
            TransferModel::new(0, 1460, 16),
            Err(TransferError::InvalidParameter {
                name: "init_window_segments"
            })
        );
        assert_eq!(
            TransferModel::new(10, 0, 16),
            Err(TransferError::InvalidParameter { name: "mss_bytes" })
        );
        assert_eq!(
            TransferModel::new(10, 1460, 0),
            Err(TransferError::InvalidParameter { name: "max_rounds" })
        );
    }

    #[test]
    fn capacity_saturates_instead_of_overflowing() {
        let m = TransferModel {
            init_window_segments: u64::MAX,
            mss_bytes: 2,
            max_rounds: 80,
        };
        assert_eq!(m.bytes_in_rounds(70), u64::MAX);
        assert_eq!(m.rounds_for_size(u64::MAX), Ok(1));
    }

    #[test]
    fn chain_time_follows_the_formula() {
        let single = path(&[0, 1], 100.0, 100.0);
        assert_eq!(chain_time_ms(&single, 1), 50.0);
        assert_eq!(chain_time_ms(&single, 5), 450.0);
        let relay = path(&[0, 1, 2], 100.0, 50.0);
        assert_eq!(chain_time_ms(&relay, 5), 250.0);
    }

    #[test]
    fn selection_moves_from_shortest_to_minimax_as_rounds_grow() {
        let entries = vec![
            path(&[0, 1, 2, 3], 120.0, 40.0),
            path(&[0, 1, 3], 110.0, 70.0),
            path(&[0, 3], 95.0, 95.0),
        ];
        // One round: pure length, the staircase's last entry.
        assert_eq!(select_chain(&entries, 1).hops, vec![0, 3]);
        // Many rounds: the bottleneck dominates, the first entry.
        assert_eq!(select_chain(&entries, 16).hops, vec![0, 1, 2, 3]);
        // Selection never beats every entry at once: it is one of them.
        for r in 1..=16 {
            let chosen = select_chain(&entries, r);
            for e in &entries {
                assert!(
                    chain_time_ms(chosen, r) <= chain_time_ms(e, r) + 1e-9,
                    "round {r}: {:?} beat {:?}",
                    e.hops,
                    chosen.hops
                );
            }
        }
    }

    #[test]
    fn selection_ties_prefer_fewer_hops() {
        // At r=2 both entries cost 25 ms; the two-hop chain must win even
        // though the front lists the relay first.
        let entries = vec![path(&[0, 1, 2, 3], 30.0, 10.0), path(&[0, 3], 10.0, 20.0)];
        assert_eq!(select_chain(&entries, 2).hops, vec![0, 3]);
        let single = vec![path(&[0, 2], 40.0, 40.0)];
        assert_eq!(select_chain(&single, 1).hops, vec![0, 2]);
        assert_eq!(select_chain(&single, 16).hops, vec![0, 2]);
    }

    #[test]
    fn modeled_time_is_nondecreasing_in_rounds() {
        let p = path(&[0, 1, 2], 100.0, 60.0);
        let mut last = 0.0;
        for r in 1..=20 {
            let t = chain_time_ms(&p, r);
            assert!(t >= last);
            last = t;
        }
    }

    fn triangle_front() -> ParetoFront {
        let d = DistanceMatrix::from_rows(vec![
            vec![0.0, 10.0, 20.0],
            vec![10.0, 0.0, 10.0],
            vec![20.0, 10.0, 0.0],
        ])
        .unwrap();
        pareto_baseline(&d)
    }

    #[test]
    fn table_build_and_lookup() {
        let front = triangle_front();
        let model = TransferModel::default();
        let table = ChainLookupTable::build(&front, model, 7);
        assert_eq!(table.generation(), 7);
        assert_eq!(table.n(), 3);
        // The 0→2 front holds only the relay route, so every round count
        // selects it; its one-round length equals the mesh distance.
        let e1 = table.lookup(0, 2, 1).unwrap();
        assert_eq!(e1.hops, vec![0, 1, 2]);
        assert_eq!(e1.modeled_ms, 10.0);
        let e10 = table.lookup(0, 2, 10).unwrap();
        assert_eq!(e10.hops, vec![0, 1, 2]);
        assert_eq!(e10.modeled_ms, 10.0 + 9.0 * 10.0);
        // Round counts beyond the cap clamp to the cap.
        assert_eq!(table.lookup(0, 2, 99), table.lookup(0, 2, 16));
        assert_eq!(table.lookup(0, 0, 1), None);
        assert_eq!(table.lookup(0, 3, 1), None);
        assert_eq!(table.lookup(0, 2, 0), None);
        // Size-based lookup goes through the round bucketing.
        let (by_size, rounds) = table.lookup_size(0, 2, 450_000).unwrap().unwrap();
        assert_eq!(rounds, 5);
        assert_eq!(by_size.hops, vec![0, 1, 2]);
        assert_eq!(
            table.lookup_size(0, 2, 0),
            Err(TransferError::NonPositiveSize)
        );
    }

    #[test]
    fn table_export_parse_round_trips() {
        let table = ChainLookupTable::build(&triangle_front(), TransferModel::default(), 42);
        let text = table.export();
        let parsed = ChainLookupTable::parse(&text).unwrap();
        assert_eq!(table, parsed);
        assert_eq!(parsed.export(), text);
    }

    #[test]
    fn table_parse_rejects_incomplete_and_malformed_input() {
        let table = ChainLookupTable::build(&triangle_front(), TransferModel::default(), 1);
        let text = table.export();
        // Drop one chain row: the table is no longer complete.
        let broken: String = text
            .lines()
            .filter(|l| !l.starts_with("chain 0 2 3 "))
            .map(|l| format!("{l}\n"))
            .collect();
        assert_eq!(
            ChainLookupTable::parse(&broken),
            Err(TableParseError::Incomplete {
                from: 0,
                to: 2,
                rounds: 3
            })
        );
        assert_eq!(
            ChainLookupTable::parse("chain 0 1 1 0,1 5\n"),
            Err(TableParseError::MissingHeader("generation"))
        );
        let dup = format!("{text}chain 0 2 1 0,1,2 10\n");
        assert_eq!(
            ChainLookupTable::parse(&dup),
            Err(TableParseError::DuplicateRow {
                line: dup.lines().count()
            })
        );
    }
}
