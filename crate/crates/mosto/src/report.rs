//! Comparison reports: how the size-aware chain choice stacks up against the
//! plain shortest-path and minimax baselines, pair by pair.
//!
//! Both baselines live on the Pareto front itself (the shortest path is its
//! last entry, the minimax path its first), and the selected chain minimizes
//! modeled time over the whole front — so relative improvements can never be
//! negative. The report exposes the raw per-pair rows, distribution (CDF)
//! samples ready for plotting, and a proxy-count summary.

use crate::pareto::ParetoFront;
use crate::transfer::{chain_time_ms, select_chain};

/// One (pair, round-count) comparison line.
#[derive(Debug, Clone, PartialEq)]
pub struct PairComparison {
    pub from: usize,
    pub to: usize,
    pub rounds: u32,
    pub selected_ms: f64,
    /// Intermediate proxies on the selected chain (endpoints excluded).
    pub selected_proxies: usize,
    pub shortest_ms: f64,
    pub shortest_proxies: usize,
    pub minimax_ms: f64,
    pub minimax_proxies: usize,
    /// Relative time saved over the shortest-path baseline, in [0, 1).
    pub improvement_vs_shortest: f64,
    /// Relative time saved over the minimax baseline, in [0, 1).
    pub improvement_vs_minimax: f64,
}

/// Full comparison over every ordered pair and every requested round count.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    rounds: Vec<u32>,
    rows: Vec<PairComparison>,
}

/// Baseline identifiers used in CDF exports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    Shortest,
    Minimax,
}

impl Baseline {
    pub fn label(self) -> &'static str {
        match self {
            Baseline::Shortest => "shortest",
            Baseline::Minimax => "minimax",
        }
    }
}

impl ComparisonReport {
    /// Evaluates all ordered pairs of the front at each round count.
    pub fn build(front: &ParetoFront, rounds: &[u32]) -> ComparisonReport {
        let mut rows = Vec::new();
        for &r in rounds {
            for (i, j, entries) in front.pairs() {
                let selected = select_chain(entries, r);
                let shortest = front.shortest(i, j);
                let minimax = front.minimax(i, j);
                let selected_ms = chain_time_ms(selected, r);
                let shortest_ms = chain_time_ms(shortest, r);
                let minimax_ms = chain_time_ms(minimax, r);
                rows.push(PairComparison {
                    from: i,
                    to: j,
                    rounds: r,
                    selected_ms,
                    selected_proxies: selected.hop_count().saturating_sub(2),
                    shortest_ms,
                    shortest_proxies: shortest.hop_count().saturating_sub(2),
                    minimax_ms,
                    minimax_proxies: minimax.hop_count().saturating_sub(2),
                    improvement_vs_shortest: relative_improvement(shortest_ms, selected_ms),
                    improvement_vs_minimax: relative_improvement(minimax_ms, selected_ms),
                });
            }
        }
        ComparisonReport {
            rounds: rounds.to_vec(),
            rows,
        }
    }

    pub fn rounds(&self) -> &[u32] {
        &self.rounds
    }

    pub fn rows(&self) -> &[PairComparison] {
        &self.rows
    }

    /// Sorted improvement samples against one baseline with cumulative
    /// fractions: `(sample, k/N)` for the k-th smallest sample.
    pub fn cdf(&self, rounds: u32, baseline: Baseline) -> Vec<(f64, f64)> {
        let mut samples: Vec<f64> = self
            .rows
            .iter()
            .filter(|row| row.rounds == rounds)
            .map(|row| match baseline {
                Baseline::Shortest => row.improvement_vs_shortest,
                Baseline::Minimax => row.improvement_vs_minimax,
            })
            .collect();
        samples.sort_by(|a, b| a.partial_cmp(b).expect("improvements are finite"));
        let n = samples.len() as f64;
        samples
            .into_iter()
            .enumerate()
            .map(|(k, s)| (s, (k + 1) as f64 / n))
            .collect()
    }

    /// Mean reduction in intermediate proxies versus the minimax baseline,
    /// for one round count.
    pub fn mean_proxy_reduction_vs_minimax(&self, rounds: u32) -> f64 {
        let rows: Vec<&PairComparison> = self
            .rows
            .iter()
            .filter(|row| row.rounds == rounds)
            .collect();
        if rows.is_empty() {
            return 0.0;
        }
        let total: f64 = rows
            .iter()
            .map(|row| row.minimax_proxies as f64 - row.selected_proxies as f64)
            .sum();
        total / rows.len() as f64
    }

    /// Per-pair detail CSV with a fixed header.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from(
            "from,to,rounds,selected_ms,selected_proxies,shortest_ms,shortest_proxies,\
             minimax_ms,minimax_proxies,impr_vs_shortest,impr_vs_minimax\n",
        );
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{:.6},{},{:.6},{},{:.6},{},{:.6},{:.6}",
                r.from,
                r.to,
                r.rounds,
                r.selected_ms,
                r.selected_proxies,
                r.shortest_ms,
                r.shortest_proxies,
                r.minimax_ms,
                r.minimax_proxies,
                r.improvement_vs_shortest,
                r.improvement_vs_minimax
            )
            .unwrap();
        }
        out
    }

    /// Plot-ready CDF CSV over both baselines and all round counts.
    pub fn cdf_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("rounds,baseline,improvement,fraction\n");
        for &r in &self.rounds {
            for baseline in [Baseline::Shortest, Baseline::Minimax] {
                for (sample, fraction) in self.cdf(r, baseline) {
                    writeln!(
                        out,
                        "{},{},{:.6},{:.6}",
                        r,
                        baseline.label(),
                        sample,
                        fraction
                    )
                    .unwrap();
                }
            }
        }
        out
    }

    /// Human-readable digest: per round count, the mean and maximum
    /// improvements and the proxy-count reduction.
    pub fn summary(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        for &r in &self.rounds {
            let rows: Vec<&PairComparison> =
                self.rows.iter().filter(|row| row.rounds == r).collect();
            if rows.is_empty() {
                continue;
            }
            let n = rows.len() as f64;
            let mean =
                |f: &dyn Fn(&PairComparison) -> f64| rows.iter().copied().map(f).sum::<f64>() / n;
            let max = |f: &dyn Fn(&PairComparison) -> f64| {
                rows.iter().copied().map(f).fold(0.0, f64::max)
            };
            writeln!(
                out,
                "rounds {r}: vs shortest mean {:.1}% max {:.1}%; vs minimax mean {:.1}% max {:.1}%; \
                 proxies saved vs minimax {:.2}",
                100.0 * mean(&|row| row.improvement_vs_shortest),
                100.0 * max(&|row| row.improvement_vs_shortest),
                100.0 * mean(&|row| row.improvement_vs_minimax),
                100.0 * max(&|row| row.improvement_vs_minimax),
                self.mean_proxy_reduction_vs_minimax(r)
            )
            .unwrap();
        }
        out
    }
}

fn relative_improvement(baseline_ms: f64, selected_ms: f64) -> f64 {
    if baseline_ms <= 0.0 {
        return 0.0;
    }
    (baseline_ms - selected_ms) / baseline_ms
}
