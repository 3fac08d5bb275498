//! Scenario files: one simulation run described as key-value text.
//!
//! ```text
//! # two-hop relay, hand-off enabled
//! chain 0,1,2
//! size 5000000
//! rtt 0 1 50
//! rtt 1 2 50
//! bandwidth 1 2 1000
//! loss 0 1 0.001
//! offload on
//! ramp on
//! seed 7
//! ```
//!
//! `chain` lists node ids source-to-sink; every adjacent pair needs an `rtt`
//! line (full round-trip, ms). `bandwidth` (bytes/ms) and `loss` (per-segment
//! probability) are optional per link. The remaining keys tune TCP and the
//! hand-off machinery; unset keys keep the defaults below.

use thiserror::Error;

use crate::topology::DistanceMatrix;

/// One hop's link parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSpec {
    /// Full round-trip time of the hop, ms (one-way is half).
    pub rtt_ms: f64,
    /// Serialization rate in bytes per ms; `None` models unlimited capacity.
    pub bandwidth_bytes_per_ms: Option<f64>,
    /// Per-segment drop probability.
    pub loss: f64,
}

impl LinkSpec {
    pub fn one_way_ms(&self) -> f64 {
        self.rtt_ms / 2.0
    }
}

/// A complete, validated simulation input.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Node ids, source first, sink last.
    pub chain: Vec<usize>,
    /// Application bytes to deliver end to end.
    pub size_bytes: u64,
    /// Per-hop link parameters, `chain.len() - 1` entries.
    pub links: Vec<LinkSpec>,
    /// Run the relay hand-off (requires exactly one relay: a 3-node chain).
    pub offload: bool,
    /// Ramp the injected delay (true) or let the RTT change land as one jump
    /// at the switchover (false).
    pub ramp: bool,
    pub ramp_step_ms: f64,
    pub ramp_rtts_per_step: u32,
    pub seed: u64,
    pub init_window_segments: u64,
    pub mss_bytes: u64,
    pub ssthresh_segments: Option<u64>,
    pub rto_floor_ms: f64,
    pub rto_granularity_ms: f64,
    pub initial_rto_ms: f64,
    pub growth_threshold: f64,
    /// Abort the run after this many processed events.
    pub event_cap: u64,
    /// Spacing of periodic goodput/cwnd trace samples.
    pub sample_interval_ms: f64,
    /// Per-hop (data ISN, reverse ISN); defaults to zeros.
    pub isns: Vec<(u32, u32)>,
}

impl Scenario {
    /// A plain chain transfer over explicit per-hop RTTs: unlimited
    /// bandwidth, lossless, no hand-off.
    pub fn plain_chain(rtts_ms: &[f64], size_bytes: u64) -> Scenario {
        let chain = (0..=rtts_ms.len()).collect();
        let links = rtts_ms
            .iter()
            .map(|&rtt_ms| LinkSpec {
                rtt_ms,
                bandwidth_bytes_per_ms: None,
                loss: 0.0,
            })
            .collect();
        let mut s = Scenario {
            chain,
            size_bytes,
            links,
            ..Scenario::base()
        };
        s.isns = vec![(0, 0); rtts_ms.len()];
        s
    }

    /// A plain chain transfer along `hops` with RTTs taken from the mesh.
    pub fn chain_over_mesh(hops: &[usize], d: &DistanceMatrix, size_bytes: u64) -> Scenario {
        let rtts: Vec<f64> = hops.windows(2).map(|w| d.get(w[0], w[1])).collect();
        let mut s = Scenario::plain_chain(&rtts, size_bytes);
        s.chain = hops.to_vec();
        s
    }

    /// Defaults shared by every construction path. `chain`/`links`/`size`
    /// are placeholders and must be filled in.
    fn base() -> Scenario {
        Scenario {
            chain: Vec::new(),
            size_bytes: 0,
            links: Vec::new(),
            offload: false,
            ramp: true,
            ramp_step_ms: 10.0,
            ramp_rtts_per_step: 1,
            seed: 0,
            init_window_segments: 10,
            mss_bytes: 1460,
            ssthresh_segments: None,
            rto_floor_ms: 200.0,
            rto_granularity_ms: 0.0,
            initial_rto_ms: 1000.0,
            growth_threshold: 1.5,
            event_cap: 5_000_000,
            sample_interval_ms: 10.0,
            isns: Vec::new(),
        }
    }

    /// Parses the key-value format; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let mut chain: Option<Vec<usize>> = None;
        let mut size: Option<u64> = None;
        let mut rtts: Vec<(usize, usize, f64, usize)> = Vec::new();
        let mut bandwidths: Vec<(usize, usize, f64, usize)> = Vec::new();
        let mut losses: Vec<(usize, usize, f64, usize)> = Vec::new();
        let mut isns: Vec<(usize, u32, u32, usize)> = Vec::new();
        let mut s = Scenario::base();

        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let key = fields[0];
            let args = &fields[1..];
            let bad = |what: &'static str| ScenarioError::BadValue { line, what };
            match (key, args.len()) {
                ("chain", 1) => {
                    let hops: Result<Vec<usize>, _> =
                        args[0].split(',').map(|t| t.parse()).collect();
                    chain = Some(hops.map_err(|_| bad("chain node list"))?);
                }
                ("size", 1) => {
                    size = Some(args[0].parse().map_err(|_| bad("size"))?);
                }
                ("rtt", 3) => {
                    let u = args[0].parse().map_err(|_| bad("rtt node"))?;
                    let v = args[1].parse().map_err(|_| bad("rtt node"))?;
                    let ms: f64 = args[2].parse().map_err(|_| bad("rtt value"))?;
                    rtts.push((u, v, ms, line));
                }
                ("bandwidth", 3) => {
                    let u = args[0].parse().map_err(|_| bad("bandwidth node"))?;
                    let v = args[1].parse().map_err(|_| bad("bandwidth node"))?;
                    let rate: f64 = args[2].parse().map_err(|_| bad("bandwidth value"))?;
                    bandwidths.push((u, v, rate, line));
                }
                ("loss", 3) => {
                    let u = args[0].parse().map_err(|_| bad("loss node"))?;
                    let v = args[1].parse().map_err(|_| bad("loss node"))?;
                    let p: f64 = args[2].parse().map_err(|_| bad("loss value"))?;
                    losses.push((u, v, p, line));
                }
                ("isn", 3) => {
                    let hop = args[0].parse().map_err(|_| bad("isn hop"))?;
                    let data = args[1].parse().map_err(|_| bad("isn value"))?;
                    let rev = args[2].parse().map_err(|_| bad("isn value"))?;
                    isns.push((hop, data, rev, line));
                }
                ("offload", 1) => s.offload = parse_switch(args[0]).ok_or(bad("offload"))?,
                ("ramp", 1) => s.ramp = parse_switch(args[0]).ok_or(bad("ramp"))?,
                ("ramp_step_ms", 1) => {
                    s.ramp_step_ms = args[0].parse().map_err(|_| bad("ramp_step_ms"))?
                }
                ("ramp_rtts_per_step", 1) => {
                    s.ramp_rtts_per_step = args[0].parse().map_err(|_| bad("ramp_rtts_per_step"))?
                }
                ("seed", 1) => s.seed = args[0].parse().map_err(|_| bad("seed"))?,
                ("icw", 1) => s.init_window_segments = args[0].parse().map_err(|_| bad("icw"))?,
                ("mss", 1) => s.mss_bytes = args[0].parse().map_err(|_| bad("mss"))?,
                ("ssthresh", 1) => {
                    s.ssthresh_segments = Some(args[0].parse().map_err(|_| bad("ssthresh"))?)
                }
                ("rto_floor_ms", 1) => {
                    s.rto_floor_ms = args[0].parse().map_err(|_| bad("rto_floor_ms"))?
                }
                ("rto_granularity_ms", 1) => {
                    s.rto_granularity_ms = args[0].parse().map_err(|_| bad("rto_granularity_ms"))?
                }
                ("initial_rto_ms", 1) => {
                    s.initial_rto_ms = args[0].parse().map_err(|_| bad("initial_rto_ms"))?
                }
                ("growth_threshold", 1) => {
                    s.growth_threshold = args[0].parse().map_err(|_| bad("growth_threshold"))?
                }
                ("event_cap", 1) => s.event_cap = args[0].parse().map_err(|_| bad("event_cap"))?,
                ("sample_interval_ms", 1) => {
                    s.sample_interval_ms = args[0].parse().map_err(|_| bad("sample_interval_ms"))?
                }
                (key, _) => {
                    return Err(ScenarioError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
            }
        }

        s.chain = chain.ok_or(ScenarioError::MissingKey { key: "chain" })?;
        s.size_bytes = size.ok_or(ScenarioError::MissingKey { key: "size" })?;
        if s.chain.len() < 2 {
            return Err(ScenarioError::ChainTooShort);
        }

        // Match per-pair lines against chain adjacency.
        let hop_of_pair = |u: usize, v: usize| -> Option<usize> {
            s.chain
                .windows(2)
                .position(|w| (w[0] == u && w[1] == v) || (w[0] == v && w[1] == u))
        };
        let hop_count = s.chain.len() - 1;
        let mut links = vec![None; hop_count];
        for (u, v, ms, line) in rtts {
            let hop = hop_of_pair(u, v).ok_or(ScenarioError::NotAChainLink { line, u, v })?;
            if ms <= 0.0 || !ms.is_finite() {
                return Err(ScenarioError::BadValue {
                    line,
                    what: "rtt value",
                });
            }
            links[hop] = Some(LinkSpec {
                rtt_ms: ms,
                bandwidth_bytes_per_ms: None,
                loss: 0.0,
            });
        }
        for (hop, spec) in links.iter().enumerate() {
            if spec.is_none() {
                return Err(ScenarioError::MissingLink {
                    u: s.chain[hop],
                    v: s.chain[hop + 1],
                });
            }
        }
        s.links = links.into_iter().map(|l| l.unwrap()).collect();
        for (u, v, rate, line) in bandwidths {
            let hop = hop_of_pair(u, v).ok_or(ScenarioError::NotAChainLink { line, u, v })?;
            if rate <= 0.0 || !rate.is_finite() {
                return Err(ScenarioError::BadValue {
                    line,
                    what: "bandwidth value",
                });
            }
            s.links[hop].bandwidth_bytes_per_ms = Some(rate);
        }
        for (u, v, p, line) in losses {
            let hop = hop_of_pair(u, v).ok_or(ScenarioError::NotAChainLink { line, u, v })?;
            if !(0.0..1.0).contains(&p) {
                return Err(ScenarioError::BadValue {
                    line,
                    what: "loss probability",
                });
            }
            s.links[hop].loss = p;
        }
        s.isns = vec![(0, 0); hop_count];
        for (hop, data, rev, line) in isns {
            if hop >= hop_count {
                return Err(ScenarioError::BadValue {
                    line,
                    what: "isn hop index",
                });
            }
            s.isns[hop] = (data, rev);
        }

        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if self.chain.len() < 2 {
            return Err(ScenarioError::ChainTooShort);
        }
        if self.size_bytes == 0 {
            return Err(ScenarioError::EmptyTransfer);
        }
        if self.offload && self.chain.len() != 3 {
            return Err(ScenarioError::OffloadNeedsSingleRelay {
                nodes: self.chain.len(),
            });
        }
        if self.init_window_segments == 0 || self.mss_bytes == 0 {
            return Err(ScenarioError::BadTcpParameters);
        }
        if self.ramp_step_ms <= 0.0 || self.ramp_rtts_per_step == 0 {
            return Err(ScenarioError::BadTcpParameters);
        }
        Ok(())
    }

    /// Serializes back to the parse format.
    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let ids: Vec<String> = self.chain.iter().map(|n| n.to_string()).collect();
        writeln!(out, "chain {}", ids.join(",")).unwrap();
        writeln!(out, "size {}", self.size_bytes).unwrap();
        for (hop, link) in self.links.iter().enumerate() {
            let (u, v) = (self.chain[hop], self.chain[hop + 1]);
            writeln!(out, "rtt {} {} {}", u, v, link.rtt_ms).unwrap();
            if let Some(rate) = link.bandwidth_bytes_per_ms {
                writeln!(out, "bandwidth {} {} {}", u, v, rate).unwrap();
            }
            if link.loss > 0.0 {
                writeln!(out, "loss {} {} {}", u, v, link.loss).unwrap();
            }
        }
        writeln!(out, "offload {}", switch_text(self.offload)).unwrap();
        writeln!(out, "ramp {}", switch_text(self.ramp)).unwrap();
        writeln!(out, "ramp_step_ms {}", self.ramp_step_ms).unwrap();
        writeln!(out, "ramp_rtts_per_step {}", self.ramp_rtts_per_step).unwrap();
        writeln!(out, "seed {}", self.seed).unwrap();
        writeln!(out, "icw {}", self.init_window_segments).unwrap();
        writeln!(out, "mss {}", self.mss_bytes).unwrap();
        if let Some(t) = self.ssthresh_segments {
            writeln!(out, "ssthresh {}", t).unwrap();
        }
        writeln!(out, "rto_floor_ms {}", self.rto_floor_ms).unwrap();
        writeln!(out, "rto_granularity_ms {}", self.rto_granularity_ms).unwrap();
        writeln!(out, "initial_rto_ms {}", self.initial_rto_ms).unwrap();
        writeln!(out, "growth_threshold {}", self.growth_threshold).unwrap();
        writeln!(out, "event_cap {}", self.event_cap).unwrap();
        writeln!(out, "sample_interval_ms {}", self.sample_interval_ms).unwrap();
        for (hop, &(data, rev)) in self.isns.iter().enumerate() {
            if (data, rev) != (0, 0) {
                writeln!(out, "isn {} {} {}", hop, data, rev).unwrap();
            }
        }
        out
    }
}

fn parse_switch(token: &str) -> Option<bool> {
    match token {
        "on" | "true" | "1" => Some(true),
        "off" | "false" | "0" => Some(false),
        _ => None,
    }
}

fn switch_text(v: bool) -> &'static str {
    if v {
        "on"
    } else {
        "off"
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: bad {what}")]
    BadValue { line: usize, what: &'static str },
    #[error("line {line}: unknown or malformed key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("missing required key `{key}`")]
    MissingKey { key: &'static str },
    #[error("a chain needs at least two nodes")]
    ChainTooShort,
    #[error("transfer size must be at least 1 byte")]
    EmptyTransfer,
    #[error("line {line}: nodes {u} and {v} are not adjacent on the chain")]
    NotAChainLink { line: usize, u: usize, v: usize },
    #[error("no rtt given for chain link {u}-{v}")]
    MissingLink { u: usize, v: usize },
    #[error("hand-off requires exactly one relay (a 3-node chain), got {nodes} nodes")]
    OffloadNeedsSingleRelay { nodes: usize },
    #[error("TCP parameters must be positive")]
    BadTcpParameters,
}
