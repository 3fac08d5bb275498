//! Discrete-event simulation of a transfer over a relay chain, with an
//! optional mid-stream hand-off that splices the relay out of the path.
//!
//! The world advances through a time-ordered event queue (nanosecond clock,
//! insertion order breaking ties, so runs are bit-reproducible for a given
//! scenario and seed). Each hop runs one pre-established TCP connection
//! ([`tcp::SimTcpConn`]); relays forward payload as it is delivered in order.
//! Per-link one-way latency is half the configured RTT; an optional
//! bandwidth serializes data segments (pure ACKs are treated as negligible
//! and are never serialized or dropped); per-link loss applies to data
//! segments, with seeded randomness.
//!
//! When the hand-off is enabled (three-node chains only), the relay watches
//! both senders leave slow start, then raises the client's observed RTT by
//! delaying ACKs — stepped, if the ramp is on — toward the full-path RTT,
//! stops accepting new client data until both hops drain, installs a
//! sequence translation, and steps out: from then on client segments travel
//! the whole path rewritten into the server's sequence space, and the
//! server's ACKs travel back rewritten into the client's. With the ramp off
//! the client's RTT estimator never adapts, so the jump materializes at the
//! switchover — typically as a spurious retransmission timeout.
//!
//! Payload bytes are never materialized: both ends derive the byte at an
//! absolute stream offset from the same pure function, and the sink folds
//! delivered bytes into a running hash compared against the source range.
//! Any mis-translation of sequence numbers therefore shows up as a hash
//! mismatch or a stall, not as a silently wrong answer.

pub mod offload;
pub mod scenario;
pub mod tcp;
pub mod trace;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng as _;
use rand::SeedableRng as _;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::topology::DistanceMatrix;
pub use offload::{
    segment_checksum, translate_segment, Direction, OffloadMachine, OffloadState, SeqTranslation,
};
pub use scenario::{LinkSpec, Scenario, ScenarioError};
pub use tcp::{detect_slowstart_end, CongestionPhase, SimTcpConn, TcpConfig};
pub use trace::{Trace, TraceEvent, TraceRow};

const NS_PER_MS: f64 = 1_000_000.0;

/// A segment on the wire: 32-bit sequence space plus bookkeeping fields.
///
/// `stream_off` is diagnostic only — receivers reconstruct offsets from the
/// wire `seq`, so sequence translation is exercised for real.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub seq: u32,
    pub ack: u32,
    /// Payload length; 0 for pure ACKs.
    pub len: u32,
    /// Absolute offset of the first payload byte in the sender's stream.
    pub stream_off: u64,
    pub checksum: u16,
    pub retransmit: bool,
}

/// Deterministic payload byte at an absolute stream offset.
fn byte_at(off: u64) -> u8 {
    let x = off.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    ((x >> 32) ^ x) as u8
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv_fold(mut hash: u64, from_off: u64, to_off: u64) -> u64 {
    for off in from_off..to_off {
        hash = (hash ^ byte_at(off) as u64).wrapping_mul(FNV_PRIME);
    }
    hash
}

/// What a finished run reports.
#[derive(Debug, Clone)]
pub struct SimReport {
    /// Time at which the last payload byte was delivered in order at the sink.
    pub completion_ms: f64,
    pub delivered_bytes: u64,
    /// Retransmitted segments, all senders.
    pub retransmissions: u64,
    /// Retransmission timeouts, all senders.
    pub rto_events: u64,
    /// Timeouts on the first hop's sender after the switchover — the
    /// signature of a hand-off the client's timer was not prepared for.
    pub client_rtos_after_offload: u64,
    /// Per-sender time at which slow start was declared over.
    pub ss_end_ms: Vec<Option<f64>>,
    /// Time the hand-off machinery engaged (ramp start or drain start).
    pub handoff_begin_ms: Option<f64>,
    /// Time the relay stepped out of the path.
    pub offload_ms: Option<f64>,
    /// Segments the relay's TCP state handled after stepping out; must stay 0.
    pub relay_segments_after_offload: u64,
    /// Delivered stream hash matched the source range exactly.
    pub stream_intact: bool,
    pub stream_hash: u64,
    pub trace: Trace,
}

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("simulation stalled at {at_ms} ms with {delivered_bytes} bytes delivered")]
    Stalled { at_ms: f64, delivered_bytes: u64 },
    #[error("event cap of {cap} exceeded")]
    EventCapExceeded { cap: u64 },
    #[error("wire checksum mismatch at {at_ms} ms")]
    ChecksumMismatch { at_ms: f64 },
}

#[derive(Debug)]
enum Event {
    /// Payload arriving at the receiver half of `hop`'s connection.
    DataArrival {
        hop: usize,
        seg: Segment,
    },
    /// Pure ACK arriving at the sender half of `hop`'s connection.
    AckArrival {
        hop: usize,
        seg: Segment,
    },
    /// Deferred ACK processing at the relay while delay is being injected.
    AckProcess {
        hop: usize,
        seg: Segment,
    },
    RtoCheck {
        hop: usize,
        token: u64,
    },
    RampTick,
    SampleTick,
}

struct Scheduled {
    at_ns: u64,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.at_ns == other.at_ns && self.seq == other.seq
    }
}
impl Eq for Scheduled {}
impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Scheduled {
    // Reversed so the max-heap pops the earliest (time, insertion) pair.
    fn cmp(&self, other: &Self) -> Ordering {
        other.at_ns.cmp(&self.at_ns).then(other.seq.cmp(&self.seq))
    }
}

struct LinkState {
    one_way_ns: u64,
    bandwidth_bytes_per_ms: Option<f64>,
    loss: f64,
    /// Data-direction serialization horizon.
    busy_until_ns: u64,
}

impl LinkState {
    fn from_spec(spec: &LinkSpec) -> LinkState {
        LinkState {
            one_way_ns: ms_to_ns(spec.one_way_ms()),
            bandwidth_bytes_per_ms: spec.bandwidth_bytes_per_ms,
            loss: spec.loss,
            busy_until_ns: 0,
        }
    }

    /// Serializes `len` bytes starting no earlier than `now`, returning the
    /// instant the last byte is on the wire.
    fn serialize(&mut self, now_ns: u64, len: u64) -> u64 {
        let depart = now_ns.max(self.busy_until_ns);
        let xmit_ns = match self.bandwidth_bytes_per_ms {
            Some(rate) => ms_to_ns(len as f64 / rate),
            None => 0,
        };
        self.busy_until_ns = depart + xmit_ns;
        self.busy_until_ns
    }
}

fn ms_to_ns(ms: f64) -> u64 {
    (ms * NS_PER_MS).round() as u64
}

struct World {
    scenario: Scenario,
    now_ns: u64,
    queue: BinaryHeap<Scheduled>,
    next_seq: u64,
    events_processed: u64,
    conns: Vec<SimTcpConn>,
    links: Vec<LinkState>,
    /// Per sender: stream offset up to which payload is available to send.
    avail_end: Vec<u64>,
    /// While draining, the first hop holds back new payload (retransmissions
    /// still flow) — the stand-in for the relay advertising a closed window.
    gate_new_data: bool,
    machine: Option<OffloadMachine>,
    rng: ChaCha8Rng,
    trace: Trace,
    done: bool,
    completion_ms: Option<f64>,
    ss_end_ms: Vec<Option<f64>>,
    handoff_begin_ms: Option<f64>,
    offload_ms: Option<f64>,
    client_rtos_after_offload: u64,
    sink_hash: u64,
}

impl World {
    fn new(s: &Scenario) -> World {
        let hop_count = s.chain.len() - 1;
        let conns = (0..hop_count)
            .map(|h| {
                SimTcpConn::new(TcpConfig {
                    mss_bytes: s.mss_bytes,
                    init_window_segments: s.init_window_segments,
                    ssthresh_segments: s.ssthresh_segments,
                    rto_floor_ms: s.rto_floor_ms,
                    rto_granularity_ms: s.rto_granularity_ms,
                    initial_rto_ms: s.initial_rto_ms,
                    growth_threshold: s.growth_threshold,
                    data_isn: s.isns.get(h).map(|&(d, _)| d).unwrap_or(0),
                    reverse_isn: s.isns.get(h).map(|&(_, r)| r).unwrap_or(0),
                })
            })
            .collect();
        let links = s.links.iter().map(LinkState::from_spec).collect();
        let mut avail_end = vec![0u64; hop_count];
        avail_end[0] = s.size_bytes;
        World {
            scenario: s.clone(),
            now_ns: 0,
            queue: BinaryHeap::new(),
            next_seq: 0,
            events_processed: 0,
            conns,
            links,
            avail_end,
            gate_new_data: false,
            machine: s
                .offload
                .then(|| OffloadMachine::new(s.ramp, s.ramp_step_ms, s.ramp_rtts_per_step)),
            rng: ChaCha8Rng::seed_from_u64(s.seed),
            trace: Trace::new(),
            done: false,
            completion_ms: None,
            ss_end_ms: vec![None; hop_count],
            handoff_begin_ms: None,
            offload_ms: None,
            client_rtos_after_offload: 0,
            sink_hash: FNV_OFFSET,
        }
    }

    fn now_ms(&self) -> f64 {
        self.now_ns as f64 / NS_PER_MS
    }

    fn schedule(&mut self, at_ns: u64, event: Event) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Scheduled { at_ns, seq, event });
    }

    fn sink_hop(&self) -> usize {
        self.conns.len() - 1
    }

    fn delivered_bytes(&self) -> u64 {
        self.conns[self.sink_hop()].rcv_nxt_off()
    }

    fn goodput_bps(&self) -> f64 {
        if self.now_ns == 0 {
            return 0.0;
        }
        self.delivered_bytes() as f64 * 8.0 / (self.now_ns as f64 / 1e9)
    }

    fn offloaded(&self) -> bool {
        self.machine.as_ref().is_some_and(|m| m.offloaded())
    }

    fn injected_delay_ns(&self) -> u64 {
        match &self.machine {
            Some(m) if !m.offloaded() => ms_to_ns(m.injected_delay_ms()),
            _ => 0,
        }
    }

    fn trace_conn(&mut self, event: TraceEvent, hop: usize) {
        let row = TraceRow {
            time_ms: self.now_ms(),
            event,
            conn_id: Some(hop),
            cwnd_bytes: self.conns[hop].cwnd_bytes,
            goodput_bps: self.goodput_bps(),
            state: self.conns[hop].phase().label(),
        };
        self.trace.push(row);
    }

    fn trace_handoff(&mut self) {
        let state = match &self.machine {
            Some(m) => m.state().label(),
            None => return,
        };
        let row = TraceRow {
            time_ms: self.now_ms(),
            event: TraceEvent::HandoffState,
            conn_id: None,
            cwnd_bytes: 0,
            goodput_bps: self.goodput_bps(),
            state,
        };
        self.trace.push(row);
    }

    // ---- sending ----

    /// Pushes fresh payload from `hop`'s sender while the window and the
    /// available stream allow.
    fn try_send(&mut self, hop: usize) {
        if hop == 0 && self.gate_new_data {
            return;
        }
        if hop > 0 && self.offloaded() {
            return; // the relay is out of the path
        }
        let had_flight = self.conns[hop].flight_bytes() > 0;
        let mut sent_any = false;
        loop {
            let conn = &self.conns[hop];
            let avail = self.avail_end[hop];
            if conn.snd_nxt_off() >= avail {
                break;
            }
            let len = (avail - conn.snd_nxt_off()).min(conn.config().mss_bytes);
            if conn.window_room() < len {
                break;
            }
            let off = self.conns[hop].note_send(len, self.now_ns);
            let seg = self.data_segment(hop, off, len, false);
            self.route_data(hop, seg);
            sent_any = true;
        }
        if sent_any && !had_flight {
            self.arm_rto(hop);
        }
    }

    fn data_segment(&self, hop: usize, off: u64, len: u64, retransmit: bool) -> Segment {
        let conn = &self.conns[hop];
        let seq = conn.data_seq(off);
        let ack = conn.reverse_seq();
        Segment {
            seq,
            ack,
            len: len as u32,
            stream_off: off,
            checksum: segment_checksum(seq, ack, len as u32),
            retransmit,
        }
    }

    /// Carries a data segment from `hop`'s sender to its current receiver —
    /// one link before the switchover, the whole path (translated) after it.
    fn route_data(&mut self, hop: usize, seg: Segment) {
        if hop == 0 && self.offloaded() {
            let t = self.machine.as_ref().and_then(|m| m.translation()).unwrap();
            let translated = translate_segment(&seg, t, Direction::Forward);
            let mid =
                self.links[0].serialize(self.now_ns, seg.len as u64) + self.links[0].one_way_ns;
            let arrive = self.links[1].serialize(mid, seg.len as u64) + self.links[1].one_way_ns;
            let lost = self.roll_loss(0) || self.roll_loss(1);
            if !lost {
                self.schedule(
                    arrive,
                    Event::DataArrival {
                        hop: 1,
                        seg: translated,
                    },
                );
            }
        } else {
            let arrive =
                self.links[hop].serialize(self.now_ns, seg.len as u64) + self.links[hop].one_way_ns;
            let lost = self.roll_loss(hop);
            if !lost {
                self.schedule(arrive, Event::DataArrival { hop, seg });
            }
        }
    }

    fn roll_loss(&mut self, link: usize) -> bool {
        let p = self.links[link].loss;
        p > 0.0 && self.rng.gen::<f64>() < p
    }

    fn arm_rto(&mut self, hop: usize) {
        self.conns[hop].rto_token += 1;
        let token = self.conns[hop].rto_token;
        let at = self.now_ns + ms_to_ns(self.conns[hop].rto_ms());
        self.schedule(at, Event::RtoCheck { hop, token });
    }

    fn cancel_rto(&mut self, hop: usize) {
        self.conns[hop].rto_token += 1;
    }

    // ---- event handlers ----

    fn verify_checksum(&self, seg: &Segment) -> Result<(), SimError> {
        if seg.checksum != segment_checksum(seg.seq, seg.ack, seg.len) {
            return Err(SimError::ChecksumMismatch {
                at_ms: self.now_ms(),
            });
        }
        Ok(())
    }

    fn on_data_arrival(&mut self, hop: usize, seg: Segment) -> Result<(), SimError> {
        self.verify_checksum(&seg)?;
        if hop == 0 && self.offloaded() {
            // Nothing should be routed at the relay anymore.
            if let Some(m) = &mut self.machine {
                m.segments_after_offload += 1;
            }
            return Ok(());
        }
        let off = self.conns[hop].data_off_of_seq(seg.seq);
        let delivered = if off < 0 {
            0 // stale beyond the window: pure duplicate
        } else {
            debug_assert_eq!(off as u64, seg.stream_off);
            self.conns[hop].on_data(off as u64, seg.len as u64)
        };

        let sink = self.sink_hop();
        if hop == sink && delivered > 0 {
            let new_end = self.conns[hop].rcv_nxt_off();
            self.sink_hash = fnv_fold(self.sink_hash, new_end - delivered, new_end);
            if new_end >= self.scenario.size_bytes {
                self.completion_ms = Some(self.now_ms());
                self.done = true;
                let row = TraceRow {
                    time_ms: self.now_ms(),
                    event: TraceEvent::Done,
                    conn_id: Some(hop),
                    cwnd_bytes: self.conns[hop].cwnd_bytes,
                    goodput_bps: self.goodput_bps(),
                    state: self.conns[hop].phase().label(),
                };
                self.trace.push(row);
                return Ok(());
            }
        }

        // Relay payload onward as it is delivered in order.
        if hop < sink && delivered > 0 && !self.offloaded() {
            self.avail_end[hop + 1] = self.conns[hop].rcv_nxt_off();
            self.try_send(hop + 1);
        }

        // Acknowledge every arriving data segment (duplicates included).
        let conn = &self.conns[hop];
        let (seq, ack) = (conn.reverse_seq(), conn.rcv_nxt_seq());
        let ack_seg = Segment {
            seq,
            ack,
            len: 0,
            stream_off: conn.rcv_nxt_off(),
            checksum: segment_checksum(seq, ack, 0),
            retransmit: false,
        };
        if hop == 1 && self.offloaded() {
            // Server ACK, translated into the client's spaces, full path back.
            let t = self.machine.as_ref().and_then(|m| m.translation()).unwrap();
            let back = translate_segment(&ack_seg, t.mirrored(), Direction::Forward);
            let arrive = self.now_ns + self.links[1].one_way_ns + self.links[0].one_way_ns;
            self.schedule(arrive, Event::AckArrival { hop: 0, seg: back });
        } else {
            let mut arrive = self.now_ns + self.links[hop].one_way_ns;
            if hop == 0 {
                arrive += self.injected_delay_ns();
            }
            self.schedule(arrive, Event::AckArrival { hop, seg: ack_seg });
        }
        Ok(())
    }

    fn on_ack_arrival(&mut self, hop: usize, seg: Segment) -> Result<(), SimError> {
        self.verify_checksum(&seg)?;
        if hop == 1 {
            if self.offloaded() {
                if let Some(m) = &mut self.machine {
                    m.segments_after_offload += 1;
                }
                return Ok(());
            }
            let inj = self.injected_delay_ns();
            if inj > 0 {
                // The relay defers its own ACK clock by the injected delay so
                // both hops slow down together.
                self.schedule(self.now_ns + inj, Event::AckProcess { hop, seg });
                return Ok(());
            }
        }
        self.handle_ack(hop, seg);
        Ok(())
    }

    fn on_ack_process(&mut self, hop: usize, seg: Segment) {
        if self.offloaded() {
            if let Some(m) = &mut self.machine {
                m.segments_after_offload += 1;
            }
            return;
        }
        self.handle_ack(hop, seg);
    }

    fn handle_ack(&mut self, hop: usize, seg: Segment) {
        let ack_off = self.conns[hop].snd_off_of_ack(seg.ack);
        if ack_off < 0 {
            return; // stale wrap artifact
        }
        let outcome = self.conns[hop].on_ack(ack_off as u64, self.now_ns);
        if outcome.newly_acked > 0 {
            if outcome.flight_empty {
                self.cancel_rto(hop);
            } else {
                self.arm_rto(hop);
            }
        }
        self.note_slow_start_progress(hop);
        self.try_send(hop);
        self.check_drain_completion();
    }

    /// Records per-sender slow-start end and, with both senders done, starts
    /// the hand-off.
    fn note_slow_start_progress(&mut self, hop: usize) {
        if self.ss_end_ms[hop].is_none() && detect_slowstart_end(&self.conns[hop]) {
            self.ss_end_ms[hop] = Some(self.now_ms());
            self.trace_conn(TraceEvent::SlowStartEnd, hop);
        }
        let machine_waiting = self
            .machine
            .as_ref()
            .is_some_and(|m| m.state() == OffloadState::Proxying);
        if machine_waiting && self.ss_end_ms.iter().all(|t| t.is_some()) {
            let target_ms = self.scenario.links[1].rtt_ms;
            self.handoff_begin_ms = Some(self.now_ms());
            let ramping = self.machine.as_mut().unwrap().begin_handoff(target_ms);
            self.trace_handoff();
            if ramping {
                let at = self.now_ns + self.ramp_pacing_ns();
                self.schedule(at, Event::RampTick);
            } else {
                self.begin_drain();
            }
        }
    }

    /// Interval between ramp steps: a configurable number of currently
    /// observed first-hop round trips.
    fn ramp_pacing_ns(&self) -> u64 {
        let m = self.machine.as_ref().unwrap();
        let rtt_ms = self.scenario.links[0].rtt_ms + m.injected_delay_ms();
        ms_to_ns(m.ramp_rtts_per_step as f64 * rtt_ms)
    }

    fn on_ramp_tick(&mut self) {
        let stepping = match &mut self.machine {
            Some(m) if m.state() == OffloadState::DelayRamp => m.step_ramp(),
            _ => return,
        };
        if stepping {
            self.trace_handoff();
            let at = self.now_ns + self.ramp_pacing_ns();
            self.schedule(at, Event::RampTick);
        } else {
            self.begin_drain();
        }
    }

    fn begin_drain(&mut self) {
        self.gate_new_data = true;
        self.trace_handoff();
        self.check_drain_completion();
    }

    /// Once both hops are fully acknowledged and the relay holds no buffered
    /// payload, installs the sequence translation and steps the relay out.
    fn check_drain_completion(&mut self) {
        let draining = self.machine.as_ref().is_some_and(|m| m.draining());
        if !draining {
            return;
        }
        let c0 = &self.conns[0];
        let c1 = &self.conns[1];
        let drained = c0.flight_bytes() == 0
            && c0.reorder_empty()
            && c1.flight_bytes() == 0
            && c1.reorder_empty()
            && c1.snd_nxt_off() == self.avail_end[1];
        if !drained {
            return;
        }
        let translation = SeqTranslation {
            delta_fwd: c1.data_seq(c1.snd_nxt_off()).wrapping_sub(c0.rcv_nxt_seq()),
            delta_rev: c0.reverse_seq().wrapping_sub(c1.reverse_seq()),
        };
        self.machine.as_mut().unwrap().complete(translation);
        self.offload_ms = Some(self.now_ms());
        self.gate_new_data = false;
        self.trace_handoff();
        self.try_send(0);
    }

    fn on_rto_check(&mut self, hop: usize, token: u64) {
        if self.conns[hop].rto_token != token || self.conns[hop].flight_bytes() == 0 {
            return; // canceled or satisfied timer
        }
        self.conns[hop].on_rto();
        if hop == 0 && self.offloaded() {
            self.client_rtos_after_offload += 1;
        }
        self.trace_conn(TraceEvent::RtoFired, hop);
        let conn = &mut self.conns[hop];
        let len = (conn.snd_una_off() + conn.config().mss_bytes).min(conn.snd_nxt_off())
            - conn.snd_una_off();
        let off = conn.note_retransmit(len);
        let seg = self.data_segment(hop, off, len, true);
        self.route_data(hop, seg);
        self.trace_conn(TraceEvent::Retransmit, hop);
        self.arm_rto(hop);
    }

    fn on_sample_tick(&mut self) {
        for hop in 0..self.conns.len() {
            self.trace_conn(TraceEvent::Sample, hop);
        }
        // Reschedule only while other activity is pending, so a stall is
        // still detected as an empty queue.
        if !self.queue.is_empty() && self.scenario.sample_interval_ms > 0.0 {
            let at = self.now_ns + ms_to_ns(self.scenario.sample_interval_ms);
            self.schedule(at, Event::SampleTick);
        }
    }

    fn run(mut self) -> Result<SimReport, SimError> {
        let expected_hash = fnv_fold(FNV_OFFSET, 0, self.scenario.size_bytes);
        if self.scenario.sample_interval_ms > 0.0 {
            self.schedule(0, Event::SampleTick);
        }
        self.try_send(0);

        while !self.done {
            let Some(next) = self.queue.pop() else {
                return Err(SimError::Stalled {
                    at_ms: self.now_ms(),
                    delivered_bytes: self.delivered_bytes(),
                });
            };
            debug_assert!(next.at_ns >= self.now_ns, "time went backwards");
            self.now_ns = next.at_ns;
            self.events_processed += 1;
            if self.events_processed > self.scenario.event_cap {
                return Err(SimError::EventCapExceeded {
                    cap: self.scenario.event_cap,
                });
            }
            match next.event {
                Event::DataArrival { hop, seg } => self.on_data_arrival(hop, seg)?,
                Event::AckArrival { hop, seg } => self.on_ack_arrival(hop, seg)?,
                Event::AckProcess { hop, seg } => self.on_ack_process(hop, seg),
                Event::RtoCheck { hop, token } => self.on_rto_check(hop, token),
                Event::RampTick => self.on_ramp_tick(),
                Event::SampleTick => self.on_sample_tick(),
            }
        }

        let delivered = self.delivered_bytes();
        Ok(SimReport {
            completion_ms: self.completion_ms.unwrap(),
            delivered_bytes: delivered,
            retransmissions: self.conns.iter().map(|c| c.retransmissions).sum(),
            rto_events: self.conns.iter().map(|c| c.rto_events).sum(),
            client_rtos_after_offload: self.client_rtos_after_offload,
            ss_end_ms: self.ss_end_ms,
            handoff_begin_ms: self.handoff_begin_ms,
            offload_ms: self.offload_ms,
            relay_segments_after_offload: self
                .machine
                .as_ref()
                .map(|m| m.segments_after_offload)
                .unwrap_or(0),
            stream_intact: delivered >= self.scenario.size_bytes && self.sink_hash == expected_hash,
            stream_hash: self.sink_hash,
            trace: self.trace,
        })
    }
}

/// Runs one scenario to completion.
pub fn run_scenario(s: &Scenario) -> Result<SimReport, SimError> {
    World::new(s).run()
}

/// Convenience wrapper: a plain (no hand-off, lossless, unlimited-bandwidth)
/// transfer of `size_bytes` along `hops`, link RTTs taken from the mesh.
/// Returns the completion time in ms.
pub fn simulate_chain_transfer(
    hops: &[usize],
    d: &DistanceMatrix,
    size_bytes: u64,
) -> Result<f64, SimError> {
    let s = Scenario::chain_over_mesh(hops, d, size_bytes);
    run_scenario(&s).map(|r| r.completion_ms)
}
