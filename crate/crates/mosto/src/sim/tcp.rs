//! Per-connection TCP state for the simulator.
//!
//! Each relay hop runs one pre-established connection carrying data one way
//! and pure ACKs back. A [`SimTcpConn`] therefore plays both roles: the
//! sender half owns the congestion window, the retransmission timer, and the
//! round bookkeeping used to spot the end of slow start; the receiver half
//! owns cumulative acknowledgment and out-of-order reassembly.
//!
//! Internally the stream is addressed by absolute byte offsets (`u64`), which
//! never wrap; 32-bit wire sequence numbers are derived at the edges by adding
//! the initial sequence number. That keeps window arithmetic simple while the
//! wire format — and the offload translation applied to it — stays faithful
//! to 32-bit wraparound.

use std::collections::BTreeMap;

/// Phase the sender half is in, as exposed in traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CongestionPhase {
    SlowStart,
    CongestionAvoidance,
    /// Between an RTO and the acknowledgment of the retransmitted data.
    Recovery,
}

impl CongestionPhase {
    pub fn label(self) -> &'static str {
        match self {
            CongestionPhase::SlowStart => "slow_start",
            CongestionPhase::CongestionAvoidance => "congestion_avoidance",
            CongestionPhase::Recovery => "recovery",
        }
    }
}

/// Static per-connection parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcpConfig {
    /// Segment payload size, bytes.
    pub mss_bytes: u64,
    /// Initial congestion window, segments.
    pub init_window_segments: u64,
    /// Slow-start threshold, segments; `None` leaves slow start unbounded.
    pub ssthresh_segments: Option<u64>,
    /// Lower bound on the retransmission timeout.
    pub rto_floor_ms: f64,
    /// Timer granularity `G`: the variance term is at least this large.
    pub rto_granularity_ms: f64,
    /// Timeout used before the first RTT sample exists. Kept deliberately
    /// conservative so a low floor cannot fire the timer ahead of the very
    /// first ACK.
    pub initial_rto_ms: f64,
    /// Slow start is considered over when per-round delivered bytes grow by
    /// less than this factor.
    pub growth_threshold: f64,
    /// ISN of the data stream this connection sends.
    pub data_isn: u32,
    /// ISN of the reverse (pure-ACK) stream it receives.
    pub reverse_isn: u32,
}

impl Default for TcpConfig {
    fn default() -> Self {
        TcpConfig {
            mss_bytes: 1460,
            init_window_segments: 10,
            ssthresh_segments: None,
            rto_floor_ms: 200.0,
            rto_granularity_ms: 0.0,
            initial_rto_ms: 1000.0,
            growth_threshold: 1.5,
            data_isn: 0,
            reverse_isn: 0,
        }
    }
}

/// What an arriving cumulative ACK did to the sender half.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AckOutcome {
    /// Bytes newly acknowledged (0 for duplicates).
    pub newly_acked: u64,
    /// The flight emptied out with this ACK.
    pub flight_empty: bool,
    /// The ACK ended a slow-start round.
    pub round_completed: bool,
}

/// One endpoint-pair's TCP state, sender and receiver halves combined.
#[derive(Debug, Clone)]
pub struct SimTcpConn {
    cfg: TcpConfig,

    // Sender half, in absolute stream offsets.
    pub cwnd_bytes: u64,
    pub ssthresh_bytes: u64,
    snd_una_off: u64,
    snd_nxt_off: u64,
    /// Highest offset ever sent; after an RTO, `snd_nxt` rewinds below this.
    snd_max_off: u64,
    recovery_end_off: Option<u64>,

    // RTT estimation (RFC 6298 shape), one probe in flight at a time.
    srtt_ms: Option<f64>,
    rttvar_ms: f64,
    rtt_probe: Option<(u64, u64)>, // (covering offset, sent_at_ns)
    backoff: u32,
    /// Token matching the armed timer event; bumping it cancels the timer.
    pub rto_token: u64,

    // Slow-start round bookkeeping for end-of-slow-start detection.
    round_end_off: u64,
    round_acked_bytes: u64,
    completed_rounds: Vec<u64>,

    // Receiver half.
    rcv_nxt_off: u64,
    reorder: BTreeMap<u64, u64>, // start offset -> length

    // Counters surfaced in reports.
    pub retransmissions: u64,
    pub rto_events: u64,
    pub rtt_samples: u64,
}

impl SimTcpConn {
    pub fn new(cfg: TcpConfig) -> SimTcpConn {
        let cwnd = cfg.init_window_segments * cfg.mss_bytes;
        let ssthresh = cfg
            .ssthresh_segments
            .map(|s| s * cfg.mss_bytes)
            .unwrap_or(u64::MAX / 2);
        SimTcpConn {
            cfg,
            cwnd_bytes: cwnd,
            ssthresh_bytes: ssthresh,
            snd_una_off: 0,
            snd_nxt_off: 0,
            snd_max_off: 0,
            recovery_end_off: None,
            srtt_ms: None,
            rttvar_ms: 0.0,
            rtt_probe: None,
            backoff: 0,
            rto_token: 0,
            round_end_off: 0,
            round_acked_bytes: 0,
            completed_rounds: Vec::new(),
            rcv_nxt_off: 0,
            reorder: BTreeMap::new(),
            retransmissions: 0,
            rto_events: 0,
            rtt_samples: 0,
        }
    }

    pub fn config(&self) -> &TcpConfig {
        &self.cfg
    }

    pub fn phase(&self) -> CongestionPhase {
        if self.recovery_end_off.is_some() {
            CongestionPhase::Recovery
        } else if self.cwnd_bytes < self.ssthresh_bytes {
            CongestionPhase::SlowStart
        } else {
            CongestionPhase::CongestionAvoidance
        }
    }

    // ---- stream offset / wire sequence mapping ----

    pub fn snd_una_off(&self) -> u64 {
        self.snd_una_off
    }

    pub fn snd_nxt_off(&self) -> u64 {
        self.snd_nxt_off
    }

    pub fn rcv_nxt_off(&self) -> u64 {
        self.rcv_nxt_off
    }

    pub fn flight_bytes(&self) -> u64 {
        self.snd_nxt_off - self.snd_una_off
    }

    pub fn reorder_empty(&self) -> bool {
        self.reorder.is_empty()
    }

    /// Wire sequence number of a data-stream offset.
    pub fn data_seq(&self, off: u64) -> u32 {
        self.cfg.data_isn.wrapping_add(off as u32)
    }

    /// Wire sequence the receiver expects next.
    pub fn rcv_nxt_seq(&self) -> u32 {
        self.data_seq(self.rcv_nxt_off)
    }

    /// Wire seq carried by this side's pure ACKs (never advances: the
    /// reverse stream has no payload).
    pub fn reverse_seq(&self) -> u32 {
        self.cfg.reverse_isn
    }

    /// Maps an incoming wire seq to an absolute offset near `rcv_nxt`,
    /// interpreting the 32-bit difference as signed.
    pub fn data_off_of_seq(&self, seq: u32) -> i64 {
        let delta = seq.wrapping_sub(self.rcv_nxt_seq()) as i32;
        self.rcv_nxt_off as i64 + delta as i64
    }

    /// Maps an incoming wire ACK to an absolute offset near `snd_una`,
    /// interpreting the 32-bit difference as signed.
    pub fn snd_off_of_ack(&self, ack: u32) -> i64 {
        let delta = ack.wrapping_sub(self.data_seq(self.snd_una_off)) as i32;
        self.snd_una_off as i64 + delta as i64
    }

    // ---- sender half ----

    /// How many more payload bytes the window admits right now.
    pub fn window_room(&self) -> u64 {
        self.cwnd_bytes.saturating_sub(self.flight_bytes())
    }

    /// Registers the emission of `len` fresh bytes at `now_ns`, returning the
    /// segment's starting offset.
    pub fn note_send(&mut self, len: u64, now_ns: u64) -> u64 {
        let start = self.snd_nxt_off;
        if self.snd_max_off == 0 {
            // The first round spans the initial window; later boundaries are
            // pinned to snd_nxt whenever a round completes.
            self.round_end_off = self.cwnd_bytes;
        }
        self.snd_nxt_off += len;
        self.snd_max_off = self.snd_max_off.max(self.snd_nxt_off);
        if self.rtt_probe.is_none() {
            self.rtt_probe = Some((self.snd_nxt_off, now_ns));
        }
        start
    }

    /// Registers a retransmission of `len` bytes from `snd_una` (sequence
    /// numbers rewind; counters and Karn's rule engage), returning its offset.
    pub fn note_retransmit(&mut self, len: u64) -> u64 {
        self.retransmissions += 1;
        // Karn: never sample a retransmitted range.
        self.rtt_probe = None;
        let start = self.snd_una_off;
        self.snd_nxt_off = self.snd_nxt_off.max(start + len);
        start
    }

    /// Applies a cumulative ACK up to absolute offset `ack_off` at `now_ns`.
    pub fn on_ack(&mut self, ack_off: u64, now_ns: u64) -> AckOutcome {
        if ack_off <= self.snd_una_off {
            return AckOutcome {
                newly_acked: 0,
                flight_empty: self.flight_bytes() == 0,
                round_completed: false,
            };
        }
        let newly_acked = ack_off - self.snd_una_off;
        self.snd_una_off = ack_off;
        self.snd_nxt_off = self.snd_nxt_off.max(ack_off);

        // RTT sample, one probe per flight, skipped across retransmissions.
        if let Some((probe_off, sent_at)) = self.rtt_probe {
            if ack_off >= probe_off {
                let sample_ms = (now_ns - sent_at) as f64 / 1_000_000.0;
                self.take_rtt_sample(sample_ms);
                self.rtt_probe = None;
            }
        }
        self.backoff = 0;

        if let Some(end) = self.recovery_end_off {
            if ack_off >= end {
                self.recovery_end_off = None;
            }
        }

        // Congestion window growth: byte-counted doubling in slow start
        // (capped at one segment per ACK so stretch ACKs cannot burst the
        // window), one segment per window in congestion avoidance.
        if self.recovery_end_off.is_none() {
            if self.cwnd_bytes < self.ssthresh_bytes {
                self.cwnd_bytes += newly_acked.min(self.cfg.mss_bytes);
            } else {
                let incr = (self.cfg.mss_bytes * self.cfg.mss_bytes / self.cwnd_bytes).max(1);
                self.cwnd_bytes += incr;
            }
        }

        // Round accounting for slow-start end detection.
        self.round_acked_bytes += newly_acked;
        let mut round_completed = false;
        if ack_off >= self.round_end_off {
            self.completed_rounds.push(self.round_acked_bytes);
            self.round_acked_bytes = 0;
            self.round_end_off = self.snd_nxt_off.max(self.round_end_off);
            round_completed = true;
        }

        AckOutcome {
            newly_acked,
            flight_empty: self.flight_bytes() == 0,
            round_completed,
        }
    }

    fn take_rtt_sample(&mut self, sample_ms: f64) {
        self.rtt_samples += 1;
        match self.srtt_ms {
            None => {
                self.srtt_ms = Some(sample_ms);
                self.rttvar_ms = sample_ms / 2.0;
            }
            Some(srtt) => {
                self.rttvar_ms = 0.75 * self.rttvar_ms + 0.25 * (srtt - sample_ms).abs();
                self.srtt_ms = Some(0.875 * srtt + 0.125 * sample_ms);
            }
        }
    }

    pub fn srtt_ms(&self) -> Option<f64> {
        self.srtt_ms
    }

    /// Current retransmission timeout: `srtt + max(G, 4·rttvar)`, floored,
    /// doubled per consecutive expiry. Without a sample yet, the conservative
    /// initial timeout rules.
    pub fn rto_ms(&self) -> f64 {
        let base = match self.srtt_ms {
            Some(srtt) => srtt + (4.0 * self.rttvar_ms).max(self.cfg.rto_granularity_ms),
            None => self.cfg.initial_rto_ms,
        };
        base.max(self.cfg.rto_floor_ms) * f64::powi(2.0, self.backoff as i32)
    }

    /// Reacts to an expired retransmission timer: multiplicative decrease,
    /// window back to one segment, timer backoff. The caller retransmits.
    pub fn on_rto(&mut self) {
        self.rto_events += 1;
        self.ssthresh_bytes = (self.flight_bytes() / 2).max(2 * self.cfg.mss_bytes);
        self.cwnd_bytes = self.cfg.mss_bytes;
        self.recovery_end_off = Some(self.snd_max_off);
        self.backoff = (self.backoff + 1).min(16);
        self.rtt_probe = None;
    }

    // ---- receiver half ----

    /// Accepts an arriving data segment at absolute offset `off`, buffering
    /// out-of-order data. Returns the number of bytes newly delivered
    /// in order (0 for duplicates and gaps).
    pub fn on_data(&mut self, off: u64, len: u64) -> u64 {
        let seg_end = off + len;
        if seg_end <= self.rcv_nxt_off {
            return 0; // stale duplicate
        }
        let fresh_start = off.max(self.rcv_nxt_off);
        if fresh_start > self.rcv_nxt_off {
            // A gap: stash and wait.
            let entry = self.reorder.entry(fresh_start).or_insert(0);
            *entry = (*entry).max(seg_end - fresh_start);
            return 0;
        }
        let before = self.rcv_nxt_off;
        self.rcv_nxt_off = seg_end;
        // Drain any reorder-buffer ranges that became contiguous.
        while let Some((&start, &buf_len)) = self.reorder.first_key_value() {
            if start > self.rcv_nxt_off {
                break;
            }
            self.reorder.remove(&start);
            self.rcv_nxt_off = self.rcv_nxt_off.max(start + buf_len);
        }
        self.rcv_nxt_off - before
    }

    // ---- slow-start end detection ----

    /// Delivered-byte totals of completed rounds, oldest first.
    pub fn completed_rounds(&self) -> &[u64] {
        &self.completed_rounds
    }
}

/// True once the connection has left slow start: either the window reached
/// the threshold, or delivered bytes per round stopped growing by at least
/// the configured factor.
pub fn detect_slowstart_end(conn: &SimTcpConn) -> bool {
    if conn.cwnd_bytes >= conn.ssthresh_bytes {
        return true;
    }
    let rounds = conn.completed_rounds();
    if rounds.len() < 2 {
        return false;
    }
    let prev = rounds[rounds.len() - 2] as f64;
    let last = rounds[rounds.len() - 1] as f64;
    prev > 0.0 && last < conn.config().growth_threshold * prev
}
