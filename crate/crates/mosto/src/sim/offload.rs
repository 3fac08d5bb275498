//! Relay hand-off: the offload state machine and sequence translation.
//!
//! Once slow start is over on both sides of a relay, the relay is pure
//! overhead: it can remove itself and let the two endpoints talk through a
//! stateless per-segment rewrite. Getting out of the way safely takes three
//! steps, tracked by [`OffloadMachine`]:
//!
//! 1. **Delay ramp** — joining the two connections will roughly double the
//!    RTT the endpoints observe. Jumping there at once leaves their
//!    retransmission timers tuned to the short proxied path, so the first
//!    post-hand-off flight times out spuriously. The ramp injects artificial
//!    delay in small steps, giving the RTT estimators a full round per step
//!    to adapt. With the ramp disabled the machine skips injection entirely
//!    and the delay change lands as one jump at the switchover — which is
//!    exactly the pathological setup the ramp exists to fix.
//! 2. **Drain** — the relay stops accepting new data and waits until both
//!    connections have nothing buffered and nothing in flight, so the
//!    spliced sequence spaces line up at a fixed shift.
//! 3. **Switch** — a [`SeqTranslation`] is installed; from then on segments
//!    pass through arithmetic only, the relay processes nothing.
//!
//! States only ever move forward: `Proxying → SlowStartEnded → DelayRamp →
//! DrainWait → Offloaded`.

use super::Segment;

/// Phases of the hand-off, in progression order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OffloadState {
    Proxying,
    SlowStartEnded,
    DelayRamp,
    DrainWait,
    Offloaded,
}

impl OffloadState {
    pub fn label(self) -> &'static str {
        match self {
            OffloadState::Proxying => "proxying",
            OffloadState::SlowStartEnded => "slowstart_ended",
            OffloadState::DelayRamp => "delay_ramp",
            OffloadState::DrainWait => "drain_wait",
            OffloadState::Offloaded => "offloaded",
        }
    }
}

/// Which way a segment crosses the installed translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Client-to-server: the mapping is applied.
    Forward,
    /// Server-to-client: the mapping is undone (exact inverse of `Forward`).
    Reverse,
}

/// The per-segment rewrite installed at hand-off.
///
/// `delta_fwd` is the shift between the client's data sequence space and the
/// server-side connection's; `delta_rev` the shift between the two reverse
/// (ACK-carrying) streams. Applied [`Direction::Forward`], seq gains
/// `delta_fwd` and ack loses `delta_rev`; [`Direction::Reverse`] is the exact
/// inverse, so translating forward then reverse returns the original segment
/// bit for bit. The switch rewrites server-to-client traffic with the
/// [`SeqTranslation::mirrored`] table applied forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SeqTranslation {
    pub delta_fwd: u32,
    pub delta_rev: u32,
}

impl SeqTranslation {
    pub fn identity() -> SeqTranslation {
        SeqTranslation::default()
    }

    pub fn is_identity(&self) -> bool {
        self.delta_fwd == 0 && self.delta_rev == 0
    }

    /// The same splice expressed for the opposite flow: swap the roles of
    /// the two deltas. Applying the mirrored table forward rewrites a
    /// server-to-client segment into the client's spaces.
    pub fn mirrored(&self) -> SeqTranslation {
        SeqTranslation {
            delta_fwd: self.delta_rev,
            delta_rev: self.delta_fwd,
        }
    }
}

/// Rewrites one segment's sequence fields across the splice. Payload fields
/// are untouched; the checksum is recomputed from the rewritten headers.
pub fn translate_segment(seg: &Segment, t: SeqTranslation, dir: Direction) -> Segment {
    let (seq, ack) = match dir {
        Direction::Forward => (
            seg.seq.wrapping_add(t.delta_fwd),
            seg.ack.wrapping_sub(t.delta_rev),
        ),
        Direction::Reverse => (
            seg.seq.wrapping_sub(t.delta_fwd),
            seg.ack.wrapping_add(t.delta_rev),
        ),
    };
    Segment {
        seq,
        ack,
        checksum: segment_checksum(seq, ack, seg.len),
        ..*seg
    }
}

/// 16-bit ones'-complement checksum over the modeled header fields.
pub fn segment_checksum(seq: u32, ack: u32, len: u32) -> u16 {
    let mut sum: u32 = 0;
    for word in [
        (seq >> 16) as u16,
        seq as u16,
        (ack >> 16) as u16,
        ack as u16,
        (len >> 16) as u16,
        len as u16,
    ] {
        sum += word as u32;
        // Fold the carry back in, ones'-complement style.
        sum = (sum & 0xffff) + (sum >> 16);
    }
    !(sum as u16)
}

/// Hand-off controller for one relayed session.
#[derive(Debug, Clone)]
pub struct OffloadMachine {
    state: OffloadState,
    pub ramp_enabled: bool,
    pub ramp_step_ms: f64,
    /// Round-trips between ramp increments (pacing of the step clock).
    pub ramp_rtts_per_step: u32,
    injected_delay_ms: f64,
    target_delay_ms: f64,
    translation: Option<SeqTranslation>,
    /// Count of segments the relay entity processed after hand-off; the
    /// whole point is for this to stay zero.
    pub segments_after_offload: u64,
}

impl OffloadMachine {
    pub fn new(ramp_enabled: bool, ramp_step_ms: f64, ramp_rtts_per_step: u32) -> OffloadMachine {
        assert!(ramp_step_ms > 0.0, "ramp step must be positive");
        assert!(
            ramp_rtts_per_step >= 1,
            "ramp pacing must be at least one RTT"
        );
        OffloadMachine {
            state: OffloadState::Proxying,
            ramp_enabled,
            ramp_step_ms,
            ramp_rtts_per_step,
            injected_delay_ms: 0.0,
            target_delay_ms: 0.0,
            translation: None,
            segments_after_offload: 0,
        }
    }

    pub fn state(&self) -> OffloadState {
        self.state
    }

    pub fn injected_delay_ms(&self) -> f64 {
        self.injected_delay_ms
    }

    pub fn target_delay_ms(&self) -> f64 {
        self.target_delay_ms
    }

    pub fn translation(&self) -> Option<SeqTranslation> {
        self.translation
    }

    fn enter(&mut self, next: OffloadState) {
        assert!(
            next >= self.state,
            "offload state may not regress: {:?} -> {:?}",
            self.state,
            next
        );
        self.state = next;
    }

    /// Both connections left slow start; begin the hand-off. `target_ms` is
    /// the artificial delay that makes the endpoint-observed RTT match the
    /// post-hand-off path. Returns true when a ramp step clock should start
    /// (ramp enabled); with the ramp disabled the machine falls straight
    /// through to draining and the delay change happens at the switchover.
    pub fn begin_handoff(&mut self, target_ms: f64) -> bool {
        self.enter(OffloadState::SlowStartEnded);
        self.target_delay_ms = target_ms;
        self.enter(OffloadState::DelayRamp);
        if self.ramp_enabled {
            self.step_ramp();
            true
        } else {
            self.enter(OffloadState::DrainWait);
            false
        }
    }

    /// One tick of the ramp clock: raise the injected delay by exactly one
    /// step, or — once the target has been held for a full tick — move on to
    /// draining. Returns true while the clock should keep ticking.
    pub fn step_ramp(&mut self) -> bool {
        assert_eq!(
            self.state,
            OffloadState::DelayRamp,
            "ramp tick outside DelayRamp"
        );
        if self.injected_delay_ms < self.target_delay_ms {
            self.injected_delay_ms =
                (self.injected_delay_ms + self.ramp_step_ms).min(self.target_delay_ms);
            true
        } else {
            self.enter(OffloadState::DrainWait);
            false
        }
    }

    pub fn draining(&self) -> bool {
        self.state == OffloadState::DrainWait
    }

    /// Buffers are empty on both sides: install the splice.
    pub fn complete(&mut self, translation: SeqTranslation) {
        assert_eq!(
            self.state,
            OffloadState::DrainWait,
            "hand-off completes from DrainWait"
        );
        self.enter(OffloadState::Offloaded);
        self.translation = Some(translation);
    }

    pub fn offloaded(&self) -> bool {
        self.state == OffloadState::Offloaded
    }
}
