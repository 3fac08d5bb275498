//! Run traces: a flat event log serialized as CSV for offline plotting.

/// What a trace row records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    /// Periodic sample of cwnd and goodput.
    Sample,
    /// A sender left slow start by threshold or by growth stall.
    SlowStartEnd,
    /// The hand-off machine moved to a new state.
    HandoffState,
    /// A retransmission timer fired.
    RtoFired,
    /// A segment was sent again.
    Retransmit,
    /// The transfer finished.
    Done,
}

impl TraceEvent {
    pub fn label(self) -> &'static str {
        match self {
            TraceEvent::Sample => "sample",
            TraceEvent::SlowStartEnd => "ss_end",
            TraceEvent::HandoffState => "handoff",
            TraceEvent::RtoFired => "rto",
            TraceEvent::Retransmit => "retransmit",
            TraceEvent::Done => "done",
        }
    }
}

/// One row of the run trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub time_ms: f64,
    pub event: TraceEvent,
    /// Sender the row describes (hop index), when one applies.
    pub conn_id: Option<usize>,
    /// Congestion window in bytes at that instant.
    pub cwnd_bytes: u64,
    /// End-to-end goodput since the start of the run, bits per second.
    pub goodput_bps: f64,
    /// Free-form state label (congestion phase or hand-off state).
    pub state: &'static str,
}

/// An append-only list of rows in time order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    rows: Vec<TraceRow>,
}

impl Trace {
    pub fn new() -> Trace {
        Trace::default()
    }

    pub fn push(&mut self, row: TraceRow) {
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// CSV with a fixed header: `time_ms,event,conn_id,cwnd,goodput_bps,state`.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("time_ms,event,conn_id,cwnd,goodput_bps,state\n");
        for row in &self.rows {
            let conn = row.conn_id.map(|c| c.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{:.3},{},{},{},{:.0},{}",
                row.time_ms,
                row.event.label(),
                conn,
                row.cwnd_bytes,
                row.goodput_bps,
                row.state
            )
            .unwrap();
        }
        out
    }
}
