use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use super::{NetError, Result, SimTime};

struct Entry<E> {
    at: SimTime,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        (self.at, self.seq) == (other.at, other.seq)
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        (other.at, other.seq).cmp(&(self.at, self.seq))
    }
}

/// Event queue ordered by time, then by insertion order.
pub struct Simulator<E> {
    now: SimTime,
    next_seq: u64,
    queue: BinaryHeap<Entry<E>>,
}

impl<E> Default for Simulator<E> {
    fn default() -> Self {
        Simulator {
            now: 0,
            next_seq: 0,
            queue: BinaryHeap::new(),
        }
    }
}

impl<E> Simulator<E> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn schedule(&mut self, at: SimTime, event: E) -> Result<()> {
        if at < self.now {
            return Err(NetError::TimeTravel { at, now: self.now });
        }
        self.queue.push(Entry {
            at,
            seq: self.next_seq,
            event,
        });
        self.next_seq += 1;
        Ok(())
    }

    /// Runs every event due at or before `until`, then parks the clock at
    /// `until`. Handlers may schedule further events.
    pub fn advance<F>(&mut self, until: SimTime, mut handler: F) -> Result<usize>
    where
        F: FnMut(&mut Self, SimTime, E),
    {
        if until < self.now {
            return Err(NetError::TimeTravel {
                at: until,
                now: self.now,
            });
        }
        let mut processed = 0;
        while self.queue.peek().is_some_and(|e| e.at <= until) {
            let entry = self.queue.pop().expect("peeked");
            self.now = entry.at;
            handler(self, entry.at, entry.event);
            processed += 1;
        }
        self.now = until;
        Ok(processed)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub at: SimTime,
    pub kind: String,
    pub src: Option<usize>,
    pub dst: Option<usize>,
    pub bytes: usize,
    pub outcome: String,
}

/// Append-only network event log.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn push(
        &mut self,
        at: SimTime,
        kind: impl Into<String>,
        src: Option<usize>,
        dst: Option<usize>,
        bytes: usize,
        outcome: impl Into<String>,
    ) {
        self.events.push(TraceEvent {
            at,
            kind: kind.into(),
            src,
            dst,
            bytes,
            outcome: outcome.into(),
        });
    }

    /// Tab-separated `time_ms, event_kind, src, dst, bytes, outcome`, with a
    /// header line. Missing endpoints print as `-`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("time_ms\tevent_kind\tsrc\tdst\tbytes\toutcome\n");
        let id = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
        for e in &self.events {
            let _ = writeln!(
                out,
                "{}.{:03}\t{}\t{}\t{}\t{}\t{}",
                e.at / 1000,
                e.at % 1000,
                e.kind,
                id(e.src),
                id(e.dst),
                e.bytes,
                e.outcome
            );
        }
        out
    }
}
