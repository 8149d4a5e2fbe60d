//! Newest-wins admission control and its virtual-clock simulation.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

/// Bounds the number of frames in flight. One extra frame may wait; a newer
/// arrival replaces it and the replaced frame counts as dropped.
#[derive(Debug, Clone)]
pub struct FlowLimiter<T> {
    max_in_flight: usize,
    in_flight: usize,
    waiting: Option<T>,
    admitted: u64,
    dropped: u64,
    completed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Offer<T> {
    /// Admitted now; the caller starts processing it.
    Admitted(T),
    /// Parked in the waiting slot, possibly displacing an older frame.
    Waiting { displaced: Option<T> },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LimiterCounters {
    pub admitted: u64,
    pub dropped: u64,
    pub completed: u64,
    pub in_flight: usize,
    pub waiting: bool,
}

impl<T> Default for FlowLimiter<T> {
    fn default() -> Self {
        Self::new(1)
    }
}

impl<T> FlowLimiter<T> {
    /// `max_in_flight` of `usize::MAX` admits everything.
    pub fn new(max_in_flight: usize) -> Self {
        assert!(max_in_flight > 0, "max_in_flight must be positive");
        Self {
            max_in_flight,
            in_flight: 0,
            waiting: None,
            admitted: 0,
            dropped: 0,
            completed: 0,
        }
    }

    pub fn max_in_flight(&self) -> usize {
        self.max_in_flight
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight
    }

    pub fn has_capacity(&self) -> bool {
        self.in_flight < self.max_in_flight
    }

    pub fn counters(&self) -> LimiterCounters {
        LimiterCounters {
            admitted: self.admitted,
            dropped: self.dropped,
            completed: self.completed,
            in_flight: self.in_flight,
            waiting: self.waiting.is_some(),
        }
    }

    pub fn offer(&mut self, item: T) -> Offer<T> {
        if self.has_capacity() {
            self.in_flight += 1;
            self.admitted += 1;
            return Offer::Admitted(item);
        }
        let displaced = self.waiting.replace(item);
        if displaced.is_some() {
            self.dropped += 1;
        }
        Offer::Waiting { displaced }
    }

    /// Marks one in-flight frame done. Returns the waiting frame if it is
    /// admitted in its place.
    pub fn complete(&mut self) -> Option<T> {
        assert!(self.in_flight > 0, "complete() without a frame in flight");
        self.in_flight -= 1;
        self.completed += 1;
        let next = self.waiting.take()?;
        self.in_flight += 1;
        self.admitted += 1;
        Some(next)
    }

    /// End of stream: the waiting frame, if any, is discarded.
    pub fn finish(&mut self) -> Option<T> {
        let stale = self.waiting.take();
        if stale.is_some() {
            self.dropped += 1;
        }
        stale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "frame", rename_all = "lowercase")]
pub enum SimEventKind {
    Arrive(usize),
    Admit(usize),
    Drop(usize),
    Complete(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimEvent {
    pub time: u64,
    pub kind: SimEventKind,
    pub in_flight: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SimReport {
    pub admitted: Vec<usize>,
    pub dropped: Vec<usize>,
    pub completed: Vec<usize>,
    pub max_in_flight_seen: usize,
    pub events: Vec<SimEvent>,
}

/// Runs the limiter on a virtual clock. `arrivals[i]` is the arrival time
/// of frame `i` (non-decreasing) and `service(i)` its processing time. An
/// arrival is handled before a completion at the same instant.
pub fn simulate_stream(
    arrivals: &[u64],
    service: impl Fn(usize) -> u64,
    max_in_flight: usize,
) -> SimReport {
    let mut limiter = FlowLimiter::new(max_in_flight);
    let mut report = SimReport::default();
    let mut running: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    let mut next = 0;
    let mut finished = false;

    let log = |report: &mut SimReport, time, kind, in_flight| {
        report.max_in_flight_seen = report.max_in_flight_seen.max(in_flight);
        assert!(in_flight <= max_in_flight, "in-flight bound violated");
        report.events.push(SimEvent {
            time,
            kind,
            in_flight,
        });
    };

    loop {
        let arrival = arrivals.get(next).copied();
        let completion = running.peek().map(|Reverse((t, _))| *t);
        match (arrival, completion) {
            (Some(a), c) if c.is_none_or(|c| a <= c) => {
                next += 1;
                let i = next - 1;
                log(&mut report, a, SimEventKind::Arrive(i), limiter.in_flight());
                match limiter.offer(i) {
                    Offer::Admitted(i) => {
                        running.push(Reverse((a + service(i), i)));
                        report.admitted.push(i);
                        log(&mut report, a, SimEventKind::Admit(i), limiter.in_flight());
                    }
                    Offer::Waiting { displaced: Some(d) } => {
                        report.dropped.push(d);
                        log(&mut report, a, SimEventKind::Drop(d), limiter.in_flight());
                    }
                    Offer::Waiting { displaced: None } => {}
                }
            }
            (_, Some(c)) if arrival.is_some() || finished => {
                let Reverse((_, i)) = running.pop().expect("peeked");
                let admitted = limiter.complete();
                report.completed.push(i);
                log(&mut report, c, SimEventKind::Complete(i), limiter.in_flight());
                if let Some(w) = admitted {
                    running.push(Reverse((c + service(w), w)));
                    report.admitted.push(w);
                    log(&mut report, c, SimEventKind::Admit(w), limiter.in_flight());
                }
            }
            _ if !finished => {
                finished = true;
                if let Some(d) = limiter.finish() {
                    report.dropped.push(d);
                    let t = arrivals.last().copied().unwrap_or(0);
                    log(&mut report, t, SimEventKind::Drop(d), limiter.in_flight());
                }
            }
            _ => break,
        }
    }
    let c = limiter.counters();
    debug_assert_eq!(c.admitted, c.completed + c.in_flight as u64);
    report
}
