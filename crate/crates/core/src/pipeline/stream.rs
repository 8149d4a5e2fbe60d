//! Threaded streaming run: an admitter applies the limiter, workers
//! evaluate, and results reach the sink in admission order.

use std::collections::{BTreeMap, VecDeque};
use std::sync::{mpsc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::limiter::{FlowLimiter, LimiterCounters, Offer};
use super::timing::{StageSamples, StageTiming};
use crate::adl::AtlasProgram;
use crate::evaluator::{evaluate_atlas_timed, EvaluatedAtlas, StageDurations};
use crate::geometry::{FrameError, LandmarkFrame, SemanticsConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pacing {
    /// Frames are offered as fast as the source yields them.
    Unpaced,
    /// Frames are offered at their timestamps (microseconds) scaled by
    /// `speed`.
    Realtime { speed: f64 },
    /// The admitter waits for capacity, so nothing is dropped.
    Blocking,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamOptions {
    pub max_in_flight: usize,
    pub pacing: Pacing,
    /// Worker threads; defaults to `min(max_in_flight, cores)`.
    pub workers: Option<usize>,
}

impl Default for StreamOptions {
    fn default() -> Self {
        Self {
            max_in_flight: 1,
            pacing: Pacing::Blocking,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub frames_in: u64,
    pub malformed: u64,
    pub admitted: u64,
    pub dropped: u64,
    pub completed: u64,
    pub wall_seconds: f64,
    pub frames_per_second: f64,
    pub timing: StageTiming,
}

struct Job {
    seq: u64,
    frame: LandmarkFrame,
    arrived: Instant,
}

struct Shared {
    limiter: FlowLimiter<(LandmarkFrame, Instant)>,
    ready: VecDeque<Job>,
    next_seq: u64,
    closed: bool,
}

impl Shared {
    fn enqueue(&mut self, (frame, arrived): (LandmarkFrame, Instant)) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.ready.push_back(Job {
            seq,
            frame,
            arrived,
        });
    }
}

struct Done {
    seq: u64,
    atlas: EvaluatedAtlas,
    stages: StageDurations,
    end_to_end: Duration,
}

/// Streams `source` through the limiter. Malformed frames and frames whose
/// timestamp does not increase are counted and skipped.
pub fn run_stream<I, F>(
    source: I,
    program: &AtlasProgram,
    cfg: &SemanticsConfig,
    options: &StreamOptions,
    mut sink: F,
) -> RunSummary
where
    I: IntoIterator<Item = Result<LandmarkFrame, FrameError>>,
    F: FnMut(EvaluatedAtlas) + Send,
{
    let cap = options.max_in_flight;
    let cores = thread::available_parallelism().map_or(1, |n| n.get());
    let workers = options.workers.unwrap_or(cap.min(cores)).max(1);
    let shared = Mutex::new(Shared {
        limiter: FlowLimiter::new(cap),
        ready: VecDeque::new(),
        next_seq: 0,
        closed: false,
    });
    let work = Condvar::new();
    let space = Condvar::new();
    let (tx, rx) = mpsc::channel::<Done>();
    let started = Instant::now();

    let mut frames_in = 0;
    let mut malformed = 0;
    let (samples, emitted) = thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (shared, work, space) = (&shared, &work, &space);
            scope.spawn(move || loop {
                let job = {
                    let mut s = shared.lock().unwrap();
                    loop {
                        if let Some(job) = s.ready.pop_front() {
                            break job;
                        }
                        if s.closed && s.limiter.in_flight() == 0 {
                            return;
                        }
                        s = work.wait(s).unwrap();
                    }
                };
                let (atlas, stages) = evaluate_atlas_timed(program, &job.frame, cfg);
                let done = Done {
                    seq: job.seq,
                    atlas,
                    stages,
                    end_to_end: job.arrived.elapsed(),
                };
                let _ = tx.send(done);
                let mut s = shared.lock().unwrap();
                if let Some(next) = s.limiter.complete() {
                    s.enqueue(next);
                }
                work.notify_all();
                space.notify_all();
            });
        }
        drop(tx);

        let collector = scope.spawn(move || {
            let mut pending = BTreeMap::new();
            let mut expected = 0;
            let mut samples = StageSamples::default();
            let mut emitted = 0u64;
            for done in rx {
                pending.insert(done.seq, done);
                while let Some(d) = pending.remove(&expected) {
                    samples.push(&d.stages, d.end_to_end);
                    sink(d.atlas);
                    emitted += 1;
                    expected += 1;
                }
            }
            (samples, emitted)
        });

        let mut first_ts = None;
        let mut last_ts = None;
        for item in source {
            let frame = match item {
                Ok(f) if last_ts.is_none_or(|t| f.timestamp() > t) => f,
                _ => {
                    malformed += 1;
                    continue;
                }
            };
            frames_in += 1;
            last_ts = Some(frame.timestamp());
            if let Pacing::Realtime { speed } = options.pacing {
                let t0 = *first_ts.get_or_insert(frame.timestamp());
                let offset = (frame.timestamp() - t0) as f64 / 1e6 / speed;
                let due = started + Duration::from_secs_f64(offset.max(0.0));
                if let Some(wait) = due.checked_duration_since(Instant::now()) {
                    thread::sleep(wait);
                }
            }
            let mut s = shared.lock().unwrap();
            if options.pacing == Pacing::Blocking {
                while !s.limiter.has_capacity() {
                    s = space.wait(s).unwrap();
                }
            }
            if let Offer::Admitted(item) = s.limiter.offer((frame, Instant::now())) {
                s.enqueue(item);
                work.notify_one();
            }
        }
        {
            let mut s = shared.lock().unwrap();
            s.limiter.finish();
            s.closed = true;
            work.notify_all();
        }
        collector.join().expect("collector thread")
    });

    let counters: LimiterCounters = shared.into_inner().unwrap().limiter.counters();
    debug_assert_eq!(counters.completed, emitted);
    let wall = started.elapsed().as_secs_f64();
    RunSummary {
        frames_in,
        malformed,
        admitted: counters.admitted,
        dropped: counters.dropped,
        completed: counters.completed,
        wall_seconds: wall,
        frames_per_second: if wall > 0.0 {
            counters.completed as f64 / wall
        } else {
            0.0
        },
        timing: samples.aggregate(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adl::load_atlas;
    use crate::fixture;

    fn program() -> AtlasProgram {
        load_atlas(fixture::SAMPLE_ATLAS_CSV).unwrap()
    }

    #[test]
    fn blocking_processes_everything_in_order() {
        let frames = fixture::jittered_stream(25, 16_000, 3);
        let mut seen = Vec::new();
        let summary = run_stream(
            frames.into_iter().map(Ok),
            &program(),
            &SemanticsConfig::default(),
            &StreamOptions {
                max_in_flight: 4,
                pacing: Pacing::Blocking,
                workers: Some(4),
            },
            |a| seen.push(a.timestamp),
        );
        assert_eq!(summary.completed, 25);
        assert_eq!(summary.dropped, 0);
        assert_eq!(seen.len(), 25);
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(summary.timing.end_to_end.samples, 25);
    }

    #[test]
    fn malformed_and_out_of_order_frames_are_skipped() {
        let frames = fixture::jittered_stream(3, 1000, 1);
        let mut input: Vec<Result<LandmarkFrame, FrameError>> =
            frames.iter().cloned().map(Ok).collect();
        input.insert(1, Err(FrameError::VertexCount(3)));
        input.push(Ok(frames[0].clone()));
        let summary = run_stream(
            input,
            &program(),
            &SemanticsConfig::default(),
            &StreamOptions::default(),
            |_| {},
        );
        assert_eq!(summary.malformed, 2);
        assert_eq!(summary.completed, 3);
    }

    #[test]
    fn unpaced_burst_drops_all_but_the_first() {
        let frames = fixture::jittered_stream(50, 1000, 9);
        let summary = run_stream(
            frames.into_iter().map(Ok),
            &program(),
            &SemanticsConfig::default(),
            &StreamOptions {
                max_in_flight: 1,
                pacing: Pacing::Unpaced,
                workers: None,
            },
            |_| {},
        );
        assert_eq!(summary.admitted + summary.dropped, 50);
        assert_eq!(summary.completed, summary.admitted);
        assert!(summary.admitted >= 1);
    }
}
