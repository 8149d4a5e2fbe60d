//! Per-connection protocol state, free of any I/O. The transport feeds text
//! messages in, runs the returned jobs wherever it likes, and hands their
//! results back through [`Session::complete`].

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::protocol::{
    AckMessage, AtlasMessage, ChannelInfo, ClientMessage, ConfigMessage, PointInfo, ServerMessage,
};
use crate::adl::{AtlasProgram, Side};
use crate::channels::{registry_polylines, select_channels, ChannelRegistry, ChannelSelection};
use crate::evaluator::evaluate_atlas;
use crate::geometry::{LandmarkFrame, SemanticsConfig};
use crate::pipeline::{FlowLimiter, LimiterCounters, Offer};

/// Immutable state shared by every session.
#[derive(Debug)]
pub struct Engine {
    pub program: AtlasProgram,
    pub registry: ChannelRegistry,
    pub semantics: SemanticsConfig,
}

impl Engine {
    pub fn new(program: AtlasProgram, registry: ChannelRegistry, semantics: SemanticsConfig) -> Self {
        Self {
            program,
            registry,
            semantics,
        }
    }

    fn config(&self, session: u64, max_in_flight: usize) -> ConfigMessage {
        ConfigMessage {
            session,
            max_in_flight,
            points: self
                .program
                .definitions()
                .iter()
                .map(|d| PointInfo {
                    id: d.id.to_string(),
                    name: d.name_en.clone(),
                    region: d.region.clone(),
                    channel: d.id.channel().to_string(),
                    sides: if d.is_symmetric {
                        vec![Side::Left, Side::Right]
                    } else {
                        vec![Side::Center]
                    },
                })
                .collect(),
            channels: self
                .registry
                .specs()
                .iter()
                .map(|s| ChannelInfo {
                    code: s.code.clone(),
                    name: s.display_name.clone(),
                    color: s.color_hex(),
                    flow: s.flow.iter().map(ToString::to_string).collect(),
                })
                .collect(),
        }
    }
}

/// An admitted frame, ready to evaluate. `run` is pure and may execute on
/// any thread.
#[derive(Debug)]
pub struct FrameJob {
    engine: Arc<Engine>,
    frame: LandmarkFrame,
    selection: ChannelSelection,
}

impl FrameJob {
    pub fn timestamp(&self) -> i64 {
        self.frame.timestamp()
    }

    pub fn run(self) -> FrameDone {
        let e = &self.engine;
        let atlas = evaluate_atlas(&e.program, &self.frame, &e.semantics);
        let polylines = registry_polylines(&e.registry, &self.selection, &atlas);
        let atlas = self.selection.filter(&atlas);
        FrameDone {
            ts: atlas.timestamp,
            message: ServerMessage::Atlas(AtlasMessage {
                atlas: atlas.to_record(),
                polylines,
            }),
        }
    }
}

#[derive(Debug)]
pub struct FrameDone {
    ts: i64,
    message: ServerMessage,
}

#[derive(Debug)]
pub enum Output {
    Send(ServerMessage),
    Run(FrameJob),
}

pub struct Session {
    id: u64,
    engine: Arc<Engine>,
    selection: ChannelSelection,
    limiter: FlowLimiter<LandmarkFrame>,
    last_ts: Option<i64>,
    in_flight: BTreeSet<i64>,
    held: BTreeMap<i64, ServerMessage>,
    errors: u64,
}

impl Session {
    pub fn new(id: u64, engine: Arc<Engine>, max_in_flight: usize) -> Self {
        let none: [&str; 0] = [];
        let selection = select_channels(&none, &engine.program);
        Self {
            id,
            engine,
            selection,
            limiter: FlowLimiter::new(max_in_flight),
            last_ts: None,
            in_flight: BTreeSet::new(),
            held: BTreeMap::new(),
            errors: 0,
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn counters(&self) -> LimiterCounters {
        self.limiter.counters()
    }

    pub fn errors(&self) -> u64 {
        self.errors
    }

    pub fn handle_text(&mut self, text: &str) -> Vec<Output> {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => self.handle_message(msg),
            Err(e) => self.error(format!("malformed message: {e}")),
        }
    }

    pub fn handle_message(&mut self, msg: ClientMessage) -> Vec<Output> {
        match msg {
            ClientMessage::Hello => vec![Output::Send(ServerMessage::Config(
                self.engine.config(self.id, self.limiter.max_in_flight()),
            ))],
            ClientMessage::Select { channels } => {
                self.selection = select_channels(&channels, &self.engine.program);
                vec![Output::Send(ServerMessage::Ack(AckMessage {
                    channels: self.selection.channels().map(String::from).collect(),
                    diagnostics: self
                        .selection
                        .diagnostics
                        .iter()
                        .map(ToString::to_string)
                        .collect(),
                }))]
            }
            ClientMessage::Frame(record) => {
                let frame = match LandmarkFrame::from_record(record) {
                    Ok(f) => f,
                    Err(e) => return self.error(format!("bad frame: {e}")),
                };
                if self.last_ts.is_some_and(|t| frame.timestamp() <= t) {
                    return self.error(format!(
                        "frame ts {} is not after {}",
                        frame.timestamp(),
                        self.last_ts.unwrap_or_default()
                    ));
                }
                self.last_ts = Some(frame.timestamp());
                match self.limiter.offer(frame) {
                    Offer::Admitted(f) => vec![self.start(f)],
                    Offer::Waiting { displaced: None } => Vec::new(),
                    Offer::Waiting {
                        displaced: Some(old),
                    } => {
                        let ts = old.timestamp();
                        self.held.insert(ts, ServerMessage::Dropped { ts });
                        self.flush()
                    }
                }
            }
        }
    }

    /// Accepts a finished job. Replies are released in timestamp order.
    pub fn complete(&mut self, done: FrameDone) -> Vec<Output> {
        self.in_flight.remove(&done.ts);
        self.held.insert(done.ts, done.message);
        let next = self.limiter.complete();
        let mut out = self.flush();
        if let Some(f) = next {
            out.push(self.start(f));
        }
        out
    }

    fn start(&mut self, frame: LandmarkFrame) -> Output {
        self.in_flight.insert(frame.timestamp());
        Output::Run(FrameJob {
            engine: Arc::clone(&self.engine),
            frame,
            selection: self.selection.clone(),
        })
    }

    fn flush(&mut self) -> Vec<Output> {
        let bound = self.in_flight.first().copied().unwrap_or(i64::MAX);
        let ready: Vec<i64> = self.held.range(..bound).map(|(&t, _)| t).collect();
        ready
            .into_iter()
            .filter_map(|t| self.held.remove(&t))
            .map(Output::Send)
            .collect()
    }

    fn error(&mut self, reason: String) -> Vec<Output> {
        self.errors += 1;
        vec![Output::Send(ServerMessage::Error { reason })]
    }
}
