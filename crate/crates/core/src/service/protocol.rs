//! JSON messages exchanged over the websocket, one per text frame.

use serde::{Deserialize, Serialize};

use crate::adl::Side;
use crate::channels::Polyline;
use crate::evaluator::AtlasRecord;
use crate::geometry::FrameRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ClientMessage {
    Hello,
    Select { channels: Vec<String> },
    Frame(FrameRecord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ServerMessage {
    Config(ConfigMessage),
    Atlas(AtlasMessage),
    Dropped { ts: i64 },
    Ack(AckMessage),
    Error { reason: String },
}

impl ServerMessage {
    /// Timestamp of the frame this reply answers, if any.
    pub fn ts(&self) -> Option<i64> {
        match self {
            ServerMessage::Atlas(a) => Some(a.atlas.ts),
            ServerMessage::Dropped { ts } => Some(*ts),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigMessage {
    pub session: u64,
    pub max_in_flight: usize,
    pub points: Vec<PointInfo>,
    pub channels: Vec<ChannelInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointInfo {
    pub id: String,
    pub name: String,
    pub region: String,
    pub channel: String,
    pub sides: Vec<Side>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelInfo {
    pub code: String,
    pub name: String,
    pub color: String,
    pub flow: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasMessage {
    #[serde(flatten)]
    pub atlas: AtlasRecord,
    pub polylines: Vec<Polyline>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AckMessage {
    pub channels: Vec<String>,
    pub diagnostics: Vec<String>,
}
