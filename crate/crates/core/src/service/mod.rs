//! Websocket service: frames in, atlases out.

mod protocol;
mod server;
mod session;

pub use protocol::{
    AckMessage, AtlasMessage, ChannelInfo, ClientMessage, ConfigMessage, PointInfo, ServerMessage,
};
pub use server::{router, serve, ServiceOptions};
pub use session::{Engine, FrameDone, FrameJob, Output, Session};
