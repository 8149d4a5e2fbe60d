//! Streaming, admission control, timing, pose sweep and benchmarks.

mod bench;
mod limiter;
mod pose;
mod stream;
mod timing;

pub use bench::{bench, BenchReport};
pub use limiter::{
    simulate_stream, FlowLimiter, LimiterCounters, Offer, SimEvent, SimEventKind, SimReport,
};
pub use pose::{
    accuracy_experiment, pose_transform, surface_depth, ClassError, PointError, Pose,
    PoseResult, PoseRotation, PoseSweepReport, RotationAxis, POSE_DEGREES,
};
pub use stream::{run_stream, Pacing, RunSummary, StreamOptions};
pub use timing::{Aggregate, StageSamples, StageTiming};
