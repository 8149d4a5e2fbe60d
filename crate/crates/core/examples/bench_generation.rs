//! Time atlas setup and per-frame generation, then stream throughput.
//!
//! ```text
//! cargo run --release --example bench_generation
//! ```

use faceatlas::adl::load_atlas;
use faceatlas::fixture;
use faceatlas::geometry::SemanticsConfig;
use faceatlas::pipeline::{bench, run_stream, Pacing, StreamOptions};

fn main() {
    let cfg = SemanticsConfig::default();
    let frame = fixture::canonical_frame(0);
    let report = bench(fixture::BENCH_ATLAS_CSV, &frame, &cfg, 1000).unwrap();
    println!("{}", report.summary_line());

    let program = load_atlas(fixture::BENCH_ATLAS_CSV).unwrap();
    let frames = fixture::jittered_stream(600, 16_667, 1);
    let summary = run_stream(
        frames.into_iter().map(Ok),
        &program,
        &cfg,
        &StreamOptions {
            max_in_flight: 1,
            pacing: Pacing::Blocking,
            workers: None,
        },
        |_| {},
    );
    println!(
        "stream: {} frames in {:.3} s = {:.0} frames/s",
        summary.completed, summary.wall_seconds, summary.frames_per_second
    );
}
