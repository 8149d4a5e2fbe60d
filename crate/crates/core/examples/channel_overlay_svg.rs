//! Render the sample atlas as an SVG overlay with channel flow lines.
//!
//! ```text
//! cargo run --example channel_overlay_svg -- overlay.svg ST
//! ```

use faceatlas::adl::load_atlas;
use faceatlas::channels::{channel_polylines, parse_channels, select_channels, ChannelRegistry};
use faceatlas::evaluator::evaluate_atlas;
use faceatlas::fixture;
use faceatlas::geometry::SemanticsConfig;
use faceatlas::svg::render_overlay;

fn main() {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "overlay.svg".to_string());
    let codes: Vec<String> = args.collect();

    let program = load_atlas(fixture::SAMPLE_ATLAS_CSV).unwrap();
    let specs = parse_channels(fixture::SAMPLE_CHANNELS_CSV).unwrap();
    let registry = ChannelRegistry::bind(&specs, &program).unwrap();
    let selection = select_channels(&codes, &program);
    for d in &selection.diagnostics {
        eprintln!("warning: {d}");
    }

    let frame = fixture::canonical_frame(0);
    let atlas = evaluate_atlas(&program, &frame, &SemanticsConfig::default());
    for spec in registry.specs() {
        for line in channel_polylines(spec, &atlas) {
            println!("{} {:?}: {} points", spec.code, line.side, line.points.len());
        }
    }
    let doc = render_overlay(&atlas, &registry, &selection, frame.width(), frame.height());
    std::fs::write(&out, doc).expect("writable output");
    println!("wrote {out}");
}
