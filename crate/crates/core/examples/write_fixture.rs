//! Write synthetic frames as JSONL for the CLI.
//!
//! ```text
//! cargo run --example write_fixture -- data/fixture_frontal.jsonl [count]
//! cargo run -- eval --frame data/fixture_frontal.jsonl --svg face.svg
//! ```

use std::fs::File;
use std::io::BufWriter;

use faceatlas::fixture;
use faceatlas::geometry::write_frames;

fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| "fixture_frontal.jsonl".to_string());
    let count: usize = args.next().map_or(1, |c| c.parse().expect("frame count"));
    let frames = if count == 1 {
        vec![fixture::canonical_frame(0)]
    } else {
        fixture::jittered_stream(count, 33_333, 7)
    };
    write_frames(BufWriter::new(File::create(&path)?), &frames)?;
    println!("wrote {count} frame(s) to {path}");
    Ok(())
}
