//! Evaluate the sample atlas on the synthetic face, with and without a hair
//! mask, and print every point.
//!
//! ```text
//! cargo run --example evaluate_frame
//! ```

use faceatlas::adl::load_atlas;
use faceatlas::evaluator::evaluate_atlas;
use faceatlas::fixture;
use faceatlas::geometry::SemanticsConfig;

fn main() {
    let program = load_atlas(fixture::SAMPLE_ATLAS_CSV).expect("sample atlas compiles");
    let cfg = SemanticsConfig::default();
    let frame = fixture::rolled(&fixture::canonical_frame(0), 8.0);

    let atlas = evaluate_atlas(&program, &frame, &cfg);
    println!("uc = {:.5} (aligned units)", atlas.uc.unwrap_or(f64::NAN));
    println!("{:<6} {:<7} {:>9} {:>9}  conf", "id", "side", "px", "py");
    for p in &atlas.points {
        println!(
            "{:<6} {:<7} {:>9.2} {:>9.2}  {:?}",
            p.id.to_string(),
            format!("{:?}", p.side).to_lowercase(),
            p.position_px.x,
            p.position_px.y,
            p.confidence
        );
    }
    println!("\n{}", atlas.to_json());
}
