//! Pose-sweep accuracy experiment on the synthetic fixture.
//!
//! ```text
//! cargo run --example pose_sweep [bench]
//! ```

use faceatlas::adl::{load_atlas, Complexity};
use faceatlas::fixture;
use faceatlas::geometry::SemanticsConfig;
use faceatlas::pipeline::accuracy_experiment;

fn main() -> anyhow::Result<()> {
    let text = match std::env::args().nth(1).as_deref() {
        Some("bench") => fixture::BENCH_ATLAS_CSV,
        _ => fixture::SAMPLE_ATLAS_CSV,
    };
    let program = load_atlas(text)?;
    let report = accuracy_experiment(
        &program,
        &fixture::canonical_frame(0),
        &SemanticsConfig::default(),
    )?;

    println!("{:<8} {:>10} {:>10} {:>10}", "pose", "direct", "one-time", "multi");
    for pose in &report.poses {
        let cell = |c: Complexity| {
            pose.class(c)
                .mean_px
                .map_or("-".to_string(), |m| format!("{m:.4}"))
        };
        println!(
            "{:<8} {:>10} {:>10} {:>10}",
            format!("{:?}", pose.pose).to_lowercase(),
            cell(Complexity::Direct),
            cell(Complexity::OneTimeProportional),
            cell(Complexity::MultiTimeProportional),
        );
    }
    println!("ground truth: {}", report.ground_truth);
    Ok(())
}
