use std::hint::black_box;
use std::time::Instant;

use serde::Serialize;

use super::timing::{micros, Aggregate, StageSamples, StageTiming};
use crate::adl::{load_atlas, AtlasError};
use crate::evaluator::evaluate_atlas_timed;
use crate::geometry::{LandmarkFrame, SemanticsConfig};

const WARMUP: usize = 50;

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub iterations: usize,
    pub definitions: usize,
    pub points: usize,
    /// Parsing plus compiling the atlas text.
    pub parse_compile: Aggregate,
    /// One `evaluate_atlas` call, end to end.
    pub evaluate: Aggregate,
    pub stages: StageTiming,
    /// An empty timed region, for scale.
    pub noop: Aggregate,
}

impl BenchReport {
    pub fn summary_line(&self) -> String {
        format!(
            "bench: {} defs / {} points, {} iterations: parse+compile median {:.3} ms, evaluate median {:.3} ms (p95 {:.3} ms)",
            self.definitions,
            self.points,
            self.iterations,
            self.parse_compile.median_us / 1e3,
            self.evaluate.median_us / 1e3,
            self.evaluate.p95_us / 1e3,
        )
    }
}

/// Times atlas setup and per-frame evaluation over `iterations` runs each,
/// after a short warm-up.
pub fn bench(
    atlas_text: &str,
    frame: &LandmarkFrame,
    cfg: &SemanticsConfig,
    iterations: usize,
) -> Result<BenchReport, AtlasError> {
    let program = load_atlas(atlas_text)?;
    let iterations = iterations.max(1);

    for _ in 0..WARMUP {
        black_box(load_atlas(black_box(atlas_text))?);
        black_box(evaluate_atlas_timed(&program, frame, cfg));
    }

    let mut setup = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let t = Instant::now();
        black_box(load_atlas(black_box(atlas_text))?);
        setup.push(micros(t.elapsed()));
    }

    let mut evals = Vec::with_capacity(iterations);
    let mut stages = StageSamples::default();
    for _ in 0..iterations {
        let t = Instant::now();
        let (atlas, d) = evaluate_atlas_timed(&program, black_box(frame), cfg);
        let e = t.elapsed();
        black_box(atlas);
        evals.push(micros(e));
        stages.push(&d, e);
    }

    let noop: Vec<f64> = (0..iterations)
        .map(|_| {
            let t = Instant::now();
            black_box(());
            micros(t.elapsed())
        })
        .collect();

    Ok(BenchReport {
        iterations,
        definitions: program.len(),
        points: program.instance_count(),
        parse_compile: Aggregate::from_micros(&setup),
        evaluate: Aggregate::from_micros(&evals),
        stages: stages.aggregate(),
        noop: Aggregate::from_micros(&noop),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    #[test]
    fn report_is_well_formed() {
        let r = bench(
            fixture::SAMPLE_ATLAS_CSV,
            &fixture::canonical_frame(0),
            &SemanticsConfig::default(),
            20,
        )
        .unwrap();
        assert_eq!(r.parse_compile.samples, 20);
        assert_eq!(r.evaluate.samples, 20);
        assert!(r.noop.median_us >= 0.0 && r.noop.median_us < 1e3);
        let v = serde_json::to_value(&r).unwrap();
        assert!(v["stages"]["evaluation"]["median_us"].is_number());
        assert!(r.summary_line().starts_with("bench: 6 defs / 10 points"));
    }
}
