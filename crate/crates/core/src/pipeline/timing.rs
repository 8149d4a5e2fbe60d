use serde::{Deserialize, Serialize};

use crate::evaluator::StageDurations;

/// Median, 95th percentile (nearest rank) and mean of a sample, in
/// microseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub median_us: f64,
    pub p95_us: f64,
    pub mean_us: f64,
    pub samples: usize,
}

impl Aggregate {
    pub fn from_micros(samples: &[f64]) -> Self {
        if samples.is_empty() {
            return Self::default();
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        Self {
            median_us: median,
            p95_us: sorted[rank - 1],
            mean_us: sorted.iter().sum::<f64>() / n as f64,
            samples: n,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct StageSamples {
    hairline: Vec<f64>,
    alignment: Vec<f64>,
    evaluation: Vec<f64>,
    end_to_end: Vec<f64>,
}

impl StageSamples {
    pub fn push(&mut self, stages: &StageDurations, end_to_end: std::time::Duration) {
        self.hairline.push(micros(stages.hairline));
        self.alignment.push(micros(stages.alignment));
        self.evaluation.push(micros(stages.evaluation));
        self.end_to_end.push(micros(end_to_end));
    }

    pub fn len(&self) -> usize {
        self.end_to_end.len()
    }

    pub fn is_empty(&self) -> bool {
        self.end_to_end.is_empty()
    }

    pub fn aggregate(&self) -> StageTiming {
        StageTiming {
            hairline: Aggregate::from_micros(&self.hairline),
            alignment: Aggregate::from_micros(&self.alignment),
            evaluation: Aggregate::from_micros(&self.evaluation),
            end_to_end: Aggregate::from_micros(&self.end_to_end),
        }
    }
}

/// Per-stage timing summary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub hairline: Aggregate,
    pub alignment: Aggregate,
    pub evaluation: Aggregate,
    pub end_to_end: Aggregate,
}

pub(crate) fn micros(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e6
}
