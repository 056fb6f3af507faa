//! Order statistics used by the sweep summaries.

use serde::{Deserialize, Serialize};

/// Nearest-rank percentile: the smallest value with at least `q` percent of
/// the sample at or below it. `q = 0` yields the minimum.
pub fn nearest_rank(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() || !(0.0..=100.0).contains(&q) {
        return None;
    }
    let rank = ((q / 100.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

impl Quartiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Self {
            median: nearest_rank(&sorted, 50.0)?,
            q25: nearest_rank(&sorted, 25.0)?,
            q75: nearest_rank(&sorted, 75.0)?,
        })
    }
}
